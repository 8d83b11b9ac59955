#include "ltpc/state_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "ltpc/error.hpp"

namespace ltpc {

namespace {

constexpr char kMagic[8] = {'L', 'T', 'P', 'C', 'S', 'T', 'A', 'T'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void viewpoint(const Viewpoint& v) {
    f64(v.x);
    f64(v.y);
    f64(v.theta);
  }

  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size) : p_(data), end_(data + size) {}

  std::uint8_t u8() {
    need(1);
    return *p_++;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(*p_++) << (8 * b);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(*p_++) << (8 * b);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    if (n > remaining() / 8) throw Error(Errc::truncated, "state array length exceeds payload");
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  Viewpoint viewpoint() {
    Viewpoint v;
    v.x = f64();
    v.y = f64();
    v.theta = f64();
    return v;
  }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw Error(Errc::truncated, "state payload ends early");
  }
  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

void write_model(Writer& w, const classify::ModelParams& m) {
  w.u64(m.input_dim);
  w.u64(m.hidden_dim);
  w.u64(m.n_classes);
  w.doubles(m.body_w);
  w.doubles(m.body_b);
  w.doubles(m.head_w);
  w.doubles(m.head_b);
}

classify::ModelParams read_model(Reader& r) {
  classify::ModelParams m;
  m.input_dim = r.u64();
  m.hidden_dim = r.u64();
  m.n_classes = r.u64();
  m.body_w = r.doubles();
  m.body_b = r.doubles();
  m.head_w = r.doubles();
  m.head_b = r.doubles();
  if (m.body_w.size() != m.input_dim * m.hidden_dim || m.body_b.size() != m.hidden_dim ||
      m.head_w.size() != m.hidden_dim * m.n_classes || m.head_b.size() != m.n_classes)
    throw Error(Errc::schema, "model arrays disagree with stored dimensions");
  return m;
}

void write_partition(Writer& w, const PlacePartition& p) {
  w.i32(p.source_season);
  w.u8(static_cast<std::uint8_t>(p.method));
  w.u64(p.classes.size());
  for (const PlaceClass& c : p.classes) {
    w.i32(c.class_id);
    w.u64(c.keyframe);
    w.u64(c.member_count);
    w.u64(c.members.size());
    for (std::size_t m : c.members) w.u64(m);
    w.viewpoint(c.keyframe_viewpoint);
    w.viewpoint(c.representative);
  }
}

PlacePartition read_partition(Reader& r) {
  PlacePartition p;
  p.source_season = r.i32();
  const std::uint8_t method = r.u8();
  if (method > static_cast<std::uint8_t>(PartitionMethod::incremental))
    throw Error(Errc::schema, "unknown partition method tag");
  p.method = static_cast<PartitionMethod>(method);
  const std::uint64_t n = r.u64();
  if (n > r.remaining()) throw Error(Errc::truncated, "class count exceeds payload");
  p.classes.resize(n);
  for (PlaceClass& c : p.classes) {
    c.class_id = r.i32();
    c.keyframe = r.u64();
    c.member_count = r.u64();
    const std::uint64_t n_members = r.u64();
    if (n_members > r.remaining() / 8) throw Error(Errc::truncated, "member list exceeds payload");
    c.members.resize(n_members);
    for (std::size_t& m : c.members) m = r.u64();
    c.keyframe_viewpoint = r.viewpoint();
    c.representative = r.viewpoint();
  }
  return p;
}

}  // namespace

std::vector<std::uint8_t> serialize_state(const EnsembleState& state) {
  Writer payload;
  payload.i32(state.mission);
  payload.i32(state.capacity);
  write_model(payload, state.base);
  payload.u64(state.classifiers.size());
  for (const ClassifierRecord& rec : state.classifiers) {
    const auto bits = rec.history.bits();
    payload.u64(bits.size());
    for (auto b : bits) payload.u8(b);
    write_partition(payload, rec.partition);
    write_model(payload, rec.model);
  }

  const std::vector<std::uint8_t>& body = payload.bytes();
  Writer out;
  for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
  out.u32(kStateFormatVersion);
  out.u64(body.size());
  out.bytes().insert(out.bytes().end(), body.begin(), body.end());
  out.u32(static_cast<std::uint32_t>(
      crc32(0L, body.data(), static_cast<uInt>(body.size()))));
  return std::move(out.bytes());
}

EnsembleState deserialize_state(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kStateHeaderBytes || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw Error(Errc::header_mismatch, "not an ensemble state file");
  Reader head(bytes.data() + 8, 12);
  const std::uint32_t version = head.u32();
  if (version != kStateFormatVersion)
    throw Error(Errc::version_mismatch, "state format version " + std::to_string(version) +
                                            ", expected " + std::to_string(kStateFormatVersion));
  const std::uint64_t length = head.u64();
  if (length != bytes.size() - kStateHeaderBytes)
    throw Error(Errc::truncated, "state payload length does not match file size");
  const std::uint8_t* body = bytes.data() + 20;
  Reader tail(body + length, 4);
  const std::uint32_t stored = tail.u32();
  const auto actual = static_cast<std::uint32_t>(crc32(0L, body, static_cast<uInt>(length)));
  if (stored != actual) throw Error(Errc::checksum, "state checksum mismatch");

  Reader r(body, length);
  EnsembleState s;
  s.mission = r.i32();
  s.capacity = r.i32();
  s.base = read_model(r);
  const std::uint64_t n = r.u64();
  if (n > r.remaining()) throw Error(Errc::truncated, "slot count exceeds payload");
  s.classifiers.resize(n);
  for (ClassifierRecord& rec : s.classifiers) {
    const std::uint64_t len = r.u64();
    if (len > r.remaining()) throw Error(Errc::truncated, "history exceeds payload");
    std::vector<std::uint8_t> bits(len);
    for (auto& b : bits) b = r.u8();
    rec.history = RetrainHistory(std::move(bits));
    rec.partition = read_partition(r);
    rec.model = read_model(r);
  }
  if (r.remaining() != 0) throw Error(Errc::schema, "trailing bytes in state payload");
  return s;
}

void save_state(const EnsembleState& state, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_state(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write state file '" + path + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for '" + path + "'");
}

EnsembleState load_state(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open state file '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_state(bytes);
}

}  // namespace ltpc
