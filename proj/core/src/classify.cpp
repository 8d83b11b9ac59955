#include "ltpc/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ltpc/error.hpp"

namespace ltpc::classify {

namespace {

// splitmix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void fill_uniform(std::vector<double>& v, double scale, std::mt19937_64& rng) {
  if (scale == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    return;
  }
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (double& x : v) x = dist(rng);
}

std::vector<double> hidden_pre(const ModelParams& m, std::span<const double> x) {
  std::vector<double> h(m.body_b);
  for (std::size_t j = 0; j < m.hidden_dim; ++j) {
    const double* row = &m.body_w[j * m.input_dim];
    double s = 0.0;
    for (std::size_t f = 0; f < m.input_dim; ++f) s += row[f] * x[f];
    h[j] += s;
  }
  return h;
}

std::vector<double> head_out(const ModelParams& m, std::span<const double> h) {
  std::vector<double> z(m.head_b);
  for (std::size_t c = 0; c < m.n_classes; ++c) {
    const double* row = &m.head_w[c * m.hidden_dim];
    double s = 0.0;
    for (std::size_t j = 0; j < m.hidden_dim; ++j) s += row[j] * h[j];
    z[c] += s;
  }
  return z;
}

double log_sum_exp(std::span<const double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - mx);
  return mx + std::log(s);
}

void check_input(const ModelParams& m, std::span<const double> feature) {
  if (feature.size() != m.input_dim)
    throw Error(Errc::dimension_mismatch, "feature dimension " + std::to_string(feature.size()) +
                                              ", model expects " + std::to_string(m.input_dim));
}

void check_batch(const ModelParams& m, std::span<const Example> batch) {
  for (const Example& e : batch) {
    check_input(m, e.feature);
    if (e.label >= m.n_classes)
      throw Error(Errc::label_out_of_range, "label " + std::to_string(e.label) + " with K=" +
                                                std::to_string(m.n_classes));
  }
}

}  // namespace

std::size_t ModelParams::parameter_count() const noexcept {
  return body_w.size() + body_b.size() + head_w.size() + head_b.size();
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || epochs < 0 || batch_size == 0 || hidden_width == 0 ||
      weight_scale < 0.0)
    throw Error(Errc::bad_parameter, "invalid training configuration");
}

ModelParams init_model(std::size_t F, std::size_t H, std::size_t K, double weight_scale,
                       std::uint64_t seed) {
  if (F == 0 || H == 0 || K == 0) throw Error(Errc::bad_parameter, "model dimensions must be >= 1");
  ModelParams m;
  m.input_dim = F;
  m.hidden_dim = H;
  m.n_classes = K;
  m.body_w.resize(H * F);
  m.body_b.assign(H, 0.0);
  m.head_w.resize(K * H);
  m.head_b.assign(K, 0.0);
  std::mt19937_64 rng(seed);
  fill_uniform(m.body_w, weight_scale, rng);
  fill_uniform(m.head_w, weight_scale, rng);
  return m;
}

std::vector<double> softmax(std::span<const double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) s += (p[i] = std::exp(z[i] - mx));
  for (double& v : p) v /= s;
  return p;
}

std::vector<double> logits(const ModelParams& m, std::span<const double> feature) {
  check_input(m, feature);
  std::vector<double> h = hidden_pre(m, feature);
  for (double& v : h) v = std::max(0.0, v);
  return head_out(m, h);
}

Prediction predict(const ModelParams& m, std::span<const double> feature) {
  return Prediction{softmax(logits(m, feature))};
}

double loss(const ModelParams& m, std::span<const Example> batch) {
  check_batch(m, batch);
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const Example& e : batch) {
    const std::vector<double> z = logits(m, e.feature);
    total += log_sum_exp(z) - z[e.label];
  }
  return total / static_cast<double>(batch.size());
}

LossAndGradient loss_and_gradient(const ModelParams& m, std::span<const Example> batch) {
  check_batch(m, batch);
  const std::size_t F = m.input_dim, H = m.hidden_dim, K = m.n_classes;
  LossAndGradient out;
  Gradient& g = out.grad;
  g.body_w.assign(H * F, 0.0);
  g.body_b.assign(H, 0.0);
  g.head_w.assign(K * H, 0.0);
  g.head_b.assign(K, 0.0);
  if (batch.empty()) return out;

  std::vector<double> dh(H);
  for (const Example& e : batch) {
    const std::vector<double> pre = hidden_pre(m, e.feature);
    std::vector<double> h(pre);
    for (double& v : h) v = std::max(0.0, v);
    const std::vector<double> z = head_out(m, h);
    out.loss += log_sum_exp(z) - z[e.label];

    std::vector<double> dz = softmax(z);
    dz[e.label] -= 1.0;

    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < K; ++c) {
      g.head_b[c] += dz[c];
      const double* wrow = &m.head_w[c * H];
      double* grow = &g.head_w[c * H];
      for (std::size_t j = 0; j < H; ++j) {
        grow[j] += dz[c] * h[j];
        dh[j] += wrow[j] * dz[c];
      }
    }
    for (std::size_t j = 0; j < H; ++j) {
      if (pre[j] <= 0.0) continue;
      g.body_b[j] += dh[j];
      double* grow = &g.body_w[j * F];
      for (std::size_t f = 0; f < F; ++f) grow[f] += dh[j] * e.feature[f];
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (auto* v : {&g.body_w, &g.body_b, &g.head_w, &g.head_b})
    for (double& x : *v) x *= inv;
  return out;
}

std::vector<Example> examples_from(const TrainingSet& set, const PlacePartition& partition) {
  const std::vector<int> labels = partition.labels(set.size());
  std::vector<Example> out;
  out.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (labels[i] < 0)
      throw Error(Errc::schema, "image " + std::to_string(i) + " missing from partition");
    out.push_back(Example{set.images[i].feature, static_cast<std::size_t>(labels[i])});
  }
  return out;
}

TrainResult descend(ModelParams start, std::span<const Example> data, const TrainConfig& cfg) {
  cfg.validate();
  check_batch(start, data);
  TrainResult result{std::move(start), {}, 0.0};
  ModelParams& m = result.model;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(mix_seed(cfg.seed, 2));
  const std::size_t batch = cfg.full_batch ? std::max<std::size_t>(data.size(), 1) : cfg.batch_size;

  std::vector<Example> mb;
  for (int epoch = 0; epoch < cfg.epochs && !data.empty(); ++epoch) {
    if (!cfg.full_batch) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t lo = 0; lo < order.size(); lo += batch) {
      const std::size_t hi = std::min(order.size(), lo + batch);
      mb.clear();
      for (std::size_t i = lo; i < hi; ++i) mb.push_back(data[order[i]]);
      const LossAndGradient lg = loss_and_gradient(m, mb);
      auto step = [&](std::vector<double>& p, const std::vector<double>& d) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * d[i];
      };
      step(m.body_w, lg.grad.body_w);
      step(m.body_b, lg.grad.body_b);
      step(m.head_w, lg.grad.head_w);
      step(m.head_b, lg.grad.head_b);
    }
    result.epoch_loss.push_back(loss(m, data));
  }
  result.final_loss = result.epoch_loss.empty() ? loss(m, data) : result.epoch_loss.back();
  return result;
}

namespace {

void require_every_class(std::span<const Example> data, std::size_t n_classes) {
  std::vector<std::size_t> counts(n_classes, 0);
  for (const Example& e : data) {
    if (e.label >= n_classes)
      throw Error(Errc::label_out_of_range, "label " + std::to_string(e.label) + " with K=" +
                                                std::to_string(n_classes));
    ++counts[e.label];
  }
  for (std::size_t c = 0; c < n_classes; ++c)
    if (counts[c] == 0)
      throw Error(Errc::empty_input, "class " + std::to_string(c) + " has no training examples");
}

}  // namespace

TrainResult train(std::span<const Example> data, std::size_t n_classes, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error(Errc::empty_input, "no training examples");
  require_every_class(data, n_classes);
  ModelParams m = init_model(data.front().feature.size(), cfg.hidden_width, n_classes,
                             cfg.weight_scale, mix_seed(cfg.seed, 0));
  return descend(std::move(m), data, cfg);
}

TrainResult fine_tune(const ModelParams& base, std::span<const Example> data,
                      std::size_t n_classes, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw Error(Errc::empty_input, "no training examples");
  for (const Example& e : data) check_input(base, e.feature);
  require_every_class(data, n_classes);

  ModelParams m;
  m.input_dim = base.input_dim;
  m.hidden_dim = base.hidden_dim;
  m.n_classes = n_classes;
  m.body_w = base.body_w;
  m.body_b = base.body_b;
  m.head_w.resize(n_classes * base.hidden_dim);
  m.head_b.assign(n_classes, 0.0);
  std::mt19937_64 rng(mix_seed(cfg.seed, 1));
  fill_uniform(m.head_w, cfg.weight_scale, rng);
  return descend(std::move(m), data, cfg);
}

double accuracy(const ModelParams& m, std::span<const Example> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const Example& e : data) {
    const std::vector<double> z = logits(m, e.feature);
    const auto best = static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
    hits += best == e.label;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

PrecomputedPredictions PrecomputedPredictions::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open predictions file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

PrecomputedPredictions PrecomputedPredictions::parse(const std::string& csv_text) {
  std::map<std::string, std::map<std::size_t, double>> raw;
  std::istringstream in(csv_text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("query_id", 0) == 0) continue;
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      throw Error(Errc::schema, "line " + std::to_string(line_no) + ": expected 3 fields");
    const std::string id = line.substr(0, c1);
    long long cls = 0;
    double prob = 0.0;
    try {
      std::size_t used = 0;
      const std::string cls_s = line.substr(c1 + 1, c2 - c1 - 1);
      cls = std::stoll(cls_s, &used);
      if (used != cls_s.size()) throw std::invalid_argument("class");
      const std::string prob_s = line.substr(c2 + 1);
      prob = std::stod(prob_s, &used);
      if (used != prob_s.size()) throw std::invalid_argument("prob");
    } catch (const std::exception&) {
      throw Error(Errc::schema, "line " + std::to_string(line_no) + ": unparsable number");
    }
    if (id.empty() || cls < 0 || !std::isfinite(prob) || prob < 0.0 || prob > 1.0)
      throw Error(Errc::schema, "line " + std::to_string(line_no) + ": invalid values");
    if (!raw[id].emplace(static_cast<std::size_t>(cls), prob).second)
      throw Error(Errc::schema, "duplicate class " + std::to_string(cls) + " for query " + id);
  }

  PrecomputedPredictions out;
  for (auto& [id, classes] : raw) {
    const std::size_t K = classes.rbegin()->first + 1;
    std::vector<double> probs(K, 0.0);
    double sum = 0.0;
    for (auto [c, p] : classes) {
      probs[c] = p;
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-3)
      throw Error(Errc::schema, "probabilities of query " + id + " sum to " + std::to_string(sum));
    out.rows_.emplace(id, std::move(probs));
  }
  return out;
}

Prediction PrecomputedPredictions::predict(const std::string& query_id) const {
  const auto it = rows_.find(query_id);
  if (it == rows_.end()) throw Error(Errc::missing_query, "no stored prediction for '" + query_id + "'");
  return Prediction{it->second};
}

}  // namespace ltpc::classify
