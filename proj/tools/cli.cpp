#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ltpc/error.hpp"
#include "ltpc/placedef.hpp"
#include "ltpc/report.hpp"
#include "ltpc/sched.hpp"
#include "ltpc/state_io.hpp"

namespace ltpc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory '" + dir + "': " + ec.message());
}

data::SynthConfig synth_from_json(const json& j) {
  data::SynthConfig c;
  c.n_places = j.value("n_places", c.n_places);
  c.loop_length = j.value("loop_length", c.loop_length);
  c.images_per_place = j.value("images_per_place", c.images_per_place);
  c.feature_dim = j.value("feature_dim", c.feature_dim);
  c.place_signal = j.value("place_signal", c.place_signal);
  c.season_drift = j.value("season_drift", c.season_drift);
  c.noise = j.value("noise", c.noise);
  c.n_seasons = j.value("n_seasons", c.n_seasons);
  c.seed = j.value("seed", c.seed);
  c.drift_persistence = j.value("drift_persistence", c.drift_persistence);
  c.place_extent = j.value("place_extent", c.place_extent);
  c.pose_jitter = j.value("pose_jitter", c.pose_jitter);
  c.validate();
  return c;
}

json synth_to_json(const data::SynthConfig& c) {
  return {{"n_places", c.n_places},     {"loop_length", c.loop_length},
          {"images_per_place", c.images_per_place},
          {"feature_dim", c.feature_dim}, {"place_signal", c.place_signal},
          {"season_drift", c.season_drift}, {"noise", c.noise},
          {"n_seasons", c.n_seasons},   {"seed", c.seed},
          {"drift_persistence", c.drift_persistence},
          {"place_extent", c.place_extent}, {"pose_jitter", c.pose_jitter}};
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const json& j, const std::string& base_dir) {
  ExperimentSpec s;
  try {
    if (j.contains("synthetic")) s.synthetic = synth_from_json(j.at("synthetic"));
    for (const auto& d : j.value("datasets", json::array()))
      s.datasets.push_back(resolve(base_dir, d.get<std::string>()));
    if (j.contains("test_dataset")) s.test_dataset = resolve(base_dir, j.at("test_dataset"));
    s.protocol = missions::parse_test_protocol(j.value("protocol", std::string{"next-season"}));

    missions::MissionConfig& m = s.mission;
    if (j.contains("strategy")) {
      const json& st = j.at("strategy");
      m.strategy.kind = sched::parse_strategy(st.value("kind", std::string{"ST2"}));
      m.strategy.n_bar = st.value("n_bar", m.strategy.n_bar);
      m.strategy.k_bar = st.value("k_bar", m.strategy.k_bar);
      m.strategy.st3_filter_fusion = st.value("st3_filter_fusion", m.strategy.st3_filter_fusion);
    }
    if (j.contains("partition")) {
      const json& p = j.at("partition");
      m.partition.method = parse_partition_method(p.value("method", std::string{"location"}));
      m.partition.t_d = p.value("t_d", m.partition.t_d);
      m.partition.k = p.value("k", m.partition.k);
      m.partition.kmeans_iters = p.value("kmeans_iters", m.partition.kmeans_iters);
      m.partition.thresholds.pos_max = p.value("pos_max", m.partition.thresholds.pos_max);
      m.partition.thresholds.ang_max = p.value("ang_max", m.partition.thresholds.ang_max);
      m.partition.thresholds.feat_max = p.value("feat_max", m.partition.thresholds.feat_max);
    }
    if (j.contains("train")) {
      const json& t = j.at("train");
      m.train.learning_rate = t.value("learning_rate", m.train.learning_rate);
      m.train.epochs = t.value("epochs", m.train.epochs);
      m.train.batch_size = t.value("batch_size", m.train.batch_size);
      m.train.hidden_width = t.value("hidden_width", m.train.hidden_width);
      m.train.weight_scale = t.value("weight_scale", m.train.weight_scale);
    }
    m.fusion_x = j.value("fusion_x", m.fusion_x);
    m.capacity = j.value("capacity", m.capacity);
    if (j.contains("error_thresholds"))
      m.error_thresholds = j.at("error_thresholds").get<std::vector<double>>();
    m.mode = missions::parse_success_mode(j.value("mode", std::string{"rank1"}));
    s.out_dir = j.value("out", s.out_dir);
    s.apply_seed(j.value("seed", std::uint64_t{0}));
  } catch (const json::exception& e) {
    throw Error(Errc::bad_parameter, std::string("experiment spec: ") + e.what());
  }
  if (!s.synthetic && s.datasets.empty())
    throw Error(Errc::bad_parameter, "experiment spec needs a 'synthetic' block or 'datasets'");
  return s;
}

json ExperimentSpec::to_json() const {
  const missions::MissionConfig& m = mission;
  json j = {
      {"seed", seed},
      {"protocol", missions::to_string(protocol)},
      {"strategy",
       {{"kind", sched::to_string(m.strategy.kind)},
        {"n_bar", m.strategy.n_bar},
        {"k_bar", m.strategy.k_bar},
        {"st3_filter_fusion", m.strategy.st3_filter_fusion}}},
      {"partition",
       {{"method", to_string(m.partition.method)},
        {"t_d", m.partition.t_d},
        {"k", m.partition.k},
        {"kmeans_iters", m.partition.kmeans_iters},
        {"pos_max", m.partition.thresholds.pos_max},
        {"ang_max", m.partition.thresholds.ang_max},
        {"feat_max", m.partition.thresholds.feat_max}}},
      {"train",
       {{"learning_rate", m.train.learning_rate},
        {"epochs", m.train.epochs},
        {"batch_size", m.train.batch_size},
        {"hidden_width", m.train.hidden_width},
        {"weight_scale", m.train.weight_scale}}},
      {"fusion_x", m.fusion_x},
      {"capacity", m.capacity},
      {"error_thresholds", m.error_thresholds},
      {"mode", missions::to_string(m.mode)},
      {"out", out_dir},
  };
  if (synthetic) j["synthetic"] = synth_to_json(*synthetic);
  if (!datasets.empty()) j["datasets"] = datasets;
  if (!test_dataset.empty()) j["test_dataset"] = test_dataset;
  return j;
}

void ExperimentSpec::apply_seed(std::uint64_t s) {
  seed = s;
  if (synthetic) synthetic->seed = s;
  mission.partition.seed = s;
  mission.train.seed = s;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::schema, "experiment spec '" + path + "': " + e.what());
  }
  return ExperimentSpec::from_json(j, fs::path(path).parent_path().string());
}

RunFiles cmd_run(const ExperimentSpec& spec) {
  std::vector<TrainingSet> seasons;
  TrainingSet test;
  if (spec.synthetic) {
    seasons = data::synth_generate(*spec.synthetic);
  } else {
    for (const std::string& m : spec.datasets) seasons.push_back(data::load_dataset(data::load_manifest(m)));
  }
  if (!spec.test_dataset.empty()) {
    test = data::load_dataset(data::load_manifest(spec.test_dataset));
  } else {
    if (seasons.size() < 2)
      throw Error(Errc::bad_parameter, "a cross-season run needs at least two seasons");
    test = std::move(seasons.back());
    seasons.pop_back();
  }

  const missions::RunOutcome run =
      missions::run_missions(seasons, &test, spec.mission, spec.protocol);

  const std::string strategy = spec.mission.strategy.describe();
  const std::string upd(to_string(spec.mission.partition.method));
  const std::string mode(missions::to_string(spec.mission.mode));
  std::vector<report::ResultRow> rows;
  json per_mission = json::array();
  for (const missions::MissionOutcome& m : run.missions) {
    json success = json::object();
    for (std::size_t e = 0; e < spec.mission.error_thresholds.size(); ++e) {
      rows.push_back(report::ResultRow{m.mission, strategy, upd, spec.mission.error_thresholds[e],
                                       mode, m.success[e]});
      success[std::to_string(static_cast<int>(spec.mission.error_thresholds[e]))] = m.success[e];
    }
    std::vector<std::string> bits;
    for (const auto& h : m.schedule) bits.push_back(h.to_string());
    per_mission.push_back({{"mission", m.mission},
                           {"schedule", bits},
                           {"n_classes", m.n_classes},
                           {"fused_slots", m.fused_slots},
                           {"success_ratio", success}});
  }

  ensure_dir(spec.out_dir);
  RunFiles files{join(spec.out_dir, "results.csv"),  join(spec.out_dir, "schedule.csv"),
                 join(spec.out_dir, "schedule.svg"), join(spec.out_dir, "success.svg"),
                 join(spec.out_dir, "summary.json"), join(spec.out_dir, "state.bin")};
  const sched::Schedule schedule = run.final_state.schedule();
  report::write_text(files.results_csv, report::results_csv(rows));
  report::write_text(files.schedule_csv, report::schedule_csv(schedule));
  report::write_text(files.schedule_svg, report::schedule_svg(schedule, "retraining schedule " + strategy));
  report::write_text(files.success_svg,
                     report::success_svg(rows, "success ratio, " + strategy + ", UPD " + upd));
  save_state(run.final_state, files.state_bin);

  json summary = {{"spec", spec.to_json()},
                  {"missions", per_mission},
                  {"state_bytes", serialize_state(run.final_state).size()}};
  report::write_text(files.summary_json, summary.dump(2) + "\n");
  return files;
}

PlacedefFiles cmd_placedef(const TrainingSet& set, const placedef::PartitionConfig& cfg,
                           const std::string& out_dir) {
  if (set.images.empty()) throw Error(Errc::empty_input, "dataset '" + set.label + "' is empty");
  set.validate();
  PlacedefFiles files;
  PlacePartition partition;
  std::vector<placedef::Insertion> log;
  if (cfg.method == PartitionMethod::incremental) {
    placedef::IncrementalResult r = placedef::partition_incremental_traced(set, cfg);
    partition = std::move(r.partition);
    log = std::move(r.log);
  } else {
    partition = placedef::define_places(set, cfg);
  }
  partition.validate(set.size());

  ensure_dir(out_dir);
  files.partition_csv = join(out_dir, "partition.csv");
  files.partition_svg = join(out_dir, "partition.svg");
  files.n_classes = partition.size();
  report::write_text(files.partition_csv, report::partition_csv(partition, set.size()));
  report::write_text(files.partition_svg,
                     report::partition_svg(set, partition, set.label + ", UPD " +
                                                               std::string(to_string(cfg.method))));
  if (!log.empty()) {
    files.insertion_log_csv = join(out_dir, "insertions.csv");
    report::write_text(files.insertion_log_csv, report::insertion_log_csv(log));
  }
  return files;
}

ScheduleFiles cmd_schedule(const sched::StrategyConfig& strategy, int n_missions, int capacity,
                           const std::string& out_dir) {
  const std::vector<sched::ScheduleDecision> plan = sched::plan(strategy, n_missions, capacity);
  const sched::Schedule& final_schedule = plan.back().schedule;
  ensure_dir(out_dir);
  ScheduleFiles files{report::schedule_text(final_schedule), join(out_dir, "schedule.csv"),
                      join(out_dir, "schedule.svg")};
  report::write_text(files.schedule_csv, report::schedule_csv(final_schedule));
  report::write_text(files.schedule_svg,
                     report::schedule_svg(final_schedule, "retraining schedule " + strategy.describe()));
  return files;
}

namespace {

constexpr const char* kReportHelp = R"(Report files written by `run` (under --out):
  results.csv   mission,strategy,upd,error,mode,success_ratio
  schedule.csv  slot,m1..mN   (1 = slot fine-tuned at that mission)
  schedule.svg  schedule grid, one row per ensemble slot
  success.svg   success ratio (vertical) vs mission ID (horizontal)
  summary.json  resolved spec, per-mission schedules, class counts, ratios
  state.bin     final ensemble state (models + place metadata only)
`placedef` writes partition.csv (image_id,class_id), partition.svg and, for
the incremental method, insertions.csv with per-image threshold slack.
Exit codes: 0 success, 1 usage, 2 data error, 3 internal error.)";

int report_error(const std::exception& e, int code) {
  std::cerr << "ltpc: " << e.what() << "\n";
  return code;
}

}  // namespace

int run_main(int argc, char** argv) {
  CLI::App app{"Long-term ensemble learning of visual place classifiers"};
  app.footer(kReportHelp);
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run all missions of an experiment and write reports");
  std::string spec_path, out_dir, strategy, upd, mode, protocol;
  std::optional<std::uint64_t> seed;
  std::optional<int> nbar, kbar, capacity;
  std::optional<double> td;
  std::optional<std::size_t> fusion_x;
  std::vector<double> errors;
  run->add_option("--spec", spec_path, "Experiment spec (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Seed for data synthesis, place definition and training");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--strategy", strategy, "ST1 | ST2 | ST3");
  run->add_option("--nbar", nbar, "ST2 target fine-tuning count");
  run->add_option("--kbar", kbar, "ST3 preferred training set id");
  run->add_option("--upd", upd, "location | location-appearance | incremental");
  run->add_option("--td", td, "Travel distance per place class [m]");
  run->add_option("--x", fusion_x, "Fusion list length X");
  run->add_option("--capacity", capacity, "Maximum ensemble size");
  run->add_option("--error", errors, "Allowed localization error(s) [m]");
  run->add_option("--mode", mode, "rank1 | topx");
  run->add_option("--protocol", protocol, "next-season | fixed-test");

  // placedef
  auto* pd = app.add_subcommand("placedef", "Partition one season into place classes");
  std::string manifest, pd_out = "out", pd_upd = "location";
  int synth_season = 1;
  bool use_synth = false;
  double pd_td = 18.0;
  std::size_t pd_k = 0;
  std::uint64_t pd_seed = 0;
  pd->add_option("--manifest", manifest, "Dataset manifest (JSON)");
  pd->add_flag("--synthetic", use_synth, "Use a default synthetic season instead of a manifest");
  pd->add_option("--season", synth_season, "Synthetic season id");
  pd->add_option("--upd", pd_upd, "location | location-appearance | incremental");
  pd->add_option("--td", pd_td, "Travel distance per place class [m]");
  pd->add_option("--k", pd_k, "k-means cluster count (0 = default)");
  pd->add_option("--seed", pd_seed, "Seed");
  pd->add_option("--out", pd_out, "Output directory");

  // schedule
  auto* sc = app.add_subcommand("schedule", "Print and write a retraining schedule grid");
  std::string sc_strategy = "ST2", sc_out = "out";
  int sc_nbar = 1, sc_kbar = 1, sc_missions = 4, sc_capacity = 4;
  sc->add_option("--strategy", sc_strategy, "ST1 | ST2 | ST3");
  sc->add_option("--nbar", sc_nbar, "ST2 target fine-tuning count");
  sc->add_option("--kbar", sc_kbar, "ST3 preferred training set id");
  sc->add_option("--missions", sc_missions, "Number of missions");
  sc->add_option("--capacity", sc_capacity, "Maximum ensemble size");
  sc->add_option("--out", sc_out, "Output directory");

  // synth
  auto* sy = app.add_subcommand("synth", "Export synthetic seasons as dataset manifests");
  std::string sy_out = "data";
  std::uint64_t sy_seed = 0;
  sy->add_option("--seed", sy_seed, "Seed");
  sy->add_option("--out", sy_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) {
      ExperimentSpec spec = load_experiment_spec(spec_path);
      if (seed) spec.apply_seed(*seed);
      if (!out_dir.empty()) spec.out_dir = out_dir;
      if (!strategy.empty()) spec.mission.strategy.kind = sched::parse_strategy(strategy);
      if (nbar) spec.mission.strategy.n_bar = *nbar;
      if (kbar) spec.mission.strategy.k_bar = *kbar;
      if (!upd.empty()) spec.mission.partition.method = parse_partition_method(upd);
      if (td) spec.mission.partition.t_d = *td;
      if (fusion_x) spec.mission.fusion_x = *fusion_x;
      if (capacity) spec.mission.capacity = *capacity;
      if (!errors.empty()) spec.mission.error_thresholds = errors;
      if (!mode.empty()) spec.mission.mode = missions::parse_success_mode(mode);
      if (!protocol.empty()) spec.protocol = missions::parse_test_protocol(protocol);
      const RunFiles files = cmd_run(spec);
      std::cout << "wrote " << files.results_csv << "\n" << read_file(files.results_csv);
    } else if (*pd) {
      placedef::PartitionConfig cfg;
      cfg.method = parse_partition_method(pd_upd);
      cfg.t_d = pd_td;
      cfg.k = pd_k;
      cfg.seed = pd_seed;
      TrainingSet set;
      if (!manifest.empty()) {
        set = data::load_dataset(data::load_manifest(manifest));
      } else if (use_synth) {
        data::SynthConfig sc_cfg;
        sc_cfg.seed = pd_seed;
        sc_cfg.n_seasons = static_cast<std::size_t>(std::max(synth_season, 1));
        set = data::synth_generate(sc_cfg).back();
      } else {
        throw Error(Errc::bad_parameter, "placedef needs --manifest or --synthetic");
      }
      const PlacedefFiles files = cmd_placedef(set, cfg, pd_out);
      std::cout << files.n_classes << " place classes; wrote " << files.partition_csv << ", "
                << files.partition_svg
                << (files.insertion_log_csv.empty() ? "" : ", " + files.insertion_log_csv) << "\n";
    } else if (*sc) {
      sched::StrategyConfig st;
      st.kind = sched::parse_strategy(sc_strategy);
      st.n_bar = sc_nbar;
      st.k_bar = sc_kbar;
      const ScheduleFiles files = cmd_schedule(st, sc_missions, sc_capacity, sc_out);
      std::cout << files.grid_text;
    } else if (*sy) {
      data::SynthConfig cfg;
      cfg.seed = sy_seed;
      json spec = {{"seed", sy_seed}, {"datasets", json::array()}, {"protocol", "next-season"},
                   {"train", {{"learning_rate", 0.2}, {"epochs", 60}}}, {"out", "out"}};
      for (const TrainingSet& s : data::synth_generate(cfg)) {
        const std::string dir = join(sy_out, "season_" + std::to_string(s.season_id));
        data::export_dataset(s, dir);
        spec["datasets"].push_back("season_" + std::to_string(s.season_id) + "/manifest.json");
      }
      report::write_text(join(sy_out, "experiment.json"), spec.dump(2) + "\n");
      std::cout << "wrote " << cfg.n_seasons << " seasons and experiment.json under " << sy_out << "\n";
    }
  } catch (const Error& e) {
    if (is_data_error(e.code())) return report_error(e, kDataError);
    if (e.code() == Errc::bad_parameter || e.code() == Errc::invalid_range) return report_error(e, kUsage);
    return report_error(e, kInternal);
  } catch (const std::exception& e) {
    return report_error(e, kInternal);
  }
  return kOk;
}

}  // namespace ltpc::cli
