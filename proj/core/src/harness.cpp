#include "retrosearch/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "retrosearch/bnb.hpp"
#include "retrosearch/errors.hpp"
#include "retrosearch/maze.hpp"
#include "retrosearch/parallel.hpp"
#include "retrosearch/random_walk.hpp"
#include "retrosearch/retrospective.hpp"

namespace fs = std::filesystem;

namespace retro {
namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing: " + path.string());
}

void make_dirs(const fs::path& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw IoError("cannot create directory " + path.string() + ": " + ec.message());
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += g17(v[i]);
  }
  return out;
}

/// First line of every CSV: the determinism contract (generator algorithm,
/// root seed, identity hash of the resolved config minus execution keys).
std::string csv_preamble(std::uint64_t seed, std::uint64_t identity) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# retrosearch rng=%s seed=%llu config=%016llx\n", kRngAlgorithm,
                static_cast<unsigned long long>(seed), static_cast<unsigned long long>(identity));
  return buf;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

/// run-<command>.txt is the only artifact carrying wall-clock time, so result
/// files stay byte-comparable across reruns.
void write_run_record(const fs::path& dir, const std::string& command, std::uint64_t seed,
                      std::uint64_t identity, const std::string& extra, double wall_seconds) {
  std::string out = "retrosearch-run v1\n";
  out += "command=" + command + "\n";
  char buf[96];
  std::snprintf(buf, sizeof buf, "config=%016llx\n", static_cast<unsigned long long>(identity));
  out += buf;
  out += "seed=" + std::to_string(seed) + "\n";
  out += std::string("rng=") + kRngAlgorithm + "\n";
  out += extra;
  std::snprintf(buf, sizeof buf, "wall_seconds=%.3f\n", wall_seconds);
  out += buf;
  write_file(dir / ("run-" + command + ".txt"), out);
}

void write_resolved_config(const fs::path& dir, const std::string& command, const ConfigFile& c) {
  write_file(dir / ("config-" + command + ".txt"), canonical_config_text(c));
}

}  // namespace

EnvKind parse_env(const std::string& name) {
  if (name == "maze") return EnvKind::maze;
  if (name == "bnb") return EnvKind::bnb;
  throw ConfigError("unknown env '" + name + "' (expected maze or bnb)");
}

RunMode parse_mode(const std::string& name) {
  if (name == "retro_dagger") return RunMode::retro_dagger;
  if (name == "retro_smile") return RunMode::retro_smile;
  if (name == "dagger_extrapolation") return RunMode::dagger_extrapolation;
  if (name == "dagger_cheating") return RunMode::dagger_cheating;
  if (name == "expert_baseline") return RunMode::expert_baseline;
  throw ConfigError("unknown mode '" + name +
                    "' (expected retro_dagger, retro_smile, dagger_extrapolation, "
                    "dagger_cheating or expert_baseline)");
}

std::string to_string(EnvKind env) { return env == EnvKind::maze ? "maze" : "bnb"; }

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::retro_dagger: return "retro_dagger";
    case RunMode::retro_smile: return "retro_smile";
    case RunMode::dagger_extrapolation: return "dagger_extrapolation";
    case RunMode::dagger_cheating: return "dagger_cheating";
    case RunMode::expert_baseline: return "expert_baseline";
  }
  return "?";
}

ExperimentConfig resolve_experiment(const ConfigFile& c) {
  ExperimentConfig e;
  e.env = parse_env(c.get_string("run", "env"));
  e.mode = parse_mode(c.get_string("run", "mode", "retro_dagger"));
  e.seed = c.get_uint64("run", "seed", 1729);

  if (c.has("curriculum", "sizes")) {
    e.sizes = c.get_int_list("curriculum", "sizes");
  } else {
    e.sizes = e.env == EnvKind::maze ? std::vector<int>{11, 15, 21, 25, 31}
                                     : std::vector<int>{30, 40, 50, 60};
  }
  for (std::size_t i = 0; i < e.sizes.size(); ++i) {
    if (i > 0 && e.sizes[i] <= e.sizes[i - 1]) {
      throw ConfigError("[curriculum] sizes must be strictly increasing");
    }
    if (e.env == EnvKind::maze && (e.sizes[i] < 5 || e.sizes[i] % 2 == 0)) {
      throw ConfigError("maze sizes must be odd and >= 5, got " + std::to_string(e.sizes[i]));
    }
    if (e.env == EnvKind::bnb && e.sizes[i] < 2) {
      throw ConfigError("graph sizes must be >= 2, got " + std::to_string(e.sizes[i]));
    }
  }

  e.train_count = static_cast<int>(c.get_int("curriculum", "train_count", 48));
  e.validation_count = static_cast<int>(c.get_int("curriculum", "validation_count", 2));
  e.test_count = static_cast<int>(c.get_int("curriculum", "test_count", 100));
  if (e.train_count < 0 || e.validation_count < 0 || e.test_count < 0) {
    throw ConfigError("[curriculum] counts must be non-negative");
  }

  e.iterations = static_cast<int>(c.get_int("training", "iterations", 3));
  if (e.iterations < 0) throw ConfigError("[training] iterations must be >= 0");
  e.mixing_alpha = c.get_double("training", "mixing_alpha", 0.5);
  if (!(e.mixing_alpha > 0.0 && e.mixing_alpha <= 1.0)) {
    throw ConfigError("[training] mixing_alpha must be in (0, 1]");
  }
  const std::string pc = c.get_string("training", "policy_class", "select_only");
  if (pc == "select_only") {
    e.policy_class = PolicyClass::select_only;
  } else if (pc == "select_and_prune") {
    e.policy_class = PolicyClass::select_and_prune;
  } else {
    throw ConfigError("[training] policy_class must be select_only or select_and_prune");
  }
  e.hidden_dim = static_cast<int>(c.get_int("training", "hidden_dim", 32));
  if (e.hidden_dim < 1) throw ConfigError("[training] hidden_dim must be >= 1");
  e.keep_weight = c.get_double("training", "keep_weight", 5.0);
  if (e.keep_weight < 1.0) throw ConfigError("[training] keep_weight must be >= 1");
  e.learning_rate = c.get_double("training", "learning_rate", 0.01);
  if (!(e.learning_rate > 0.0)) throw ConfigError("[training] learning_rate must be > 0");
  e.epochs = static_cast<int>(c.get_int("training", "epochs", 30));
  if (e.epochs < 1) throw ConfigError("[training] epochs must be >= 1");
  e.batch_size = static_cast<int>(c.get_int("training", "batch_size", 64));
  if (e.batch_size < 1) throw ConfigError("[training] batch_size must be >= 1");

  e.budget = c.get_uint64("search", "budget", 0);
  e.epsilon = c.get_double("search", "epsilon", 0.05);
  if (!(e.epsilon >= 0.0 && e.epsilon <= 1.0)) {
    throw ConfigError("[search] epsilon must be in [0, 1]");
  }
  e.noise_variance = c.get_double("search", "noise_variance", 0.05);
  if (!(e.noise_variance >= 0.0)) throw ConfigError("[search] noise_variance must be >= 0");

  e.edge_probability = c.get_double("bnb", "edge_probability", 0.0);
  if (!(e.edge_probability >= 0.0 && e.edge_probability <= 1.0)) {
    throw ConfigError("[bnb] edge_probability must be in [0, 1]");
  }

  e.data_dir = c.get_string("paths", "data", "data");
  e.out_dir = c.get_string("execution", "out", "out");
  e.jobs = static_cast<int>(c.get_int("execution", "jobs", 1));
  if (e.jobs < 1) throw ConfigError("[execution] jobs must be >= 1");
  return e;
}

ConfigFile render_experiment(const ExperimentConfig& e) {
  ConfigFile c;
  c.set("run", "env", to_string(e.env));
  c.set("run", "mode", to_string(e.mode));
  c.set("run", "seed", std::to_string(e.seed));
  c.set("curriculum", "sizes", join_ints(e.sizes));
  c.set("curriculum", "train_count", std::to_string(e.train_count));
  c.set("curriculum", "validation_count", std::to_string(e.validation_count));
  c.set("curriculum", "test_count", std::to_string(e.test_count));
  c.set("training", "iterations", std::to_string(e.iterations));
  c.set("training", "mixing_alpha", g17(e.mixing_alpha));
  c.set("training", "policy_class",
        e.policy_class == PolicyClass::select_only ? "select_only" : "select_and_prune");
  c.set("training", "hidden_dim", std::to_string(e.hidden_dim));
  c.set("training", "keep_weight", g17(e.keep_weight));
  c.set("training", "learning_rate", g17(e.learning_rate));
  c.set("training", "epochs", std::to_string(e.epochs));
  c.set("training", "batch_size", std::to_string(e.batch_size));
  c.set("search", "budget", std::to_string(e.budget));
  c.set("search", "epsilon", g17(e.epsilon));
  c.set("search", "noise_variance", g17(e.noise_variance));
  c.set("bnb", "edge_probability", g17(e.edge_probability));
  c.set("paths", "data", e.data_dir);
  c.set("rng", "algorithm", kRngAlgorithm);
  c.set("execution", "jobs", std::to_string(e.jobs));
  c.set("execution", "out", e.out_dir);
  return c;
}

std::uint64_t experiment_identity(const ExperimentConfig& e) {
  const ConfigFile full = render_experiment(e);
  ConfigFile stripped;
  for (const auto& [section, entries] : full.sections()) {
    if (section == "execution") continue;
    for (const auto& [key, value] : entries) stripped.set(section, key, value);
  }
  return config_hash(stripped);
}

// --- manifests --------------------------------------------------------------

std::string manifest_filename(EnvKind env) { return to_string(env) + "-manifest.txt"; }

void save_manifest(const std::string& data_dir, EnvKind env, std::uint64_t seed,
                   const std::vector<ManifestEntry>& entries) {
  std::string out = "retrosearch-manifest v1\n";
  out += "env=" + to_string(env) + "\n";
  out += std::string("rng=") + kRngAlgorithm + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  out += "count=" + std::to_string(entries.size()) + "\n";
  for (const ManifestEntry& en : entries) {
    out += en.id + " " + en.split + " " + std::to_string(en.size) + " " + en.path + " " +
           (std::isnan(en.optimum) ? std::string("-") : g17(en.optimum)) + "\n";
  }
  write_file(fs::path(data_dir) / manifest_filename(env), out);
}

std::vector<ManifestEntry> load_manifest(const std::string& data_dir, EnvKind env) {
  const fs::path path = fs::path(data_dir) / manifest_filename(env);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string() + " (run generate first)");
  std::string line;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) throw IoError("manifest " + path.string() + ": missing " + what);
    return line;
  };
  if (next("magic") != "retrosearch-manifest v1") {
    throw IoError("manifest " + path.string() + ": bad magic line");
  }
  if (next("env") != "env=" + to_string(env)) {
    throw IoError("manifest " + path.string() + ": env mismatch, want " + to_string(env));
  }
  next("rng");   // informative: instance files are plain data, any generator line loads
  next("seed");
  const std::string count_line = next("count");
  if (count_line.rfind("count=", 0) != 0) {
    throw IoError("manifest " + path.string() + ": expected count=");
  }
  char* end = nullptr;
  const std::size_t count = std::strtoull(count_line.c_str() + 6, &end, 10);
  if (end == count_line.c_str() + 6 || *end != '\0') {
    throw IoError("manifest " + path.string() + ": bad count");
  }
  std::vector<ManifestEntry> entries;
  entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    next("entry");
    std::istringstream row(line);
    ManifestEntry en;
    std::string opt;
    if (!(row >> en.id >> en.split >> en.size >> en.path >> opt)) {
      throw IoError("manifest " + path.string() + ": malformed entry '" + line + "'");
    }
    if (en.split != "train" && en.split != "validation" && en.split != "test") {
      throw IoError("manifest " + path.string() + ": unknown split '" + en.split + "'");
    }
    if (opt != "-") en.optimum = std::strtod(opt.c_str(), nullptr);
    entries.push_back(std::move(en));
  }
  return entries;
}

std::unique_ptr<Policy> instantiate_policy(const PolicyArtifact& artifact, double mixture_u01) {
  switch (artifact.kind) {
    case PolicyKind::ranker:
      return std::make_unique<RankerPolicy>(artifact.learned);
    case PolicyKind::mixture:
      return std::make_unique<RankerPolicy>(
          artifact.mixture.components.at(artifact.mixture.pick(mixture_u01)));
    case PolicyKind::maze_expert:
      return std::make_unique<ManhattanExpertPolicy>();
    case PolicyKind::bnb_best_bound:
      return std::make_unique<BestBoundPolicy>();
  }
  throw std::logic_error("instantiate_policy: unknown kind");
}

// --- domain adapters ---------------------------------------------------------

namespace {

/// The per-environment facts the commands need: how to load an instance,
/// the search budget at a given size, the expert, the headline metric and
/// the per-instance result row.
struct MazeDomain {
  using Env = MazeEnv;
  using Inst = MazeInstance;

  Env env;
  ManhattanExpertPolicy expert_;

  static Inst load(const std::string& path) { return load_maze(path); }
  static std::string schema() { return kMazeSchema; }
  static int dim() { return kMazeFeatureDim; }
  static PolicyKind expert_kind() { return PolicyKind::maze_expert; }
  static bool multi_terminal() { return false; }

  /// size^2 expansions cover every passable cell, so the goal is always
  /// reached and the budget never binds; an override caps it anyway.
  static SearchBudget budget_for(int size, std::uint64_t override_budget) {
    SearchBudget b;
    b.max_expansions = override_budget
                           ? override_budget
                           : static_cast<std::uint64_t>(size) * static_cast<std::uint64_t>(size) + 1;
    b.stop_mode = StopMode::first_terminal;
    return b;
  }

  const Policy& expert() const { return expert_; }

  double metric(const InstanceRecord<Inst>&, const Trace<MazeState>& trace) const {
    return static_cast<double>(explored_squares(trace));
  }

  static const char* results_header() {
    return "instance,size,explored_squares,path_length,expansions";
  }

  std::string result_row(const InstanceRecord<Inst>& rec, int size, const SearchBudget&,
                         const Trace<MazeState>& trace) const {
    const auto best = trace.tree.best_objective();
    return rec.id + "," + std::to_string(size) + "," + std::to_string(explored_squares(trace)) +
           "," + (best ? g17(*best) : std::string("-1")) + "," +
           std::to_string(trace.tree.expansions()) + "\n";
  }
};

struct BnbDomain {
  using Env = BnbEnv;
  using Inst = BnbInstance;

  Env env;
  BestBoundPolicy expert_;

  static Inst load(const std::string& path) { return make_bnb_instance(load_graph(path)); }
  static std::string schema() { return kBnbSchema; }
  static int dim() { return kBnbFeatureDim; }
  static PolicyKind expert_kind() { return PolicyKind::bnb_best_bound; }
  static bool multi_terminal() { return true; }

  static SearchBudget budget_for(int, std::uint64_t override_budget) {
    SearchBudget b;
    b.max_expansions = override_budget ? override_budget : 250;
    b.stop_mode = StopMode::exhaust_budget;
    return b;
  }

  const Policy& expert() const { return expert_; }

  double metric(const InstanceRecord<Inst>& rec, const Trace<BnbState>& trace) const {
    return optimality_gap(trace.tree.best_objective(), rec.optimum);
  }

  static const char* results_header() {
    return "instance,budget,incumbent,optimum,gap_percent,expansions";
  }

  std::string result_row(const InstanceRecord<Inst>& rec, int, const SearchBudget& budget,
                         const Trace<BnbState>& trace) const {
    const auto best = trace.tree.best_objective();
    return rec.id + "," + std::to_string(budget.max_expansions) + "," +
           (best ? g17(*best) : std::string("-")) + "," + g17(rec.optimum) + "," +
           g17(optimality_gap(best, rec.optimum)) + "," + std::to_string(trace.tree.expansions()) +
           "\n";
  }
};

template <class Inst>
struct SizedData {
  int size = 0;
  std::vector<InstanceRecord<Inst>> train;
  std::vector<InstanceRecord<Inst>> validation;
  std::vector<InstanceRecord<Inst>> test;
};

template <class Domain>
std::vector<SizedData<typename Domain::Inst>> load_sized(const ExperimentConfig& e,
                                                         bool want_train, bool want_test) {
  const auto entries = load_manifest(e.data_dir, e.env);
  std::vector<SizedData<typename Domain::Inst>> out;
  for (int size : e.sizes) {
    SizedData<typename Domain::Inst> sd;
    sd.size = size;
    for (const ManifestEntry& en : entries) {
      if (en.size != size) continue;
      const bool is_test = en.split == "test";
      if (is_test ? !want_test : !want_train) continue;
      if (e.env == EnvKind::bnb && std::isnan(en.optimum)) {
        throw ConfigError("manifest entry " + en.id + " lacks an optimum; regenerate the data");
      }
      InstanceRecord<typename Domain::Inst> rec;
      rec.instance = Domain::load((fs::path(e.data_dir) / en.path).string());
      rec.id = en.id;
      rec.optimum = en.optimum;
      if (is_test) {
        sd.test.push_back(std::move(rec));
      } else if (en.split == "train") {
        sd.train.push_back(std::move(rec));
      } else {
        sd.validation.push_back(std::move(rec));
      }
    }
    if (want_train && (sd.train.empty() || sd.validation.empty())) {
      throw ConfigError("no train/validation instances of size " + std::to_string(size) +
                        " in " + e.data_dir + "; run generate first");
    }
    if (want_test && sd.test.empty()) {
      throw ConfigError("no test instances of size " + std::to_string(size) + " in " +
                        e.data_dir + "; run generate first");
    }
    out.push_back(std::move(sd));
  }
  return out;
}

/// Expert demonstrations: pure expert roll-outs, retro-relabeled. The seed
/// only matters under exploration, which is off here, so the dataset is a
/// function of the instances alone.
template <class Domain>
Dataset expert_demos(const Domain& dom, const ExperimentConfig& e,
                     const std::vector<InstanceRecord<typename Domain::Inst>>& records, int size,
                     const SearchBudget& budget, std::uint64_t seed_base) {
  using State = typename Domain::Env::State;
  std::vector<Trace<State>> traces(records.size());
  parallel_for(e.jobs, records.size(), [&](std::size_t i) {
    traces[i] = run_search(dom.env, records[i].instance, dom.expert(), budget,
                           ExplorationConfig{}, derive_seed(seed_base, 0x657870ULL, i),
                           records[i].id);
  });
  Dataset d;
  d.schema_id = Domain::schema();
  d.problem_size = size;
  DatasetOptions opts;
  opts.pruner_labels = e.policy_class == PolicyClass::select_and_prune;
  opts.iteration = 0;
  opts.problem_size = size;
  for (const auto& t : traces) {
    if (t.no_terminal_found()) continue;
    d.merge(make_dataset(t, retrospective_oracle(t, select_target_terminal(t)), opts));
  }
  if (d.examples.empty()) {
    throw TrainingStarved("expert demonstrations yielded no ranking examples at size " +
                          std::to_string(size));
  }
  return d;
}

template <class Domain>
TrainConfig make_train_config(const ExperimentConfig& e) {
  TrainConfig tcfg;
  tcfg.iterations = std::max(e.iterations, 1);  // retro paths only; 0 short-circuits earlier
  tcfg.mixing_alpha = e.mixing_alpha;
  tcfg.exploration.epsilon = e.epsilon;
  tcfg.exploration.noise_variance = e.noise_variance;
  tcfg.exploration.multi_terminal = Domain::multi_terminal();
  tcfg.learner.learning_rate = e.learning_rate;
  tcfg.learner.epochs = e.epochs;
  tcfg.learner.batch_size = e.batch_size;
  tcfg.policy_class = e.policy_class;
  tcfg.hidden_dim = e.hidden_dim;
  tcfg.pruner_keep_weight = e.keep_weight;
  // One budget for the whole curriculum: sized for the largest stage. For
  // first_terminal searches the slack is unused; for exhaust searches the
  // budget is size-independent anyway.
  tcfg.rollout_budget = Domain::budget_for(e.sizes.back(), e.budget);
  tcfg.eval_budget = tcfg.rollout_budget;
  tcfg.seed = e.seed;
  tcfg.jobs = e.jobs;
  return tcfg;
}

template <class Domain>
std::string train_domain(const Domain& dom, const ExperimentConfig& e) {
  using Inst = typename Domain::Inst;
  using State = typename Domain::Env::State;
  const Stopwatch watch;
  const auto data = load_sized<Domain>(e, true, false);
  const TrainConfig tcfg = make_train_config<Domain>(e);

  const std::function<double(const InstanceRecord<Inst>&, const Trace<State>&)> metric =
      [&dom](const InstanceRecord<Inst>& r, const Trace<State>& t) { return dom.metric(r, t); };

  std::vector<StageArtifact> stages;
  if (e.mode == RunMode::expert_baseline) {
    for (const auto& sd : data) {
      ErrorRateReport er;
      const double val = detail::mean_validation_metric(
          dom.env, sd.validation, dom.expert(), tcfg.eval_budget,
          derive_seed(e.seed, 0x65787076ULL, static_cast<std::uint64_t>(sd.size)), e.jobs, metric,
          &er);
      StageArtifact a;
      a.size = sd.size;
      a.policy.kind = Domain::expert_kind();
      a.metrics = {IterationMetrics{0, 0, val, er.pooled(), false}};
      stages.push_back(std::move(a));
    }
  } else if (e.mode == RunMode::dagger_cheating) {
    // Expert demonstrations regenerated at every size: the upper baseline
    // that assumes the expert scales, which the retro modes must not.
    for (const auto& sd : data) {
      const std::uint64_t stage_seed =
          derive_seed(e.seed, 0x6368656174ULL, static_cast<std::uint64_t>(sd.size));
      const Dataset ds =
          expert_demos(dom, e, sd.train, sd.size, tcfg.rollout_budget, stage_seed);
      const LearnedPolicy lp =
          detail::retrain(ds, Domain::schema(), Domain::dim(), tcfg, stage_seed);
      ErrorRateReport er;
      const double val =
          detail::mean_validation_metric(dom.env, sd.validation, RankerPolicy(lp),
                                         tcfg.eval_budget, stage_seed, e.jobs, metric, &er);
      StageArtifact a;
      a.size = sd.size;
      a.policy.kind = PolicyKind::ranker;
      a.policy.learned = lp;
      a.metrics = {IterationMetrics{0, ds.examples.size(), val, er.pooled(), false}};
      stages.push_back(std::move(a));
    }
  } else {
    Dataset d0 = expert_demos(dom, e, data[0].train, data[0].size, tcfg.rollout_budget, e.seed);
    const LearnedPolicy lp0 =
        detail::retrain(d0, Domain::schema(), Domain::dim(), tcfg, derive_seed(e.seed, 0x62617365ULL));
    if (e.mode == RunMode::dagger_extrapolation || e.iterations == 0) {
      // Single supervised fit at the base size, reused at every size.
      // iterations = 0 degrades the retro modes to exactly this.
      for (const auto& sd : data) {
        ErrorRateReport er;
        const double val = detail::mean_validation_metric(
            dom.env, sd.validation, RankerPolicy(lp0), tcfg.eval_budget,
            derive_seed(e.seed, 0x73757076ULL, static_cast<std::uint64_t>(sd.size)), e.jobs,
            metric, &er);
        StageArtifact a;
        a.size = sd.size;
        a.policy.kind = PolicyKind::ranker;
        a.policy.learned = lp0;
        a.metrics = {IterationMetrics{0, d0.examples.size(), val, er.pooled(), false}};
        stages.push_back(std::move(a));
      }
    } else {
      PolicyArtifact base;
      base.kind = PolicyKind::ranker;
      base.learned = lp0;
      std::vector<CurriculumStage<Inst>> cstages;
      for (const auto& sd : data) cstages.push_back({sd.size, sd.train, sd.validation});
      ScaleUpResult res =
          scale_up(dom.env, cstages, base, std::move(d0), tcfg,
                   e.mode == RunMode::retro_smile ? ScaleMode::smile : ScaleMode::dagger, metric);
      stages = std::move(res.stages);
    }
  }

  const fs::path out(e.out_dir);
  make_dirs(out / "models");
  const std::uint64_t identity = experiment_identity(e);
  std::string csv = csv_preamble(e.seed, identity);
  csv += "env,mode,size,iteration,dataset_size,validation_metric,error_rate,skipped\n";
  for (const StageArtifact& st : stages) {
    save_policy((out / "models" / ("size-" + std::to_string(st.size) + ".model")).string(),
                st.policy);
    for (const IterationMetrics& m : st.metrics) {
      csv += to_string(e.env) + "," + to_string(e.mode) + "," + std::to_string(st.size) + "," +
             std::to_string(m.iteration) + "," + std::to_string(m.dataset_size) + "," +
             g17(m.validation_metric) + "," + g17(m.error_rate) + "," + (m.skipped ? "1" : "0") +
             "\n";
    }
  }
  write_file(out / "iterations.csv", csv);
  write_resolved_config(out, "train", render_experiment(e));
  write_run_record(out, "train", e.seed, identity,
                   "env=" + to_string(e.env) + "\nmode=" + to_string(e.mode) + "\n",
                   watch.seconds());
  return "trained " + to_string(e.env) + "/" + to_string(e.mode) + " over sizes " +
         join_ints(e.sizes) + "; models in " + (out / "models").string();
}

template <class Domain>
std::string evaluate_domain(const Domain& dom, const ExperimentConfig& e) {
  using State = typename Domain::Env::State;
  const Stopwatch watch;
  const auto data = load_sized<Domain>(e, false, true);
  const fs::path out(e.out_dir);
  make_dirs(out);
  const std::uint64_t identity = experiment_identity(e);

  std::string results = csv_preamble(e.seed, identity);
  results += std::string(Domain::results_header()) + "\n";
  std::string summary = csv_preamble(e.seed, identity);
  summary += "env,mode,size,budget,instances,mean_metric,median_metric,error_rate,excluded\n";

  for (const auto& sd : data) {
    const SearchBudget budget = Domain::budget_for(sd.size, e.budget);
    const PolicyArtifact artifact =
        load_policy((out / "models" / ("size-" + std::to_string(sd.size) + ".model")).string());
    if (artifact.kind == PolicyKind::ranker || artifact.kind == PolicyKind::mixture) {
      const std::string& got = artifact.kind == PolicyKind::ranker
                                   ? artifact.learned.ranker.schema_id
                                   : artifact.mixture.components.at(0).ranker.schema_id;
      if (got != Domain::schema()) {
        throw ConfigError("model schema '" + got + "' does not match env " + to_string(e.env));
      }
    } else if (artifact.kind != Domain::expert_kind()) {
      throw ConfigError("model kind does not fit env " + to_string(e.env));
    }

    const std::uint64_t size_seed =
        derive_seed(e.seed, 0x6576616cULL, static_cast<std::uint64_t>(sd.size));
    std::vector<Trace<State>> traces(sd.test.size());
    std::vector<double> vals(sd.test.size(), 0.0);
    parallel_for(e.jobs, sd.test.size(), [&](std::size_t i) {
      double u = 0.0;
      if (artifact.kind == PolicyKind::mixture) {
        u = Rng(derive_seed(size_seed, 0x636f6d70ULL, i)).uniform01();
      }
      const auto policy = instantiate_policy(artifact, u);
      traces[i] = run_search(dom.env, sd.test[i].instance, *policy, budget, ExplorationConfig{},
                             derive_seed(size_seed, 0x74657374ULL, i), sd.test[i].id);
      vals[i] = dom.metric(sd.test[i], traces[i]);
    });

    ErrorRateReport er;
    for (std::size_t i = 0; i < traces.size(); ++i) {
      accumulate_error_rate(traces[i], er);
      results += dom.result_row(sd.test[i], sd.size, budget, traces[i]);
    }
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(n);
    summary += to_string(e.env) + "," + to_string(e.mode) + "," + std::to_string(sd.size) + "," +
               std::to_string(budget.max_expansions) + "," + std::to_string(n) + "," + g17(mean) +
               "," + g17(median) + "," + g17(er.pooled()) + "," +
               std::to_string(er.instances_excluded) + "\n";
  }

  write_file(out / "results.csv", results);
  write_file(out / "summary.csv", summary);
  write_resolved_config(out, "evaluate", render_experiment(e));
  write_run_record(out, "evaluate", e.seed, identity,
                   "env=" + to_string(e.env) + "\nmode=" + to_string(e.mode) + "\n",
                   watch.seconds());
  return "evaluated " + to_string(e.env) + "/" + to_string(e.mode) + " over sizes " +
         join_ints(e.sizes) + "; results in " + out.string();
}

}  // namespace

// --- commands ----------------------------------------------------------------

std::string cmd_generate(const ExperimentConfig& e) {
  const Stopwatch watch;
  const fs::path data(e.data_dir);
  std::vector<ManifestEntry> entries;
  const std::uint64_t env_code = e.env == EnvKind::maze ? 0x6d617a65ULL : 0x626e62ULL;
  const char* split_names[3] = {"train", "validation", "test"};
  const int counts[3] = {e.train_count, e.validation_count, e.test_count};

  for (int size : e.sizes) {
    const std::string subdir = e.env == EnvKind::maze ? "maze/s" + std::to_string(size)
                                                      : "bnb/n" + std::to_string(size);
    make_dirs(data / subdir);
    const std::uint64_t size_seed =
        derive_seed(e.seed, env_code, static_cast<std::uint64_t>(size));
    const double p = e.edge_probability > 0.0 ? e.edge_probability : 5.0 / (size - 1);
    for (int split = 0; split < 3; ++split) {
      for (int i = 0; i < counts[split]; ++i) {
        const std::uint64_t s =
            derive_seed(size_seed, static_cast<std::uint64_t>(split), static_cast<std::uint64_t>(i));
        char name[64];
        std::snprintf(name, sizeof name, "%s-%03d.%s", split_names[split], i,
                      e.env == EnvKind::maze ? "maze" : "graph");
        ManifestEntry en;
        en.split = split_names[split];
        en.size = size;
        en.path = subdir + "/" + name;
        char idbuf[64];
        std::snprintf(idbuf, sizeof idbuf, "%s%d-%s-%03d",
                      e.env == EnvKind::maze ? "maze-s" : "graph-n", size, split_names[split], i);
        en.id = idbuf;
        if (e.env == EnvKind::maze) {
          save_maze((data / en.path).string(), kruskal_generate(size, s));
        } else {
          Graph g = erdos_renyi(size, p, s);
          for (std::uint64_t attempt = 1; g.edges.empty() && attempt <= 64; ++attempt) {
            g = erdos_renyi(size, p, derive_seed(s, 0x7265ULL, attempt));
          }
          if (g.edges.empty()) {
            throw ConfigError("edge probability too low: graphs of size " +
                              std::to_string(size) + " keep coming out empty");
          }
          en.optimum = static_cast<double>(exact_mvc(g));
          save_graph((data / en.path).string(), g);
        }
        entries.push_back(std::move(en));
      }
    }
  }

  save_manifest(e.data_dir, e.env, e.seed, entries);
  write_resolved_config(data, "generate", render_experiment(e));
  write_run_record(data, "generate", e.seed, experiment_identity(e),
                   "env=" + to_string(e.env) + "\n", watch.seconds());
  return "generated " + std::to_string(entries.size()) + " " + to_string(e.env) +
         " instances into " + e.data_dir;
}

std::string cmd_train(const ExperimentConfig& e) {
  if (e.env == EnvKind::maze) return train_domain(MazeDomain{}, e);
  return train_domain(BnbDomain{}, e);
}

std::string cmd_evaluate(const ExperimentConfig& e) {
  if (e.env == EnvKind::maze) return evaluate_domain(MazeDomain{}, e);
  return evaluate_domain(BnbDomain{}, e);
}

TheoryOutcome cmd_validate_theory(const ConfigFile& config, const std::string& out_dir,
                                  std::uint64_t seed, int jobs) {
  const Stopwatch watch;
  const std::vector<double> epsilons = config.has("theory", "epsilons")
                                           ? config.get_double_list("theory", "epsilons")
                                           : std::vector<double>{0.1, 0.2, 0.3, 0.4};
  const std::vector<int> targets = config.has("theory", "targets")
                                       ? config.get_int_list("theory", "targets")
                                       : std::vector<int>{10, 50};
  const std::uint64_t trials = config.get_uint64("theory", "trials", 100000);
  const double tol = config.get_double("theory", "mean_tolerance", 0.02);
  for (double ep : epsilons) {
    if (!(ep >= 0.0 && ep < 0.5)) {
      throw ConfigError("[theory] epsilons must lie in [0, 0.5); the mean diverges beyond");
    }
  }
  for (int n : targets) {
    if (n < 1) throw ConfigError("[theory] targets must be >= 1");
  }
  if (trials < 2) throw ConfigError("[theory] trials must be >= 2");
  if (!(tol > 0.0)) throw ConfigError("[theory] mean_tolerance must be > 0");
  if (jobs < 1) throw ConfigError("--jobs must be >= 1");

  ConfigFile resolved;
  resolved.set("theory", "epsilons", join_doubles(epsilons));
  resolved.set("theory", "targets", join_ints(targets));
  resolved.set("theory", "trials", std::to_string(trials));
  resolved.set("theory", "mean_tolerance", g17(tol));
  resolved.set("run", "seed", std::to_string(seed));
  resolved.set("rng", "algorithm", kRngAlgorithm);
  ConfigFile identity_cfg = resolved;  // nothing execution-scoped is in yet
  const std::uint64_t identity = config_hash(identity_cfg);
  resolved.set("execution", "jobs", std::to_string(jobs));
  resolved.set("execution", "out", out_dir);

  std::string csv = csv_preamble(seed, identity);
  csv += "epsilon,N,trials,mean,variance,alpha,tail_freq,bound_value\n";
  TheoryOutcome outcome;
  char buf[256];
  std::uint64_t cell = 0;
  for (double ep : epsilons) {
    for (int n : targets) {
      WalkConfig wc;
      wc.epsilon = ep;
      wc.target = n;
      wc.trials = trials;
      wc.seed = derive_seed(seed, 0x7468656f72ULL, cell++);
      const SimulationResult r = simulate_hitting_time(wc, jobs);
      const double expected = expected_hitting_time(ep, n);
      const double rel = std::fabs(r.mean - expected) / expected;
      const bool mean_ok = rel <= tol;
      const TailFit fit = tail_check(r, ep);
      const bool tail_thin = fit.points_used < 2;
      const bool tail_ok = tail_thin || !fit.bound_valid || fit.slope <= -0.5;
      for (std::size_t a = 0; a < r.alphas.size(); ++a) {
        csv += g17(ep) + "," + std::to_string(n) + "," + std::to_string(trials) + "," +
               g17(r.mean) + "," + g17(r.variance) + "," + std::to_string(r.alphas[a]) + "," +
               g17(r.tail_freq[a]) + "," + g17(fit.bound[a]) + "\n";
      }
      std::snprintf(buf, sizeof buf,
                    "epsilon=%.4g N=%d: mean %.6g vs closed form %.6g (rel err %.2e) %s", ep, n,
                    r.mean, expected, rel, mean_ok ? "ok" : "FAIL");
      outcome.report += buf;
      if (tail_thin) {
        std::snprintf(buf, sizeof buf, "; tail: %zu nonzero points, slope check skipped",
                      fit.points_used);
      } else if (!fit.bound_valid) {
        std::snprintf(buf, sizeof buf,
                      "; tail: outside the bound's regime (N*theta <= 1), slope %.3f reported, "
                      "check skipped",
                      fit.slope);
      } else {
        std::snprintf(buf, sizeof buf, "; tail slope %.3f over %zu points %s", fit.slope,
                      fit.points_used, tail_ok ? "ok" : "FAIL");
      }
      outcome.report += buf;
      if (r.cap_hits > 0) {
        std::snprintf(buf, sizeof buf, "; %llu trials hit the step cap",
                      static_cast<unsigned long long>(r.cap_hits));
        outcome.report += buf;
      }
      outcome.report += "\n";
      outcome.all_pass = outcome.all_pass && mean_ok && tail_ok;
    }
  }
  outcome.report += outcome.all_pass ? "hitting-time validation: ALL PASS\n"
                                     : "hitting-time validation: FAIL\n";

  const fs::path out(out_dir);
  make_dirs(out);
  write_file(out / "theory.csv", csv);
  write_file(out / "theory-summary.txt", outcome.report);
  write_resolved_config(out, "validate-theory", resolved);
  write_run_record(out, "validate-theory", seed, identity, "", watch.seconds());
  return outcome;
}

}  // namespace retro
