#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "retrosearch/config.hpp"
#include "retrosearch/policy.hpp"
#include "retrosearch/training.hpp"

namespace retro {

enum class EnvKind { maze, bnb };

enum class RunMode {
  retro_dagger,          // retrospective relabeling + data aggregation, curriculum over sizes
  retro_smile,           // retrospective relabeling + policy mixing, curriculum over sizes
  dagger_extrapolation,  // fit once on expert data at the base size, reuse everywhere
  dagger_cheating,       // fit on expert data at every size (needs the expert there)
  expert_baseline,       // no learning, run the domain expert as-is
};

EnvKind parse_env(const std::string& name);  // ConfigError on unknown names
RunMode parse_mode(const std::string& name);
std::string to_string(EnvKind env);
std::string to_string(RunMode mode);

/// A run, fully resolved: config file merged with CLI overrides, defaults
/// made explicit. Rendered back to disk beside every run's outputs.
struct ExperimentConfig {
  EnvKind env = EnvKind::maze;
  RunMode mode = RunMode::retro_dagger;
  std::uint64_t seed = 1729;

  std::vector<int> sizes;  // ascending curriculum; empty resolves to the env default
  int train_count = 48;
  int validation_count = 2;
  int test_count = 100;

  int iterations = 3;         // retro iterations per curriculum size; 0 = supervised fit only
  double mixing_alpha = 0.5;  // roll-out mixing; also the SMILe mixture decay
  PolicyClass policy_class = PolicyClass::select_only;
  int hidden_dim = 32;
  double keep_weight = 5.0;
  double learning_rate = 0.01;
  int epochs = 30;
  int batch_size = 64;

  std::uint64_t budget = 0;  // max expansions; 0 = env default (maze size^2+1, bnb 250)
  double epsilon = 0.05;
  double noise_variance = 0.05;

  double edge_probability = 0.0;  // random-graph density; 0 = 5/(n-1)

  std::string data_dir = "data";
  std::string out_dir = "out";
  int jobs = 1;
};

ExperimentConfig resolve_experiment(const ConfigFile& config);
ConfigFile render_experiment(const ExperimentConfig& e);

/// Identity hash recorded in output headers: the resolved config minus the
/// [execution] section, so reruns at a different --jobs or output directory
/// produce byte-identical result files.
std::uint64_t experiment_identity(const ExperimentConfig& e);

// --- instance manifests -------------------------------------------------

/// One generated instance. `path` is relative to the manifest's directory;
/// `optimum` is NaN when the environment has no precomputed optimum (maze).
struct ManifestEntry {
  std::string id;
  std::string split;  // train | validation | test
  int size = 0;
  std::string path;
  double optimum = std::numeric_limits<double>::quiet_NaN();
};

std::string manifest_filename(EnvKind env);
void save_manifest(const std::string& data_dir, EnvKind env, std::uint64_t seed,
                   const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::string& data_dir, EnvKind env);

/// Concrete policy behind a saved artifact. `mixture_u01` selects the
/// component when the artifact is a mixture (one draw per roll-out); it is
/// ignored otherwise.
std::unique_ptr<Policy> instantiate_policy(const PolicyArtifact& artifact, double mixture_u01);

// --- commands -------------------------------------------------------------
//
// Each command writes its outputs under the configured directory, plus the
// resolved config (config-<command>.txt) and a run record (run-<command>.txt,
// the only artifact carrying wall-clock time). Returns a one-line summary
// for the CLI to print. Errors surface as ConfigError / IoError /
// TrainingStarved for the CLI's exit-code mapping.

/// Generates train/validation/test instances for every curriculum size and
/// writes the manifest. Instance files are pure functions of (seed, env,
/// size, split, index), so regeneration is reproducible.
std::string cmd_generate(const ExperimentConfig& e);

/// Runs the configured training mode and saves one model per curriculum
/// size (out/models/size-<s>.model) plus per-iteration metrics
/// (out/iterations.csv).
std::string cmd_train(const ExperimentConfig& e);

/// Rolls the saved per-size models over the test split; writes per-instance
/// results (out/results.csv) and a per-size summary (out/summary.csv).
std::string cmd_evaluate(const ExperimentConfig& e);

struct TheoryOutcome {
  bool all_pass = true;
  std::string report;  // human-readable; one verdict line per check
};

/// Monte-carlo check of the random-walk hitting-time model: simulated means
/// against the closed form N/(1-2e) and tail frequencies against the
/// exponential bound. Writes out/theory.csv and out/theory-summary.txt.
TheoryOutcome cmd_validate_theory(const ConfigFile& config, const std::string& out_dir,
                                  std::uint64_t seed, int jobs);

}  // namespace retro
