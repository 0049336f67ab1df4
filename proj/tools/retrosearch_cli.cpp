// Command-line front end: subcommands map 1:1 onto the harness commands,
// flags override the corresponding config keys, and exceptions map onto the
// documented exit codes (0 ok, 2 config error, 3 training starved, 4 io
// error, 1 anything else).

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "retrosearch/config.hpp"
#include "retrosearch/errors.hpp"
#include "retrosearch/harness.hpp"

namespace {

struct Flags {
  std::string env;
  std::string mode;
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::uint64_t budget = 0;

  CLI::Option* env_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* budget_opt = nullptr;
  CLI::Option* out_opt = nullptr;
};

void add_common(CLI::App* cmd, Flags& f, bool wants_mode) {
  f.env_opt = cmd->add_option("--env", f.env, "Environment: maze or bnb");
  if (wants_mode) {
    f.mode_opt = cmd->add_option("--mode", f.mode,
                                 "retro_dagger, retro_smile, dagger_extrapolation, "
                                 "dagger_cheating or expert_baseline");
  }
  f.config_opt = cmd->add_option("--config", f.config_path, "Config file (ini-style)");
  f.seed_opt = cmd->add_option("--seed", f.seed, "Root seed (overrides [run] seed)");
  f.jobs_opt = cmd->add_option("--jobs", f.jobs, "Worker threads (overrides [execution] jobs)");
  f.budget_opt =
      cmd->add_option("--budget", f.budget, "Max node expansions (overrides [search] budget)");
  f.out_opt = cmd->add_option("--out", f.out, "Output directory (overrides [execution] out)");
}

retro::ConfigFile merged_config(const Flags& f) {
  retro::ConfigFile c;
  if (f.config_opt->count()) c = retro::load_config(f.config_path);
  if (f.env_opt->count()) c.set("run", "env", f.env);
  if (f.mode_opt && f.mode_opt->count()) c.set("run", "mode", f.mode);
  if (f.seed_opt->count()) c.set("run", "seed", std::to_string(f.seed));
  if (f.jobs_opt->count()) c.set("execution", "jobs", std::to_string(f.jobs));
  if (f.budget_opt->count()) c.set("search", "budget", std::to_string(f.budget));
  if (f.out_opt->count()) c.set("execution", "out", f.out);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Imitation-learned best-first search over mazes and branch-and-bound"};
  app.require_subcommand(1);

  Flags gen_f, train_f, scale_f, eval_f, theory_f;
  CLI::App* gen = app.add_subcommand("generate", "Generate instances and their manifest");
  add_common(gen, gen_f, false);
  CLI::App* train = app.add_subcommand("train", "Train one policy per curriculum size");
  add_common(train, train_f, true);
  CLI::App* scale =
      app.add_subcommand("scale-up", "Train across the size curriculum (alias of train)");
  add_common(scale, scale_f, true);
  CLI::App* eval = app.add_subcommand("evaluate", "Roll saved models over the test split");
  add_common(eval, eval_f, true);
  CLI::App* theory =
      app.add_subcommand("validate-theory", "Monte-carlo check of the hitting-time model");
  add_common(theory, theory_f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // malformed invocation counts as a config error
  }

  try {
    if (gen->parsed()) {
      retro::ConfigFile c = merged_config(gen_f);
      // generate's outputs are the instances themselves
      if (gen_f.out_opt->count()) c.set("paths", "data", gen_f.out);
      std::puts(retro::cmd_generate(retro::resolve_experiment(c)).c_str());
    } else if (train->parsed() || scale->parsed()) {
      const Flags& f = train->parsed() ? train_f : scale_f;
      std::puts(retro::cmd_train(retro::resolve_experiment(merged_config(f))).c_str());
    } else if (eval->parsed()) {
      std::puts(retro::cmd_evaluate(retro::resolve_experiment(merged_config(eval_f))).c_str());
    } else if (theory->parsed()) {
      const retro::ConfigFile c = merged_config(theory_f);
      const retro::TheoryOutcome outcome = retro::cmd_validate_theory(
          c, c.get_string("execution", "out", "out"), c.get_uint64("run", "seed", 1729),
          static_cast<int>(c.get_int("execution", "jobs", 1)));
      std::fputs(outcome.report.c_str(), stdout);
      return outcome.all_pass ? 0 : 1;
    }
  } catch (const retro::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const retro::TrainingStarved& e) {
    std::fprintf(stderr, "training starved: %s\n", e.what());
    return 3;
  } catch (const retro::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
