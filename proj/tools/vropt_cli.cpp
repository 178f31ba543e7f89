// Command-line front end: run experiments from a JSON config, compute
// gradient-variance metrics for a saved checkpoint, run the per-iteration
// optimal-coefficient training mode, and print coefficient schedule tables.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vropt/vropt.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

fs::path resolve_output_dir(const std::string& flag_value) {
  if (const char* env = std::getenv("VROPT_OUTPUT_DIR"); env && *env) return env;
  return flag_value;
}

vropt::Dataset load_dataset_arg(const std::string& path) {
  if (fs::is_directory(path)) return vropt::load_cifar10_binary(path);
  return vropt::load_csv(path);
}

void print_label_mapping(const vropt::Dataset& ds) {
  bool identity = true;
  for (std::size_t i = 0; i < ds.label_values.size(); ++i)
    if (ds.label_values[i] != static_cast<long long>(i)) identity = false;
  if (identity || ds.label_values.empty()) return;
  std::cerr << "label re-indexing:";
  for (std::size_t i = 0; i < ds.label_values.size(); ++i)
    std::cerr << ' ' << ds.label_values[i] << "->" << i;
  std::cerr << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            bool allow_oracle, std::uint64_t budget) {
  vropt::RunConfig config;
  try {
    config = vropt::load_run_config(config_path);
  } catch (const vropt::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  }

  const bool oracle =
      config.vr && config.vr->family == vropt::ScheduleFamily::oracle;
  if (oracle && !allow_oracle) {
    std::cerr << "this config uses the oracle coefficient mode; use the `oracle` "
                 "subcommand, which enforces the model-size budget\n";
    return kExitValidation;
  }
  if (!oracle && allow_oracle) {
    std::cerr << "oracle subcommand requires vr.family = \"oracle\" in the config\n";
    return kExitValidation;
  }

  try {
    auto out = vropt::run_experiment(config, resolve_output_dir(out_dir),
                                     allow_oracle ? budget : 0);
    std::cout << "wrote " << out.dir.string() << " (config hash ";
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(out.hash));
    std::cout << hex << ")\n";
    for (const auto& r : out.seed_runs)
      std::cout << "seed " << r.seed << ": final_train_loss "
                << vropt::fmt17(r.final_train_loss) << ", " << r.iters.size()
                << " iterations, " << r.checkpoints.size() << " checkpoints\n";
    return kExitOk;
  } catch (const vropt::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const vropt::NumericalError& e) {
    std::cerr << "run aborted: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_metrics(const std::string& checkpoint, const std::string& dataset_path,
                long long n, long long batch_size, std::uint64_t seed) {
  try {
    vropt::Model model = vropt::load_checkpoint(checkpoint);
    vropt::Dataset ds = load_dataset_arg(dataset_path);
    print_label_mapping(ds);
    if (ds.dim != model.spec.input_dim) {
      std::cerr << "dataset dim " << ds.dim << " does not match checkpoint input_dim "
                << model.spec.input_dim << '\n';
      return kExitValidation;
    }
    vropt::Rng rng = vropt::Rng(seed).child("measure");
    auto set = vropt::collect_grads(model, ds, n, batch_size, rng);
    std::cout << "metric1," << vropt::fmt17(vropt::metric1(set)) << '\n';
    std::cout << "metric2," << vropt::fmt17(vropt::metric2(set)) << '\n';
    std::cout << "metric3," << vropt::fmt17(vropt::metric3(set)) << '\n';
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
}

int cmd_schedules(const std::string& family, double alpha0, double alpha_final,
                  long long epochs, long long iters, bool table) {
  try {
    vropt::ScheduleSpec spec;
    spec.family = vropt::schedule_family_from_string(family);
    spec.alpha0 = alpha0;
    spec.alpha_final = alpha_final;
    spec.epochs = epochs;
    spec.iters_per_epoch = iters;
    spec.validate();
    if (spec.family == vropt::ScheduleFamily::oracle) {
      std::cerr << "the oracle family has no closed-form table\n";
      return kExitValidation;
    }
    if (table) {
      std::cout << "s,i,alpha\n";
      for (long long s = 0; s < epochs; ++s)
        for (long long i = 0; i < iters; ++i)
          std::cout << s << ',' << i << ','
                    << vropt::fmt17(vropt::schedule_alpha(spec, s, i)) << '\n';
    } else {
      for (long long s = 0; s < epochs; ++s)
        std::cout << "epoch " << s << ": "
                  << vropt::fmt17(vropt::schedule_alpha(spec, s, 0)) << '\n';
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variance-reduced stochastic optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "runs";
  auto* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("config", config_path, "JSON run config")->required();
  run->add_option("--output-dir", out_dir,
                  "output root (env VROPT_OUTPUT_DIR overrides)");

  std::string ckpt_path, dataset_path;
  long long n_samples = 64, m_batch = 128;
  std::uint64_t m_seed = 0;
  auto* metrics = app.add_subcommand(
      "metrics", "gradient-variance metrics for a saved checkpoint");
  metrics->add_option("checkpoint", ckpt_path, "model checkpoint file")->required();
  metrics->add_option("dataset", dataset_path, "CSV file or CIFAR-10 directory")
      ->required();
  metrics->add_option("--n", n_samples, "gradients to collect");
  metrics->add_option("--batch-size", m_batch, "mini-batch size");
  metrics->add_option("--seed", m_seed, "sampling seed");

  std::string o_config, o_out = "runs";
  std::uint64_t budget = 10'000'000;
  auto* oracle = app.add_subcommand(
      "oracle", "per-iteration optimal-coefficient training (small models)");
  oracle->add_option("config", o_config, "JSON run config with vr.family=oracle")
      ->required();
  oracle->add_option("--output-dir", o_out,
                     "output root (env VROPT_OUTPUT_DIR overrides)");
  oracle->add_option("--budget", budget,
                     "max param_count * batches_per_epoch for oracle runs");

  std::string family;
  double alpha0 = 0.5, alpha_final = 0.01;
  long long s_epochs = 10, s_iters = 1;
  bool table = false;
  auto* schedules = app.add_subcommand("schedules", "print a coefficient schedule");
  schedules->add_option("family", family, "schedule family")->required();
  schedules->add_option("--alpha0", alpha0, "initial coefficient");
  schedules->add_option("--alpha-final", alpha_final, "geometric terminal value");
  schedules->add_option("--epochs", s_epochs, "epochs T");
  schedules->add_option("--iters", s_iters, "iterations per epoch M");
  schedules->add_flag("--table", table, "print every (s, i) row as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitValidation;
  }

  if (run->parsed()) return cmd_run(config_path, out_dir, false, 0);
  if (metrics->parsed())
    return cmd_metrics(ckpt_path, dataset_path, n_samples, m_batch, m_seed);
  if (oracle->parsed()) return cmd_run(o_config, o_out, true, budget);
  if (schedules->parsed())
    return cmd_schedules(family, alpha0, alpha_final, s_epochs, s_iters, table);
  return kExitValidation;
}
