#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vropt/config.hpp"
#include "vropt/dataset.hpp"
#include "vropt/errors.hpp"
#include "vropt/lr.hpp"
#include "vropt/metrics.hpp"
#include "vropt/model.hpp"
#include "vropt/train.hpp"
#include "vropt/vr.hpp"

namespace vropt {

/// 17 significant digits: enough for exact double round-trips, so replayed
/// runs produce byte-identical CSV files.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CheckpointRow {
  long long epoch = 0;
  long long iter = 0;
  double m1_raw = 0, m2_raw = 0, m3_raw = 0;
  double m1_vr = 0, m2_vr = 0, m3_vr = 0;
  double mean_alpha = 0, mean_corr = 0, mean_ratio = 0;
};

struct SeedRunOutput {
  std::uint64_t seed = 0;
  std::vector<IterRecord> iters;
  std::vector<CheckpointRow> checkpoints;
  double final_train_loss = 0.0;  // mean loss over the final epoch
  double wall_time_sec = 0.0;
  Model final_model;
};

struct ExperimentOutput {
  std::filesystem::path dir;
  std::uint64_t hash = 0;
  std::vector<SeedRunOutput> seed_runs;
};

inline Dataset build_dataset(const DatasetConfig& dc, std::uint64_t seed) {
  switch (dc.source) {
    case DatasetConfig::Source::synthetic: {
      Rng rng = Rng(seed).child("dataset");
      return gen_synthetic(dc.n_classes, dc.n_per_class, dc.dim, dc.class_separation,
                           rng);
    }
    case DatasetConfig::Source::csv:
      return load_csv(dc.path);
    case DatasetConfig::Source::cifar10:
      return load_cifar10_binary(dc.path);
  }
  throw std::invalid_argument("build_dataset: unknown source");
}

namespace run_detail {

inline void write_iters_csv(const std::filesystem::path& path, std::uint64_t seed,
                            const std::vector<IterRecord>& rows,
                            const std::string& trailer = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "# schema=v1 kind=iterations\n";
  out << "seed,epoch,iter,loss,alpha,lr,grad_norm\n";
  for (const auto& r : rows)
    out << seed << ',' << r.epoch << ',' << r.iter << ',' << fmt17(r.loss) << ','
        << fmt17(r.alpha) << ',' << fmt17(r.lr) << ',' << fmt17(r.grad_norm) << '\n';
  if (!trailer.empty()) out << "# error " << trailer << '\n';
}

inline void write_checkpoints_csv(const std::filesystem::path& path, std::uint64_t seed,
                                  const std::vector<CheckpointRow>& rows,
                                  const std::string& trailer = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "# schema=v1 kind=checkpoints\n";
  out << "seed,epoch,iter,metric1_raw,metric2_raw,metric3_raw,"
         "metric1_vr,metric2_vr,metric3_vr,"
         "mean_alpha_star,mean_correlation,mean_std_ratio\n";
  for (const auto& r : rows)
    out << seed << ',' << r.epoch << ',' << r.iter << ',' << fmt17(r.m1_raw) << ','
        << fmt17(r.m2_raw) << ',' << fmt17(r.m3_raw) << ',' << fmt17(r.m1_vr) << ','
        << fmt17(r.m2_vr) << ',' << fmt17(r.m3_vr) << ',' << fmt17(r.mean_alpha)
        << ',' << fmt17(r.mean_corr) << ',' << fmt17(r.mean_ratio) << '\n';
  if (!trailer.empty()) out << "# error " << trailer << '\n';
}

struct MeanStd {
  double mean = 0, std = 0;
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  for (double x : xs) ms.std += (x - ms.mean) * (x - ms.mean);
  ms.std = std::sqrt(ms.std / static_cast<double>(xs.size()));
  return ms;
}

template <typename Row, typename Get>
inline std::string agg_cell(const std::vector<std::vector<Row>>& per_seed,
                            std::size_t row, Get get) {
  std::vector<double> xs;
  xs.reserve(per_seed.size());
  for (const auto& rows : per_seed) xs.push_back(get(rows[row]));
  auto ms = mean_std(xs);
  return fmt17(ms.mean) + "," + fmt17(ms.std);
}

}  // namespace run_detail

/// Runs every seed of the config, writes one iteration CSV and one
/// checkpoint CSV per seed, a mean/std aggregate of each across seeds, the
/// final model checkpoints, and a metadata file echoing the normalized
/// config and its hash. oracle_budget > 0 refuses oracle-mode runs whose
/// parameter count times batches-per-epoch exceeds the budget.
inline ExperimentOutput run_experiment(const RunConfig& config,
                                       const std::filesystem::path& out_root,
                                       std::uint64_t oracle_budget = 0) {
  namespace fs = std::filesystem;
  const std::uint64_t hash = config_hash(config);

  ExperimentOutput out;
  out.dir = out_root / config.run_name;
  out.hash = hash;
  fs::create_directories(out.dir);

  // File-backed datasets are identical across seeds; load them once.
  std::optional<Dataset> shared;
  if (config.dataset.source != DatasetConfig::Source::synthetic)
    shared = build_dataset(config.dataset, 0);

  const bool oracle = config.vr && config.vr->family == ScheduleFamily::oracle;
  json meta_seeds = json::array();

  for (std::uint64_t seed : config.seeds) {
    Dataset ds = shared ? *shared : build_dataset(config.dataset, seed);
    if (static_cast<std::size_t>(config.batch_size) > ds.n)
      throw ConfigError({"batch_size exceeds dataset size (" + std::to_string(ds.n) + ")"});

    ModelSpec spec;
    spec.input_dim = ds.dim;
    spec.hidden_widths.assign(config.hidden_widths.begin(), config.hidden_widths.end());
    spec.n_classes = ds.n_classes;
    spec.label_smoothing = config.label_smoothing;

    BatchPlan plan = make_batch_plan(ds, static_cast<std::size_t>(config.batch_size), seed);
    const long long M = static_cast<long long>(plan.batches_per_epoch);

    if (oracle && oracle_budget > 0) {
      std::uint64_t cost = spec.param_count() * static_cast<std::uint64_t>(M);
      if (cost > oracle_budget)
        throw ConfigError({"oracle mode refused: param_count * batches_per_epoch = " +
                           std::to_string(cost) + " exceeds the budget of " +
                           std::to_string(oracle_budget)});
    }

    Rng init_rng = Rng(seed).child("model_init");
    Model model = init_model(spec, init_rng);

    std::optional<VrConfig> vr;
    if (config.vr) {
      VrConfig v;
      v.schedule.family = config.vr->family;
      v.schedule.alpha0 = config.vr->alpha0;
      v.schedule.alpha_final = config.vr->alpha_final;
      v.schedule.epochs = config.epochs;
      v.schedule.iters_per_epoch = M;
      v.inner_loop_size = static_cast<std::size_t>(config.vr->inner_loop_size);
      v.early_fraction = config.vr->early_fraction;
      v.transition_epochs = config.vr->transition_epochs;
      vr = v;
    }

    const double eff_lr = config.effective_base_lr();
    SeedRunOutput run;
    run.seed = seed;

    ParamVector measure_past;  // epoch-start params when no snapshot is live
    auto measured = [&](long long s, long long i) {
      if (!config.measurement.enabled) return false;
      if (oracle) return true;
      if (s < config.measurement.dense_first_epochs) return true;
      return s % config.measurement.every_k_epochs == 0 && i == M - 1;
    };

    TrainHooks hooks;
    hooks.lr = [&](long long s, long long i) {
      return lr_at(config.lr_schedule, eff_lr, s, i, config.epochs, M,
                   config.warmup_epochs);
    };
    hooks.pre_step = [&](const TrainObservation& obs) {
      if (obs.iter == 0) measure_past = obs.model.params;
      if (!measured(obs.epoch, obs.iter)) return;

      CheckpointRow row;
      row.epoch = obs.epoch;
      row.iter = obs.iter;

      if (obs.oracle_report) {
        const auto& cur = *obs.oracle_current;
        const auto& snap = *obs.oracle_snapshot;
        auto vr_set = apply_vr_transform(cur, snap, obs.snapshot->full_grad,
                                         obs.oracle_report->alpha_star);
        row.m1_raw = metric1(cur);
        row.m2_raw = metric2(cur);
        row.m3_raw = metric3(cur);
        row.m1_vr = metric1(vr_set);
        row.m2_vr = metric2(vr_set);
        row.m3_vr = metric3(vr_set);
        row.mean_alpha = obs.oracle_report->mean_alpha;
        row.mean_corr = obs.oracle_report->mean_correlation;
        row.mean_ratio = obs.oracle_report->mean_std_ratio;
      } else {
        Rng mrng = Rng(seed).child("measure").child(
            static_cast<std::uint64_t>(obs.global_iter));
        auto batches =
            draw_measure_batches(ds.n, config.measurement.n_samples,
                                 config.batch_size, mrng);
        auto cur = collect_grads_on_batches(obs.model, ds, batches);
        cur.epoch = obs.epoch;
        cur.iter = obs.iter;
        const ParamVector& past_params =
            obs.snapshot ? obs.snapshot->params : measure_past;
        Model past{obs.model.spec, past_params};
        auto snap = collect_grads_on_batches(past, ds, batches);
        snap.epoch = obs.epoch;
        snap.iter = obs.iter;

        // No live snapshot means alpha is 0 and the full-gradient term is
        // never touched; a zero vector keeps the transform well-formed.
        const ParamVector* full = obs.snapshot ? &obs.snapshot->full_grad : nullptr;
        ParamVector zeros;
        if (!full) {
          zeros.assign(obs.model.params.size(), 0.0);
          full = &zeros;
        }
        auto vr_set = apply_vr_transform(cur, snap, *full, obs.alpha);

        auto report = optimal_coefficient(cur, snap);
        row.m1_raw = metric1(cur);
        row.m2_raw = metric2(cur);
        row.m3_raw = metric3(cur);
        row.m1_vr = metric1(vr_set);
        row.m2_vr = metric2(vr_set);
        row.m3_vr = metric3(vr_set);
        row.mean_alpha = report.mean_alpha;
        row.mean_corr = report.mean_correlation;
        row.mean_ratio = report.mean_std_ratio;
      }
      run.checkpoints.push_back(row);
    };

    auto t0 = std::chrono::steady_clock::now();
    const auto iters_path = out.dir / ("seed" + std::to_string(seed) + "_iters.csv");
    const auto ckpt_path =
        out.dir / ("seed" + std::to_string(seed) + "_checkpoints.csv");
    TrainResult result;
    try {
      result = train_run(std::move(model), ds, plan, config.optimizer, vr,
                         config.epochs, hooks);
    } catch (const NumericalError& e) {
      // Persist the partial log with an error trailer before propagating.
      run_detail::write_iters_csv(iters_path, seed, run.iters, e.what());
      run_detail::write_checkpoints_csv(ckpt_path, seed, run.checkpoints, e.what());
      throw;
    }
    run.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    run.iters = std::move(result.records);
    run.final_model = std::move(result.model);

    double last_epoch_loss = 0.0;
    long long count = 0;
    for (const auto& r : run.iters)
      if (r.epoch == config.epochs - 1) {
        last_epoch_loss += r.loss;
        ++count;
      }
    run.final_train_loss = count > 0 ? last_epoch_loss / static_cast<double>(count) : 0.0;

    run_detail::write_iters_csv(iters_path, seed, run.iters);
    run_detail::write_checkpoints_csv(ckpt_path, seed, run.checkpoints);
    save_checkpoint(run.final_model,
                    out.dir / ("seed" + std::to_string(seed) + "_model.ckpt"));

    meta_seeds.push_back({{"seed", seed},
                          {"final_train_loss", run.final_train_loss},
                          {"wall_time_sec", run.wall_time_sec}});
    out.seed_runs.push_back(std::move(run));
  }

  // Aggregates: mean and population std across seeds, rowwise.
  {
    std::vector<std::vector<IterRecord>> per_seed;
    for (const auto& r : out.seed_runs) per_seed.push_back(r.iters);
    std::ofstream agg(out.dir / "aggregate_iters.csv");
    agg << "# schema=v1 kind=iterations_aggregate seeds=" << per_seed.size() << "\n";
    agg << "epoch,iter,loss_mean,loss_std,alpha_mean,alpha_std,lr_mean,lr_std,"
           "grad_norm_mean,grad_norm_std\n";
    if (!per_seed.empty()) {
      std::size_t rows = per_seed[0].size();
      for (const auto& v : per_seed)
        if (v.size() != rows)
          throw std::runtime_error("aggregate_iters: seed row counts differ");
      using R = IterRecord;
      for (std::size_t r = 0; r < rows; ++r) {
        agg << per_seed[0][r].epoch << ',' << per_seed[0][r].iter << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.loss; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.alpha; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.lr; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.grad_norm; })
            << '\n';
      }
    }
  }
  {
    std::vector<std::vector<CheckpointRow>> per_seed;
    for (const auto& r : out.seed_runs) per_seed.push_back(r.checkpoints);
    std::ofstream agg(out.dir / "aggregate_checkpoints.csv");
    agg << "# schema=v1 kind=checkpoints_aggregate seeds=" << per_seed.size() << "\n";
    agg << "epoch,iter,metric1_raw_mean,metric1_raw_std,metric2_raw_mean,"
           "metric2_raw_std,metric3_raw_mean,metric3_raw_std,metric1_vr_mean,"
           "metric1_vr_std,metric2_vr_mean,metric2_vr_std,metric3_vr_mean,"
           "metric3_vr_std,mean_alpha_star_mean,mean_alpha_star_std,"
           "mean_correlation_mean,mean_correlation_std,mean_std_ratio_mean,"
           "mean_std_ratio_std\n";
    if (!per_seed.empty()) {
      std::size_t rows = per_seed[0].size();
      for (const auto& v : per_seed)
        if (v.size() != rows)
          throw std::runtime_error("aggregate_checkpoints: seed row counts differ");
      using R = CheckpointRow;
      for (std::size_t r = 0; r < rows; ++r) {
        agg << per_seed[0][r].epoch << ',' << per_seed[0][r].iter << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.m1_raw; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.m2_raw; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.m3_raw; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.m1_vr; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.m2_vr; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.m3_vr; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.mean_alpha; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.mean_corr; }) << ','
            << run_detail::agg_cell(per_seed, r, [](const R& x) { return x.mean_ratio; })
            << '\n';
      }
    }
  }

  char hash_hex[32];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                static_cast<unsigned long long>(hash));
  json meta = {{"schema", "v1"},
               {"run_name", config.run_name},
               {"config", semantic_config_json(config)},
               {"config_hash", std::string(hash_hex)},
               {"effective_base_lr", config.effective_base_lr()},
               {"seeds", meta_seeds}};
  std::ofstream meta_out(out.dir / "meta.json");
  meta_out << meta.dump(2) << '\n';

  return out;
}

}  // namespace vropt
