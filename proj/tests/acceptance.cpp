// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vropt/vropt.hpp"

using namespace vropt;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& msg) {
  if (!cond) throw CheckFailure(msg);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::uint64_t hash_params(const ParamVector& p) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : p) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    h = mix64(h ^ bits);
  }
  return h;
}

fs::path scratch_root() {
  auto p = fs::temp_directory_path() / "vropt_acceptance";
  fs::create_directories(p);
  return p;
}

// Desk-scale reproduction geometry: 10-class Gaussian blobs, plain SGD,
// 30 epochs. Criteria 7-8 pin batch 128; the oracle runs of criteria 9-10
// use their own calibrated regime.
struct ReproSettings {
  std::vector<long long> hidden;
  const char* vr_family = "off";
  double alpha0 = 0.0;
  double lr = 0.5;
  double separation = 1.5;
  long long dim = 32;
  long long batch = 128;
  long long n_per_class = 256;
  double label_smoothing = 0.0;
  long long epochs = 30;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  bool measure = false;
};

RunConfig repro_config(const std::string& name, const ReproSettings& s) {
  json j = {
      {"dataset",
       {{"source", "synthetic"},
        {"n_classes", 10},
        {"n_per_class", s.n_per_class},
        {"dim", s.dim},
        {"class_separation", s.separation}}},
      {"model",
       {{"hidden_widths", s.hidden}, {"label_smoothing", s.label_smoothing}}},
      {"optimizer", {{"type", "sgd"}, {"momentum", 0.0}, {"weight_decay", 0.0}}},
      {"lr", {{"schedule", "constant"}, {"base_lr", s.lr}}},
      {"vr", {{"family", s.vr_family}, {"alpha0", s.alpha0}}},
      {"epochs", s.epochs},
      {"batch_size", s.batch},
      {"seeds", s.seeds},
      {"measurement",
       {{"enabled", s.measure},
        {"every_k_epochs", 1},
        {"dense_first_epochs", 0},
        {"n_samples", 64}}},
      {"run_name", name},
  };
  return parse_run_config(j);
}

double mean_final_loss(const ExperimentOutput& out) {
  double acc = 0.0;
  for (const auto& r : out.seed_runs) acc += r.final_train_loss;
  return acc / static_cast<double>(out.seed_runs.size());
}

// Mean of a checkpoint column over epochs >= from_epoch, across seeds.
template <typename Get>
double mean_checkpoint(const ExperimentOutput& out, long long from_epoch, Get get) {
  double acc = 0.0;
  long long n = 0;
  for (const auto& r : out.seed_runs)
    for (const auto& row : r.checkpoints)
      if (row.epoch >= from_epoch) {
        acc += get(row);
        ++n;
      }
  return acc / static_cast<double>(n);
}

// ---------------------------------------------------------------------------

std::string c1_alpha_zero_equivalence() {
  Rng gen(501);
  auto ds = gen_synthetic(10, 64, 8, 2.5, gen);
  ModelSpec spec{8, {16}, 10, 0.1};  // MLP-2
  auto plan = make_batch_plan(ds, 64, 31);
  const long long M = static_cast<long long>(plan.batches_per_epoch);

  for (auto type : {OptimizerConfig::Type::sgd, OptimizerConfig::Type::adamw}) {
    OptimizerConfig opt;
    opt.type = type;
    opt.sgd = {0.05, 0.9, 0.001};
    TrainHooks base_hooks, vr_hooks;
    base_hooks.lr = vr_hooks.lr = [](long long, long long) { return 0.01; };

    std::vector<std::uint64_t> base_traj, vr_traj;
    base_hooks.pre_step = [&](const TrainObservation& o) {
      base_traj.push_back(hash_params(o.model.params));
    };
    vr_hooks.pre_step = [&](const TrainObservation& o) {
      vr_traj.push_back(hash_params(o.model.params));
    };

    Rng i1 = Rng(31).child("model_init");
    auto base =
        train_run(init_model(spec, i1), ds, plan, opt, std::nullopt, 3, base_hooks);

    VrConfig vr;
    vr.schedule.family = ScheduleFamily::constant;
    vr.schedule.alpha0 = 0.0;
    vr.schedule.epochs = 3;
    vr.schedule.iters_per_epoch = M;
    Rng i2 = Rng(31).child("model_init");
    auto zero = train_run(init_model(spec, i2), ds, plan, opt, vr, 3, vr_hooks);

    require(base_traj == vr_traj, "per-iteration parameter trajectories differ");
    require(base.model.params == zero.model.params, "final parameters differ");
  }
  return "SGD and AdamW trajectories bit-identical over 3 epochs";
}

std::string c2_full_batch_degenerate() {
  Rng gen(502);
  auto ds = gen_synthetic(10, 16, 6, 2.5, gen);  // n = 160
  ModelSpec spec{6, {12}, 10, 0.0};
  auto plan = make_batch_plan(ds, ds.n, 32);
  require(plan.batches_per_epoch == 1, "expected M = 1");

  OptimizerConfig opt;
  opt.type = OptimizerConfig::Type::sgd;
  opt.sgd = {0.05, 0.0, 0.0};
  VrConfig vr;
  vr.schedule.family = ScheduleFamily::constant;
  vr.schedule.alpha0 = 1.0;
  vr.schedule.epochs = 3;
  vr.schedule.iters_per_epoch = 1;

  double worst = 0.0;
  TrainHooks hooks;
  hooks.lr = [](long long, long long) { return 0.05; };
  hooks.pre_step = [&](const TrainObservation& o) {
    // vr_gradient for the step batch, recomputed the way the driver does it.
    auto cur = loss_and_grad(o.model, ds, o.partition[0]);
    Model past{o.model.spec, o.snapshot->params};
    auto snap = loss_and_grad(past, ds, o.partition[0]);
    auto g = vr_gradient(cur.grad, snap.grad, o.snapshot->full_grad, o.alpha);
    auto full = full_gradient(o.model, ds, o.partition);
    for (std::size_t k = 0; k < g.size(); ++k)
      worst = std::max(worst, std::fabs(g[k] - full[k]));
  };
  Rng ir = Rng(32).child("model_init");
  auto result = train_run(init_model(spec, ir), ds, plan, opt, vr, 3, hooks);
  require(worst <= 1e-12, "vr gradient differs from the full gradient by " + fmt(worst));

  // Collected mini-batch gradients at full batch size have zero variance.
  Rng mr = Rng(33).child("measure");
  auto set = collect_grads(result.model, ds, 8, static_cast<std::int64_t>(ds.n), mr);
  double m2 = metric2(set);
  require(m2 <= 1e-12, "metric2 of full-batch set is " + fmt(m2));
  return "max |g - full| = " + fmt(worst) + ", metric2 = " + fmt(m2);
}

std::string c3_optimal_coefficient_oracle() {
  Rng gen(503);
  long long sets = 0, comps = 0;
  for (int trial = 0; trial < 120; ++trial) {
    std::size_t d = 2 + gen.below(7);
    std::size_t n = 8 + gen.below(25);
    Rng r(9000 + static_cast<std::uint64_t>(trial));
    GradSampleSet cur, snap;
    cur.dim = snap.dim = d;
    for (std::size_t j = 0; j < n; ++j) {
      cur.batch_ids.push_back(j);
      snap.batch_ids.push_back(j);
    }
    std::vector<double> coef(d);
    for (auto& c : coef) c = -1.5 + 3.0 * r.uniform();
    for (std::size_t j = 0; j < n; ++j) {
      ParamVector y(d), x(d);
      for (std::size_t k = 0; k < d; ++k) {
        y[k] = r.normal();
        x[k] = coef[k] * y[k] + 0.3 * r.normal();
      }
      snap.samples.push_back(std::move(y));
      cur.samples.push_back(std::move(x));
    }
    auto rep = optimal_coefficient(cur, snap);
    ++sets;
    for (std::size_t k = 0; k < d; ++k) {
      if (rep.excluded[k]) continue;
      double best_alpha = 0.0, best_var = 1e300;
      for (int gi = -200; gi <= 200; ++gi) {
        double alpha = gi / 100.0;
        double mean = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          mean += cur.samples[j][k] - alpha * snap.samples[j][k];
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          double v = cur.samples[j][k] - alpha * snap.samples[j][k] - mean;
          var += v * v;
        }
        if (var < best_var) {
          best_var = var;
          best_alpha = alpha;
        }
      }
      require(std::fabs(rep.alpha_star[k] - best_alpha) <= 0.01 + 1e-12,
              "alpha* " + fmt(rep.alpha_star[k]) + " vs grid argmin " +
                  fmt(best_alpha));
      ++comps;
    }
  }
  require(sets >= 100, "not enough randomized sets");

  // Scalar identity Var(x*) = (1 - rho^2) Var(x) to 1e-10 relative.
  for (int trial = 0; trial < 200; ++trial) {
    Rng r(9500 + static_cast<std::uint64_t>(trial));
    std::size_t n = 4 + r.below(60);
    std::vector<double> x(n), y(n);
    double c = -2.0 + 4.0 * r.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = r.normal();
      x[i] = c * y[i] + 0.5 * r.normal();
    }
    auto [alpha, var_reduced] = cv_alpha_star(x, y);
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += x[i];
      my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double vx = 0, vy = 0, cov = 0;
    for (std::size_t i = 0; i < n; ++i) {
      vx += (x[i] - mx) * (x[i] - mx);
      vy += (y[i] - my) * (y[i] - my);
      cov += (x[i] - mx) * (y[i] - my);
    }
    vx /= static_cast<double>(n);
    vy /= static_cast<double>(n);
    cov /= static_cast<double>(n);
    double rho2 = cov * cov / (vx * vy);
    double want = (1 - rho2) * vx;
    require(std::fabs(var_reduced - want) <= 1e-10 * std::fabs(want),
            "cv identity off: " + fmt(var_reduced) + " vs " + fmt(want));
  }
  return std::to_string(sets) + " paired sets, " + std::to_string(comps) +
         " components within one grid step; identity holds at 1e-10";
}

std::string c4_gradient_correctness() {
  struct Arch {
    std::vector<std::size_t> hidden;
    const char* name;
  };
  std::vector<Arch> archs = {{{}, "logreg"}, {{12}, "mlp2"}, {{10, 10, 10}, "mlp4"}};
  double worst = 0.0;
  int draws = 0;
  for (std::size_t a = 0; a < archs.size(); ++a) {
    for (int rep = 0; rep < 7 && draws < 21; ++rep, ++draws) {
      std::uint64_t seed = 600 + static_cast<std::uint64_t>(draws);
      Rng gen(seed);
      int classes = 2 + static_cast<int>(gen.below(9));
      std::size_t dim = 2 + gen.below(15);
      auto ds = gen_synthetic(classes, 6, static_cast<std::int64_t>(dim), 2.0, gen);
      ModelSpec spec{dim, archs[a].hidden, classes, (draws % 2) ? 0.1 : 0.0};
      Rng ir(seed + 1000);
      Model m = init_model(spec, ir);
      Rng pr(seed + 2000);
      for (auto& p : m.params) p += 0.05 * pr.normal();

      std::vector<std::size_t> batch{0, 1, 2, 3, 4};
      auto lg = loss_and_grad(m, ds, batch);

      const double h = 1e-5;
      Model probe = m;
      for (std::size_t k = 0; k < m.params.size(); ++k) {
        double saved = probe.params[k];
        probe.params[k] = saved + h;
        double up = loss_and_grad(probe, ds, batch).loss;
        probe.params[k] = saved - h;
        double down = loss_and_grad(probe, ds, batch).loss;
        probe.params[k] = saved;
        double fd = (up - down) / (2 * h);
        double err = std::fabs(lg.grad[k] - fd);
        double rel = std::fabs(fd) < 1e-8 ? err : err / std::fabs(fd);
        worst = std::max(worst, rel);
      }
    }
  }
  require(draws >= 20, "need at least 20 draws");
  require(worst <= 1e-4, "max relative error " + fmt(worst));
  return std::to_string(draws) + " draws, max relative error " + fmt(worst);
}

std::string c5_schedule_table() {
  const long long T = 14, M = 8;
  const double a0 = 0.57, af = 0.01;
  auto make = [&](ScheduleFamily f) {
    ScheduleSpec s;
    s.family = f;
    s.alpha0 = a0;
    s.alpha_final = af;
    s.epochs = T;
    s.iters_per_epoch = M;
    return s;
  };
  for (long long s : {0ll, T / 2, T - 1}) {
    for (long long i : {0ll, M / 2, M - 1}) {
      double sd = static_cast<double>(s), id = static_cast<double>(i);
      double lin = a0 * (1 - sd / T);
      double quad = a0 / (T * T) * (T - sd) * (T - sd);
      double geo = a0 * std::pow(af / a0, sd / T);
      struct Want {
        ScheduleFamily f;
        double v;
      };
      std::vector<Want> wants = {
          {ScheduleFamily::linear, lin},
          {ScheduleFamily::quadratic, quad},
          {ScheduleFamily::geometric, geo},
          {ScheduleFamily::d_linear, lin * (1 - id / M) + lin},
          {ScheduleFamily::d_quadratic, (1 - quad) * (M - id) * (M - id) / (M * M) + quad},
          {ScheduleFamily::d_geometric, std::pow(geo + af, id / M)},
      };
      for (const auto& w : wants) {
        double got = schedule_alpha(make(w.f), s, i);
        require(std::fabs(got - w.v) <= 1e-12,
                std::string(to_string(w.f)) + " at (" + std::to_string(s) + "," +
                    std::to_string(i) + "): " + fmt(got) + " vs " + fmt(w.v));
      }
    }
  }
  require(schedule_alpha(make(ScheduleFamily::d_quadratic), 3, 0) == 1.0,
          "d_quadratic not exactly 1 at i=0");
  require(schedule_alpha(make(ScheduleFamily::d_geometric), 3, 0) == 1.0,
          "d_geometric not exactly 1 at i=0");
  double boundary = schedule_alpha(make(ScheduleFamily::geometric), T, 0);
  require(std::fabs(boundary - af) <= 1e-12,
          "geometric boundary " + fmt(boundary) + " vs alpha_final");
  return "all six families match independent evaluation at 1e-12";
}

std::string c6_unbiasedness() {
  Rng gen(506);
  auto ds = gen_synthetic(6, 24, 7, 2.5, gen);  // n = 144
  ModelSpec spec{7, {9}, 6, 0.1};
  Rng ir(507);
  Model current = init_model(spec, ir);
  Model past = current;
  Rng pr(508);
  for (auto& p : past.params) p += 0.05 * pr.normal();

  auto plan = make_batch_plan(ds, 16, 41);
  auto batches = epoch_batches(ds, plan, 0);
  auto snap = take_snapshot(past, ds, batches, 0, 0);

  double worst = 0.0;
  for (double alpha : {0.25, 0.5, 1.0}) {
    ParamVector mean_vr(current.params.size(), 0.0), mean_raw(current.params.size(), 0.0);
    for (const auto& b : batches) {
      auto cur_g = loss_and_grad(current, ds, b).grad;
      auto snap_g = loss_and_grad(past, ds, b).grad;
      auto g = vr_gradient(cur_g, snap_g, snap.full_grad, alpha);
      for (std::size_t k = 0; k < g.size(); ++k) {
        mean_vr[k] += g[k];
        mean_raw[k] += cur_g[k];
      }
    }
    for (std::size_t k = 0; k < mean_vr.size(); ++k)
      worst = std::max(worst, std::fabs((mean_vr[k] - mean_raw[k]) /
                                        static_cast<double>(batches.size())));
  }
  require(worst <= 1e-10, "control-variate mean shift " + fmt(worst));
  return "max componentwise mean shift " + fmt(worst) + " over alpha {0.25, 0.5, 1}";
}

std::string c7_fig2_logreg() {
  auto root = scratch_root() / "c7";
  fs::remove_all(root);
  ReproSettings base_s, svrg_s;
  base_s.measure = svrg_s.measure = true;
  svrg_s.vr_family = "constant";
  svrg_s.alpha0 = 1.0;
  auto base = run_experiment(repro_config("logreg_sgd", base_s), root);
  auto svrg = run_experiment(repro_config("logreg_svrg", svrg_s), root);

  double base_m2 =
      mean_checkpoint(base, 20, [](const CheckpointRow& r) { return r.m2_raw; });
  double svrg_m2 =
      mean_checkpoint(svrg, 20, [](const CheckpointRow& r) { return r.m2_vr; });
  double base_loss = mean_final_loss(base);
  double svrg_loss = mean_final_loss(svrg);
  require(svrg_m2 < base_m2, "SVRG metric2 " + fmt(svrg_m2) + " not below baseline " +
                                 fmt(base_m2));
  require(svrg_loss <= base_loss, "SVRG final loss " + fmt(svrg_loss) +
                                      " above baseline " + fmt(base_loss));
  return "metric2 " + fmt(svrg_m2) + " < " + fmt(base_m2) + "; loss " +
         fmt(svrg_loss) + " <= " + fmt(base_loss);
}

std::string c8_fig3_vs_fig6_mlp4() {
  auto root = scratch_root() / "c8";
  fs::remove_all(root);
  ReproSettings base_s;
  base_s.hidden = {64, 64, 64};
  ReproSettings svrg_s = base_s, alpha_s = base_s;
  svrg_s.vr_family = "constant";
  svrg_s.alpha0 = 1.0;
  alpha_s.vr_family = "linear";
  alpha_s.alpha0 = 0.5;
  auto base = run_experiment(repro_config("mlp4_sgd", base_s), root);
  auto svrg = run_experiment(repro_config("mlp4_svrg", svrg_s), root);
  auto alpha = run_experiment(repro_config("mlp4_alpha_svrg", alpha_s), root);

  double base_loss = mean_final_loss(base);
  double svrg_loss = mean_final_loss(svrg);
  double alpha_loss = mean_final_loss(alpha);
  require(svrg_loss >= alpha_loss, "standard SVRG " + fmt(svrg_loss) +
                                       " below alpha-SVRG " + fmt(alpha_loss));
  require(alpha_loss <= base_loss,
          "alpha-SVRG " + fmt(alpha_loss) + " above baseline " + fmt(base_loss));
  return "losses: baseline " + fmt(base_loss) + ", svrg " + fmt(svrg_loss) +
         ", alpha-svrg " + fmt(alpha_loss);
}

// The C9 oracle runs are shared with C10.
ExperimentOutput* c9_mlp4_out = nullptr;

std::string c9_fig4_depth_ordering() {
  auto root = scratch_root() / "c9";
  fs::remove_all(root);
  std::vector<std::uint64_t> seeds{1, 2, 3};
  const double lr = 0.2;
  static ExperimentOutput logreg = run_experiment(
      repro_config("oracle_logreg", {}, "oracle", 1.0, lr, 30, seeds, true), root);
  static ExperimentOutput mlp2 = run_experiment(
      repro_config("oracle_mlp2", {32}, "oracle", 1.0, lr, 30, seeds, true), root);
  static ExperimentOutput mlp4 = run_experiment(
      repro_config("oracle_mlp4", {32, 32, 32}, "oracle", 1.0, lr, 30, seeds, true),
      root);
  c9_mlp4_out = &mlp4;

  auto mean_alpha_tail = [](const ExperimentOutput& out) {
    double acc = 0.0;
    long long n = 0;
    for (const auto& r : out.seed_runs)
      for (const auto& row : r.iters)
        if (row.epoch >= 25) {
          acc += row.alpha;
          ++n;
        }
    return acc / static_cast<double>(n);
  };
  double a_logreg = mean_alpha_tail(logreg);
  double a_mlp2 = mean_alpha_tail(mlp2);
  double a_mlp4 = mean_alpha_tail(mlp4);
  require(a_logreg > a_mlp2,
          "logreg " + fmt(a_logreg) + " not above mlp2 " + fmt(a_mlp2));
  require(a_mlp2 > a_mlp4, "mlp2 " + fmt(a_mlp2) + " not above mlp4 " + fmt(a_mlp4));
  return "mean alpha* final 5 epochs: logreg " + fmt(a_logreg) + " > mlp2 " +
         fmt(a_mlp2) + " > mlp4 " + fmt(a_mlp4);
}

std::string c10_decomposition() {
  require(c9_mlp4_out != nullptr, "criterion 9 must run first");
  const auto& out = *c9_mlp4_out;

  // Epoch means of the correlation and std-ratio across seeds.
  std::map<long long, std::pair<double, long long>> corr, ratio_lo, ratio_hi;
  std::map<long long, std::vector<double>> ratios;
  std::map<long long, std::vector<double>> corrs;
  for (const auto& r : out.seed_runs)
    for (const auto& row : r.checkpoints) {
      corrs[row.epoch].push_back(row.mean_corr);
      ratios[row.epoch].push_back(row.mean_ratio);
    }
  auto epoch_mean = [](const std::vector<double>& v) {
    double acc = 0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };
  long long first_epoch = corrs.begin()->first;
  long long last_epoch = corrs.rbegin()->first;
  double first_corr = epoch_mean(corrs[first_epoch]);
  double last_corr = epoch_mean(corrs[last_epoch]);
  require(last_corr < first_corr, "correlation did not decrease: first " +
                                      fmt(first_corr) + ", last " + fmt(last_corr));
  for (auto& [epoch, v] : ratios) {
    double m = epoch_mean(v);
    require(m >= 0.5 && m <= 2.0,
            "epoch " + std::to_string(epoch) + " std-ratio " + fmt(m) +
                " outside [0.5, 2]");
  }
  return "correlation " + fmt(first_corr) + " -> " + fmt(last_corr) +
         "; std-ratio within [0.5, 2] all epochs";
}

std::string c11_replay() {
  auto root_a = scratch_root() / "c11a";
  auto root_b = scratch_root() / "c11b";
  fs::remove_all(root_a);
  fs::remove_all(root_b);
  auto config = repro_config("replay", {16}, "linear", 0.5, 0.2, 5, {1}, true);
  auto a = run_experiment(config, root_a);
  auto b = run_experiment(config, root_b);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  for (const char* name :
       {"seed1_iters.csv", "seed1_checkpoints.csv", "aggregate_iters.csv",
        "aggregate_checkpoints.csv"}) {
    auto sa = slurp(a.dir / name), sb = slurp(b.dir / name);
    require(!sa.empty(), std::string(name) + " is empty");
    require(sa == sb, std::string(name) + " differs between executions");
  }
  return "all CSV files byte-identical across two executions";
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    std::function<std::string()> fn;
  };
  std::vector<Criterion> criteria = {
      {"C1", "alpha=0 equivalence with the base optimizer", c1_alpha_zero_equivalence},
      {"C2", "full-batch degenerate case", c2_full_batch_degenerate},
      {"C3", "optimal-coefficient oracle equivalence", c3_optimal_coefficient_oracle},
      {"C4", "gradient correctness vs finite differences", c4_gradient_correctness},
      {"C5", "schedule table vs independent evaluation", c5_schedule_table},
      {"C6", "empirical unbiasedness", c6_unbiasedness},
      {"C7", "logreg: SVRG reduces variance and loss", c7_fig2_logreg},
      {"C8", "mlp4: alpha-SVRG beats standard SVRG and baseline", c8_fig3_vs_fig6_mlp4},
      {"C9", "oracle coefficient ordering by depth", c9_fig4_depth_ordering},
      {"C10", "correlation decays, std-ratio stays bounded", c10_decomposition},
      {"C11", "replay determinism of CSV output", c11_replay},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    try {
      std::string detail = c.fn();
      std::printf("[PASS] %s %s: %s\n", c.id, c.title, detail.c_str());
    } catch (const std::exception& e) {
      std::printf("[FAIL] %s %s: %s\n", c.id, c.title, e.what());
      ++failures;
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
