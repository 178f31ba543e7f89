#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vropt/batching.hpp"
#include "vropt/dataset.hpp"
#include "vropt/errors.hpp"
#include "vropt/metrics.hpp"
#include "vropt/model.hpp"
#include "vropt/optim.hpp"
#include "vropt/vr.hpp"

namespace vropt {

struct OptimizerConfig {
  enum class Type { sgd, adamw };
  Type type = Type::sgd;
  SgdHyper sgd;
  AdamwHyper adamw;

  void validate() const {
    if (type == Type::sgd)
      sgd.validate();
    else
      adamw.validate();
  }
};

struct IterRecord {
  long long epoch = 0;
  long long iter = 0;
  double loss = 0.0;
  double alpha = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
};

/// State exposed to the pre-step hook: the model as of iteration (epoch,
/// iter) before the update, the live snapshot if one exists, the epoch's
/// partition, and in oracle mode the per-iteration coefficient report.
struct TrainObservation {
  long long epoch = 0;
  long long iter = 0;
  long long global_iter = 0;
  const Model& model;
  const Snapshot* snapshot = nullptr;
  const std::vector<Batch>& partition;
  double loss = 0.0;
  double alpha = 0.0;
  const CoefficientReport* oracle_report = nullptr;
  const GradSampleSet* oracle_current = nullptr;   // partition-paired sets,
  const GradSampleSet* oracle_snapshot = nullptr;  //   oracle mode only
};

struct TrainHooks {
  std::function<double(long long epoch, long long iter)> lr;  // required
  std::function<void(const TrainObservation&)> pre_step;      // optional
};

struct TrainResult {
  Model model;
  std::vector<IterRecord> records;
};

namespace detail {

inline bool window_needs_snapshot(const VrConfig& vr, long long global_start,
                                  long long inner, long long total_iters,
                                  long long iters_per_epoch) {
  if (vr.oracle()) return true;
  long long end = std::min(global_start + inner, total_iters);
  for (long long g = global_start; g < end; ++g) {
    long long s = g / iters_per_epoch;
    long long i = g % iters_per_epoch;
    if (effective_alpha(vr, s, i) != 0.0) return true;
  }
  return false;
}

}  // namespace detail

/// Runs the per-epoch training loop of the variance-reduced drivers: a
/// snapshot every inner-loop interval (full gradient over the current
/// epoch's partition), per-iteration assembly of the variance-reduced
/// gradient, and one base-optimizer step with the hook-supplied learning
/// rate. Wherever the coefficient is zero for an entire snapshot interval,
/// all snapshot work is skipped, making the trajectory bit-identical to the
/// base optimizer alone.
inline TrainResult train_run(Model model, const Dataset& ds, const BatchPlan& plan,
                             const OptimizerConfig& opt,
                             const std::optional<VrConfig>& vr, long long epochs,
                             const TrainHooks& hooks) {
  if (!hooks.lr) throw std::invalid_argument("train_run: lr hook is required");
  if (epochs < 1) throw std::invalid_argument("train_run: epochs must be >= 1");
  opt.validate();

  const long long M = static_cast<long long>(plan.batches_per_epoch);
  if (M < 1) throw std::invalid_argument("train_run: batch plan yields zero batches");
  if (vr) {
    vr->validate();
    if (vr->schedule.epochs != epochs || vr->schedule.iters_per_epoch != M)
      throw std::invalid_argument(
          "train_run: vr schedule (T, M) must match the run's epochs and batches");
    if (vr->oracle() && vr->inner_loop_size != 0 &&
        vr->inner_loop_size != static_cast<std::size_t>(M))
      throw std::invalid_argument(
          "train_run: oracle mode pairs against the epoch partition and requires "
          "inner_loop_size == M");
  }
  const long long inner =
      (vr && vr->inner_loop_size > 0) ? static_cast<long long>(vr->inner_loop_size) : M;
  const long long total_iters = epochs * M;
  const bool oracle = vr && vr->oracle();

  SgdState sgd_state = SgdState::zeros(model.params.size());
  AdamwState adamw_state = AdamwState::zeros(model.params.size());

  std::optional<Snapshot> snapshot;
  std::vector<ParamVector> snap_batch_grads;  // oracle mode only
  GradSampleSet snap_set;                     // oracle mode only

  TrainResult result;
  result.records.reserve(static_cast<std::size_t>(total_iters));

  long long global = 0;
  for (long long s = 0; s < epochs; ++s) {
    auto batches = epoch_batches(ds, plan, static_cast<std::uint64_t>(s));
    for (long long i = 0; i < M; ++i, ++global) {
      try {
        if (vr && global % inner == 0) {
          if (detail::window_needs_snapshot(*vr, global, inner, total_iters, M)) {
            if (oracle) {
              // Keep the per-batch snapshot gradients: they are reused for
              // the coefficient pairing at every iteration of the interval.
              snap_set = collect_grads_on_batches(model, ds, batches);
              Snapshot snap;
              snap.params = model.params;
              snap.full_grad.assign(model.params.size(), 0.0);
              for (const auto& g : snap_set.samples)
                for (std::size_t k = 0; k < snap.full_grad.size(); ++k)
                  snap.full_grad[k] += g[k];
              double inv = 1.0 / static_cast<double>(snap_set.count());
              for (auto& v : snap.full_grad) v *= inv;
              snap.epoch = s;
              snap.iteration = global;
              snap.partition_id = partition_fingerprint(batches);
              snapshot = std::move(snap);
              snap_batch_grads = snap_set.samples;
            } else {
              snapshot = take_snapshot(model, ds, batches, s, global);
            }
          } else {
            snapshot.reset();
          }
        }

        double alpha = 0.0;
        double loss = 0.0;
        ParamVector step_grad;
        CoefficientReport report;
        GradSampleSet cur_set_storage;
        bool have_report = false;

        if (oracle) {
          cur_set_storage = collect_grads_on_batches(model, ds, batches);
          // The snapshot set was collected on this same partition; pairing
          // holds as long as the snapshot interval is the epoch.
          report = optimal_coefficient(cur_set_storage, snap_set);
          have_report = true;
          alpha = report.mean_alpha;
          loss = loss_and_grad(model, ds, batches[static_cast<std::size_t>(i)]).loss;
          step_grad = vr_gradient(cur_set_storage.samples[static_cast<std::size_t>(i)],
                                  snap_batch_grads[static_cast<std::size_t>(i)],
                                  snapshot->full_grad, report.alpha_star);
        } else {
          auto lg = loss_and_grad(model, ds, batches[static_cast<std::size_t>(i)]);
          loss = lg.loss;
          alpha = vr ? effective_alpha(*vr, s, i) : 0.0;
          if (vr && alpha != 0.0) {
            Model past{model.spec, snapshot->params};
            auto snap_lg = loss_and_grad(past, ds, batches[static_cast<std::size_t>(i)]);
            step_grad = vr_gradient(lg.grad, snap_lg.grad, snapshot->full_grad, alpha);
          } else {
            step_grad = std::move(lg.grad);
          }
        }

        if (hooks.pre_step) {
          TrainObservation obs{s,
                               i,
                               global,
                               model,
                               snapshot ? &*snapshot : nullptr,
                               batches,
                               loss,
                               alpha,
                               have_report ? &report : nullptr,
                               have_report ? &cur_set_storage : nullptr,
                               have_report ? &snap_set : nullptr};
          hooks.pre_step(obs);
        }

        // The hook-supplied rate may be 0 during warmup; the steppers still
        // advance their momentum state.
        double lr = hooks.lr(s, i);
        if (opt.type == OptimizerConfig::Type::sgd) {
          SgdHyper h = opt.sgd;
          h.lr = lr;
          sgd_step(model.params, step_grad, sgd_state, h);
        } else {
          AdamwHyper h = opt.adamw;
          h.lr = lr;
          adamw_step(model.params, step_grad, adamw_state, h);
        }

        result.records.push_back(
            {s, i, loss, alpha, lr, vec_l2norm(step_grad)});
      } catch (const NumericalError& e) {
        throw NumericalError(std::string(e.what()) + "; training aborted at iteration",
                             global);
      }
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace vropt
