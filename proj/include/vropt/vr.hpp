#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vropt/batching.hpp"
#include "vropt/errors.hpp"
#include "vropt/model.hpp"
#include "vropt/schedule.hpp"
#include "vropt/vec.hpp"

namespace vropt {

/// Frozen past model: a deep copy of its parameters plus their full
/// gradient over one epoch partition.
struct Snapshot {
  ParamVector params;
  ParamVector full_grad;
  long long epoch = 0;
  long long iteration = 0;
  std::uint64_t partition_id = 0;
};

inline std::uint64_t partition_fingerprint(const std::vector<Batch>& batches) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& b : batches) h = mix64(h ^ batch_id(b));
  return h;
}

inline Snapshot take_snapshot(const Model& model, const Dataset& ds,
                              const std::vector<Batch>& batches, long long epoch,
                              long long iteration) {
  if (batches.empty()) throw std::invalid_argument("take_snapshot: no batches");
  Snapshot snap;
  snap.params = model.params;  // deep copy
  snap.full_grad = full_gradient(model, ds, batches);
  snap.epoch = epoch;
  snap.iteration = iteration;
  snap.partition_id = partition_fingerprint(batches);
  return snap;
}

/// g = grad_current - alpha (*) (grad_snapshot_batch - snapshot_full),
/// componentwise. Scalar alpha broadcasts; alpha = 1 is standard SVRG.
inline ParamVector vr_gradient(std::span<const double> grad_current,
                               std::span<const double> grad_snapshot_batch,
                               std::span<const double> snapshot_full,
                               std::span<const double> alpha) {
  detail::require_same_length(grad_current.size(), grad_snapshot_batch.size(),
                              "vr_gradient");
  detail::require_same_length(grad_current.size(), snapshot_full.size(), "vr_gradient");
  bool broadcast = alpha.size() == 1;
  if (!broadcast)
    detail::require_same_length(alpha.size(), grad_current.size(), "vr_gradient alpha");
  ParamVector out(grad_current.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double a = broadcast ? alpha[0] : alpha[k];
    out[k] = grad_current[k] - a * (grad_snapshot_batch[k] - snapshot_full[k]);
  }
  return out;
}

inline ParamVector vr_gradient(std::span<const double> grad_current,
                               std::span<const double> grad_snapshot_batch,
                               std::span<const double> snapshot_full, double alpha) {
  return vr_gradient(grad_current, grad_snapshot_batch, snapshot_full,
                     std::span<const double>(&alpha, 1));
}

/// Variance-reduction configuration for a training run.
///
/// inner_loop_size: iterations between snapshot captures, counted globally
/// (0 means once per epoch, i.e. M). early_fraction < 1 applies the schedule
/// only within the first fraction of training, rescaled to that window,
/// followed by transition_epochs of linear fade to zero; afterwards the
/// driver skips all snapshot work.
struct VrConfig {
  ScheduleSpec schedule;
  std::size_t inner_loop_size = 0;
  double early_fraction = 1.0;
  long long transition_epochs = 1;

  void validate() const {
    schedule.validate();
    if (!(early_fraction > 0.0 && early_fraction <= 1.0))
      throw std::invalid_argument("VrConfig: early_fraction must be in (0, 1]");
    if (transition_epochs < 0)
      throw std::invalid_argument("VrConfig: transition_epochs must be >= 0");
  }

  bool oracle() const { return schedule.family == ScheduleFamily::oracle; }

  long long window_epochs() const {
    if (early_fraction >= 1.0) return schedule.epochs;
    long long w = std::llround(early_fraction * static_cast<double>(schedule.epochs));
    return std::max(w, 1ll);
  }
};

/// The coefficient actually applied at (epoch s, iteration i). Inside the
/// early window the schedule runs with T rescaled to the window length;
/// during the transition it fades linearly from the window's last scheduled
/// value to zero; afterwards it is 0 and snapshot work must be skipped.
inline double effective_alpha(const VrConfig& config, long long s, long long i) {
  const long long T = config.schedule.epochs;
  const long long M = config.schedule.iters_per_epoch;
  if (s < 0 || s >= T) throw std::invalid_argument("effective_alpha: epoch out of range");
  if (i < 0 || i >= M)
    throw std::invalid_argument("effective_alpha: iteration out of range");

  if (config.early_fraction >= 1.0) return schedule_alpha(config.schedule, s, i);

  const long long W = config.window_epochs();
  ScheduleSpec window = config.schedule;
  window.epochs = W;
  if (s < W) return schedule_alpha(window, s, i);

  const long long K = config.transition_epochs;
  if (s < W + K) {
    double terminal = schedule_alpha(window, W - 1, M - 1);
    double progress = (static_cast<double>(s - W) +
                       static_cast<double>(i) / static_cast<double>(M)) /
                      static_cast<double>(K);
    return terminal * (1.0 - progress);
  }
  return 0.0;
}

}  // namespace vropt
