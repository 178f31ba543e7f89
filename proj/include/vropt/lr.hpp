#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vropt {

enum class LrScheduleKind { constant, cosine_warmup };

/// Learning rate at global iteration granularity: a linear ramp from 0 to
/// base_lr over the warmup iterations (rate is exactly 0 at step 0 and
/// exactly base_lr at the first post-warmup step), then cosine decay from
/// base_lr to 0 over the remaining iterations. The constant kind ignores
/// warmup.
inline double lr_at(LrScheduleKind kind, double base_lr, long long epoch,
                    long long iter, long long total_epochs, long long iters_per_epoch,
                    long long warmup_epochs) {
  if (epoch < 0 || epoch >= total_epochs || iter < 0 || iter >= iters_per_epoch)
    throw std::invalid_argument("lr_at: index out of range");
  if (kind == LrScheduleKind::constant) return base_lr;

  const long long global = epoch * iters_per_epoch + iter;
  const long long warm = warmup_epochs * iters_per_epoch;
  const long long total = total_epochs * iters_per_epoch;
  if (global < warm)
    return base_lr * static_cast<double>(global) / static_cast<double>(warm);
  double progress =
      static_cast<double>(global - warm) / static_cast<double>(total - warm);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace vropt
