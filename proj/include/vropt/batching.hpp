#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "vropt/dataset.hpp"
#include "vropt/errors.hpp"
#include "vropt/rng.hpp"

namespace vropt {

/// Deterministic epoch partition. Each epoch shuffles all sample indices
/// with a stream derived from (run_seed, epoch) and cuts the first
/// M * batch_size of them into M batches; the trailing partial batch is
/// dropped so M is uniform across epochs.
struct BatchPlan {
  std::size_t batch_size = 0;
  std::size_t batches_per_epoch = 0;  // M
  std::uint64_t run_seed = 0;
};

inline BatchPlan make_batch_plan(const Dataset& ds, std::size_t batch_size,
                                 std::uint64_t run_seed) {
  if (batch_size < 1) throw std::invalid_argument("make_batch_plan: batch_size must be >= 1");
  if (batch_size > ds.n)
    throw std::invalid_argument("make_batch_plan: batch_size exceeds dataset size");
  return BatchPlan{batch_size, ds.n / batch_size, run_seed};
}

using Batch = std::vector<std::size_t>;

/// The epoch's permutation of 0..n-1 (Fisher-Yates over the epoch stream).
inline std::vector<std::size_t> epoch_permutation(std::size_t n,
                                                  const BatchPlan& plan,
                                                  std::uint64_t epoch) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = Rng(plan.run_seed).child("epoch_perm").child(epoch);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

/// The M batches of one epoch, in permuted order. The same partition is
/// reused when computing that epoch's snapshot full gradient.
inline std::vector<Batch> epoch_batches(const Dataset& ds, const BatchPlan& plan,
                                        std::uint64_t epoch) {
  if (plan.batch_size > ds.n)
    throw std::invalid_argument("epoch_batches: batch_size exceeds dataset size");
  auto perm = epoch_permutation(ds.n, plan, epoch);
  std::vector<Batch> batches(plan.batches_per_epoch);
  for (std::size_t b = 0; b < plan.batches_per_epoch; ++b)
    batches[b].assign(perm.begin() + static_cast<std::ptrdiff_t>(b * plan.batch_size),
                      perm.begin() + static_cast<std::ptrdiff_t>((b + 1) * plan.batch_size));
  return batches;
}

/// Stable identifier of a batch's index content, for pairing sample sets.
inline std::uint64_t batch_id(const Batch& batch) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t idx : batch) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= static_cast<unsigned char>(idx >> (8 * byte));
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace vropt
