#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "vropt/batching.hpp"
#include "vropt/errors.hpp"
#include "vropt/model.hpp"
#include "vropt/rng.hpp"
#include "vropt/vec.hpp"

namespace vropt {

/// N mini-batch gradients collected at one frozen checkpoint. batch_ids
/// identify the index content of each mini-batch so paired sets can be
/// verified to share their sampling.
struct GradSampleSet {
  enum class Mode { raw, variance_reduced };

  std::size_t dim = 0;
  std::vector<ParamVector> samples;
  std::vector<std::uint64_t> batch_ids;
  long long epoch = 0;
  long long iter = 0;
  Mode mode = Mode::raw;

  std::size_t count() const { return samples.size(); }
};

/// Gradients of the frozen model on the given batches, in batch order.
inline GradSampleSet collect_grads_on_batches(const Model& model, const Dataset& ds,
                                              const std::vector<Batch>& batches) {
  if (batches.size() < 2)
    throw std::invalid_argument("collect_grads_on_batches: need at least 2 batches");
  GradSampleSet set;
  set.dim = model.params.size();
  set.samples.reserve(batches.size());
  set.batch_ids.reserve(batches.size());
  for (const auto& b : batches) {
    set.samples.push_back(loss_and_grad(model, ds, b).grad);
    set.batch_ids.push_back(batch_id(b));
  }
  return set;
}

/// Draws N independent uniformly-random mini-batches (indices without
/// replacement within a batch, batches independent of one another) from the
/// rng stream; deterministic under the stream.
inline std::vector<Batch> draw_measure_batches(std::size_t n_samples_in_dataset,
                                               std::int64_t n_batches,
                                               std::int64_t batch_size, Rng& rng) {
  if (n_batches < 2)
    throw std::invalid_argument("draw_measure_batches: N must be >= 2");
  if (batch_size < 1 ||
      static_cast<std::size_t>(batch_size) > n_samples_in_dataset)
    throw std::invalid_argument("draw_measure_batches: invalid batch_size");
  std::vector<std::size_t> pool(n_samples_in_dataset);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::vector<Batch> batches(static_cast<std::size_t>(n_batches));
  for (auto& b : batches) {
    // Partial Fisher-Yates: first batch_size entries of a fresh shuffle.
    for (std::size_t i = 0; i < static_cast<std::size_t>(batch_size); ++i) {
      std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    b.assign(pool.begin(), pool.begin() + batch_size);
  }
  return batches;
}

inline GradSampleSet collect_grads(const Model& model, const Dataset& ds,
                                   std::int64_t n_batches, std::int64_t batch_size,
                                   Rng& rng) {
  auto batches = draw_measure_batches(ds.n, n_batches, batch_size, rng);
  return collect_grads_on_batches(model, ds, batches);
}

/// Applies the variance-reduction transform to every sample of `current`
/// using the paired snapshot samples and the snapshot full gradient; see
/// vr_gradient. alpha may be scalar (broadcast) via the overload below.
inline GradSampleSet apply_vr_transform(const GradSampleSet& current,
                                        const GradSampleSet& snapshot,
                                        const ParamVector& snapshot_full,
                                        std::span<const double> alpha) {
  if (current.count() != snapshot.count() || current.dim != snapshot.dim)
    throw std::invalid_argument("apply_vr_transform: sets do not match");
  if (current.batch_ids != snapshot.batch_ids)
    throw std::invalid_argument("apply_vr_transform: sets are not batch-paired");
  detail::require_same_length(snapshot_full.size(), current.dim, "apply_vr_transform");
  bool broadcast = alpha.size() == 1;
  if (!broadcast) detail::require_same_length(alpha.size(), current.dim, "apply_vr_transform alpha");

  GradSampleSet out = current;
  out.mode = GradSampleSet::Mode::variance_reduced;
  for (std::size_t j = 0; j < out.count(); ++j) {
    auto& g = out.samples[j];
    const auto& gs = snapshot.samples[j];
    for (std::size_t k = 0; k < g.size(); ++k) {
      double a = broadcast ? alpha[0] : alpha[k];
      g[k] = g[k] - a * (gs[k] - snapshot_full[k]);
    }
  }
  return out;
}

inline GradSampleSet apply_vr_transform(const GradSampleSet& current,
                                        const GradSampleSet& snapshot,
                                        const ParamVector& snapshot_full,
                                        double alpha) {
  return apply_vr_transform(current, snapshot, snapshot_full,
                            std::span<const double>(&alpha, 1));
}

/// Directional variance: mean over unordered sample pairs of
/// (1 - cos(g_i, g_j)) / 2. Lies in [0, 1].
inline double metric1(const GradSampleSet& set) {
  const std::size_t n = set.count();
  if (n < 2) throw std::invalid_argument("metric1: need at least 2 samples");
  std::vector<double> sq(n), norms(n);
  for (std::size_t i = 0; i < n; ++i) {
    sq[i] = vec_dot(set.samples[i], set.samples[i]);
    norms[i] = std::sqrt(sq[i]);
    if (norms[i] < 1e-300)
      throw DegenerateInputError("metric1: sample with (near-)zero norm");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double dot = vec_dot(set.samples[i], set.samples[j]);
      // sqrt(sq_i * sq_j) keeps cos(x, x) exactly 1; fall back to the
      // two-division form only when the squared product underflows.
      double denom2 = sq[i] * sq[j];
      double cosine = denom2 >= std::numeric_limits<double>::min()
                          ? dot / std::sqrt(denom2)
                          : (dot / norms[i]) / norms[j];
      acc += 0.5 * (1.0 - cosine);
    }
  return acc / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace detail {
inline ParamVector sample_mean(const GradSampleSet& set) {
  ParamVector mean(set.dim, 0.0);
  for (const auto& g : set.samples)
    for (std::size_t k = 0; k < set.dim; ++k) mean[k] += g[k];
  double inv = 1.0 / static_cast<double>(set.count());
  for (auto& v : mean) v *= inv;
  return mean;
}
}  // namespace detail

/// Total componentwise gradient variance, population-normalized (1/N).
/// Equals the trace of the metric-3 covariance matrix.
inline double metric2(const GradSampleSet& set) {
  const std::size_t n = set.count();
  if (n < 2) throw std::invalid_argument("metric2: need at least 2 samples");
  auto mean = detail::sample_mean(set);
  double total = 0.0;
  for (std::size_t k = 0; k < set.dim; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = set.samples[j][k] - mean[k];
      acc += d * d;
    }
    total += acc / static_cast<double>(n);
  }
  return total;
}

/// Largest eigenvalue of the (1/N)-normalized sample covariance, computed on
/// the N x N Gram matrix of centered samples (rank <= N-1) by power
/// iteration to relative tolerance 1e-8 (at most 10000 iterations).
inline double metric3(const GradSampleSet& set) {
  const std::size_t n = set.count();
  if (n < 2) throw std::invalid_argument("metric3: need at least 2 samples");
  auto mean = detail::sample_mean(set);

  std::vector<std::vector<double>> centered(n, std::vector<double>(set.dim));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < set.dim; ++k)
      centered[j][k] = set.samples[j][k] - mean[k];

  std::vector<double> gram(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) {
      double d = vec_dot(centered[a], centered[b]);
      gram[a * n + b] = d;
      gram[b * n + a] = d;
    }

  // Zero covariance (all samples identical) short-circuits to 0.
  double frob = 0.0;
  for (double v : gram) frob += v * v;
  if (frob == 0.0) return 0.0;

  // Deterministic pseudorandom start; the all-ones vector lies in the Gram
  // matrix's null space (columns of centered samples sum to zero).
  Rng rng(0x6d65747269633301ull);
  std::vector<double> v(n), w(n);
  double norm2 = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm2 += x * x;
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (auto& x : v) x *= inv;

  const double rtol = 1e-8;
  const int max_iters = 10000;
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    for (std::size_t a = 0; a < n; ++a) {
      double acc = 0.0;
      for (std::size_t b = 0; b < n; ++b) acc += gram[a * n + b] * v[b];
      w[a] = acc;
    }
    double wnorm = vec_l2norm(w);
    if (wnorm == 0.0) return 0.0;  // start vector happened to be in the null space
    double lambda_new = vec_dot(v, w);  // Rayleigh quotient, v is unit
    for (std::size_t a = 0; a < n; ++a) v[a] = w[a] / wnorm;
    if (it > 0 && std::fabs(lambda_new - lambda) <= rtol * std::fabs(lambda_new)) {
      return lambda_new / static_cast<double>(n);
    }
    lambda = lambda_new;
  }
  throw NumericalError("metric3: power iteration did not converge, residual " +
                           std::to_string(std::fabs(lambda)),
                       max_iters);
}

/// Per-component optimal coefficients and their correlation / std-ratio
/// factorization. Components whose snapshot variance is below 1e-24 get
/// alpha_star 0 and are excluded from the reported means.
struct CoefficientReport {
  ParamVector alpha_star;
  ParamVector correlation;
  ParamVector std_ratio;
  std::vector<char> excluded;  // 1 = degenerate component
  double mean_alpha = 0.0;
  double mean_correlation = 0.0;
  double mean_std_ratio = 0.0;
  std::size_t n_excluded = 0;
};

inline constexpr double kDegenerateVar = 1e-24;

/// alpha*_k = Cov(snap_k, cur_k) / Var(snap_k), population-normalized; the
/// ratio is invariant to that choice. Requires batch-paired sets: sample j
/// of both sets must come from the same mini-batch.
inline CoefficientReport optimal_coefficient(const GradSampleSet& current,
                                             const GradSampleSet& snapshot) {
  if (current.count() != snapshot.count() || current.dim != snapshot.dim)
    throw std::invalid_argument("optimal_coefficient: sets do not match");
  if (current.count() < 2)
    throw std::invalid_argument("optimal_coefficient: need at least 2 samples");
  if (current.batch_ids != snapshot.batch_ids)
    throw std::invalid_argument("optimal_coefficient: sets are not batch-paired");

  const std::size_t n = current.count();
  const std::size_t d = current.dim;
  auto mean_cur = detail::sample_mean(current);
  auto mean_snap = detail::sample_mean(snapshot);

  CoefficientReport rep;
  rep.alpha_star.assign(d, 0.0);
  rep.correlation.assign(d, 0.0);
  rep.std_ratio.assign(d, 0.0);
  rep.excluded.assign(d, 0);

  double sum_a = 0.0, sum_rho = 0.0, sum_ratio = 0.0;
  std::size_t kept = 0;
  for (std::size_t k = 0; k < d; ++k) {
    double cov = 0.0, var_snap = 0.0, var_cur = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double dc = current.samples[j][k] - mean_cur[k];
      double dsn = snapshot.samples[j][k] - mean_snap[k];
      cov += dsn * dc;
      var_snap += dsn * dsn;
      var_cur += dc * dc;
    }
    double invn = 1.0 / static_cast<double>(n);
    cov *= invn;
    var_snap *= invn;
    var_cur *= invn;

    if (var_snap < kDegenerateVar) {
      rep.excluded[k] = 1;
      ++rep.n_excluded;
      continue;
    }
    rep.alpha_star[k] = cov / var_snap;
    double sd_snap = std::sqrt(var_snap);
    double sd_cur = std::sqrt(var_cur);
    rep.std_ratio[k] = sd_cur / sd_snap;
    rep.correlation[k] = sd_cur > 0.0 ? cov / (sd_snap * sd_cur) : 0.0;
    sum_a += rep.alpha_star[k];
    sum_rho += rep.correlation[k];
    sum_ratio += rep.std_ratio[k];
    ++kept;
  }
  if (kept > 0) {
    rep.mean_alpha = sum_a / static_cast<double>(kept);
    rep.mean_correlation = sum_rho / static_cast<double>(kept);
    rep.mean_std_ratio = sum_ratio / static_cast<double>(kept);
  }
  return rep;
}

/// Scalar control-variate coefficient alpha = Cov(x,y)/Var(y) and the
/// empirical variance of x - alpha (y - mean(y)); the latter equals
/// (1 - rho^2) Var(x) up to round-off.
inline std::pair<double, double> cv_alpha_star(std::span<const double> x,
                                               std::span<const double> y) {
  detail::require_same_length(x.size(), y.size(), "cv_alpha_star");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("cv_alpha_star: need at least 2 samples");

  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    mx += x[j];
    my += y[j];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double cov = 0.0, vy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cov += (x[j] - mx) * (y[j] - my);
    vy += (y[j] - my) * (y[j] - my);
  }
  cov /= static_cast<double>(n);
  vy /= static_cast<double>(n);
  if (vy == 0.0) throw DegenerateInputError("cv_alpha_star: Var(y) is zero");

  double alpha = cov / vy;
  double mr = 0.0;
  std::vector<double> r(n);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = x[j] - alpha * (y[j] - my);
    mr += r[j];
  }
  mr /= static_cast<double>(n);
  double var_reduced = 0.0;
  for (std::size_t j = 0; j < n; ++j) var_reduced += (r[j] - mr) * (r[j] - mr);
  var_reduced /= static_cast<double>(n);
  return {alpha, var_reduced};
}

}  // namespace vropt
