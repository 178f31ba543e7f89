#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vropt {

enum class ScheduleFamily {
  constant,
  linear,
  quadratic,
  geometric,
  d_linear,
  d_quadratic,
  d_geometric,
  oracle,
};

inline std::string_view to_string(ScheduleFamily f) {
  switch (f) {
    case ScheduleFamily::constant: return "constant";
    case ScheduleFamily::linear: return "linear";
    case ScheduleFamily::quadratic: return "quadratic";
    case ScheduleFamily::geometric: return "geometric";
    case ScheduleFamily::d_linear: return "d_linear";
    case ScheduleFamily::d_quadratic: return "d_quadratic";
    case ScheduleFamily::d_geometric: return "d_geometric";
    case ScheduleFamily::oracle: return "oracle";
  }
  return "?";
}

inline ScheduleFamily schedule_family_from_string(std::string_view s) {
  if (s == "constant") return ScheduleFamily::constant;
  if (s == "linear") return ScheduleFamily::linear;
  if (s == "quadratic") return ScheduleFamily::quadratic;
  if (s == "geometric") return ScheduleFamily::geometric;
  if (s == "d_linear" || s == "d-linear") return ScheduleFamily::d_linear;
  if (s == "d_quadratic" || s == "d-quadratic") return ScheduleFamily::d_quadratic;
  if (s == "d_geometric" || s == "d-geometric") return ScheduleFamily::d_geometric;
  if (s == "oracle") return ScheduleFamily::oracle;
  throw std::invalid_argument("unknown schedule family: " + std::string(s));
}

/// Coefficient schedule over T epochs of M iterations each. The epoch index
/// s is the schedule's time variable; global families are constant within an
/// epoch, double families add a within-epoch decay in i. alpha_final is the
/// geometric terminal value and also the additive constant keeping
/// d_geometric's base positive (default 0.01 for both).
struct ScheduleSpec {
  ScheduleFamily family = ScheduleFamily::linear;
  double alpha0 = 0.5;
  double alpha_final = 0.01;
  long long epochs = 1;          // T
  long long iters_per_epoch = 1; // M

  void validate() const {
    if (!(alpha0 >= 0.0 && alpha0 <= 1.0))
      throw std::invalid_argument("ScheduleSpec: alpha0 must be in [0, 1]");
    if (epochs < 1) throw std::invalid_argument("ScheduleSpec: epochs must be >= 1");
    if (iters_per_epoch < 1)
      throw std::invalid_argument("ScheduleSpec: iters_per_epoch must be >= 1");
    if ((family == ScheduleFamily::geometric || family == ScheduleFamily::d_geometric) &&
        !(alpha_final > 0.0 && alpha_final <= alpha0))
      throw std::invalid_argument(
          "ScheduleSpec: alpha_final must be in (0, alpha0] for geometric families");
  }
};

/// Evaluates the schedule at epoch s, within-epoch iteration i.
///
///   linear       a0 (1 - s/T)
///   quadratic    (a0 / T^2) (T - s)^2
///   geometric    a0 (a_final / a0)^(s/T)
///   d_linear     a_lin (1 - i/M) + a_lin
///   d_quadratic  (1 - a_quad) (M - i)^2 / M^2 + a_quad
///   d_geometric  (a_geo + a_final)^(i/M)
///
/// s may equal T for boundary inspection; training drivers only use s < T.
/// The oracle family has no closed form and rejects evaluation: callers must
/// use the measured per-component optimal coefficient instead.
inline double schedule_alpha(const ScheduleSpec& spec, long long s, long long i) {
  const double T = static_cast<double>(spec.epochs);
  const double M = static_cast<double>(spec.iters_per_epoch);
  if (s < 0 || s > spec.epochs)
    throw std::invalid_argument("schedule_alpha: epoch index out of range");
  if (i < 0 || i >= spec.iters_per_epoch)
    throw std::invalid_argument("schedule_alpha: iteration index out of range");
  const double sd = static_cast<double>(s);
  const double id = static_cast<double>(i);

  switch (spec.family) {
    case ScheduleFamily::constant:
      return spec.alpha0;
    case ScheduleFamily::linear:
      return spec.alpha0 * (1.0 - sd / T);
    case ScheduleFamily::quadratic:
      return spec.alpha0 / (T * T) * (T - sd) * (T - sd);
    case ScheduleFamily::geometric:
      return spec.alpha0 * std::pow(spec.alpha_final / spec.alpha0, sd / T);
    case ScheduleFamily::d_linear: {
      double a = spec.alpha0 * (1.0 - sd / T);
      return a * (1.0 - id / M) + a;
    }
    case ScheduleFamily::d_quadratic: {
      double a = spec.alpha0 / (T * T) * (T - sd) * (T - sd);
      return (1.0 - a) * ((M - id) * (M - id) / (M * M)) + a;
    }
    case ScheduleFamily::d_geometric: {
      double a = spec.alpha0 * std::pow(spec.alpha_final / spec.alpha0, sd / T);
      return std::pow(a + spec.alpha_final, id / M);
    }
    case ScheduleFamily::oracle:
      throw std::invalid_argument(
          "schedule_alpha: oracle family is computed per iteration, not scheduled");
  }
  throw std::invalid_argument("schedule_alpha: unknown family");
}

}  // namespace vropt
