#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "vropt/dataset.hpp"
#include "vropt/model.hpp"

using namespace vropt;
namespace fs = std::filesystem;

namespace {

// Independent oracle: central finite differences of the batch loss.
ParamVector fd_gradient(const Model& model, const Dataset& ds,
                        const std::vector<std::size_t>& batch, double h = 1e-5) {
  ParamVector fd(model.params.size());
  Model probe = model;
  for (std::size_t k = 0; k < fd.size(); ++k) {
    double saved = probe.params[k];
    probe.params[k] = saved + h;
    double up = loss_and_grad(probe, ds, batch).loss;
    probe.params[k] = saved - h;
    double down = loss_and_grad(probe, ds, batch).loss;
    probe.params[k] = saved;
    fd[k] = (up - down) / (2.0 * h);
  }
  return fd;
}

double max_rel_error(const ParamVector& got, const ParamVector& want,
                     double abs_floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t k = 0; k < got.size(); ++k) {
    double denom = std::fabs(want[k]);
    double err = std::fabs(got[k] - want[k]);
    worst = std::max(worst, denom < abs_floor ? err : err / denom);
  }
  return worst;
}

Dataset small_dataset(int classes, std::size_t dim, std::uint64_t seed,
                      std::int64_t per_class = 8) {
  Rng r(seed);
  return gen_synthetic(classes, per_class, static_cast<std::int64_t>(dim), 2.0, r);
}

std::vector<std::size_t> first_indices(std::size_t k) {
  std::vector<std::size_t> v(k);
  for (std::size_t i = 0; i < k; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("parameter counts match the layout") {
  ModelSpec lr{4, {}, 3, 0.1};
  REQUIRE(lr.param_count() == 4 * 3 + 3);
  ModelSpec mlp{8, {16, 16, 16}, 10, 0.1};
  REQUIRE(mlp.param_count() == 8 * 16 + 16 + 2 * (16 * 16 + 16) + 16 * 10 + 10);
  REQUIRE(mlp.param_count() == 858);
  REQUIRE(layout_count(param_layout(mlp)) == 858);
}

TEST_CASE("init is deterministic with zero biases") {
  ModelSpec spec{4, {5}, 3, 0.1};
  Rng a(9), b(9);
  Model ma = init_model(spec, a);
  Model mb = init_model(spec, b);
  REQUIRE(ma.params == mb.params);
  // Bias block of the first layer [4*5, 4*5+5) is zero.
  for (std::size_t i = 20; i < 25; ++i) REQUIRE(ma.params[i] == 0.0);
  // Weights respect the trunc normal bound.
  for (std::size_t i = 0; i < 20; ++i) REQUIRE(std::fabs(ma.params[i]) <= 0.4);
}

TEST_CASE("uniform logits give ln(n_classes) loss when smoothing is off") {
  ModelSpec spec{3, {}, 4, 0.0};
  Model m{spec, ParamVector(spec.param_count(), 0.0)};
  auto ds = small_dataset(4, 3, 10);
  auto lg = loss_and_grad(m, ds, first_indices(1));
  REQUIRE(lg.loss == Catch::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("label smoothing zero reproduces plain cross-entropy") {
  auto ds = small_dataset(3, 4, 11);
  ModelSpec s0{4, {6}, 3, 0.0};
  Rng r(12);
  Model m = init_model(s0, r);
  auto lg = loss_and_grad(m, ds, first_indices(6));

  // Plain cross-entropy computed independently from the forward pass.
  double want = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    // Forward by hand: single 6-wide hidden layer.
    const double* P = m.params.data();
    std::vector<double> h(6);
    for (int r_ = 0; r_ < 6; ++r_) {
      double acc = P[24 + r_];
      for (int c = 0; c < 4; ++c) acc += P[r_ * 4 + c] * ds.row(i)[c];
      h[r_] = std::max(acc, 0.0);
    }
    std::vector<double> z(3);
    for (int r_ = 0; r_ < 3; ++r_) {
      double acc = P[30 + 18 + r_];
      for (int c = 0; c < 6; ++c) acc += P[30 + r_ * 6 + c] * h[c];
      z[r_] = acc;
    }
    double zmax = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - zmax);
    lse = std::log(lse) + zmax;
    want += lse - z[ds.labels[i]];
  }
  want /= 6.0;
  REQUIRE(lg.loss == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches finite differences on a tiny model") {
  auto ds = small_dataset(2, 3, 13);
  ModelSpec spec{3, {}, 2, 0.0};
  Rng r(14);
  Model m = init_model(spec, r);
  auto batch = first_indices(4);
  auto lg = loss_and_grad(m, ds, batch);
  auto fd = fd_gradient(m, ds, batch);
  REQUIRE(max_rel_error(lg.grad, fd) <= 1e-6);
}

TEST_CASE("gradient check across the architecture matrix") {
  struct Case {
    std::size_t dim;
    std::vector<std::size_t> hidden;
    int classes;
    double smoothing;
  };
  std::vector<Case> cases = {
      {3, {}, 2, 0.0},        {5, {}, 10, 0.1},      {4, {8}, 3, 0.1},
      {6, {12}, 5, 0.0},      {4, {8, 8, 8}, 3, 0.1}, {16, {10, 10, 10}, 10, 0.1},
  };
  int trial = 0;
  for (const auto& c : cases) {
    for (int rep = 0; rep < 3; ++rep, ++trial) {
      auto ds = small_dataset(c.classes, c.dim, 100 + trial, 4);
      ModelSpec spec{c.dim, c.hidden, c.classes, c.smoothing};
      Rng r(200 + trial);
      Model m = init_model(spec, r);
      // Perturb away from the zero-bias init to exercise generic points.
      Rng pr(300 + trial);
      for (auto& p : m.params) p += 0.05 * pr.normal();
      auto batch = first_indices(5);
      auto lg = loss_and_grad(m, ds, batch);
      auto fd = fd_gradient(m, ds, batch);
      REQUIRE(max_rel_error(lg.grad, fd) <= 1e-4);
    }
  }
}

TEST_CASE("duplicating every batch sample leaves loss and grad at round-off") {
  auto ds = small_dataset(3, 4, 15);
  ModelSpec spec{4, {6}, 3, 0.1};
  Rng r(16);
  Model m = init_model(spec, r);
  auto batch = first_indices(5);
  std::vector<std::size_t> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  auto a = loss_and_grad(m, ds, batch);
  auto b = loss_and_grad(m, ds, doubled);
  REQUIRE(std::fabs(a.loss - b.loss) <= 1e-12);
  for (std::size_t k = 0; k < a.grad.size(); ++k)
    REQUIRE(std::fabs(a.grad[k] - b.grad[k]) <= 1e-12);
}

TEST_CASE("permuting batch samples moves results only within 1e-12") {
  // Accumulation follows input order; this pins that contract.
  auto ds = small_dataset(3, 4, 17);
  ModelSpec spec{4, {6}, 3, 0.1};
  Rng r(18);
  Model m = init_model(spec, r);
  std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};
  std::vector<std::size_t> shuffled = {5, 2, 0, 4, 1, 3};
  auto a = loss_and_grad(m, ds, batch);
  auto b = loss_and_grad(m, ds, shuffled);
  REQUIRE(std::fabs(a.loss - b.loss) <= 1e-12);
  for (std::size_t k = 0; k < a.grad.size(); ++k)
    REQUIRE(std::fabs(a.grad[k] - b.grad[k]) <= 1e-12);
}

TEST_CASE("full gradient of one batch equals that batch's gradient") {
  auto ds = small_dataset(2, 3, 19);
  ModelSpec spec{3, {}, 2, 0.1};
  Rng r(20);
  Model m = init_model(spec, r);
  std::vector<Batch> one{{0, 1, 2, 3}};
  auto fg = full_gradient(m, ds, one);
  auto lg = loss_and_grad(m, ds, one[0]);
  REQUIRE(fg == lg.grad);
}

TEST_CASE("full gradient of two identical batches equals either") {
  auto ds = small_dataset(2, 3, 21);
  ModelSpec spec{3, {}, 2, 0.1};
  Rng r(22);
  Model m = init_model(spec, r);
  std::vector<Batch> two{{0, 1, 2}, {0, 1, 2}};
  auto fg = full_gradient(m, ds, two);
  auto lg = loss_and_grad(m, ds, two[0]);
  REQUIRE(fg == lg.grad);
}

TEST_CASE("full gradient over a partition matches the one-batch gradient") {
  auto ds = small_dataset(4, 5, 23, 16);  // n = 64
  ModelSpec spec{5, {8}, 4, 0.1};
  Rng r(24);
  Model m = init_model(spec, r);
  std::vector<Batch> parts;
  std::vector<std::size_t> all;
  for (std::size_t start = 0; start < 64; start += 16) {
    Batch b;
    for (std::size_t i = start; i < start + 16; ++i) {
      b.push_back(i);
      all.push_back(i);
    }
    parts.push_back(std::move(b));
  }
  auto fg = full_gradient(m, ds, parts);
  auto lg = loss_and_grad(m, ds, all);
  for (std::size_t k = 0; k < fg.size(); ++k)
    REQUIRE(std::fabs(fg[k] - lg.grad[k]) <= 1e-12);
}

TEST_CASE("non-finite parameters raise a numerical error with the layer") {
  auto ds = small_dataset(2, 3, 25);
  ModelSpec spec{3, {4}, 2, 0.0};
  Rng r(26);
  Model m = init_model(spec, r);
  m.params[0] = std::numeric_limits<double>::infinity();
  try {
    loss_and_grad(m, ds, first_indices(2));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    REQUIRE(e.index == 0);
  }
}

TEST_CASE("checkpoint round-trips through disk") {
  ModelSpec spec{6, {9, 4}, 3, 0.05};
  Rng r(27);
  Model m = init_model(spec, r);
  auto path = fs::temp_directory_path() / "vropt_ckpt_test.bin";
  save_checkpoint(m, path);
  Model back = load_checkpoint(path);
  REQUIRE(back.spec.input_dim == spec.input_dim);
  REQUIRE(back.spec.hidden_widths == spec.hidden_widths);
  REQUIRE(back.spec.n_classes == spec.n_classes);
  REQUIRE(back.spec.label_smoothing == spec.label_smoothing);
  REQUIRE(back.params == m.params);
  fs::remove(path);
}

TEST_CASE("checkpoint loader rejects garbage") {
  auto path = fs::temp_directory_path() / "vropt_ckpt_bad.bin";
  {
    std::ofstream f(path, std::ios::binary);
    f << "not a checkpoint at all";
  }
  REQUIRE_THROWS_AS(load_checkpoint(path), FormatError);
  fs::remove(path);
}
