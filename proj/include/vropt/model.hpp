#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "vropt/batching.hpp"
#include "vropt/dataset.hpp"
#include "vropt/errors.hpp"
#include "vropt/flatten.hpp"
#include "vropt/rng.hpp"
#include "vropt/vec.hpp"

namespace vropt {

/// Fully-connected classifier: len(hidden_widths) hidden ReLU layers plus a
/// linear output layer. Empty hidden_widths is logistic regression; an
/// "MLP-k" has k-1 hidden layers.
struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_widths;
  int n_classes = 0;
  double label_smoothing = 0.1;

  std::size_t depth() const { return hidden_widths.size() + 1; }

  void validate() const {
    if (input_dim < 1) throw std::invalid_argument("ModelSpec: input_dim must be >= 1");
    if (n_classes < 2) throw std::invalid_argument("ModelSpec: n_classes must be >= 2");
    for (std::size_t w : hidden_widths)
      if (w < 1) throw std::invalid_argument("ModelSpec: hidden widths must be >= 1");
    if (!(label_smoothing >= 0.0 && label_smoothing < 0.5))
      throw std::invalid_argument("ModelSpec: label_smoothing must be in [0, 0.5)");
  }

  /// Layer fan-in/fan-out pairs, input to output.
  std::vector<std::pair<std::size_t, std::size_t>> layer_dims() const {
    std::vector<std::pair<std::size_t, std::size_t>> dims;
    std::size_t in = input_dim;
    for (std::size_t w : hidden_widths) {
      dims.emplace_back(in, w);
      in = w;
    }
    dims.emplace_back(in, static_cast<std::size_t>(n_classes));
    return dims;
  }

  std::size_t param_count() const {
    std::size_t total = 0;
    for (auto [fin, fout] : layer_dims()) total += fin * fout + fout;
    return total;
  }
};

/// Flattening layout: per layer, weight matrix (out x in, row-major) then
/// bias vector.
inline Layout param_layout(const ModelSpec& spec) {
  Layout layout;
  std::size_t l = 0;
  for (auto [fin, fout] : spec.layer_dims()) {
    layout.push_back({"layer" + std::to_string(l) + ".weight", {fout, fin}});
    layout.push_back({"layer" + std::to_string(l) + ".bias", {fout}});
    ++l;
  }
  return layout;
}

struct Model {
  ModelSpec spec;
  ParamVector params;
};

/// Weights from trunc_normal_init(std=0.2), biases zero.
inline Model init_model(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  Model m{spec, {}};
  m.params.reserve(spec.param_count());
  for (auto [fin, fout] : spec.layer_dims()) {
    auto w = trunc_normal_init(static_cast<std::int64_t>(fin * fout), 0.2, rng);
    m.params.insert(m.params.end(), w.begin(), w.end());
    m.params.insert(m.params.end(), fout, 0.0);
  }
  return m;
}

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

namespace detail {

struct LayerOffsets {
  std::size_t w = 0, b = 0, fin = 0, fout = 0;
};

inline std::vector<LayerOffsets> layer_offsets(const ModelSpec& spec) {
  std::vector<LayerOffsets> offs;
  std::size_t pos = 0;
  for (auto [fin, fout] : spec.layer_dims()) {
    offs.push_back({pos, pos + fin * fout, fin, fout});
    pos += fin * fout + fout;
  }
  return offs;
}

}  // namespace detail

/// Mean label-smoothed softmax cross-entropy over the batch and its exact
/// gradient, flattened in layout order. Samples are accumulated in input
/// order, so permuting a batch moves results only at round-off level.
inline LossGrad loss_and_grad(const Model& model, const Dataset& ds,
                              std::span<const std::size_t> batch) {
  const ModelSpec& spec = model.spec;
  if (ds.dim != spec.input_dim)
    throw StructuralError("loss_and_grad: dataset dim does not match model input_dim");
  if (batch.empty()) throw std::invalid_argument("loss_and_grad: empty batch");

  const auto offs = detail::layer_offsets(spec);
  const std::size_t n_layers = offs.size();
  const int C = spec.n_classes;
  const double eps = spec.label_smoothing;
  const double* P = model.params.data();

  LossGrad out;
  out.grad.assign(model.params.size(), 0.0);
  double* G = out.grad.data();

  // Per-layer activation buffers, reused across samples.
  std::vector<std::vector<double>> acts(n_layers);  // post-activation per layer
  for (std::size_t l = 0; l < n_layers; ++l) acts[l].resize(offs[l].fout);
  std::vector<double> delta, delta_prev, prob(static_cast<std::size_t>(C));

  double loss_sum = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    auto x = ds.row(batch[s]);
    int label = ds.labels[batch[s]];

    // Forward: ReLU on hidden layers, identity on the output layer.
    const double* h = x.data();
    for (std::size_t l = 0; l < n_layers; ++l) {
      const auto& o = offs[l];
      double* z = acts[l].data();
      for (std::size_t r = 0; r < o.fout; ++r) {
        double acc = P[o.b + r];
        const double* wr = P + o.w + r * o.fin;
        for (std::size_t c = 0; c < o.fin; ++c) acc += wr[c] * h[c];
        if (!std::isfinite(acc))
          throw NumericalError("loss_and_grad: non-finite activation at layer",
                               static_cast<long long>(l));
        z[r] = (l + 1 < n_layers && acc < 0.0) ? 0.0 : acc;
      }
      h = acts[l].data();
    }

    // Log-softmax with max shift; smoothed target q = (1-eps)*onehot + eps/C.
    const double* logits = acts[n_layers - 1].data();
    double zmax = logits[0];
    for (int c = 1; c < C; ++c) zmax = std::max(zmax, logits[c]);
    double sumexp = 0.0;
    for (int c = 0; c < C; ++c) sumexp += std::exp(logits[c] - zmax);
    double logz = std::log(sumexp) + zmax;

    double sample_loss = 0.0;
    for (int c = 0; c < C; ++c) {
      double logp = logits[c] - logz;
      prob[static_cast<std::size_t>(c)] = std::exp(logp);
      double q = eps / C + (c == label ? 1.0 - eps : 0.0);
      if (q != 0.0) sample_loss -= q * logp;
    }
    if (!std::isfinite(sample_loss))
      throw NumericalError("loss_and_grad: non-finite loss at layer",
                           static_cast<long long>(n_layers - 1));
    loss_sum += sample_loss;

    // Backward. delta starts as dloss/dlogits = p - q.
    delta.resize(static_cast<std::size_t>(C));
    for (int c = 0; c < C; ++c)
      delta[static_cast<std::size_t>(c)] =
          prob[static_cast<std::size_t>(c)] - (eps / C + (c == label ? 1.0 - eps : 0.0));

    for (std::size_t l = n_layers; l-- > 0;) {
      const auto& o = offs[l];
      const double* hin = (l == 0) ? x.data() : acts[l - 1].data();
      for (std::size_t r = 0; r < o.fout; ++r) {
        double d = delta[r];
        double* gw = G + o.w + r * o.fin;
        for (std::size_t c = 0; c < o.fin; ++c) gw[c] += d * hin[c];
        G[o.b + r] += d;
      }
      if (l > 0) {
        // delta_prev = W^T delta, gated by the ReLU subgradient (0 at 0).
        delta_prev.assign(o.fin, 0.0);
        for (std::size_t r = 0; r < o.fout; ++r) {
          double d = delta[r];
          const double* wr = P + o.w + r * o.fin;
          for (std::size_t c = 0; c < o.fin; ++c) delta_prev[c] += wr[c] * d;
        }
        const double* hprev = acts[l - 1].data();
        for (std::size_t c = 0; c < o.fin; ++c)
          if (hprev[c] <= 0.0) delta_prev[c] = 0.0;
        delta.swap(delta_prev);
      }
    }
  }

  double inv_b = 1.0 / static_cast<double>(batch.size());
  out.loss = loss_sum * inv_b;
  for (auto& g : out.grad) g *= inv_b;
  return out;
}

/// Arithmetic mean of per-batch gradients, accumulated in batch order.
inline ParamVector full_gradient(const Model& model, const Dataset& ds,
                                 const std::vector<Batch>& batches) {
  if (batches.empty()) throw std::invalid_argument("full_gradient: no batches");
  ParamVector acc(model.params.size(), 0.0);
  for (const auto& b : batches) {
    auto lg = loss_and_grad(model, ds, b);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += lg.grad[i];
  }
  double inv = 1.0 / static_cast<double>(batches.size());
  for (auto& v : acc) v *= inv;
  return acc;
}

/// Argmax class prediction for one row.
inline int predict(const Model& model, std::span<const double> x) {
  const auto offs = detail::layer_offsets(model.spec);
  const double* P = model.params.data();
  std::vector<double> cur(x.begin(), x.end()), next;
  for (std::size_t l = 0; l < offs.size(); ++l) {
    const auto& o = offs[l];
    next.assign(o.fout, 0.0);
    for (std::size_t r = 0; r < o.fout; ++r) {
      double acc = P[o.b + r];
      const double* wr = P + o.w + r * o.fin;
      for (std::size_t c = 0; c < o.fin; ++c) acc += wr[c] * cur[c];
      next[r] = (l + 1 < offs.size() && acc < 0.0) ? 0.0 : acc;
    }
    cur.swap(next);
  }
  return static_cast<int>(std::max_element(cur.begin(), cur.end()) - cur.begin());
}

inline double accuracy(const Model& model, const Dataset& ds) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ds.n; ++i)
    if (predict(model, ds.row(i)) == ds.labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ds.n);
}

// ---------------------------------------------------------------------------
// Checkpoint format v1 (little-endian):
//   magic "VROPTCK1" | u32 input_dim | u32 n_hidden | u32[n_hidden] widths |
//   u32 n_classes | f64 label_smoothing | u64 param_count | f64[count] params
// ---------------------------------------------------------------------------

inline void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };

  out.write("VROPTCK1", 8);
  put_u32(static_cast<std::uint32_t>(model.spec.input_dim));
  put_u32(static_cast<std::uint32_t>(model.spec.hidden_widths.size()));
  for (std::size_t w : model.spec.hidden_widths) put_u32(static_cast<std::uint32_t>(w));
  put_u32(static_cast<std::uint32_t>(model.spec.n_classes));
  put_f64(model.spec.label_smoothing);
  put_u64(model.params.size());
  out.write(reinterpret_cast<const char*>(model.params.data()),
            static_cast<std::streamsize>(model.params.size() * 8));
  if (!out) throw std::runtime_error("save_checkpoint: write failed: " + path.string());
}

inline Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "VROPTCK1", 8) != 0)
    throw FormatError("load_checkpoint: bad magic in " + path.string());
  auto get_u32 = [&] {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_u64 = [&] {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto get_f64 = [&] {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };

  Model m;
  m.spec.input_dim = get_u32();
  std::uint32_t n_hidden = get_u32();
  m.spec.hidden_widths.resize(n_hidden);
  for (auto& w : m.spec.hidden_widths) w = get_u32();
  m.spec.n_classes = static_cast<int>(get_u32());
  m.spec.label_smoothing = get_f64();
  std::uint64_t count = get_u64();
  if (!in) throw FormatError("load_checkpoint: truncated header in " + path.string());
  m.spec.validate();
  if (count != m.spec.param_count())
    throw FormatError("load_checkpoint: param count does not match spec");
  m.params.resize(count);
  in.read(reinterpret_cast<char*>(m.params.data()),
          static_cast<std::streamsize>(count * 8));
  if (!in) throw FormatError("load_checkpoint: truncated params in " + path.string());
  return m;
}

}  // namespace vropt
