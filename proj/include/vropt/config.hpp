#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vropt/errors.hpp"
#include "vropt/lr.hpp"
#include "vropt/rng.hpp"
#include "vropt/schedule.hpp"
#include "vropt/train.hpp"
#include "vropt/vr.hpp"

namespace vropt {

using json = nlohmann::json;

struct DatasetConfig {
  enum class Source { synthetic, csv, cifar10 };
  Source source = Source::synthetic;
  // synthetic
  int n_classes = 10;
  long long n_per_class = 256;
  long long dim = 32;
  double class_separation = 3.0;
  // csv / cifar10
  std::string path;
};

/// VR section of a run config. Schedule T and M are filled in from the run
/// geometry; family "off" is represented by the optional being empty.
struct VrSection {
  ScheduleFamily family = ScheduleFamily::linear;
  double alpha0 = 0.5;
  double alpha_final = 0.01;
  long long inner_loop_size = 0;  // 0 = once per epoch
  double early_fraction = 1.0;
  long long transition_epochs = 1;
};

struct MeasurementConfig {
  bool enabled = true;
  long long every_k_epochs = 1;
  long long dense_first_epochs = 5;
  long long n_samples = 64;  // gradients collected per checkpoint
};

struct RunConfig {
  DatasetConfig dataset;
  std::vector<long long> hidden_widths;
  double label_smoothing = 0.1;

  OptimizerConfig optimizer;

  LrScheduleKind lr_schedule = LrScheduleKind::cosine_warmup;
  double base_lr = 4e-3;
  long long warmup_epochs = 0;
  long long reference_batch_size = 128;
  bool lr_linear_scaling = false;

  std::optional<VrSection> vr;

  long long epochs = 1;
  long long batch_size = 128;
  std::vector<std::uint64_t> seeds;
  MeasurementConfig measurement;

  // Output routing only; excluded from the config hash.
  std::string run_name = "run";

  double effective_base_lr() const {
    if (!lr_linear_scaling) return base_lr;
    return base_lr * static_cast<double>(batch_size) /
           static_cast<double>(reference_batch_size);
  }
};

namespace cfg_detail {

struct Validator {
  std::vector<std::string> issues;
  void fail(std::string msg) { issues.push_back(std::move(msg)); }
  void finish() {
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }
};

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& where, Validator& v) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) v.fail(where + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T def, const std::string& where,
         Validator& v) {
  if (!obj.contains(key)) return def;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    v.fail(where + "." + key + ": wrong type");
    return def;
  }
}

}  // namespace cfg_detail

/// Parses and validates a run config, collecting every issue before
/// throwing ConfigError. Defaults follow the standard recipe: AdamW with
/// base lr 4e-3, betas (0.9, 0.999), weight decay 0.05, label smoothing
/// 0.1, cosine decay with linear warmup.
inline RunConfig parse_run_config(const json& j) {
  using namespace cfg_detail;
  Validator v;
  RunConfig c;

  if (!j.is_object()) {
    v.fail("config root must be a JSON object");
    v.finish();
  }
  check_keys(j,
             {"dataset", "model", "optimizer", "lr", "vr", "epochs", "batch_size",
              "seeds", "measurement", "run_name"},
             "config", v);

  // dataset
  if (!j.contains("dataset") || !j.at("dataset").is_object()) {
    v.fail("dataset: required object section");
  } else {
    const auto& d = j.at("dataset");
    check_keys(d, {"source", "n_classes", "n_per_class", "dim", "class_separation", "path"},
               "dataset", v);
    std::string source = get_or<std::string>(d, "source", "synthetic", "dataset", v);
    if (source == "synthetic")
      c.dataset.source = DatasetConfig::Source::synthetic;
    else if (source == "csv")
      c.dataset.source = DatasetConfig::Source::csv;
    else if (source == "cifar10")
      c.dataset.source = DatasetConfig::Source::cifar10;
    else
      v.fail("dataset.source: must be synthetic | csv | cifar10");
    c.dataset.n_classes = static_cast<int>(get_or<long long>(d, "n_classes", 10, "dataset", v));
    c.dataset.n_per_class = get_or<long long>(d, "n_per_class", 256, "dataset", v);
    c.dataset.dim = get_or<long long>(d, "dim", 32, "dataset", v);
    c.dataset.class_separation =
        get_or<double>(d, "class_separation", 3.0, "dataset", v);
    c.dataset.path = get_or<std::string>(d, "path", "", "dataset", v);
    if (c.dataset.source == DatasetConfig::Source::synthetic) {
      if (c.dataset.n_classes < 2) v.fail("dataset.n_classes: must be >= 2");
      if (c.dataset.n_per_class < 1) v.fail("dataset.n_per_class: must be >= 1");
      if (c.dataset.dim < 1) v.fail("dataset.dim: must be >= 1");
      if (!(c.dataset.class_separation > 0.0))
        v.fail("dataset.class_separation: must be > 0");
    } else if (c.dataset.path.empty()) {
      v.fail("dataset.path: required for csv/cifar10 sources");
    }
  }

  // model
  if (j.contains("model")) {
    const auto& m = j.at("model");
    check_keys(m, {"hidden_widths", "label_smoothing"}, "model", v);
    c.hidden_widths = get_or<std::vector<long long>>(m, "hidden_widths", {}, "model", v);
    for (long long w : c.hidden_widths)
      if (w < 1) v.fail("model.hidden_widths: widths must be >= 1");
    c.label_smoothing = get_or<double>(m, "label_smoothing", 0.1, "model", v);
    if (!(c.label_smoothing >= 0.0 && c.label_smoothing < 0.5))
      v.fail("model.label_smoothing: must be in [0, 0.5)");
  }

  // optimizer
  if (!j.contains("optimizer") || !j.at("optimizer").is_object()) {
    v.fail("optimizer: required object section");
  } else {
    const auto& o = j.at("optimizer");
    check_keys(o,
               {"type", "momentum", "beta1", "beta2", "eps", "weight_decay",
                "bias_correction"},
               "optimizer", v);
    std::string type = get_or<std::string>(o, "type", "", "optimizer", v);
    if (type == "sgd") {
      c.optimizer.type = OptimizerConfig::Type::sgd;
      c.optimizer.sgd.momentum = get_or<double>(o, "momentum", 0.9, "optimizer", v);
      c.optimizer.sgd.weight_decay = get_or<double>(o, "weight_decay", 0.0, "optimizer", v);
      if (!(c.optimizer.sgd.momentum >= 0.0 && c.optimizer.sgd.momentum < 1.0))
        v.fail("optimizer.momentum: must be in [0, 1)");
      if (c.optimizer.sgd.weight_decay < 0.0)
        v.fail("optimizer.weight_decay: must be >= 0");
    } else if (type == "adamw") {
      c.optimizer.type = OptimizerConfig::Type::adamw;
      c.optimizer.adamw.beta1 = get_or<double>(o, "beta1", 0.9, "optimizer", v);
      c.optimizer.adamw.beta2 = get_or<double>(o, "beta2", 0.999, "optimizer", v);
      c.optimizer.adamw.eps = get_or<double>(o, "eps", 1e-8, "optimizer", v);
      c.optimizer.adamw.weight_decay = get_or<double>(o, "weight_decay", 0.05, "optimizer", v);
      c.optimizer.adamw.bias_correction =
          get_or<bool>(o, "bias_correction", false, "optimizer", v);
      if (!(c.optimizer.adamw.beta1 >= 0.0 && c.optimizer.adamw.beta1 < 1.0))
        v.fail("optimizer.beta1: must be in [0, 1)");
      if (!(c.optimizer.adamw.beta2 >= 0.0 && c.optimizer.adamw.beta2 < 1.0))
        v.fail("optimizer.beta2: must be in [0, 1)");
      if (!(c.optimizer.adamw.eps > 0.0)) v.fail("optimizer.eps: must be > 0");
      if (c.optimizer.adamw.weight_decay < 0.0)
        v.fail("optimizer.weight_decay: must be >= 0");
    } else {
      v.fail("optimizer.type: must be sgd | adamw");
    }
  }

  // lr
  if (j.contains("lr")) {
    const auto& l = j.at("lr");
    check_keys(l,
               {"schedule", "base_lr", "warmup_epochs", "reference_batch_size",
                "linear_scaling"},
               "lr", v);
    std::string sched = get_or<std::string>(l, "schedule", "cosine_warmup", "lr", v);
    if (sched == "constant")
      c.lr_schedule = LrScheduleKind::constant;
    else if (sched == "cosine_warmup")
      c.lr_schedule = LrScheduleKind::cosine_warmup;
    else
      v.fail("lr.schedule: must be constant | cosine_warmup");
    c.base_lr = get_or<double>(l, "base_lr", 4e-3, "lr", v);
    c.warmup_epochs = get_or<long long>(l, "warmup_epochs", 0, "lr", v);
    c.reference_batch_size = get_or<long long>(l, "reference_batch_size", 128, "lr", v);
    c.lr_linear_scaling = get_or<bool>(l, "linear_scaling", false, "lr", v);
    if (!(c.base_lr > 0.0)) v.fail("lr.base_lr: must be > 0");
    if (c.warmup_epochs < 0) v.fail("lr.warmup_epochs: must be >= 0");
    if (c.reference_batch_size < 1) v.fail("lr.reference_batch_size: must be >= 1");
  }

  // vr
  if (j.contains("vr")) {
    const auto& w = j.at("vr");
    check_keys(w,
               {"family", "alpha0", "alpha_final", "inner_loop_size", "early_fraction",
                "transition_epochs"},
               "vr", v);
    std::string family = get_or<std::string>(w, "family", "off", "vr", v);
    if (family != "off") {
      VrSection s;
      try {
        s.family = schedule_family_from_string(family);
      } catch (const std::invalid_argument& e) {
        v.fail(std::string("vr.family: ") + e.what());
      }
      s.alpha0 = get_or<double>(w, "alpha0", 0.5, "vr", v);
      s.alpha_final = get_or<double>(w, "alpha_final", 0.01, "vr", v);
      s.inner_loop_size = get_or<long long>(w, "inner_loop_size", 0, "vr", v);
      s.early_fraction = get_or<double>(w, "early_fraction", 1.0, "vr", v);
      s.transition_epochs =
          get_or<long long>(w, "transition_epochs", s.early_fraction < 1.0 ? 1 : 0, "vr", v);
      if (!(s.alpha0 >= 0.0 && s.alpha0 <= 1.0)) v.fail("vr.alpha0: must be in [0, 1]");
      if ((s.family == ScheduleFamily::geometric ||
           s.family == ScheduleFamily::d_geometric) &&
          !(s.alpha_final > 0.0 && s.alpha_final <= s.alpha0))
        v.fail("vr.alpha_final: must be in (0, alpha0] for geometric families");
      if (s.inner_loop_size < 0) v.fail("vr.inner_loop_size: must be >= 0");
      if (!(s.early_fraction > 0.0 && s.early_fraction <= 1.0))
        v.fail("vr.early_fraction: must be in (0, 1]");
      if (s.transition_epochs < 0) v.fail("vr.transition_epochs: must be >= 0");
      c.vr = s;
    }
  }

  c.epochs = get_or<long long>(j, "epochs", 0, "config", v);
  c.batch_size = get_or<long long>(j, "batch_size", 0, "config", v);
  if (c.epochs < 1) v.fail("epochs: required, must be >= 1");
  if (c.batch_size < 1) v.fail("batch_size: required, must be >= 1");
  if (c.warmup_epochs >= c.epochs && c.lr_schedule == LrScheduleKind::cosine_warmup &&
      c.warmup_epochs > 0)
    v.fail("lr.warmup_epochs: must be < epochs");

  c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {}, "config", v);
  if (c.seeds.empty()) v.fail("seeds: required, must be a nonempty array");

  if (j.contains("measurement")) {
    const auto& m = j.at("measurement");
    check_keys(m, {"enabled", "every_k_epochs", "dense_first_epochs", "n_samples"},
               "measurement", v);
    c.measurement.enabled = get_or<bool>(m, "enabled", true, "measurement", v);
    c.measurement.every_k_epochs =
        get_or<long long>(m, "every_k_epochs", 1, "measurement", v);
    c.measurement.dense_first_epochs =
        get_or<long long>(m, "dense_first_epochs", 5, "measurement", v);
    c.measurement.n_samples = get_or<long long>(m, "n_samples", 64, "measurement", v);
    if (c.measurement.every_k_epochs < 1) v.fail("measurement.every_k_epochs: must be >= 1");
    if (c.measurement.dense_first_epochs < 0)
      v.fail("measurement.dense_first_epochs: must be >= 0");
    if (c.measurement.n_samples < 2) v.fail("measurement.n_samples: must be >= 2");
  }

  c.run_name = get_or<std::string>(j, "run_name", "run", "config", v);

  v.finish();
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError({std::string("JSON parse failure: ") + e.what()});
  }
  return parse_run_config(j);
}

/// Normalized JSON echo of the semantic config (defaults filled in,
/// output-routing fields excluded). Key order is canonical, so its dump is
/// a stable hashing surface.
inline json semantic_config_json(const RunConfig& c) {
  json d;
  switch (c.dataset.source) {
    case DatasetConfig::Source::synthetic:
      d = {{"source", "synthetic"},
           {"n_classes", c.dataset.n_classes},
           {"n_per_class", c.dataset.n_per_class},
           {"dim", c.dataset.dim},
           {"class_separation", c.dataset.class_separation}};
      break;
    case DatasetConfig::Source::csv:
      d = {{"source", "csv"}, {"path", c.dataset.path}};
      break;
    case DatasetConfig::Source::cifar10:
      d = {{"source", "cifar10"}, {"path", c.dataset.path}};
      break;
  }

  json opt;
  if (c.optimizer.type == OptimizerConfig::Type::sgd) {
    opt = {{"type", "sgd"},
           {"momentum", c.optimizer.sgd.momentum},
           {"weight_decay", c.optimizer.sgd.weight_decay}};
  } else {
    opt = {{"type", "adamw"},
           {"beta1", c.optimizer.adamw.beta1},
           {"beta2", c.optimizer.adamw.beta2},
           {"eps", c.optimizer.adamw.eps},
           {"weight_decay", c.optimizer.adamw.weight_decay},
           {"bias_correction", c.optimizer.adamw.bias_correction}};
  }

  json vr;
  if (c.vr) {
    vr = {{"family", std::string(to_string(c.vr->family))},
          {"alpha0", c.vr->alpha0},
          {"alpha_final", c.vr->alpha_final},
          {"inner_loop_size", c.vr->inner_loop_size},
          {"early_fraction", c.vr->early_fraction},
          {"transition_epochs", c.vr->transition_epochs}};
  } else {
    vr = {{"family", "off"}};
  }

  return json{
      {"dataset", d},
      {"model",
       {{"hidden_widths", c.hidden_widths}, {"label_smoothing", c.label_smoothing}}},
      {"optimizer", opt},
      {"lr",
       {{"schedule",
         c.lr_schedule == LrScheduleKind::constant ? "constant" : "cosine_warmup"},
        {"base_lr", c.base_lr},
        {"warmup_epochs", c.warmup_epochs},
        {"reference_batch_size", c.reference_batch_size},
        {"linear_scaling", c.lr_linear_scaling}}},
      {"vr", vr},
      {"epochs", c.epochs},
      {"batch_size", c.batch_size},
      {"seeds", c.seeds},
      {"measurement",
       {{"enabled", c.measurement.enabled},
        {"every_k_epochs", c.measurement.every_k_epochs},
        {"dense_first_epochs", c.measurement.dense_first_epochs},
        {"n_samples", c.measurement.n_samples}}},
  };
}

/// FNV-1a over the canonical dump of the semantic config. Any semantic
/// field change changes the hash; identical configs share it.
inline std::uint64_t config_hash(const RunConfig& c) {
  return fnv1a64(semantic_config_json(c).dump());
}

}  // namespace vropt
