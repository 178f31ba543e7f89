#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vropt/errors.hpp"
#include "vropt/rng.hpp"
#include "vropt/vec.hpp"

namespace vropt {

/// In-memory classification dataset: row-major features, dense labels.
struct Dataset {
  std::size_t n = 0;
  std::size_t dim = 0;
  int n_classes = 0;
  std::vector<double> features;        // n * dim, row-major
  std::vector<int> labels;             // each in [0, n_classes)
  std::vector<long long> label_values; // original label per dense index (loaders)

  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
};

/// Gaussian blobs: one unit-covariance cluster per class, mean drawn
/// uniformly on the sphere of radius `class_separation`. Samples are laid
/// out class by class, so labels are exactly balanced.
inline Dataset gen_synthetic(int n_classes, std::int64_t n_per_class,
                             std::int64_t dim, double class_separation,
                             Rng& rng) {
  if (n_classes < 2) throw std::invalid_argument("gen_synthetic: n_classes must be >= 2");
  if (n_per_class < 1) throw std::invalid_argument("gen_synthetic: n_per_class must be >= 1");
  if (dim < 1) throw std::invalid_argument("gen_synthetic: dim must be >= 1");
  if (!(class_separation > 0.0))
    throw std::invalid_argument("gen_synthetic: class_separation must be > 0");

  Dataset ds;
  ds.dim = static_cast<std::size_t>(dim);
  ds.n_classes = n_classes;
  ds.n = static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(n_per_class);
  ds.features.resize(ds.n * ds.dim);
  ds.labels.resize(ds.n);

  std::vector<double> mean(ds.dim);
  std::size_t row = 0;
  for (int c = 0; c < n_classes; ++c) {
    double norm2 = 0.0;
    for (auto& m : mean) {
      m = rng.normal();
      norm2 += m * m;
    }
    double scale = class_separation / std::sqrt(std::max(norm2, 1e-300));
    for (auto& m : mean) m *= scale;
    for (std::int64_t k = 0; k < n_per_class; ++k, ++row) {
      double* dst = ds.features.data() + row * ds.dim;
      for (std::size_t j = 0; j < ds.dim; ++j) dst[j] = mean[j] + rng.normal();
      ds.labels[row] = c;
    }
  }
  return ds;
}

namespace detail {

inline bool parse_double(std::string_view s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc{} && r.ptr == e;
}

inline bool parse_ll(std::string_view s, long long& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto r = std::from_chars(b, e, out);
  return r.ec == std::errc{} && r.ptr == e;
}

inline std::vector<std::string_view> split_csv_row(std::string_view line,
                                                   std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Loads `label,feat_0,...,feat_{dim-1}` rows. `#` lines are comments; an
/// optional header is detected by a non-numeric first field. Labels are
/// re-indexed densely to [0, n_classes) in ascending order of the original
/// values, which are kept in `label_values`.
inline Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());

  std::vector<long long> raw_labels;
  std::vector<double> feats;
  std::size_t dim = 0;
  bool saw_data = false;
  bool header_checked = false;

  std::string line;
  std::vector<std::string_view> fields;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv = detail::trim(line);
    if (sv.empty() || sv.front() == '#') continue;
    detail::split_csv_row(sv, fields);

    if (!header_checked) {
      header_checked = true;
      long long probe;
      if (!detail::parse_ll(detail::trim(fields[0]), probe)) continue;  // header row
    }
    if (fields.size() < 2)
      throw ParseError("load_csv: row needs a label and at least one feature", line_no);

    long long label;
    if (!detail::parse_ll(detail::trim(fields[0]), label))
      throw ParseError("load_csv: non-integer label '" + std::string(fields[0]) + "'",
                       line_no);
    if (!saw_data) {
      dim = fields.size() - 1;
      saw_data = true;
    } else if (fields.size() - 1 != dim) {
      throw ParseError("load_csv: ragged row (expected " + std::to_string(dim) +
                           " features, got " + std::to_string(fields.size() - 1) + ")",
                       line_no);
    }
    raw_labels.push_back(label);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v;
      if (!detail::parse_double(detail::trim(fields[j]), v))
        throw ParseError("load_csv: non-numeric feature '" + std::string(fields[j]) + "'",
                         line_no);
      feats.push_back(v);
    }
  }
  if (!saw_data) throw std::runtime_error("load_csv: no data rows in " + path.string());

  // Dense re-indexing in ascending order of original label values.
  std::map<long long, int> dense;
  for (long long v : raw_labels) dense.emplace(v, 0);
  Dataset ds;
  ds.label_values.reserve(dense.size());
  int next = 0;
  for (auto& [value, idx] : dense) {
    idx = next++;
    ds.label_values.push_back(value);
  }

  ds.n = raw_labels.size();
  ds.dim = dim;
  ds.n_classes = next;
  ds.features = std::move(feats);
  ds.labels.resize(ds.n);
  for (std::size_t i = 0; i < ds.n; ++i) ds.labels[i] = dense[raw_labels[i]];
  if (!vec_all_finite(ds.features))
    throw std::runtime_error("load_csv: non-finite feature in " + path.string());
  return ds;
}

/// Writes the dense-label CSV form that load_csv reads back exactly
/// (features printed with 17 significant digits).
inline void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path.string());
  char buf[40];
  for (std::size_t i = 0; i < ds.n; ++i) {
    out << ds.labels[i];
    auto row = ds.row(i);
    for (double v : row) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << '\n';
  }
}

/// CIFAR-10 channel statistics used for standardization (pixels first
/// scaled to [0,1]).
inline constexpr std::array<double, 3> kCifar10Mean = {0.4914, 0.4822, 0.4465};
inline constexpr std::array<double, 3> kCifar10Std = {0.2470, 0.2435, 0.2616};

/// Reads every `*.bin` file in the directory (sorted by filename) in the
/// standard CIFAR-10 binary layout: 3073-byte records of 1 label byte plus
/// 3072 pixel bytes (1024 per channel, R then G then B).
inline Dataset load_cifar10_binary(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw std::runtime_error("load_cifar10_binary: not a directory: " + dir.string());

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".bin")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("load_cifar10_binary: no .bin files in " + dir.string());

  constexpr std::size_t kRecord = 3073;
  constexpr std::size_t kPixels = 3072;
  constexpr std::size_t kPlane = 1024;

  Dataset ds;
  ds.dim = kPixels;
  ds.n_classes = 10;

  std::vector<unsigned char> rec(kRecord);
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw std::runtime_error("load_cifar10_binary: cannot open " + f.string());
    auto size = fs::file_size(f);
    if (size % kRecord != 0)
      throw FormatError("load_cifar10_binary: " + f.string() + " has size " +
                        std::to_string(size) + ", not a multiple of 3073");
    std::size_t records = size / kRecord;
    for (std::size_t r = 0; r < records; ++r) {
      in.read(reinterpret_cast<char*>(rec.data()), static_cast<std::streamsize>(kRecord));
      if (!in) throw FormatError("load_cifar10_binary: short read in " + f.string());
      if (rec[0] > 9)
        throw FormatError("load_cifar10_binary: label byte " + std::to_string(rec[0]) +
                          " out of range in " + f.string());
      ds.labels.push_back(rec[0]);
      for (std::size_t p = 0; p < kPixels; ++p) {
        std::size_t channel = p / kPlane;
        double px = static_cast<double>(rec[1 + p]) / 255.0;
        ds.features.push_back((px - kCifar10Mean[channel]) / kCifar10Std[channel]);
      }
    }
  }
  ds.n = ds.labels.size();
  ds.label_values.assign({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  return ds;
}

}  // namespace vropt
