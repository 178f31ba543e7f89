#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "vropt/errors.hpp"
#include "vropt/vec.hpp"

namespace vropt {

/// One tensor slot in a flattening layout. `name` identifies the slot
/// (e.g. "layer0.weight"); the slot order defines the component order of
/// the flat vector and is stable for a fixed architecture.
struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;

  std::size_t count() const {
    std::size_t c = 1;
    for (std::size_t d : shape) c *= d;
    return c;
  }
};

using Layout = std::vector<TensorInfo>;

inline std::size_t layout_count(const Layout& layout) {
  std::size_t total = 0;
  for (const auto& t : layout) total += t.count();
  return total;
}

/// Concatenates tensors into one flat vector in layout order.
inline ParamVector flatten(const std::vector<std::vector<double>>& tensors,
                           const Layout& layout) {
  if (tensors.size() != layout.size())
    throw StructuralError("flatten: tensor count does not match layout");
  ParamVector out;
  out.reserve(layout_count(layout));
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    if (tensors[t].size() != layout[t].count())
      throw StructuralError("flatten: tensor '" + layout[t].name +
                            "' has wrong element count");
    out.insert(out.end(), tensors[t].begin(), tensors[t].end());
  }
  return out;
}

/// Inverse of flatten; round-trip is the identity.
inline std::vector<std::vector<double>> unflatten(const ParamVector& flat,
                                                  const Layout& layout) {
  if (flat.size() != layout_count(layout))
    throw StructuralError("unflatten: flat length does not match layout");
  std::vector<std::vector<double>> out;
  out.reserve(layout.size());
  std::size_t off = 0;
  for (const auto& t : layout) {
    out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(off),
                     flat.begin() + static_cast<std::ptrdiff_t>(off + t.count()));
    off += t.count();
  }
  return out;
}

}  // namespace vropt
