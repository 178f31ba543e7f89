#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace vropt {

// Shape or length disagreement between containers that must line up.
struct StructuralError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed text input; carries the 1-based physical line number.
struct ParseError : std::runtime_error {
  long long line = 0;
  ParseError(const std::string& msg, long long line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

// Malformed binary input.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf or a diverging iteration; carries the offending index
// (layer for gradient evaluation, global iteration for training).
struct NumericalError : std::runtime_error {
  long long index = -1;
  NumericalError(const std::string& msg, long long idx)
      : std::runtime_error(msg + " (index " + std::to_string(idx) + ")"),
        index(idx) {}
};

// Input whose statistics make the requested quantity undefined.
struct DegenerateInputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Aggregated run-config validation failures, all collected before any work.
struct ConfigError : std::runtime_error {
  std::vector<std::string> issues;
  explicit ConfigError(std::vector<std::string> list)
      : std::runtime_error(join(list)), issues(std::move(list)) {}

 private:
  static std::string join(const std::vector<std::string>& list) {
    std::string s = "invalid config:";
    for (const auto& e : list) s += "\n  - " + e;
    return s;
  }
};

}  // namespace vropt
