#pragma once

#include <stdexcept>
#include <string>

namespace lrcal {

// File or on-disk format problem. The message names the offending file
// and, where applicable, the offending field.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Optimization aborted (e.g. the objective returned a non-finite value).
class OptimizationError : public std::runtime_error {
 public:
  explicit OptimizationError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace lrcal
