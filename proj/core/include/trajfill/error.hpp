#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trajfill {

enum class ErrorKind {
  kInvalidInput,
  kPolicy,
  kCollision,
  kCalibrationFailed,
  kParse,
  kCapacity,
  kScoring,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. `index` carries the offending
// sample, step or line number when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(message), kind_(kind), index_(index) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace trajfill
