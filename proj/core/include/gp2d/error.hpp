#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gp2d {

enum class ErrorKind {
  invalid_input,
  numerical_failure,
  accuracy,
  solver,
  wrong_branch,
  root_bracket,
  empty_lattice,
  index,
  size,
  partition_of_unity,
  unbounded,
  config,
  io,
  internal_consistency,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so that the CLI can
/// report the failing stage without string matching.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::numerical_failure: return "numerical-failure";
    case ErrorKind::accuracy: return "accuracy";
    case ErrorKind::solver: return "solver";
    case ErrorKind::wrong_branch: return "wrong-branch";
    case ErrorKind::root_bracket: return "root-bracket";
    case ErrorKind::empty_lattice: return "empty-lattice";
    case ErrorKind::index: return "index";
    case ErrorKind::size: return "size";
    case ErrorKind::partition_of_unity: return "partition-of-unity";
    case ErrorKind::unbounded: return "unbounded";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
    case ErrorKind::internal_consistency: return "internal-consistency";
  }
  return "unknown";
}

}  // namespace gp2d
