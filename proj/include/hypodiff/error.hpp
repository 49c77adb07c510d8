#ifndef HYPODIFF_ERROR_HPP
#define HYPODIFF_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypodiff {

/// Precondition violated by the caller.
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach the accuracy it promises.
class NumericalFailure : public std::runtime_error {
public:
  NumericalFailure(const std::string &what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Malformed or unsupported file content.
class FormatError : public std::runtime_error {
public:
  FormatError(const std::string &what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// The planar velocity of a curve vanishes at a node.
class CuspCandidate : public std::domain_error {
public:
  explicit CuspCandidate(std::size_t node)
      : std::domain_error("vanishing velocity at node " + std::to_string(node)), node_(node) {}

  std::size_t node() const noexcept { return node_; }

private:
  std::size_t node_;
};

} // namespace hypodiff

#endif
