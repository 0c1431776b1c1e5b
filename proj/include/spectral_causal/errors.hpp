#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spectral_causal {

// Base for every library error. `exit_code` follows the CLI contract:
// 2 input, 3 I/O, 4 numerical, 5 inadmissible.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(what, 2) {}
};

// Dimension mismatch between parts of a model.
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what) : Error(what, 2) {}
};

class StabilityError : public Error {
 public:
  StabilityError(const std::string& what, double spectral_radius)
      : Error(what, 2), spectral_radius_(spectral_radius) {}
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

class UnsupportedStructureError : public Error {
 public:
  explicit UnsupportedStructureError(const std::string& what) : Error(what, 2) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 3) {}
};

class ConditioningError : public Error {
 public:
  ConditioningError(const std::string& what, std::vector<std::size_t> bins)
      : Error(what, 4), bins_(std::move(bins)) {}
  const std::vector<std::size_t>& bins() const noexcept { return bins_; }

 private:
  std::vector<std::size_t> bins_;
};

class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what) : Error(what, 4) {}
};

class CoverageError : public Error {
 public:
  CoverageError(const std::string& what, std::size_t stratum) : Error(what, 4), stratum_(stratum) {}
  std::size_t stratum() const noexcept { return stratum_; }

 private:
  std::size_t stratum_;
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what) : Error(what, 4) {}
};

class InadmissibleError : public Error {
 public:
  InadmissibleError(const std::string& what, std::vector<std::string> violated)
      : Error(what, 5), violated_(std::move(violated)) {}
  const std::vector<std::string>& violated() const noexcept { return violated_; }

 private:
  std::vector<std::string> violated_;
};

std::string join_bins(const std::vector<std::size_t>& bins);

}  // namespace spectral_causal
