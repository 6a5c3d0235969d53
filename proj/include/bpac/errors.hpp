#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bpac {

/// Invalid parameters, malformed instances, or out-of-range indices.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
  ValidationError(const std::string& what, std::vector<std::string> details)
      : std::invalid_argument(what), details_(std::move(details)) {}

  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

/// Bandit protocol misuse: predicting without an open round, or opening twice.
class ProtocolError : public std::logic_error {
 public:
  explicit ProtocolError(const std::string& what) : std::logic_error(what) {}
};

/// Phase-1 trial budget ran out before the dataset reached its target size.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted(std::uint64_t trials, std::uint64_t kept, std::uint64_t target)
      : std::runtime_error("phase-1 budget exhausted after " + std::to_string(trials) +
                           " trials with " + std::to_string(kept) + "/" +
                           std::to_string(target) + " samples kept"),
        trials_(trials),
        kept_(kept) {}

  std::uint64_t trials() const { return trials_; }
  std::uint64_t kept() const { return kept_; }

 private:
  std::uint64_t trials_;
  std::uint64_t kept_;
};

/// The optimizer's batch schedule needs more samples than the dataset holds.
class DatasetExhausted : public std::runtime_error {
 public:
  explicit DatasetExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// A brute-force routine was asked to enumerate beyond its size guard.
class GuardExceeded : public std::runtime_error {
 public:
  explicit GuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bpac
