// Error types shared across the library.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace logsync {

// Malformed input (scenario files, constructor arguments). Carries every
// problem found, never just the first one.
class validation_error : public std::invalid_argument {
public:
  explicit validation_error(std::vector<std::string> problems)
      : std::invalid_argument(join(problems)), problems_(std::move(problems)) {}
  explicit validation_error(const std::string& problem)
      : validation_error(std::vector<std::string>{problem}) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
  static std::string join(const std::vector<std::string>& ps) {
    std::string out;
    for (const auto& p : ps) {
      if (!out.empty()) out += "; ";
      out += p;
    }
    return out;
  }

  std::vector<std::string> problems_;
};

// Precondition violation on an otherwise well-formed call (point outside the
// chart validity domain, reading out of range, ...).
class domain_error : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Solver breakdown. The message carries diagnostics: residuals, iteration
// counts, the offending pair of machines.
class numerical_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace logsync
