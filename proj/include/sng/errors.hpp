#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sng {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent user configuration. Carries every problem found,
/// not only the first one.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::string message)
      : Error(message), problems_{std::move(message)} {}
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> problems_;
};

/// Input that makes an operation meaningless (zero norm, empty series...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// The wave reached the edge of the periodic box.
class BoundaryLeakError : public Error {
 public:
  BoundaryLeakError(double time, double ratio, double tolerance)
      : Error("boundary leak at t=" + std::to_string(time) + ": edge/peak density " +
              std::to_string(ratio) + " exceeds " + std::to_string(tolerance)),
        time_(time),
        ratio_(ratio) {}

  double time() const noexcept { return time_; }
  double ratio() const noexcept { return ratio_; }

 private:
  double time_;
  double ratio_;
};

/// An iterative solver ran out of iterations. The energy history is kept
/// for diagnosis.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<double>& energy_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

/// Soliton extraction or a pointwise ratio failed (pilot wave vanished).
class ExtractionError : public Error {
 public:
  using Error::Error;
};

}  // namespace sng
