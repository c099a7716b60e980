#ifndef PBGK_ERRORS_HPP
#define PBGK_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace pbgk {

// Base class for every domain error thrown by the library. Infrastructure
// errors (bad_alloc and friends) pass through untouched.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A distribution with nonpositive density; moments are undefined.
class VacuumState : public Error {
public:
  explicit VacuumState(double n)
      : Error("vacuum state: density " + std::to_string(n) + " is not positive") {}
};

// The velocity temperature from the internal-energy constraint came out nonpositive.
class NonpositiveLambda : public Error {
public:
  explicit NonpositiveLambda(double lambda)
      : Error("constraint gives nonpositive velocity temperature " + std::to_string(lambda)) {}
};

class NonpositiveTemperature : public Error {
public:
  explicit NonpositiveTemperature(const std::string& which, double value)
      : Error("nonpositive temperature " + which + " = " + std::to_string(value)) {}
};

// An interspecies temperature went nonpositive. Unreachable for parameters that
// pass validate_mixture_params and positive input temperatures; checked anyway.
class NonpositiveExchangeTemperature : public Error {
public:
  NonpositiveExchangeTemperature(const std::string& which, double value)
      : Error("nonpositive interspecies temperature " + which + " = " + std::to_string(value)) {}
};

// One or more mixture-parameter constraints failed; names() lists all of them.
class ConstraintViolated : public Error {
public:
  explicit ConstraintViolated(std::vector<std::string> violated)
      : Error(join(violated)), violated_(std::move(violated)) {}
  const std::vector<std::string>& names() const { return violated_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "constraint violated:";
    for (const auto& name : v) s += " " + name;
    return s;
  }
  std::vector<std::string> violated_;
};

// The frequency ratio epsilon = nu_12 / nu_21 is undefined (nu_21 == 0).
class UndefinedEpsilon : public Error {
public:
  UndefinedEpsilon() : Error("epsilon undefined: cross collision frequency nu_21 is zero") {}
};

// A time step produced negative distribution values beyond roundoff.
class PositivityLoss : public Error {
public:
  PositivityLoss(double t, double worst)
      : Error("positivity loss at t = " + std::to_string(t) +
              " (most negative value " + std::to_string(worst) + ")") {}
};

// A run aborted mid-way; carries the abort time.
class AbortedAtTime : public Error {
public:
  AbortedAtTime(double t, const std::string& why)
      : Error("run aborted at t = " + std::to_string(t) + ": " + why), time_(t) {}
  double time() const { return time_; }

private:
  double time_;
};

// Relative entropy H(f|g) with f putting mass where g has none.
class UnboundedRelativeEntropy : public Error {
public:
  UnboundedRelativeEntropy()
      : Error("relative entropy unbounded: f carries mass where g vanishes") {}
};

// A series handed to the rate fitter is unusable (too short or not decaying).
class DegenerateSeries : public Error {
public:
  explicit DegenerateSeries(const std::string& why) : Error("degenerate series: " + why) {}
};

// A certified convergence rate was requested while one or more hypotheses of
// the corresponding decay theorem fail; names() lists the unmet ones.
class HypothesisUnmet : public Error {
public:
  explicit HypothesisUnmet(std::vector<std::string> unmet)
      : Error(join(unmet)), unmet_(std::move(unmet)) {}
  const std::vector<std::string>& names() const { return unmet_; }

private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "decay-rate hypotheses unmet:";
    for (const auto& name : v) s += " " + name;
    return s;
  }
  std::vector<std::string> unmet_;
};

class InvalidGrid : public Error {
public:
  explicit InvalidGrid(const std::string& why) : Error("invalid grid: " + why) {}
};

class ParseError : public Error {
public:
  explicit ParseError(const std::string& why) : Error("parse error: " + why) {}
  ParseError(const std::string& why, std::size_t line)
      : Error("parse error at line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const { return line_; }  // 0 when the line is unknown

private:
  std::size_t line_ = 0;
};

class UnknownKey : public Error {
public:
  explicit UnknownKey(const std::string& key) : Error("unknown config key: " + key) {}
};

}  // namespace pbgk

#endif
