#pragma once

#include <stdexcept>
#include <string>

namespace qcbound {

// Bad argument or configuration; the CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// A derivative formula hit a pole: the gap between two levels it divides by
// is below the degeneracy guard. Callers sampling random models resample.
class DegenerateSpectrumError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The two-level avoided-crossing approximation was requested for a spectrum
// where levels 0 and 1 do not dominate.
class ApproximationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// A quantity that must be real (or bounded) came out otherwise; indicates a bug.
class InvariantError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

} // namespace qcbound
