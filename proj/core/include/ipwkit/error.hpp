#pragma once

#include <stdexcept>
#include <string>

namespace ipwkit {

// Input or configuration problems: malformed files, bad labels, invalid
// parameters. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fitting failures: singular systems, divergence, non-convergence.
// The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ipwkit
