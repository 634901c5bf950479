#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace plsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Data-level failure: malformed files, shape mismatches, degenerate inputs.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-finite values, singular preconditioner, QR breakdown.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace plsr
