#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace msuq {

using Index = std::int64_t;
using Point = std::array<double, 2>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Exceptions map onto the CLI exit-code contract (2 / 3 / 4).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AdmissibilityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace msuq
