#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace paraqnd {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Parameters outside the region where a formula or transform is defined.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A state or operator needs more Fock levels (or grid range) than provided.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integrator accuracy or positivity check failed; reduce the step.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sampling grid too coarse or too narrow for the requested quantity.
class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace paraqnd
