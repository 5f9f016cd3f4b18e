#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spectom {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

//! Row-major complex matrix, used to map flat table storage without copies.
using CMatrixRM = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

//! Invalid or inconsistent configuration / input files. CLI exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Singular systems, non-finite values, failed convergence. CLI exit code 2.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

//! Work exceeds a configured enumeration/memory budget. CLI exit code 3.
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace spectom
