#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace plsm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, unknown ids, points off the domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (singular system, no residual degrees of freedom).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace plsm
