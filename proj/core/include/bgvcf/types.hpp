#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bgvcf {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Base of every error raised by the library. The CLI maps the two
/// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration, malformed input file, or a violated precondition.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A factorization or eigensolve failed, or a result is not finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace bgvcf
