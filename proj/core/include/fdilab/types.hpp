#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fdilab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

// 1-based bus number as it appears in case files.
using BusId = int;

/// Malformed input: bad case file, bad CSV, shape mismatch, invalid argument.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The requested attack cannot be realised with the controlled channels.
class InfeasibleAttack : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical precondition failed (rank deficiency, NaN input, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace fdilab
