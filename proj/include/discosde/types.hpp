#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace discosde {

using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The point has no unique nearest point on the surface (distance >= reach).
class NotUniquelyProjectable : public Error {
public:
    using Error::Error;
};

class NotOnSurface : public Error {
public:
    using Error::Error;
};

/// An off-surface point was not claimed by any region of a piecewise field.
class NoRegionMatched : public Error {
public:
    using Error::Error;
};

/// ||sigma(y)^T n(y)|| vanishes on the drift surface, so the jump field is undefined.
class DegenerateDiffusion : public Error {
public:
    using Error::Error;
};

class NoValidEpsilon : public Error {
public:
    using Error::Error;
};

class InverseDidNotConverge : public Error {
public:
    InverseDidNotConverge(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

class NotDivisible : public Error {
public:
    using Error::Error;
};

/// A scheme produced NaN or Inf.
class NonFinite : public Error {
public:
    using Error::Error;
};

class DegenerateFit : public Error {
public:
    using Error::Error;
};

class TooManyAborts : public Error {
public:
    TooManyAborts(const std::string& what, std::size_t aborted)
        : Error(what), aborted_(aborted) {}
    std::size_t aborted() const noexcept { return aborted_; }

private:
    std::size_t aborted_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Relative "on the surface" tolerance: rel * (1 + ||x||).
inline double relative_tol(const Vector& x, double rel) { return rel * (1.0 + x.norm()); }

}  // namespace discosde
