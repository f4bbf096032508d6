#pragma once

#include "discosde/geometry.hpp"
#include "discosde/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace discosde {

/// Points within kExceptionalSetTol * (1 + ||x||) of an exceptional set are
/// treated as lying on it when derivatives are zeroed.
inline constexpr double kExceptionalSetTol = 1e-12;

/// True if x lies on `surface` up to kExceptionalSetTol. Always false for the
/// empty surface.
bool on_exceptional_set(const Hypersurface& surface, const Vector& x);

/// A map R^d -> R^d together with its Jacobian off the exceptional set.
/// Both callbacks write into caller-owned storage (resized if needed) so the
/// hot loops of the schemes stay allocation-free.
class VectorField {
public:
    using Eval = std::function<void(const Vector& x, Vector& out)>;
    using Jacobian = std::function<void(const Vector& x, Matrix& out)>;

    VectorField(int dim, Eval eval, Jacobian jacobian,
                std::optional<double> growth_constant = std::nullopt);

    int dim() const noexcept { return dim_; }
    void eval(const Vector& x, Vector& out) const { eval_(x, out); }
    Vector operator()(const Vector& x) const;
    void jacobian_off_surface(const Vector& x, Matrix& out) const { jacobian_(x, out); }
    Matrix jacobian_off_surface(const Vector& x) const;

    /// Claimed K with ||eval(x)|| <= K (1 + ||x||), if the author stated one.
    std::optional<double> growth_constant() const noexcept { return growth_constant_; }

    const Eval& eval_fn() const noexcept { return eval_; }

private:
    int dim_;
    Eval eval_;
    Jacobian jacobian_;
    std::optional<double> growth_constant_;
};

/// A map R^d -> R^{d x d}; column j is sigma_j. `column_jacobian(j, x)` is
/// the d x d derivative of sigma_j at x (columns indexed from 0).
class MatrixField {
public:
    using Eval = std::function<void(const Vector& x, Matrix& out)>;
    using ColumnJacobian = std::function<void(int j, const Vector& x, Matrix& out)>;

    MatrixField(int dim, Eval eval, ColumnJacobian column_jacobian,
                std::optional<double> growth_constant = std::nullopt);

    int dim() const noexcept { return dim_; }
    void eval(const Vector& x, Matrix& out) const { eval_(x, out); }
    Matrix operator()(const Vector& x) const;
    void column_jacobian_off_surface(int j, const Vector& x, Matrix& out) const {
        column_jacobian_(j, x, out);
    }
    Matrix column_jacobian_off_surface(int j, const Vector& x) const;
    std::optional<double> growth_constant() const noexcept { return growth_constant_; }

    const Eval& eval_fn() const noexcept { return eval_; }

private:
    int dim_;
    Eval eval_;
    ColumnJacobian column_jacobian_;
    std::optional<double> growth_constant_;
};

/// One-sided limits of the drift on Theta: `minus` along -n(y), `plus` along +n(y).
struct DriftLimits {
    VectorField::Eval minus;
    VectorField::Eval plus;
};

/// dX = mu(X) dt + sigma(X) dW on [0, 1], X_0 = x0, with drift exceptional
/// set `theta` and diffusion exceptional set `delta`.
struct SdeProblem {
    std::string name;
    Vector x0;
    VectorField mu;
    MatrixField sigma;
    Hypersurface theta = Hypersurface::empty();
    Hypersurface delta = Hypersurface::empty();
    std::optional<DriftLimits> mu_limits;

    int dim() const noexcept { return static_cast<int>(x0.size()); }

    /// Throws Error if the dimensions of x0, mu, sigma and the surfaces disagree.
    void validate() const;
};

/// mu'(x) off Theta, the zero matrix on Theta.
void partial_drift(const SdeProblem& problem, const Vector& x, Matrix& out);
Matrix partial_drift(const SdeProblem& problem, const Vector& x);

/// sigma_j'(x) off Delta, the zero matrix on Delta (0-based j).
void partial_diffusion_column(const SdeProblem& problem, int j, const Vector& x, Matrix& out);
Matrix partial_diffusion_column(const SdeProblem& problem, int j, const Vector& x);

/// Coefficients frozen at one point, as consumed by a Milstein step:
/// mu(x), sigma(x) and dsigma[j] = partial sigma_j(x).
struct LocalCoefficients {
    Vector mu;
    Matrix sigma;
    std::vector<Matrix> dsigma;
};

/// Fills `out` from the problem's fields, with dsigma zeroed on Delta.
void evaluate_local(const SdeProblem& problem, const Vector& x, LocalCoefficients& out);

/// An open region K_i of a piecewise drift and the field active on it.
struct Region {
    std::function<bool(const Vector&)> contains;
    VectorField field;
};

/// mu = f_0 1_Theta + sum_i f_i 1_{K_i}. Off Theta, a point outside every
/// region raises NoRegionMatched. The Jacobian is delegated to the active
/// piece and is zero on Theta.
VectorField build_piecewise_drift(std::vector<Region> regions, Hypersurface theta,
                                  VectorField surface_value);

struct CommutativityReport {
    bool commutative = true;
    double max_residual = 0.0;
    std::size_t points_used = 0;
};

/// max over samples off Delta and column pairs of
/// ||sigma_{j1}' sigma_{j2} - sigma_{j2}' sigma_{j1}||.
CommutativityReport check_commutativity(const MatrixField& sigma, const Hypersurface& delta,
                                        std::span<const Vector> sample_points, double tol);

struct SampleSpec {
    std::size_t count = 200;
    /// Standard deviation of the Gaussian cloud of ambient samples around x0.
    double spread = 3.0;
    /// Width of the tube around Theta used for boundedness checks; 0 picks
    /// min(reach / 2, 1).
    double band = 0.0;
    std::uint64_t seed = 20240601;
};

/// Sampled, advisory diagnostics of the checkable non-degeneracy, growth and
/// boundedness hypotheses. Sampling cannot prove any of them.
struct ConditionReport {
    double inf_normal_sigma_theta = std::numeric_limits<double>::infinity();
    double inf_normal_sigma_delta = std::numeric_limits<double>::infinity();
    double growth_constant = 0.0;
    double sup_mu_band = 0.0;
    double sup_sigma_band = 0.0;
    std::vector<std::string> violations;

    bool ok() const noexcept { return violations.empty(); }
};

ConditionReport validate_conditions(const SdeProblem& problem, const SampleSpec& spec);

/// Central finite-difference Jacobian with step 1e-6 (1 + ||x||). Stencils
/// that would straddle `surface` fall back to the one-sided quotient on x's
/// side.
VectorField::Jacobian fd_jacobian(VectorField::Eval eval, Hypersurface surface);
MatrixField::ColumnJacobian fd_column_jacobian(MatrixField::Eval eval, Hypersurface surface);

}  // namespace discosde
