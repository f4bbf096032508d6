#pragma once

#include "discosde/coefficients.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace discosde {

/// phi(x) = (1 - x^2)^5 on |x| <= 1, zero elsewhere.
double bump(double x) noexcept;
/// phi'(x) = -10 x (1 - x^2)^4 on |x| <= 1, zero elsewhere.
double bump_deriv(double x) noexcept;

/// Jump field on Theta:
///   alpha(y) = (mu^-(y) - mu^+(y)) / (2 ||sigma(y)^T n(y)||^2),
/// with mu^-/mu^+ the limits of the drift along -n(y)/+n(y). The limits come
/// from problem.mu_limits when present, otherwise from mu(y -/+ h n(y)) with
/// h = one_sided_step.
///
/// Throws NotOnSurface if y is off Theta and DegenerateDiffusion if
/// ||sigma(y)^T n(y)|| < 1e-9.
Vector jump_field(const SdeProblem& problem, const Vector& y, double one_sided_step);

/// Sufficient-condition constant: ||G' - I|| <= sup|alpha| * 112 eps + eps^2 * M
/// must stay below this for the selected eps.
inline constexpr double kInvertibilityMargin = 0.5;
/// Bound on |f_eps'| on (-eps^2, eps^2) for f_eps(u) = u (1 - u/eps^2)^5.
inline constexpr double kBumpSlopeBound = 112.0;

struct EpsilonChoice {
    double epsilon = 0.0;
    /// Sampled sup over Theta of ||alpha||.
    double alpha_sup = 0.0;
    /// Sampled sup of ||(alpha o pr)'|| over the candidate tube.
    double alpha_slope = 0.0;
    bool requested_accepted = false;
    /// True when Theta is empty or alpha vanishes on every sample.
    bool identity = false;
};

struct TransformOptions {
    std::optional<double> epsilon;
    double newton_tol = 1e-12;
    int newton_max_iter = 100;
    double hessian_fd_step = 1e-6;
    std::size_t samples = 2000;
    std::uint64_t seed = 7;
};

/// Picks the tube width of the transform. A requested eps is kept when it is
/// below reach(Theta) and satisfies
///   alpha_sup * 112 * eps + eps^2 * alpha_slope < 1/2,
/// otherwise the largest eps of the grid top * 2^-k (top = reach/2, or 1 for
/// infinite reach) that does. Throws NoValidEpsilon if the grid is exhausted.
EpsilonChoice select_epsilon(const SdeProblem& problem, const TransformOptions& options);

struct TransformConfig {
    double epsilon = 0.0;
    double newton_tol = 1e-12;
    int newton_max_iter = 100;
    double hessian_fd_step = 1e-6;
};

/// The map G(x) = x + Phi_eps(x) alpha(pr(x)) on the eps-tube of Theta and
/// G(x) = x elsewhere, with
///   Phi_eps(x) = n(pr x)^T (x - pr x) ||x - pr x|| phi(||x - pr x|| / eps),
/// plus the coefficients of the transformed equation
///   sigma_G = (G' sigma) o G^-1,
///   mu_G    = (G' mu + 1/2 (tr(R_i sigma sigma^T))_i) o G^-1,
/// where R_i extends G_i'' by zero on Theta.
///
/// Immutable after construction; every member is pure and thread-safe.
class TransformedProblem {
public:
    explicit TransformedProblem(SdeProblem base, const TransformOptions& options = {});

    const SdeProblem& base() const noexcept { return *base_; }
    const TransformConfig& config() const noexcept { return config_; }
    double alpha_sup() const noexcept { return choice_.alpha_sup; }
    const EpsilonChoice& epsilon_choice() const noexcept { return choice_; }
    /// G is the identity map (empty Theta or continuous drift).
    bool is_identity() const noexcept { return choice_.identity; }

    double capital_phi(const Vector& x) const;
    /// Zero row on Theta and outside the eps-tube.
    RowVector capital_phi_grad(const Vector& x) const;

    /// alpha(pr(x)) for x in the reach tube.
    Vector alpha_extended(const Vector& x) const;
    /// Derivative of alpha o pr: the surface derivative taken by central
    /// differences at pr(x), times the closed-form pr'(x).
    Matrix alpha_extended_jacobian(const Vector& x) const;

    Vector forward(const Vector& x) const;
    Matrix jacobian(const Vector& x) const;
    /// d matrices R_i (d x d): the Hessian of G_i off Theta by same-side
    /// central differences of jacobian(), symmetrized; zero on Theta and
    /// outside the eps-tube.
    std::vector<Matrix> hessian_rows(const Vector& x) const;

    /// Damped Newton solve of G(x) = y started at y. Throws
    /// InverseDidNotConverge after newton_max_iter iterations.
    Vector inverse(const Vector& y) const;

    Vector mu_g(const Vector& y) const;
    Matrix sigma_g(const Vector& y) const;

    /// mu_G, sigma_G and the column derivatives of sigma_G at y, sharing a
    /// single inversion. The derivative uses
    ///   (sigma_G)_j'(y) = [R(x)[sigma_j(x)] + G'(x) sigma_j'(x)] G'(x)^-1,
    /// x = G^-1(y), and is zero on Theta.
    void local_coefficients(const Vector& y, LocalCoefficients& out) const;

    /// The transformed equation (G(x0), mu_G, sigma_G) with exceptional sets
    /// Theta for both drift and diffusion.
    SdeProblem as_problem() const;

private:
    bool outside_tube(const Vector& x, double dist) const;

    std::shared_ptr<const SdeProblem> base_;
    TransformConfig config_;
    EpsilonChoice choice_;
};

/// Sampled checks of the transform's structural properties.
struct TransformInvariantReport {
    std::size_t points = 0;
    double epsilon = 0.0;
    /// max |Phi_eps| / eps^2 (must be <= 1).
    double phi_ratio = 0.0;
    /// max ||Phi_eps'|| / (112 eps) (must be <= 1).
    double phi_grad_ratio = 0.0;
    /// Points on Theta or outside the tube where G != id or G' != I.
    std::size_t identity_violations = 0;
    /// max relative Frobenius error of G' against central differences of G.
    double jacobian_fd_rel_error = 0.0;
    /// max ||G^-1(G(x)) - x||.
    double inverse_roundtrip = 0.0;
    /// max ||sigma_G(y) - sigma(y)|| over y on Theta.
    double sigma_on_surface = 0.0;
    /// max commutativity residual of sigma_G off Theta.
    double sigma_g_commutativity = 0.0;
    /// Sampled Lipschitz quotients of mu_G and sigma_G (advisory).
    double mu_g_lipschitz = 0.0;
    double sigma_g_lipschitz = 0.0;

    bool phi_bound_ok() const noexcept { return phi_ratio <= 1.0; }
    bool phi_grad_bound_ok() const noexcept { return phi_grad_ratio <= 1.0; }
    bool identity_ok() const noexcept { return identity_violations == 0; }
    bool jacobian_ok() const noexcept { return jacobian_fd_rel_error <= 1e-5; }
    bool inverse_ok() const noexcept { return inverse_roundtrip <= 1e-9; }
    bool sigma_on_surface_ok() const noexcept { return sigma_on_surface <= 1e-9; }
    bool commutativity_ok() const noexcept { return sigma_g_commutativity <= 1e-6; }
    bool all_ok() const noexcept {
        return phi_bound_ok() && phi_grad_bound_ok() && identity_ok() && jacobian_ok() &&
               inverse_ok() && sigma_on_surface_ok() && commutativity_ok();
    }
};

/// Runs every check over `count` random points: 40% in the eps-tube off
/// Theta, 20% on Theta, 20% in the shell eps <= d < 3 eps, 20% ambient.
/// Deterministic for a fixed seed.
TransformInvariantReport check_transform_invariants(const TransformedProblem& tf,
                                                    std::size_t count, std::uint64_t seed);

}  // namespace discosde
