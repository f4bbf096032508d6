#pragma once

#include "discosde/coefficients.hpp"

#include <string>
#include <vector>

namespace discosde {

/// Diffusion families available to inline problem specs.
enum class DiffusionKind {
    /// sigma(x) = b * [x x ... x]: every column equals b x.
    shared_linear,
    /// sigma(x) = diag(b_1 x_1, ..., b_d x_d).
    diagonal_linear,
    /// sigma(x) = b * I.
    constant,
};

/// Drift that is constant on each side of `surface` (inline problem spec).
struct PiecewiseSpec {
    Hypersurface surface = Hypersurface::empty();
    Vector x0;
    Vector drift_minus;
    Vector drift_plus;
    /// Value on the surface itself; defaults to drift_plus.
    std::optional<Vector> drift_on_surface;
    DiffusionKind diffusion = DiffusionKind::shared_linear;
    /// One coefficient (shared_linear, constant) or d of them (diagonal_linear).
    Vector diffusion_coeffs;
};

SdeProblem make_piecewise_problem(std::string name, const PiecewiseSpec& spec);

/// d = 2, mu = (-1,-1) inside ||x|| < 2 and (1,1) on ||x|| >= 2,
/// sigma(x) = [x x], Theta the circle of radius 2, x0 = (0, 2).
SdeProblem circle2d();

/// Smooth benchmark with empty exceptional sets:
/// mu(x) = (0.1 x_1, -0.2 x_2), sigma(x) = diag(0.8 x_1, 0.6 x_2), x0 = (1, 1).
SdeProblem gbm2d();

/// Built-in problem by name; throws ConfigError for unknown names.
SdeProblem make_problem(const std::string& name);
std::vector<std::string> problem_names();

MatrixField make_diffusion(int dim, DiffusionKind kind, const Vector& coeffs);
VectorField constant_field(Vector value);

}  // namespace discosde
