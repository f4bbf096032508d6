#include "discosde/problems.hpp"

#include <cmath>

namespace discosde {

VectorField constant_field(Vector value) {
    const auto d = static_cast<int>(value.size());
    const double growth = value.norm();
    return VectorField(
        d, [value](const Vector&, Vector& out) { out = value; },
        [d](const Vector&, Matrix& out) { out.setZero(d, d); }, growth);
}

MatrixField make_diffusion(int dim, DiffusionKind kind, const Vector& coeffs) {
    const int d = dim;
    switch (kind) {
    case DiffusionKind::shared_linear: {
        if (coeffs.size() != 1) throw ConfigError("shared_linear diffusion takes one coefficient");
        const double b = coeffs[0];
        auto eval = [b, d](const Vector& x, Matrix& out) {
            out.resize(d, d);
            for (int j = 0; j < d; ++j) out.col(j) = b * x;
        };
        auto jac = [b, d](int, const Vector&, Matrix& out) {
            out.setIdentity(d, d);
            out *= b;
        };
        return MatrixField(d, eval, jac, std::abs(b) * std::sqrt(static_cast<double>(d)));
    }
    case DiffusionKind::diagonal_linear: {
        if (coeffs.size() != d)
            throw ConfigError("diagonal_linear diffusion takes one coefficient per dimension");
        auto eval = [coeffs, d](const Vector& x, Matrix& out) {
            out.setZero(d, d);
            for (int i = 0; i < d; ++i) out(i, i) = coeffs[i] * x[i];
        };
        auto jac = [coeffs, d](int j, const Vector&, Matrix& out) {
            out.setZero(d, d);
            out(j, j) = coeffs[j];
        };
        return MatrixField(d, eval, jac, coeffs.cwiseAbs().maxCoeff());
    }
    case DiffusionKind::constant: {
        if (coeffs.size() != 1) throw ConfigError("constant diffusion takes one coefficient");
        const double b = coeffs[0];
        auto eval = [b, d](const Vector&, Matrix& out) {
            out.setIdentity(d, d);
            out *= b;
        };
        auto jac = [d](int, const Vector&, Matrix& out) { out.setZero(d, d); };
        return MatrixField(d, eval, jac, std::abs(b) * std::sqrt(static_cast<double>(d)));
    }
    }
    throw ConfigError("unknown diffusion kind");
}

SdeProblem make_piecewise_problem(std::string name, const PiecewiseSpec& spec) {
    const auto d = static_cast<int>(spec.x0.size());
    if (spec.drift_minus.size() != d || spec.drift_plus.size() != d)
        throw ConfigError("drift pieces must have the dimension of x0");
    const Vector on_surface = spec.drift_on_surface.value_or(spec.drift_plus);
    if (on_surface.size() != d) throw ConfigError("surface drift must have the dimension of x0");

    VectorField mu = [&]() {
        if (spec.surface.is_empty()) return constant_field(spec.drift_plus);
        const Hypersurface surface = spec.surface;
        std::vector<Region> regions{
            {[surface](const Vector& x) { return surface.signed_distance(x) < 0.0; },
             constant_field(spec.drift_minus)},
            {[surface](const Vector& x) { return surface.signed_distance(x) > 0.0; },
             constant_field(spec.drift_plus)},
        };
        return build_piecewise_drift(std::move(regions), surface, constant_field(on_surface));
    }();

    SdeProblem problem{
        std::move(name),
        spec.x0,
        std::move(mu),
        make_diffusion(d, spec.diffusion, spec.diffusion_coeffs),
        spec.surface,
        Hypersurface::empty(),
        std::nullopt,
    };
    if (!spec.surface.is_empty()) {
        const Vector minus = spec.drift_minus;
        const Vector plus = spec.drift_plus;
        problem.mu_limits = DriftLimits{[minus](const Vector&, Vector& out) { out = minus; },
                                        [plus](const Vector&, Vector& out) { out = plus; }};
    }
    problem.validate();
    return problem;
}

SdeProblem circle2d() {
    PiecewiseSpec spec;
    spec.surface = Hypersurface::sphere(Vector::Zero(2), 2.0);
    spec.x0 = Vector{{0.0, 2.0}};
    spec.drift_minus = Vector{{-1.0, -1.0}};
    spec.drift_plus = Vector{{1.0, 1.0}};
    spec.diffusion = DiffusionKind::shared_linear;
    spec.diffusion_coeffs = Vector{{1.0}};
    return make_piecewise_problem("circle2d", spec);
}

SdeProblem gbm2d() {
    const Vector a{{0.1, -0.2}};
    auto mu = VectorField(
        2, [a](const Vector& x, Vector& out) { out = a.cwiseProduct(x); },
        [a](const Vector&, Matrix& out) { out = a.asDiagonal(); }, a.cwiseAbs().maxCoeff());
    SdeProblem problem{
        "gbm2d",
        Vector{{1.0, 1.0}},
        std::move(mu),
        make_diffusion(2, DiffusionKind::diagonal_linear, Vector{{0.8, 0.6}}),
        Hypersurface::empty(),
        Hypersurface::empty(),
        std::nullopt,
    };
    problem.validate();
    return problem;
}

SdeProblem make_problem(const std::string& name) {
    if (name == "circle2d") return circle2d();
    if (name == "gbm2d") return gbm2d();
    throw ConfigError("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() { return {"circle2d", "gbm2d"}; }

}  // namespace discosde
