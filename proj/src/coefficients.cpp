#include "discosde/coefficients.hpp"

#include "discosde/random.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

namespace discosde {

bool on_exceptional_set(const Hypersurface& surface, const Vector& x) {
    if (surface.is_empty()) return false;
    return surface.distance(x) <= relative_tol(x, kExceptionalSetTol);
}

VectorField::VectorField(int dim, Eval eval, Jacobian jacobian,
                         std::optional<double> growth_constant)
    : dim_(dim), eval_(std::move(eval)), jacobian_(std::move(jacobian)),
      growth_constant_(growth_constant) {
    if (dim_ < 1) throw Error("vector field dimension must be positive");
    if (!eval_ || !jacobian_) throw Error("vector field needs both eval and jacobian");
}

Vector VectorField::operator()(const Vector& x) const {
    Vector out(dim_);
    eval_(x, out);
    return out;
}

Matrix VectorField::jacobian_off_surface(const Vector& x) const {
    Matrix out(dim_, dim_);
    jacobian_(x, out);
    return out;
}

MatrixField::MatrixField(int dim, Eval eval, ColumnJacobian column_jacobian,
                         std::optional<double> growth_constant)
    : dim_(dim), eval_(std::move(eval)), column_jacobian_(std::move(column_jacobian)),
      growth_constant_(growth_constant) {
    if (dim_ < 1) throw Error("matrix field dimension must be positive");
    if (!eval_ || !column_jacobian_) throw Error("matrix field needs both eval and jacobian");
}

Matrix MatrixField::operator()(const Vector& x) const {
    Matrix out(dim_, dim_);
    eval_(x, out);
    return out;
}

Matrix MatrixField::column_jacobian_off_surface(int j, const Vector& x) const {
    Matrix out(dim_, dim_);
    column_jacobian_(j, x, out);
    return out;
}

void SdeProblem::validate() const {
    const int d = dim();
    if (d < 1) throw Error("initial point must be non-empty");
    if (mu.dim() != d || sigma.dim() != d) {
        std::ostringstream msg;
        msg << "dimension mismatch: x0 has " << d << ", mu " << mu.dim() << ", sigma "
            << sigma.dim();
        throw Error(msg.str());
    }
    for (const auto* s : {&theta, &delta}) {
        if (!s->is_empty() && s->dim() != d) throw Error("surface dimension differs from x0");
    }
}

void partial_drift(const SdeProblem& problem, const Vector& x, Matrix& out) {
    if (on_exceptional_set(problem.theta, x)) {
        out.setZero(problem.dim(), problem.dim());
        return;
    }
    problem.mu.jacobian_off_surface(x, out);
}

Matrix partial_drift(const SdeProblem& problem, const Vector& x) {
    Matrix out(problem.dim(), problem.dim());
    partial_drift(problem, x, out);
    return out;
}

void partial_diffusion_column(const SdeProblem& problem, int j, const Vector& x, Matrix& out) {
    if (on_exceptional_set(problem.delta, x)) {
        out.setZero(problem.dim(), problem.dim());
        return;
    }
    problem.sigma.column_jacobian_off_surface(j, x, out);
}

Matrix partial_diffusion_column(const SdeProblem& problem, int j, const Vector& x) {
    Matrix out(problem.dim(), problem.dim());
    partial_diffusion_column(problem, j, x, out);
    return out;
}

void evaluate_local(const SdeProblem& problem, const Vector& x, LocalCoefficients& out) {
    const int d = problem.dim();
    problem.mu.eval(x, out.mu);
    problem.sigma.eval(x, out.sigma);
    out.dsigma.resize(d);
    if (on_exceptional_set(problem.delta, x)) {
        for (auto& m : out.dsigma) m.setZero(d, d);
        return;
    }
    for (int j = 0; j < d; ++j) problem.sigma.column_jacobian_off_surface(j, x, out.dsigma[j]);
}

namespace {

const Region* find_region(const std::vector<Region>& regions, const Vector& x) {
    for (const auto& r : regions)
        if (r.contains(x)) return &r;
    return nullptr;
}

}  // namespace

VectorField build_piecewise_drift(std::vector<Region> regions, Hypersurface theta,
                                  VectorField surface_value) {
    const int d = surface_value.dim();
    for (const auto& r : regions)
        if (r.field.dim() != d) throw Error("piecewise drift pieces must share a dimension");

    struct State {
        std::vector<Region> regions;
        Hypersurface theta;
        VectorField surface_value;
    };
    auto state = std::make_shared<const State>(
        State{std::move(regions), std::move(theta), std::move(surface_value)});

    auto no_match = [](const Vector& x) {
        std::ostringstream msg;
        msg << "point (" << x.transpose() << ") lies off the surface but in no region";
        return NoRegionMatched(msg.str());
    };

    auto eval = [state, no_match](const Vector& x, Vector& out) {
        if (const Region* r = find_region(state->regions, x)) {
            r->field.eval(x, out);
            return;
        }
        if (on_exceptional_set(state->theta, x)) {
            state->surface_value.eval(x, out);
            return;
        }
        throw no_match(x);
    };
    auto jacobian = [state, no_match, d](const Vector& x, Matrix& out) {
        if (const Region* r = find_region(state->regions, x)) {
            r->field.jacobian_off_surface(x, out);
            return;
        }
        if (on_exceptional_set(state->theta, x)) {
            out.setZero(d, d);
            return;
        }
        throw no_match(x);
    };
    return VectorField(d, std::move(eval), std::move(jacobian));
}

CommutativityReport check_commutativity(const MatrixField& sigma, const Hypersurface& delta,
                                        std::span<const Vector> sample_points, double tol) {
    CommutativityReport report;
    const int d = sigma.dim();
    Matrix s(d, d);
    std::vector<Matrix> jac(d, Matrix(d, d));
    for (const Vector& x : sample_points) {
        if (on_exceptional_set(delta, x)) continue;
        sigma.eval(x, s);
        for (int j = 0; j < d; ++j) sigma.column_jacobian_off_surface(j, x, jac[j]);
        for (int j1 = 0; j1 < d; ++j1) {
            for (int j2 = j1 + 1; j2 < d; ++j2) {
                const double r = (jac[j1] * s.col(j2) - jac[j2] * s.col(j1)).norm();
                report.max_residual = std::max(report.max_residual, r);
            }
        }
        ++report.points_used;
    }
    report.commutative = report.max_residual <= tol;
    return report;
}

namespace {

struct GaussianCloud {
    CounterRng& rng;
    Vector center;
    double spread;

    Vector operator()() {
        Vector x(center.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = center[i] + spread * rng.normal();
        return x;
    }
};

double inf_normal_sigma(const SdeProblem& problem, const Hypersurface& surface,
                        const SampleSpec& spec, CounterRng& rng, Matrix& s) {
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < spec.count; ++i) {
        const Vector y = surface.sample_on_surface(rng, problem.x0, spec.spread);
        problem.sigma.eval(y, s);
        inf = std::min(inf, (s.transpose() * surface.unit_normal(y)).norm());
    }
    return inf;
}

}  // namespace

ConditionReport validate_conditions(const SdeProblem& problem, const SampleSpec& spec) {
    problem.validate();
    ConditionReport report;
    const int d = problem.dim();
    CounterRng rng(spec.seed, 0);
    Matrix s(d, d);
    Vector m(d);
    constexpr double kDegenerate = 1e-9;

    if (!problem.theta.is_empty()) {
        report.inf_normal_sigma_theta = inf_normal_sigma(problem, problem.theta, spec, rng, s);
        if (!(report.inf_normal_sigma_theta > kDegenerate))
            report.violations.push_back("inf over Theta of ||n^T sigma|| is (numerically) zero");
    }
    if (!problem.delta.is_empty()) {
        report.inf_normal_sigma_delta = inf_normal_sigma(problem, problem.delta, spec, rng, s);
        if (!(report.inf_normal_sigma_delta > kDegenerate))
            report.violations.push_back("inf over Delta of ||n^T sigma|| is (numerically) zero");
    }

    double sup_sigma = 0.0;
    double k_mu = 0.0;
    double k_sigma = 0.0;
    GaussianCloud cloud{rng, problem.x0, spec.spread};
    try {
        for (std::size_t i = 0; i < spec.count; ++i) {
            const Vector x = cloud();
            problem.mu.eval(x, m);
            problem.sigma.eval(x, s);
            const double scale = 1.0 + x.norm();
            report.growth_constant =
                std::max(report.growth_constant, (m.norm() + s.norm()) / scale);
            k_mu = std::max(k_mu, m.norm() / scale);
            k_sigma = std::max(k_sigma, s.norm() / scale);
            sup_sigma = std::max(sup_sigma, s.norm());
        }
    } catch (const NoRegionMatched& e) {
        report.violations.push_back(std::string("drift undefined at a sample: ") + e.what());
    }
    if (!std::isfinite(report.growth_constant))
        report.violations.push_back("non-finite coefficient value at a sample");
    const std::pair<std::optional<double>, double> growth[] = {
        {problem.mu.growth_constant(), k_mu}, {problem.sigma.growth_constant(), k_sigma}};
    for (const auto& [claimed, sampled] : growth) {
        if (claimed && sampled > *claimed * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "sampled linear-growth constant " << sampled << " exceeds the stated bound "
                << *claimed;
            report.violations.push_back(msg.str());
        }
    }

    if (!problem.theta.is_empty()) {
        const double band =
            spec.band > 0.0 ? spec.band : std::min(problem.theta.reach() / 2.0, 1.0);
        for (std::size_t i = 0; i < spec.count; ++i) {
            const Vector y = problem.theta.sample_on_surface(rng, problem.x0, spec.spread);
            const double t = band * (2.0 * rng.uniform() - 1.0);
            const Vector x = y + t * problem.theta.unit_normal(y);
            problem.mu.eval(x, m);
            problem.sigma.eval(x, s);
            report.sup_mu_band = std::max(report.sup_mu_band, m.norm());
            report.sup_sigma_band = std::max(report.sup_sigma_band, s.norm());
            sup_sigma = std::max(sup_sigma, s.norm());
        }
        if (!std::isfinite(report.sup_mu_band) || !std::isfinite(report.sup_sigma_band))
            report.violations.push_back("coefficients unbounded near Theta");
    }
    if (sup_sigma == 0.0) report.violations.push_back("diffusion vanishes at every sample");
    return report;
}

namespace {

bool same_side(const Hypersurface& surface, const Vector& a, const Vector& b) {
    if (surface.is_empty()) return true;
    const double sa = surface.signed_distance(a);
    const double sb = surface.signed_distance(b);
    return (sa > 0.0 && sb > 0.0) || (sa < 0.0 && sb < 0.0);
}

/// Derivative of `f` along coordinate k at x, honoring the surface.
template <class F, class Out>
void fd_directional(const F& f, const Hypersurface& surface, const Vector& x, int k, Out& fplus,
                    Out& fminus, Out& result) {
    const double h = 1e-6 * (1.0 + x.norm());
    Vector xp = x;
    Vector xm = x;
    xp[k] += h;
    xm[k] -= h;
    const bool plus_ok = same_side(surface, x, xp);
    const bool minus_ok = same_side(surface, x, xm);
    if (plus_ok && minus_ok) {
        f(xp, fplus);
        f(xm, fminus);
        result = (fplus - fminus) / (2.0 * h);
    } else if (plus_ok) {
        f(xp, fplus);
        f(x, fminus);
        result = (fplus - fminus) / h;
    } else if (minus_ok) {
        f(x, fplus);
        f(xm, fminus);
        result = (fplus - fminus) / h;
    } else {
        throw Error("finite-difference stencil straddles the exceptional set in both directions");
    }
}

}  // namespace

VectorField::Jacobian fd_jacobian(VectorField::Eval eval, Hypersurface surface) {
    return [eval = std::move(eval), surface = std::move(surface)](const Vector& x, Matrix& out) {
        const auto d = x.size();
        out.resize(d, d);
        Vector fp(d), fm(d), col(d);
        for (int k = 0; k < d; ++k) {
            fd_directional(eval, surface, x, k, fp, fm, col);
            out.col(k) = col;
        }
    };
}

MatrixField::ColumnJacobian fd_column_jacobian(MatrixField::Eval eval, Hypersurface surface) {
    return [eval = std::move(eval), surface = std::move(surface)](int j, const Vector& x,
                                                                  Matrix& out) {
        const auto d = x.size();
        out.resize(d, d);
        auto column = [&eval, j, d](const Vector& p, Vector& v) {
            Matrix s(d, d);
            eval(p, s);
            v = s.col(j);
        };
        Vector fp(d), fm(d), col(d);
        for (int k = 0; k < d; ++k) {
            fd_directional(column, surface, x, k, fp, fm, col);
            out.col(k) = col;
        }
    };
}

}  // namespace discosde
