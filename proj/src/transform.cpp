#include "discosde/transform.hpp"

#include "discosde/random.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace discosde {

double bump(double x) noexcept {
    if (std::abs(x) > 1.0) return 0.0;
    const double q = 1.0 - x * x;
    const double q2 = q * q;
    return q2 * q2 * q;
}

double bump_deriv(double x) noexcept {
    if (std::abs(x) > 1.0) return 0.0;
    const double q = 1.0 - x * x;
    const double q2 = q * q;
    return -10.0 * x * q2 * q2;
}

Vector jump_field(const SdeProblem& problem, const Vector& y, double one_sided_step) {
    const Vector n = problem.theta.unit_normal(y);
    const int d = problem.dim();
    Matrix s(d, d);
    problem.sigma.eval(y, s);
    const double denom = (s.transpose() * n).squaredNorm();
    if (!(std::sqrt(denom) >= 1e-9)) {
        std::ostringstream msg;
        msg << "||sigma(y)^T n(y)|| = " << std::sqrt(denom) << " at y = (" << y.transpose()
            << ")";
        throw DegenerateDiffusion(msg.str());
    }
    Vector minus(d), plus(d);
    if (problem.mu_limits) {
        problem.mu_limits->minus(y, minus);
        problem.mu_limits->plus(y, plus);
    } else {
        problem.mu.eval(y - one_sided_step * n, minus);
        problem.mu.eval(y + one_sided_step * n, plus);
    }
    return (minus - plus) / (2.0 * denom);
}

namespace {

/// Central differences of alpha o pr at the surface point y, times pr'(x).
Matrix alpha_pr_jacobian(const SdeProblem& problem, const Vector& x, double one_sided_step) {
    const Hypersurface& theta = problem.theta;
    const Vector y = theta.project(x);
    const auto d = y.size();
    const double h = 1e-5 * (1.0 + y.norm());
    Matrix surface_derivative(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        Vector yp = y;
        Vector ym = y;
        yp[k] += h;
        ym[k] -= h;
        surface_derivative.col(k) = (jump_field(problem, theta.project(yp), one_sided_step) -
                                     jump_field(problem, theta.project(ym), one_sided_step)) /
                                    (2.0 * h);
    }
    return surface_derivative * theta.projection_jacobian(x);
}

double grid_top(const Hypersurface& theta) {
    const double reach = theta.reach();
    return std::isfinite(reach) ? reach / 2.0 : 1.0;
}

}  // namespace

EpsilonChoice select_epsilon(const SdeProblem& problem, const TransformOptions& options) {
    EpsilonChoice choice;
    const Hypersurface& theta = problem.theta;
    if (theta.is_empty()) {
        choice.epsilon = options.epsilon.value_or(1.0);
        choice.requested_accepted = options.epsilon.has_value();
        choice.identity = true;
        return choice;
    }
    const double reach = theta.reach();
    if (!(reach > 0.0)) throw NoValidEpsilon("surface has zero reach");
    const double top = grid_top(theta);
    const double one_sided_step = top * 0x1.0p-20;

    CounterRng rng(options.seed, 1);
    const double spread = 3.0;
    for (std::size_t i = 0; i < options.samples; ++i) {
        const Vector y = theta.sample_on_surface(rng, problem.x0, spread);
        choice.alpha_sup = std::max(choice.alpha_sup, jump_field(problem, y, one_sided_step).norm());
    }
    const bool requested_in_reach = options.epsilon && *options.epsilon > 0.0 &&
                                    *options.epsilon < reach;
    if (choice.alpha_sup == 0.0) {
        choice.identity = true;
        choice.requested_accepted = requested_in_reach;
        choice.epsilon = requested_in_reach ? *options.epsilon : top;
        return choice;
    }

    for (std::size_t i = 0; i < options.samples; ++i) {
        const Vector y = theta.sample_on_surface(rng, problem.x0, spread);
        const double t = top * (2.0 * rng.uniform() - 1.0) * 0.999;
        const Vector x = y + t * theta.unit_normal(y);
        choice.alpha_slope =
            std::max(choice.alpha_slope, alpha_pr_jacobian(problem, x, one_sided_step).norm());
    }

    auto admissible = [&](double eps) {
        return eps > 0.0 && eps < reach &&
               choice.alpha_sup * kBumpSlopeBound * eps + eps * eps * choice.alpha_slope <
                   kInvertibilityMargin;
    };
    if (requested_in_reach && admissible(*options.epsilon)) {
        choice.epsilon = *options.epsilon;
        choice.requested_accepted = true;
        return choice;
    }
    for (int k = 0; k <= 60; ++k) {
        const double eps = std::ldexp(top, -k);
        if (admissible(eps)) {
            choice.epsilon = eps;
            return choice;
        }
    }
    std::ostringstream msg;
    msg << "no admissible epsilon: sup|alpha| = " << choice.alpha_sup
        << ", sup|(alpha o pr)'| = " << choice.alpha_slope;
    throw NoValidEpsilon(msg.str());
}

TransformedProblem::TransformedProblem(SdeProblem base, const TransformOptions& options)
    : base_(std::make_shared<const SdeProblem>(std::move(base))) {
    base_->validate();
    choice_ = select_epsilon(*base_, options);
    config_.epsilon = choice_.epsilon;
    config_.newton_tol = options.newton_tol;
    config_.newton_max_iter = options.newton_max_iter;
    config_.hessian_fd_step = options.hessian_fd_step;
}

bool TransformedProblem::outside_tube(const Vector& x, double dist) const {
    return dist >= config_.epsilon || dist <= relative_tol(x, kExceptionalSetTol);
}

double TransformedProblem::capital_phi(const Vector& x) const {
    const Hypersurface& theta = base_->theta;
    if (theta.is_empty()) return 0.0;
    if (theta.distance(x) >= config_.epsilon) return 0.0;
    const Vector y = theta.project(x);
    const Vector diff = x - y;
    const double r = diff.norm();
    return theta.unit_normal(y).dot(diff) * r * bump(r / config_.epsilon);
}

RowVector TransformedProblem::capital_phi_grad(const Vector& x) const {
    const Hypersurface& theta = base_->theta;
    const auto d = x.size();
    if (theta.is_empty() || outside_tube(x, theta.distance(x))) return RowVector::Zero(d);
    const Vector y = theta.project(x);
    const Vector diff = x - y;
    const double s = theta.unit_normal(y).dot(diff) >= 0.0 ? 1.0 : -1.0;
    // f_eps'(u) = (1 - v)^4 (1 - 6 v), v = u / eps^2, u = ||x - pr x||^2
    const double v = diff.squaredNorm() / (config_.epsilon * config_.epsilon);
    const double q = 1.0 - v;
    const double slope = q * q * q * q * (1.0 - 6.0 * v);
    return (2.0 * s * slope) * diff.transpose();
}

Vector TransformedProblem::alpha_extended(const Vector& x) const {
    return jump_field(*base_, base_->theta.project(x), config_.epsilon * 0x1.0p-20);
}

Matrix TransformedProblem::alpha_extended_jacobian(const Vector& x) const {
    return alpha_pr_jacobian(*base_, x, config_.epsilon * 0x1.0p-20);
}

Vector TransformedProblem::forward(const Vector& x) const {
    if (is_identity()) return x;
    const double dist = base_->theta.distance(x);
    if (outside_tube(x, dist)) return x;
    return x + capital_phi(x) * alpha_extended(x);
}

Matrix TransformedProblem::jacobian(const Vector& x) const {
    const auto d = x.size();
    if (is_identity()) return Matrix::Identity(d, d);
    const double dist = base_->theta.distance(x);
    if (outside_tube(x, dist)) return Matrix::Identity(d, d);
    Matrix jac = Matrix::Identity(d, d);
    jac.noalias() += alpha_extended(x) * capital_phi_grad(x);
    jac += capital_phi(x) * alpha_extended_jacobian(x);
    return jac;
}

std::vector<Matrix> TransformedProblem::hessian_rows(const Vector& x) const {
    const auto d = x.size();
    std::vector<Matrix> rows(d, Matrix::Zero(d, d));
    if (is_identity()) return rows;
    const Hypersurface& theta = base_->theta;
    const double dist = theta.distance(x);
    if (outside_tube(x, dist)) return rows;

    const double h = config_.hessian_fd_step * (1.0 + x.norm());
    Vector center = x;
    if (dist <= 2.0 * h) {
        // Move the stencil off the surface, keeping x's side.
        const Vector y = theta.project(x);
        const Vector n = theta.unit_normal(y);
        const double s = n.dot(x - y) >= 0.0 ? 1.0 : -1.0;
        center = y + (s * 2.0 * h) * n;
    }
    for (Eigen::Index l = 0; l < d; ++l) {
        Vector xp = center;
        Vector xm = center;
        xp[l] += h;
        xm[l] -= h;
        const Matrix diff = (jacobian(xp) - jacobian(xm)) / (2.0 * h);
        for (Eigen::Index i = 0; i < d; ++i) rows[i].col(l) = diff.row(i).transpose();
    }
    for (auto& r : rows) r = 0.5 * (r + r.transpose()).eval();
    return rows;
}

Vector TransformedProblem::inverse(const Vector& y) const {
    if (is_identity()) return y;
    const double tol = relative_tol(y, config_.newton_tol);
    Vector x = y;
    Vector residual = forward(x) - y;
    double res = residual.norm();
    double best = res;
    for (int iter = 0; iter < config_.newton_max_iter; ++iter) {
        if (res <= tol) return x;
        const Vector step = jacobian(x).partialPivLu().solve(residual);
        double damping = 1.0;
        Vector trial = x - step;
        Vector trial_residual = forward(trial) - y;
        while (trial_residual.norm() >= res && damping > 1e-6) {
            damping *= 0.5;
            trial = x - damping * step;
            trial_residual = forward(trial) - y;
        }
        x = std::move(trial);
        residual = std::move(trial_residual);
        res = residual.norm();
        best = std::min(best, res);
    }
    if (res <= tol) return x;
    std::ostringstream msg;
    msg << "Newton inversion of G did not converge at y = (" << y.transpose()
        << "), best residual " << best;
    throw InverseDidNotConverge(msg.str(), best);
}

Vector TransformedProblem::mu_g(const Vector& y) const {
    LocalCoefficients lc;
    local_coefficients(y, lc);
    return lc.mu;
}

Matrix TransformedProblem::sigma_g(const Vector& y) const {
    const Vector x = inverse(y);
    return jacobian(x) * base_->sigma(x);
}

void TransformedProblem::local_coefficients(const Vector& y, LocalCoefficients& out) const {
    const SdeProblem& base = *base_;
    const int d = base.dim();
    if (is_identity() || base.theta.distance(y) >= config_.epsilon) {
        evaluate_local(base, y, out);
        return;
    }
    const Vector x = inverse(y);
    const Matrix g1 = jacobian(x);
    const std::vector<Matrix> g2 = hessian_rows(x);
    Vector mu(d);
    Matrix sigma(d, d);
    base.mu.eval(x, mu);
    base.sigma.eval(x, sigma);

    const Matrix cov = sigma * sigma.transpose();
    out.mu = g1 * mu;
    for (int i = 0; i < d; ++i) out.mu[i] += 0.5 * (g2[i] * cov).trace();
    out.sigma = g1 * sigma;
    out.dsigma.resize(d);

    if (on_exceptional_set(base.theta, y)) {
        for (auto& m : out.dsigma) m.setZero(d, d);
        return;
    }
    const Matrix g1_inv = g1.inverse();
    Matrix base_dsigma(d, d);
    Matrix m(d, d);
    for (int j = 0; j < d; ++j) {
        partial_diffusion_column(base, j, x, base_dsigma);
        m.noalias() = g1 * base_dsigma;
        for (int i = 0; i < d; ++i) m.row(i) += (g2[i] * sigma.col(j)).transpose();
        out.dsigma[j].noalias() = m * g1_inv;
    }
}

SdeProblem TransformedProblem::as_problem() const {
    const int d = base_->dim();
    auto self = std::make_shared<const TransformedProblem>(*this);
    VectorField::Eval mu_eval = [self](const Vector& y, Vector& out) { out = self->mu_g(y); };
    VectorField mu(d, mu_eval, fd_jacobian(mu_eval, base_->theta));
    MatrixField sigma(
        d, [self](const Vector& y, Matrix& out) { out = self->sigma_g(y); },
        [self](int j, const Vector& y, Matrix& out) {
            LocalCoefficients lc;
            self->local_coefficients(y, lc);
            out = lc.dsigma[j];
        });
    SdeProblem transformed{
        base_->name + "/G", forward(base_->x0), std::move(mu), std::move(sigma),
        base_->theta,       base_->theta,       std::nullopt,
    };
    return transformed;
}

TransformInvariantReport check_transform_invariants(const TransformedProblem& tf,
                                                    std::size_t count, std::uint64_t seed) {
    TransformInvariantReport report;
    const SdeProblem& base = tf.base();
    const Hypersurface& theta = base.theta;
    const double eps = tf.config().epsilon;
    report.epsilon = eps;
    const int d = base.dim();
    CounterRng rng(seed, 2);
    const double spread = 3.0;

    auto ambient = [&]() {
        Vector x(d);
        for (int i = 0; i < d; ++i) x[i] = base.x0[i] + spread * rng.normal();
        return x;
    };
    auto near_surface = [&](double lo, double hi) {
        const Vector y = theta.sample_on_surface(rng, base.x0, spread);
        const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double t = lo + (hi - lo) * rng.uniform();
        return Vector(y + side * t * theta.unit_normal(y));
    };

    const std::size_t n_tube = theta.is_empty() ? 0 : count * 2 / 5;
    const std::size_t n_on = theta.is_empty() ? 0 : count / 5;
    const std::size_t n_shell = theta.is_empty() ? 0 : count / 5;
    const std::size_t n_ambient = count - n_tube - n_on - n_shell;

    std::vector<Vector> tube, on, outside;
    for (std::size_t i = 0; i < n_tube; ++i) tube.push_back(near_surface(0.0, eps));
    for (std::size_t i = 0; i < n_on; ++i) on.push_back(theta.sample_on_surface(rng, base.x0, spread));
    for (std::size_t i = 0; i < n_shell; ++i) outside.push_back(near_surface(eps, 3.0 * eps));
    std::vector<Vector> ambient_points;
    for (std::size_t i = 0; i < n_ambient; ++i) ambient_points.push_back(ambient());
    report.points = count;

    const Matrix identity = Matrix::Identity(d, d);
    auto check_identity = [&](const Vector& x) {
        if (tf.forward(x) != x || tf.jacobian(x) != identity) ++report.identity_violations;
    };
    for (const auto& x : on) check_identity(x);
    for (const auto& x : outside) check_identity(x);
    for (const auto& x : ambient_points) {
        if (theta.is_empty() || theta.distance(x) >= eps) check_identity(x);
    }

    std::vector<Vector> all;
    all.reserve(count);
    for (const auto* group : {&tube, &on, &outside, &ambient_points})
        all.insert(all.end(), group->begin(), group->end());

    for (const auto& x : all) {
        const bool in_reach = !theta.is_empty() && theta.distance(x) < theta.reach();
        if (in_reach) {
            report.phi_ratio = std::max(report.phi_ratio, std::abs(tf.capital_phi(x)) / (eps * eps));
            report.phi_grad_ratio = std::max(
                report.phi_grad_ratio, tf.capital_phi_grad(x).norm() / (kBumpSlopeBound * eps));
        }
        report.inverse_roundtrip =
            std::max(report.inverse_roundtrip, (tf.inverse(tf.forward(x)) - x).norm());
    }

    for (const auto& x : tube) {
        const Matrix jac = tf.jacobian(x);
        Matrix fd(d, d);
        const double h = 1e-6 * (1.0 + x.norm());
        for (int k = 0; k < d; ++k) {
            Vector xp = x;
            Vector xm = x;
            xp[k] += h;
            xm[k] -= h;
            fd.col(k) = (tf.forward(xp) - tf.forward(xm)) / (2.0 * h);
        }
        report.jacobian_fd_rel_error =
            std::max(report.jacobian_fd_rel_error, (fd - jac).norm() / jac.norm());
    }

    for (const auto& y : on) {
        report.sigma_on_surface =
            std::max(report.sigma_on_surface, (tf.sigma_g(y) - base.sigma(y)).norm());
    }

    // Commutativity and Lipschitz quotients of the transformed coefficients.
    std::vector<Vector> transformed_points;
    for (const auto& x : tube) transformed_points.push_back(tf.forward(x));
    const SdeProblem transformed = tf.as_problem();
    report.sigma_g_commutativity =
        check_commutativity(transformed.sigma, theta, transformed_points, 1e-6).max_residual;

    const double pair_step = std::max(eps, 1e-3) * 0.25;
    for (std::size_t i = 0; i < std::min<std::size_t>(transformed_points.size(), 500); ++i) {
        const Vector& a = transformed_points[i];
        Vector b = a;
        for (int k = 0; k < d; ++k) b[k] += pair_step * (2.0 * rng.uniform() - 1.0);
        const double dist = (a - b).norm();
        if (dist == 0.0) continue;
        report.mu_g_lipschitz =
            std::max(report.mu_g_lipschitz, (tf.mu_g(a) - tf.mu_g(b)).norm() / dist);
        report.sigma_g_lipschitz =
            std::max(report.sigma_g_lipschitz, (tf.sigma_g(a) - tf.sigma_g(b)).norm() / dist);
    }
    return report;
}

}  // namespace discosde
