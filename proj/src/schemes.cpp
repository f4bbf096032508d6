#include "discosde/schemes.hpp"

#include <sstream>

namespace discosde {

std::string_view scheme_name(SchemeKind kind) noexcept {
    switch (kind) {
        case SchemeKind::euler: return "euler";
        case SchemeKind::milstein: return "milstein";
        case SchemeKind::transformed_milstein: return "transformed_milstein";
    }
    return "unknown";
}

SchemeKind parse_scheme(std::string_view name) {
    if (name == "euler") return SchemeKind::euler;
    if (name == "milstein") return SchemeKind::milstein;
    if (name == "transformed_milstein") return SchemeKind::transformed_milstein;
    throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

namespace {

using ConstMap = Eigen::Map<const Vector>;

/// Scratch storage reused across steps.
struct Stepper {
    explicit Stepper(int d) : v(d) {}

    /// next = x + mu dt + sigma dW (+ sum_{j2} dsigma_{j2} sigma J_{., j2}).
    void step(const Vector& x, double dt, const double* dw, const double* J,
              const LocalCoefficients& lc, Vector& next) {
        const int d = static_cast<int>(x.size());
        next = x;
        next.noalias() += dt * lc.mu;
        next.noalias() += lc.sigma * ConstMap(dw, d);
        if (J == nullptr) return;
        for (int j2 = 0; j2 < d; ++j2) {
            v.setZero();
            for (int j1 = 0; j1 < d; ++j1) v.noalias() += J[j1 * d + j2] * lc.sigma.col(j1);
            next.noalias() += lc.dsigma[static_cast<std::size_t>(j2)] * v;
        }
    }

    Vector v;
};

void require_finite(const Vector& x, std::size_t k) {
    if (!x.allFinite()) {
        std::ostringstream msg;
        msg << "non-finite state at step " << k;
        throw NonFinite(msg.str());
    }
}

void require_dims(const SdeProblem& problem, const CoarseDrivers& drivers) {
    if (problem.dim() != drivers.d) throw Error("problem and driver dimensions differ");
}

template <class Coefficients>
Trajectory run_path(const Vector& x0, const CoarseDrivers& drivers, bool milstein,
                    Coefficients&& coefficients) {
    const int d = drivers.d;
    const auto dd = static_cast<std::size_t>(d);
    Trajectory traj;
    traj.n = drivers.n;
    traj.states.resize(static_cast<Eigen::Index>(drivers.n + 1), d);
    traj.states.row(0) = x0.transpose();

    Stepper stepper(d);
    LocalCoefficients lc;
    Vector x = x0;
    Vector next(d);
    const double dt = drivers.step();
    for (std::size_t k = 0; k < drivers.n; ++k) {
        coefficients(x, lc);
        const double* J = milstein ? drivers.iterated.data() + k * dd * dd : nullptr;
        stepper.step(x, dt, drivers.increments.data() + k * dd, J, lc, next);
        require_finite(next, k + 1);
        x.swap(next);
        traj.states.row(static_cast<Eigen::Index>(k + 1)) = x.transpose();
    }
    return traj;
}

}  // namespace

Trajectory euler_path(const SdeProblem& problem, const CoarseDrivers& drivers) {
    require_dims(problem, drivers);
    const int d = problem.dim();
    return run_path(problem.x0, drivers, false, [&](const Vector& x, LocalCoefficients& lc) {
        problem.mu.eval(x, lc.mu);
        problem.sigma.eval(x, lc.sigma);
        lc.dsigma.resize(static_cast<std::size_t>(d));
    });
}

Trajectory milstein_path(const SdeProblem& problem, const CoarseDrivers& drivers) {
    require_dims(problem, drivers);
    return run_path(problem.x0, drivers, true, [&](const Vector& x, LocalCoefficients& lc) {
        evaluate_local(problem, x, lc);
    });
}

RowMajorMatrix continuous_interpolation(const SdeProblem& problem, const CoarseDrivers& drivers,
                                        const PathBundle& bundle, SchemeKind kind) {
    require_dims(problem, drivers);
    if (bundle.d != drivers.d || drivers.n == 0 || bundle.fine_n % drivers.n != 0)
        throw NotDivisible("bundle is not the parent of the drivers");
    if (kind == SchemeKind::transformed_milstein)
        throw Error("continuous interpolation is defined for euler and milstein");
    const bool milstein = kind == SchemeKind::milstein;
    const int d = drivers.d;
    const auto dd = static_cast<std::size_t>(d);
    const std::size_t ratio = bundle.fine_n / drivers.n;
    const double fine_n = static_cast<double>(bundle.fine_n);

    RowMajorMatrix out(static_cast<Eigen::Index>(bundle.fine_n + 1), d);
    out.row(0) = problem.x0.transpose();

    Stepper stepper(d);
    LocalCoefficients lc;
    Vector anchor = problem.x0;
    Vector value(d);
    std::vector<double> partial(dd);
    std::vector<double> J(dd * dd);
    for (std::size_t k = 0; k < drivers.n; ++k) {
        if (milstein) {
            evaluate_local(problem, anchor, lc);
        } else {
            problem.mu.eval(anchor, lc.mu);
            problem.sigma.eval(anchor, lc.sigma);
        }
        std::fill(partial.begin(), partial.end(), 0.0);
        std::fill(J.begin(), J.end(), 0.0);
        for (std::size_t m = 1; m <= ratio; ++m) {
            const std::size_t i = k * ratio + m - 1;
            const auto row = bundle.row(i);
            for (std::size_t j1 = 0; j1 < dd; ++j1)
                for (std::size_t j2 = j1 + 1; j2 < dd; ++j2) J[j1 * dd + j2] += partial[j1] * row[j2];
            for (std::size_t j = 0; j < dd; ++j) partial[j] += row[j];

            const double dt = static_cast<double>(m) / fine_n;
            const double* Jp = nullptr;
            if (milstein) {
                for (std::size_t j = 0; j < dd; ++j)
                    J[j * dd + j] = 0.5 * (partial[j] * partial[j] - dt);
                for (std::size_t j1 = 0; j1 < dd; ++j1)
                    for (std::size_t j2 = j1 + 1; j2 < dd; ++j2)
                        J[j2 * dd + j1] = partial[j1] * partial[j2] - J[j1 * dd + j2];
                Jp = J.data();
            }
            stepper.step(anchor, dt, partial.data(), Jp, lc, value);
            require_finite(value, i + 1);
            out.row(static_cast<Eigen::Index>(i + 1)) = value.transpose();
        }
        anchor = value;
    }
    return out;
}

Trajectory transformed_milstein_path(const SdeProblem& problem, const TransformedProblem& tf,
                                     const CoarseDrivers& drivers) {
    require_dims(problem, drivers);
    if (tf.is_identity()) return milstein_path(problem, drivers);
    const Vector z0 = tf.forward(problem.x0);
    Trajectory traj = run_path(z0, drivers, true, [&](const Vector& y, LocalCoefficients& lc) {
        tf.local_coefficients(y, lc);
    });
    traj.states.row(0) = problem.x0.transpose();
    for (Eigen::Index k = 1; k < traj.states.rows(); ++k) {
        const Vector y = traj.states.row(k).transpose();
        traj.states.row(k) = tf.inverse(y).transpose();
    }
    return traj;
}

Trajectory run_scheme(SchemeKind kind, const SdeProblem& problem, const CoarseDrivers& drivers,
                      const TransformedProblem* tf) {
    switch (kind) {
        case SchemeKind::euler: return euler_path(problem, drivers);
        case SchemeKind::milstein: return milstein_path(problem, drivers);
        case SchemeKind::transformed_milstein:
            if (tf == nullptr) throw Error("transformed_milstein needs a transform");
            return transformed_milstein_path(problem, *tf, drivers);
    }
    throw Error("unknown scheme");
}

}  // namespace discosde
