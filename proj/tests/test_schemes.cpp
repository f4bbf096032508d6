#include "discosde/problems.hpp"
#include "discosde/schemes.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace discosde;

namespace {

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

SdeProblem brownian_problem(int d) {
    return SdeProblem{"brownian",
                      Vector::Constant(d, 0.5),
                      constant_field(Vector::Zero(d)),
                      make_diffusion(d, DiffusionKind::constant, Vector::Constant(1, 1.0)),
                      Hypersurface::empty(),
                      Hypersurface::empty(),
                      std::nullopt};
}

SdeProblem gbm1d(double a, double b) {
    VectorField mu(
        1, [a](const Vector& x, Vector& out) { out = a * x; },
        [a](const Vector&, Matrix& out) { out = Matrix::Constant(1, 1, a); });
    return SdeProblem{"gbm1d", Vector::Constant(1, 1.3), std::move(mu),
                      make_diffusion(1, DiffusionKind::diagonal_linear, Vector::Constant(1, b)),
                      Hypersurface::empty(), Hypersurface::empty(), std::nullopt};
}

}  // namespace

TEST(Euler, PureBrownianMotion) {
    const SdeProblem p = brownian_problem(2);
    const PathBundle b = generate_fine_path(1, 0, 64, 2);
    const CoarseDrivers dr = make_drivers(b, 16);
    const Trajectory t = euler_path(p, dr);
    Vector w = p.x0;
    EXPECT_EQ(t.states.row(0).transpose(), p.x0);
    for (std::size_t k = 0; k < 16; ++k) {
        for (int j = 0; j < 2; ++j) w[j] += dr.increment(k, j);
        EXPECT_LT((t.states.row(k + 1).transpose() - w).norm(), 1e-14);
    }
}

TEST(Euler, ConstantDriftNoNoise) {
    SdeProblem p = brownian_problem(2);
    p.mu = constant_field(v2(0.3, -2));
    p.sigma = make_diffusion(2, DiffusionKind::constant, Vector::Zero(1));
    const CoarseDrivers dr = make_drivers(generate_fine_path(1, 0, 64, 2), 32);
    EXPECT_LT((euler_path(p, dr).final_state() - (p.x0 + v2(0.3, -2))).norm(), 1e-14);
}

TEST(Milstein, PureBrownianMotion) {
    const SdeProblem p = brownian_problem(3);
    const CoarseDrivers dr = make_drivers(generate_fine_path(2, 0, 64, 3), 8);
    EXPECT_EQ(milstein_path(p, dr).states, euler_path(p, dr).states);
}

TEST(Milstein, GbmOracle) {
    const double a = 0.4, b = 0.9;
    const SdeProblem p = gbm1d(a, b);
    const CoarseDrivers dr = make_drivers(generate_fine_path(3, 0, 256, 1), 32);
    const Trajectory t = milstein_path(p, dr);
    double x = p.x0[0];
    for (std::size_t k = 0; k < 32; ++k) {
        x = oracle::gbm_milstein_step(x, a, b, 1.0 / 32, dr.increment(k, 0));
        EXPECT_NEAR(t.states(k + 1, 0), x, 1e-13 * (1 + std::abs(x)));
    }
}

TEST(Milstein, EqualsEulerForConstantSigma) {
    SdeProblem p = circle2d();
    p.sigma = make_diffusion(2, DiffusionKind::constant, Vector::Constant(1, 0.7));
    const CoarseDrivers dr = make_drivers(generate_fine_path(4, 0, 1024, 2), 64);
    EXPECT_EQ(milstein_path(p, dr).states, euler_path(p, dr).states);
}

TEST(Milstein, CouplingDeterminism) {
    const SdeProblem p = circle2d();
    const CoarseDrivers dr = make_drivers(generate_fine_path(5, 9, 1024, 2), 128);
    EXPECT_EQ(milstein_path(p, dr).states, milstein_path(p, dr).states);
    EXPECT_EQ(euler_path(p, dr).states, euler_path(p, dr).states);
}

// For commutative sigma only the symmetric part of J enters the scheme.
TEST(Milstein, InvariantUnderLevyAreaPerturbation) {
    const SdeProblem p = circle2d();
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        const CoarseDrivers dr = make_drivers(generate_fine_path(6, rep, 4096, 2), 64);
        CoarseDrivers perturbed = dr;
        for (std::size_t k = 0; k < dr.n; ++k) {
            const double shift = 0.01 * std::sin(static_cast<double>(k + rep));
            perturbed.J(k, 0, 1) += shift;
            perturbed.J(k, 1, 0) = dr.increment(k, 0) * dr.increment(k, 1) - perturbed.J(k, 0, 1);
        }
        const Trajectory a = milstein_path(p, dr);
        const Trajectory b = milstein_path(p, perturbed);
        EXPECT_LT((a.states - b.states).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Milstein, NonFiniteAborts) {
    SdeProblem p = gbm1d(0.0, 1.0);
    p.mu = VectorField(
        1, [](const Vector& x, Vector& out) { out = x.array().exp().exp(); },
        [](const Vector&, Matrix& out) { out = Matrix::Zero(1, 1); });
    p.x0 = Vector::Constant(1, 10.0);
    const CoarseDrivers dr = make_drivers(generate_fine_path(7, 0, 16, 1), 4);
    EXPECT_THROW(milstein_path(p, dr), NonFinite);
}

TEST(Interpolation, HitsCoarseStates) {
    const SdeProblem p = circle2d();
    const PathBundle b = generate_fine_path(8, 0, 1024, 2);
    const CoarseDrivers dr = make_drivers(b, 32);
    for (SchemeKind kind : {SchemeKind::euler, SchemeKind::milstein}) {
        const RowMajorMatrix fine = continuous_interpolation(p, dr, b, kind);
        const Trajectory t = run_scheme(kind, p, dr);
        for (std::size_t k = 0; k <= 32; ++k)
            EXPECT_LT((fine.row(k * 32) - t.states.row(k)).norm(), 1e-12);
    }
}

TEST(Interpolation, PureBrownianMotion) {
    const SdeProblem p = brownian_problem(2);
    const PathBundle b = generate_fine_path(9, 0, 256, 2);
    const RowMajorMatrix fine = continuous_interpolation(p, make_drivers(b, 8), b);
    Vector w = p.x0;
    for (std::size_t i = 0; i < 256; ++i) {
        for (int j = 0; j < 2; ++j) w[j] += b.increment(i, j);
        EXPECT_LT((fine.row(i + 1).transpose() - w).norm(), 1e-13);
    }
}

// With sigma(x) = x on one coordinate (linear, Delta empty) and mu = 0 the
// Milstein interpolation at s is x_k (1 + dW + ((dW)^2 - (s - t_k)) / 2),
// which exposes the partial diagonal integral.
TEST(Interpolation, PartialDiagonalIntegral) {
    const SdeProblem p = gbm1d(0.0, 1.0);
    const PathBundle b = generate_fine_path(10, 0, 128, 1);
    const CoarseDrivers dr = make_drivers(b, 4);
    const RowMajorMatrix fine = continuous_interpolation(p, dr, b);
    const Trajectory t = milstein_path(p, dr);
    for (std::size_t k = 0; k < 4; ++k) {
        double w = 0.0;
        for (std::size_t m = 1; m <= 32; ++m) {
            w += b.increment(k * 32 + m - 1, 0);
            const double ds = static_cast<double>(m) / 128.0;
            const double expected = t.states(k, 0) * (1.0 + w + 0.5 * (w * w - ds));
            EXPECT_NEAR(fine(k * 32 + m, 0), expected, 1e-12);
        }
    }
}

TEST(Transformed, ContinuousDriftMatchesMilstein) {
    PiecewiseSpec spec;
    spec.surface = Hypersurface::sphere(v2(0, 0), 2.0);
    spec.x0 = v2(0, 2);
    spec.drift_minus = v2(1, -1);
    spec.drift_plus = v2(1, -1);
    spec.diffusion_coeffs = Vector::Constant(1, 1.0);
    const SdeProblem p = make_piecewise_problem("smooth", spec);
    const TransformedProblem tf(p);
    const CoarseDrivers dr = make_drivers(generate_fine_path(11, 0, 1024, 2), 64);
    EXPECT_EQ(transformed_milstein_path(p, tf, dr).states, milstein_path(p, dr).states);
}

TEST(Transformed, IdentityRegionMatchesMilstein) {
    SdeProblem p = circle2d();
    p.x0 = v2(0, 3);
    p.sigma = make_diffusion(2, DiffusionKind::constant, Vector::Constant(1, 0.01));
    const TransformedProblem tf(p);
    const CoarseDrivers dr = make_drivers(generate_fine_path(12, 0, 1024, 2), 64);
    EXPECT_EQ(transformed_milstein_path(p, tf, dr).states, milstein_path(p, dr).states);
}

TEST(Transformed, StartsAtX0AndStaysFinite) {
    const SdeProblem p = circle2d();
    const TransformedProblem tf(p);
    const CoarseDrivers dr = make_drivers(generate_fine_path(13, 0, 1024, 2), 32);
    const Trajectory t = transformed_milstein_path(p, tf, dr);
    EXPECT_EQ(t.states.row(0).transpose(), p.x0);
    EXPECT_TRUE(t.states.allFinite());
}

// Sanity envelope: at n = 32 the transformed scheme's L2 error against the
// fine Milstein reference stays within 3x of plain Milstein's.
TEST(Transformed, ErrorEnvelopeAgainstMilstein) {
    const SdeProblem p = circle2d();
    const TransformedProblem tf(p);
    double ss_plain = 0.0, ss_tf = 0.0;
    const int m = 200;
    for (int rep = 0; rep < m; ++rep) {
        const PathBundle b = generate_fine_path(14, rep, 4096, 2);
        const Vector ref = milstein_path(p, make_drivers(b, 4096)).final_state();
        const CoarseDrivers dr = make_drivers(b, 32);
        ss_plain += (ref - milstein_path(p, dr).final_state()).squaredNorm();
        ss_tf += (ref - transformed_milstein_path(p, tf, dr).final_state()).squaredNorm();
    }
    const double e_plain = std::sqrt(ss_plain / m), e_tf = std::sqrt(ss_tf / m);
    EXPECT_TRUE(std::isfinite(e_tf));
    EXPECT_LT(e_tf, 3 * e_plain) << e_tf << " vs " << e_plain;
}

// Milstein on a Lipschitz problem with empty Delta: error decreases in n.
TEST(Milstein, ErrorDecreasesOnSmoothProblem) {
    const SdeProblem p = gbm2d();
    const std::vector<std::size_t> ns{8, 16, 32, 64};
    std::vector<double> ss(ns.size(), 0.0);
    for (int rep = 0; rep < 10000; ++rep) {
        const PathBundle b = generate_fine_path(15, rep, 1024, 2);
        const Vector ref = milstein_path(p, make_drivers(b, 1024)).final_state();
        for (std::size_t l = 0; l < ns.size(); ++l)
            ss[l] += (ref - milstein_path(p, make_drivers(b, ns[l])).final_state()).squaredNorm();
    }
    for (std::size_t l = 1; l < ns.size(); ++l) EXPECT_LT(ss[l], ss[l - 1]);
}

TEST(Schemes, ParseNames) {
    EXPECT_EQ(parse_scheme("euler"), SchemeKind::euler);
    EXPECT_EQ(parse_scheme("transformed_milstein"), SchemeKind::transformed_milstein);
    EXPECT_EQ(scheme_name(SchemeKind::milstein), "milstein");
    EXPECT_THROW(parse_scheme("runge_kutta"), ConfigError);
}
