// Acceptance suite: one PASS/FAIL line per criterion.

#include "discosde/brownian.hpp"
#include "discosde/harness.hpp"
#include "discosde/problems.hpp"
#include "discosde/schemes.hpp"
#include "discosde/transform.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace discosde;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

unsigned pool_size() { return std::max(1u, std::thread::hardware_concurrency()); }

ExperimentConfig desk_config(const std::string& problem, SchemeKind scheme) {
    ExperimentConfig c;
    c.problem = problem;
    c.scheme = scheme;
    c.n_list = {32, 64, 128, 256, 512, 1024};
    c.fine_n = 1u << 14;
    c.reps = 20000;
    c.p_list = {1.0, 2.0, 4.0, 8.0};
    c.seed = 20240601;
    c.threads = pool_size();
    return c;
}

void print_table(const ExperimentResult& r) {
    for (const RateFit& f : r.table.rates)
        std::printf("    %s/%s p=%g rate %.4f r2 %.4f\n", r.table.scheme.c_str(),
                    r.table.problem.c_str(), f.p, f.rate, f.r_squared);
    std::printf("    (%zu reps, %zu aborted, %.1f s)\n", r.table.reps, r.aborted, r.seconds);
}

void criteria_1_to_3() {
    const ExperimentResult mil = run_experiment(desk_config("circle2d", SchemeKind::milstein));
    print_table(mil);
    ExperimentConfig c = desk_config("circle2d", SchemeKind::euler);
    c.p_list = {2.0};
    const ExperimentResult eul = run_experiment(c);
    print_table(eul);

    const double rate_m = mil.table.rate_for(2.0)->rate;
    report(1, rate_m >= 0.70 && rate_m <= 0.95,
           fmt("circle2d Milstein L2 rate %.4f, band [0.70, 0.95]", rate_m));
    const double rate_e = eul.table.rate_for(2.0)->rate;
    report(2, rate_e >= 0.40 && rate_e <= 0.62,
           fmt("circle2d Euler L2 rate %.4f, band [0.40, 0.62]", rate_e));

    bool monotone = true;
    std::ostringstream detail;
    detail << "Milstein rates for p = 1, 2, 4, 8:";
    const std::vector<double> ps{1, 2, 4, 8};
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double rate = mil.table.rate_for(ps[i])->rate;
        detail << ' ' << fmt("%.4f", rate);
        for (std::size_t j = 0; j < i; ++j)
            if (rate > mil.table.rate_for(ps[j])->rate + 0.05) monotone = false;
    }
    detail << " (non-increasing within 0.05)";
    report(3, monotone, detail.str());
}

void criterion_4() {
    ExperimentConfig c = desk_config("gbm2d", SchemeKind::milstein);
    c.p_list = {2.0};
    const ExperimentResult mil = run_experiment(c);
    print_table(mil);
    c.scheme = SchemeKind::euler;
    const ExperimentResult eul = run_experiment(c);
    print_table(eul);
    const double rm = mil.table.rate_for(2.0)->rate;
    const double re = eul.table.rate_for(2.0)->rate;
    std::ostringstream detail;
    detail << "gbm2d Milstein rate " << fmt("%.4f", rm) << " (>= 0.9), Euler rate "
           << fmt("%.4f", re) << " ([0.4, 0.65])";
    report(4, rm >= 0.9 && re >= 0.4 && re <= 0.65, detail.str());
}

void criterion_5() {
    const TransformedProblem tf(circle2d());
    const TransformInvariantReport r = check_transform_invariants(tf, 10000, 20240601);
    std::printf("    eps %.6g over %zu points\n", r.epsilon, r.points);
    std::printf("    |Phi|/eps^2 max %.3g, |Phi'|/(112 eps) max %.3g, identity violations %zu\n",
                r.phi_ratio, r.phi_grad_ratio, r.identity_violations);
    std::printf("    G' fd rel err %.3g, inverse round trip %.3g\n", r.jacobian_fd_rel_error,
                r.inverse_roundtrip);
    std::printf("    sigma_G on Theta %.3g, sigma_G commutativity %.3g\n", r.sigma_on_surface,
                r.sigma_g_commutativity);
    report(5, r.points >= 10000 && r.all_ok(), "circle2d transform invariant suite");
}

void criterion_6() {
    const std::size_t n = 64, fine = 1u << 14;
    bool diagonal_exact = true, pairwise_exact = true;
    std::vector<double> j12sq;
    std::uint64_t rep = 0;
    const double h = 1.0 / static_cast<double>(n);
    while (j12sq.size() < 100000) {
        const PathBundle b = generate_fine_path(777, rep++, fine, 2);
        const CoarseDrivers dr = make_drivers(b, n);
        for (std::size_t k = 0; k < n; ++k) {
            for (int j = 0; j < 2; ++j) {
                const double w = dr.increment(k, j);
                if (dr.J(k, j, j) != 0.5 * (w * w - h)) diagonal_exact = false;
            }
            const double prod = dr.increment(k, 0) * dr.increment(k, 1);
            const double scale = std::max({std::abs(prod), std::abs(dr.J(k, 0, 1)),
                                           std::abs(dr.J(k, 1, 0))});
            if (dr.J(k, 1, 0) != prod - dr.J(k, 0, 1)) pairwise_exact = false;
            if (std::abs(dr.J(k, 0, 1) + dr.J(k, 1, 0) - prod) >
                std::numeric_limits<double>::epsilon() * scale)
                pairwise_exact = false;
            j12sq.push_back(dr.J(k, 0, 1) * dr.J(k, 0, 1));
        }
    }
    const auto m = oracle::mean_se(j12sq);
    const double target = h * h / 2.0;
    const double z = (m.mean - target) / m.se;
    std::ostringstream detail;
    detail << "diagonal exact " << (diagonal_exact ? "yes" : "no") << ", pairwise exact "
           << (pairwise_exact ? "yes" : "no") << ", E[J12^2] = " << fmt("%.6g", m.mean)
           << " vs " << fmt("%.6g", target) << " (" << fmt("%.2f", z) << " SE over "
           << j12sq.size() << " steps)";
    report(6, diagonal_exact && pairwise_exact && std::abs(z) <= 5.0, detail.str());
}

void criterion_7() {
    const SdeProblem p = circle2d();
    const std::size_t fine = 1u << 10, m = 10000;
    const std::vector<double> eps{0.02, 0.04, 0.08};
    std::vector<double> occupation(eps.size(), 0.0);
    double cross32 = 0.0, cross64 = 0.0;
    for (std::size_t rep = 0; rep < m; ++rep) {
        const PathBundle b = generate_fine_path(4242, rep, fine, 2);
        const CoarseDrivers d64 = make_drivers(b, 64);
        const CoarseDrivers d32 = make_drivers(b, 32);
        const RowMajorMatrix f64 = continuous_interpolation(p, d64, b);
        const RowMajorMatrix f32 = continuous_interpolation(p, d32, b);
        for (std::size_t i = 0; i < eps.size(); ++i)
            occupation[i] += occupation_fraction(f64, p.theta, eps[i]);
        cross64 += crossing_fraction(f64, milstein_path(p, d64).states, p.theta);
        cross32 += crossing_fraction(f32, milstein_path(p, d32).states, p.theta);
    }
    for (double& o : occupation) o /= static_cast<double>(m);
    cross32 /= static_cast<double>(m);
    cross64 /= static_cast<double>(m);
    const auto [slope, r2] = oracle::ols(eps, occupation);
    const double ratio = cross64 / cross32;
    std::ostringstream detail;
    detail << "occupation " << fmt("%.4g", occupation[0]) << ", " << fmt("%.4g", occupation[1])
           << ", " << fmt("%.4g", occupation[2]) << " (slope " << fmt("%.4g", slope) << ", r2 "
           << fmt("%.4f", r2) << "); crossing n=32 " << fmt("%.4g", cross32) << ", n=64 "
           << fmt("%.4g", cross64) << " (ratio " << fmt("%.3f", ratio) << ", must be < 1)";
    report(7, slope > 0 && r2 >= 0.9 && ratio < 1.0, detail.str());
}

void criterion_8() {
    ExperimentConfig c = desk_config("circle2d", SchemeKind::milstein);
    c.reps = 2000;
    c.fine_n = 1u << 12;
    c.n_list = {32, 64, 128, 256};
    auto csv = [&](unsigned threads) {
        c.threads = threads;
        std::ostringstream out;
        write_csv(out, run_experiment(c).table);
        return out.str();
    };
    const std::string a1 = csv(1), b1 = csv(1), a4 = csv(4), b4 = csv(4);
    report(8, a1 == b1 && a4 == b4 && a1 == a4,
           "CSV bitwise identical across repeated runs at 1 and 4 threads");
}

}  // namespace

int main() {
    std::printf("acceptance suite (%u worker threads)\n", pool_size());
    try {
        criteria_1_to_3();
        criterion_4();
        criterion_5();
        criterion_6();
        criterion_7();
        criterion_8();
    } catch (const std::exception& e) {
        std::printf("[FAIL] aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
