#include "discosde/config.hpp"
#include "discosde/harness.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace discosde;

namespace {

Vector v2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

ErrorTable power_law(double c, double rate) {
    ErrorTable t;
    for (std::size_t n = 32; n <= 1024; n *= 2)
        t.rows.push_back({n, 2.0, c * std::pow(static_cast<double>(n), -rate), 0.0});
    return t;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.problem = "circle2d";
    c.scheme = SchemeKind::milstein;
    c.n_list = {8, 16, 32, 64};
    c.fine_n = 512;
    c.reps = 64;
    c.p_list = {1.0, 2.0};
    c.seed = 99;
    return c;
}

}  // namespace

TEST(EmpiricalError, Examples) {
    const std::vector<Vector> diffs{v2(0.1, 0.0), v2(0.0, -0.3)};
    EXPECT_NEAR(empirical_error(diffs, 2.0).error, std::sqrt(0.05), 1e-15);
    EXPECT_NEAR(empirical_error(diffs, 1.0).error, 0.2, 1e-15);
    const std::vector<Vector> zeros(5, Vector::Zero(2));
    EXPECT_EQ(empirical_error(zeros, 2.0).error, 0.0);
    EXPECT_EQ(empirical_error(zeros, 2.0).std_error, 0.0);
}

TEST(EmpiricalError, DeltaMethodStandardError) {
    const std::vector<double> norms{0.1, 0.3, 0.2, 0.5};
    std::vector<double> sq;
    for (double r : norms) sq.push_back(r * r);
    const auto ms = oracle::mean_se(sq);
    const ErrorEstimate e = empirical_error_from_norms(norms, 2.0);
    EXPECT_NEAR(e.std_error, ms.se / (2 * std::sqrt(ms.mean)), 1e-15);
}

TEST(FitRate, ExactPowerLaws) {
    const RateFit a = fit_rate(power_law(3.0, 0.75), 2.0);
    EXPECT_NEAR(a.rate, 0.75, 1e-12);
    EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(a.intercept, std::log2(3.0), 1e-12);
    EXPECT_NEAR(fit_rate(power_law(0.2, 1.0), 2.0).rate, 1.0, 1e-12);
}

TEST(FitRate, Degenerate) {
    ErrorTable t = power_law(1.0, 0.5);
    t.rows[2].error = 0.0;
    EXPECT_THROW(fit_rate(t, 2.0), DegenerateFit);
    ErrorTable few = power_law(1.0, 0.5);
    few.rows.resize(2);
    EXPECT_THROW(fit_rate(few, 2.0), DegenerateFit);
}

TEST(Occupation, Trivial) {
    const Hypersurface circle = Hypersurface::sphere(v2(0, 0), 2.0);
    RowMajorMatrix far(9, 2);
    far.rowwise() = v2(0, 7).transpose();
    EXPECT_EQ(occupation_fraction(far, circle, 1.0), 0.0);
    RowMajorMatrix on(9, 2);
    on.rowwise() = v2(2, 0).transpose();
    EXPECT_EQ(occupation_fraction(on, circle, 1e-6), 1.0);
}

TEST(Occupation, CountsLeftPoints) {
    const Hypersurface plane = Hypersurface::hyperplane(v2(1, 0), 0.0);
    RowMajorMatrix path(5, 2);
    path << 0.05, 0, 0.5, 0, 0.01, 0, 3, 0, 0.0, 0;
    EXPECT_DOUBLE_EQ(occupation_fraction(path, plane, 0.1), 0.5);
}

TEST(Crossing, Trivial) {
    const Hypersurface circle = Hypersurface::sphere(v2(0, 0), 2.0);
    RowMajorMatrix fine(9, 2), coarse(3, 2);
    fine.rowwise() = v2(0, 7).transpose();
    coarse.rowwise() = v2(0, 7).transpose();
    EXPECT_EQ(crossing_fraction(fine, coarse, circle), 0.0);
    fine.rowwise() = v2(0, 2).transpose();
    coarse.rowwise() = v2(0, 2).transpose();
    EXPECT_EQ(crossing_fraction(fine, coarse, circle), 1.0);
}

TEST(Crossing, DistanceVersusMovement) {
    const Hypersurface plane = Hypersurface::hyperplane(v2(1, 0), 0.0);
    RowMajorMatrix coarse(2, 2), fine(5, 2);
    coarse << 1, 0, 0, 0;
    fine << 1, 0, 0.9, 0, 0.4, 0, -0.2, 0, 0, 0;
    EXPECT_DOUBLE_EQ(crossing_fraction(fine, coarse, plane), 0.5);
    RowMajorMatrix bad(4, 2);
    EXPECT_THROW(crossing_fraction(bad, RowMajorMatrix(3, 2), plane), NotDivisible);
}

TEST(Config, Validation) {
    ExperimentConfig c = small_config();
    EXPECT_NO_THROW(c.validate());
    c.n_list.push_back(3);
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config();
    c.reps = 1;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config();
    c.p_list = {0.5};
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, ParseFile) {
    std::istringstream in(R"(# circle experiment
problem = circle2d
scheme = euler
n_list = [8, 16, 32]
fine_n = 256
reps = 10
p_list = [1, 2.5]
seed = 12345678901
threads = 3
epsilon = 0.01
)");
    const ExperimentConfig c = parse_config(in);
    EXPECT_EQ(c.scheme, SchemeKind::euler);
    EXPECT_EQ(c.n_list, (std::vector<std::size_t>{8, 16, 32}));
    EXPECT_EQ(c.fine_n, 256u);
    EXPECT_EQ(c.p_list, (std::vector<double>{1.0, 2.5}));
    EXPECT_EQ(c.seed, 12345678901ull);
    EXPECT_EQ(c.threads, 3u);
    EXPECT_EQ(*c.transform.epsilon, 0.01);
}

TEST(Config, InlinePiecewiseProblem) {
    std::istringstream in(R"(problem = piecewise
surface = hyperplane
normal = [0, 1]
offset = 0.5
x0 = [0, 0]
drift_minus = [0, 1]
drift_plus = [0, -1]
diffusion = constant
diffusion_coeffs = [0.5]
n_list = [4, 8, 16]
fine_n = 64
reps = 4
)");
    const ExperimentConfig c = parse_config(in);
    const SdeProblem p = resolve_problem(c);
    EXPECT_EQ(p.theta.kind(), Hypersurface::Kind::hyperplane);
    EXPECT_TRUE(p.mu(v2(0, 0)).isApprox(v2(0, 1)));
    EXPECT_TRUE(p.mu(v2(0, 1)).isApprox(v2(0, -1)));
}

TEST(Config, Errors) {
    std::istringstream unknown("n_list = [2]\nbogus = 1\n");
    EXPECT_THROW(parse_config(unknown), ConfigError);
    std::istringstream dup("reps = 2\nreps = 3\n");
    EXPECT_THROW(parse_config(dup), ConfigError);
    std::istringstream bad("n_list = 4, 8\n");
    EXPECT_THROW(parse_config(bad), ConfigError);
    std::istringstream scheme("scheme = rk4\nn_list = [2]\n");
    EXPECT_THROW(parse_config(scheme), ConfigError);
    EXPECT_THROW(make_problem("no_such_problem"), ConfigError);
}

TEST(Experiment, ThreadCountInvariance) {
    ExperimentConfig c = small_config();
    std::ostringstream one, four;
    c.threads = 1;
    write_csv(one, run_experiment(c).table);
    c.threads = 4;
    write_csv(four, run_experiment(c).table);
    EXPECT_EQ(one.str(), four.str());
}

TEST(Experiment, MatchesDirectComputation) {
    ExperimentConfig c = small_config();
    c.scheme = SchemeKind::euler;
    const ErrorTable t = run_experiment(c).table;
    const SdeProblem p = circle2d();
    std::vector<double> norms;
    for (std::size_t rep = 0; rep < c.reps; ++rep) {
        const PathBundle b = generate_fine_path(c.seed, rep, c.fine_n, 2);
        const Vector ref = milstein_path(p, make_drivers(b, c.fine_n)).final_state();
        norms.push_back((ref - euler_path(p, make_drivers(b, 16)).final_state()).norm());
    }
    double s = 0;
    for (double r : norms) s += r * r;
    const auto rows = t.rows_for(2.0);
    EXPECT_EQ(rows[1].n, 16u);
    EXPECT_NEAR(rows[1].error, std::sqrt(s / c.reps), 1e-14);
    ASSERT_NE(t.rate_for(2.0), nullptr);
}

TEST(Experiment, SupErrorDominatesFinalError) {
    ExperimentConfig c = small_config();
    c.sup_error = true;
    c.p_list = {1.0};
    const ErrorTable t = run_experiment(c).table;
    ASSERT_EQ(t.sup_rows.size(), c.n_list.size());
    for (std::size_t l = 0; l < c.n_list.size(); ++l)
        EXPECT_GE(t.sup_rows[l].error, t.rows[l].error);
}

TEST(Experiment, TransformedScheme) {
    ExperimentConfig c = small_config();
    c.scheme = SchemeKind::transformed_milstein;
    c.reps = 8;
    const ExperimentResult r = run_experiment(c);
    for (const ErrorRow& row : r.table.rows) EXPECT_TRUE(std::isfinite(row.error));
}

// Quadrupling m roughly halves the standard error.
TEST(Experiment, StandardErrorScaling) {
    PiecewiseSpec spec;
    spec.surface = Hypersurface::hyperplane(v2(0, 1), 0.2);
    spec.x0 = v2(0, 0);
    spec.drift_minus = v2(0, 1);
    spec.drift_plus = v2(0, -1);
    spec.diffusion = DiffusionKind::constant;
    spec.diffusion_coeffs = Vector::Constant(1, 0.5);
    ExperimentConfig c = small_config();
    c.problem = "piecewise";
    c.inline_problem = spec;
    c.scheme = SchemeKind::euler;
    c.n_list = {16, 32, 64};
    c.p_list = {2.0};
    c.reps = 1000;
    const ErrorTable a = run_experiment(c).table;
    c.reps = 4000;
    c.seed = 100;
    const ErrorTable b = run_experiment(c).table;
    for (std::size_t l = 0; l < 3; ++l) {
        const double ratio = a.rows[l].std_error / b.rows[l].std_error;
        EXPECT_GT(ratio, 2.0 * 0.7);
        EXPECT_LT(ratio, 2.0 * 1.3);
    }
}

TEST(Csv, RoundTrip) {
    ExperimentConfig c = small_config();
    c.sup_error = true;
    const ErrorTable t = run_experiment(c).table;
    std::stringstream buf;
    write_csv(buf, t);
    const std::string text = buf.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "scheme,problem,n,p,error,stderr,reps,seed");
    EXPECT_NE(text.find("#rate,2,"), std::string::npos);
    const ErrorTable r = read_csv(buf);
    ASSERT_EQ(r.rows.size(), t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        EXPECT_EQ(r.rows[i].error, t.rows[i].error);
        EXPECT_EQ(r.rows[i].std_error, t.rows[i].std_error);
    }
    EXPECT_EQ(r.sup_rows.size(), t.sup_rows.size());
    EXPECT_EQ(fit_rate(r, 2.0).rate, t.rate_for(2.0)->rate);
}
