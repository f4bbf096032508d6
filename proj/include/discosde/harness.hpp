#pragma once

#include "discosde/problems.hpp"
#include "discosde/schemes.hpp"
#include "discosde/transform.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace discosde {

struct ExperimentConfig {
    /// Built-in problem name, or "piecewise" together with `inline_problem`.
    std::string problem = "circle2d";
    std::optional<PiecewiseSpec> inline_problem;
    SchemeKind scheme = SchemeKind::milstein;
    std::vector<std::size_t> n_list;
    std::size_t fine_n = 1u << 14;
    std::size_t reps = 1000;
    std::vector<double> p_list{2.0};
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string output;
    TransformOptions transform;
    /// Also measure the discrete sup-norm error over the fine grid.
    bool sup_error = false;

    /// Throws ConfigError unless every n divides fine_n, reps >= 2 and p >= 1.
    void validate() const;
};

SdeProblem resolve_problem(const ExperimentConfig& config);

struct ErrorEstimate {
    double error = 0.0;
    double std_error = 0.0;
};

/// (m^-1 sum ||diff_i||^p)^(1/p) and its delta-method standard error.
ErrorEstimate empirical_error(std::span<const Vector> diffs, double p);
/// Same, from precomputed norms ||diff_i||.
ErrorEstimate empirical_error_from_norms(std::span<const double> norms, double p);

struct ErrorRow {
    std::size_t n = 0;
    double p = 2.0;
    double error = 0.0;
    double std_error = 0.0;
};

struct RateFit {
    double p = 2.0;
    double rate = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

struct ErrorTable {
    std::string scheme;
    std::string problem;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<ErrorRow> rows;
    std::vector<RateFit> rates;
    /// "sup" rows (discrete sup-norm over the fine grid), when requested.
    std::vector<ErrorRow> sup_rows;

    std::vector<ErrorRow> rows_for(double p) const;
    const RateFit* rate_for(double p) const;
};

/// Negated OLS slope of log2(error) on log2(n) over the rows with this p.
/// Throws DegenerateFit with fewer than 3 rows or a zero error.
RateFit fit_rate(const ErrorTable& table, double p);
RateFit fit_rate(std::span<const ErrorRow> rows);

/// Fraction of fine points i = 0..N-1 with distance(X(i/N), surface) < eps_tilde.
double occupation_fraction(const RowMajorMatrix& fine_states, const Hypersurface& surface,
                           double eps_tilde);

/// Fraction of fine points i = 0..N-1 with
/// distance(X(t), surface) <= ||X(t) - X(floor(t n)/n)||, t = i/N. `coarse_states`
/// has n + 1 rows, and n must divide N.
double crossing_fraction(const RowMajorMatrix& fine_states, const RowMajorMatrix& coarse_states,
                         const Hypersurface& surface);

struct ExperimentResult {
    ErrorTable table;
    std::size_t aborted = 0;
    double seconds = 0.0;
};

/// For every repetition i: bundle(seed, i), reference = Milstein at fine_n on
/// the original problem, scheme at each n on the aggregated drivers, final-time
/// error norms stored per repetition and reduced in ascending repetition order.
/// Output does not depend on the thread count. Throws TooManyAborts if more
/// than 0.01% of the repetitions hit NonFinite.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// CSV columns scheme,problem,n,p,error,stderr,reps,seed; rates appended as
/// "#rate,<p>,<value>,<r2>". Sup-norm rows use p = "sup".
void write_csv(std::ostream& out, const ErrorTable& table);
/// Reads the rows written by write_csv (comment lines are skipped).
ErrorTable read_csv(std::istream& in);

}  // namespace discosde
