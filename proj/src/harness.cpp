#include "discosde/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace discosde {

void ExperimentConfig::validate() const {
    if (n_list.empty()) throw ConfigError("n_list is empty");
    if (fine_n == 0) throw ConfigError("fine_n must be positive");
    for (std::size_t n : n_list) {
        if (n == 0 || fine_n % n != 0) {
            std::ostringstream msg;
            msg << "n = " << n << " does not divide fine_n = " << fine_n;
            throw ConfigError(msg.str());
        }
    }
    if (reps < 2) throw ConfigError("reps must be at least 2");
    if (p_list.empty()) throw ConfigError("p_list is empty");
    for (double p : p_list)
        if (!(p >= 1.0)) throw ConfigError("every p must be >= 1");
    if (threads == 0) throw ConfigError("threads must be positive");
    if (problem == "piecewise" && !inline_problem)
        throw ConfigError("problem = piecewise needs an inline problem spec");
}

SdeProblem resolve_problem(const ExperimentConfig& config) {
    if (config.inline_problem) return make_piecewise_problem(config.problem, *config.inline_problem);
    return make_problem(config.problem);
}

ErrorEstimate empirical_error_from_norms(std::span<const double> norms, double p) {
    if (norms.empty()) throw Error("empirical error of an empty sample");
    if (!(p >= 1.0)) throw Error("p must be >= 1");
    const auto m = static_cast<double>(norms.size());
    double sum = 0.0;
    for (double r : norms) sum += std::pow(r, p);
    const double mean = sum / m;
    ErrorEstimate est;
    est.error = std::pow(mean, 1.0 / p);
    if (norms.size() < 2 || mean == 0.0) return est;
    double ss = 0.0;
    for (double r : norms) {
        const double dev = std::pow(r, p) - mean;
        ss += dev * dev;
    }
    const double se_mean = std::sqrt(ss / (m - 1.0) / m);
    est.std_error = std::pow(mean, 1.0 / p - 1.0) / p * se_mean;
    return est;
}

ErrorEstimate empirical_error(std::span<const Vector> diffs, double p) {
    std::vector<double> norms;
    norms.reserve(diffs.size());
    for (const Vector& v : diffs) norms.push_back(v.norm());
    return empirical_error_from_norms(norms, p);
}

std::vector<ErrorRow> ErrorTable::rows_for(double p) const {
    std::vector<ErrorRow> out;
    for (const ErrorRow& row : rows)
        if (row.p == p) out.push_back(row);
    return out;
}

const RateFit* ErrorTable::rate_for(double p) const {
    for (const RateFit& fit : rates)
        if (fit.p == p) return &fit;
    return nullptr;
}

RateFit fit_rate(std::span<const ErrorRow> rows) {
    if (rows.size() < 3) throw DegenerateFit("rate fit needs at least 3 rows");
    const auto k = static_cast<double>(rows.size());
    double sx = 0.0, sy = 0.0;
    for (const ErrorRow& row : rows) {
        if (!(row.error > 0.0)) throw DegenerateFit("rate fit with a zero error");
        sx += std::log2(static_cast<double>(row.n));
        sy += std::log2(row.error);
    }
    const double mx = sx / k, my = sy / k;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const ErrorRow& row : rows) {
        const double dx = std::log2(static_cast<double>(row.n)) - mx;
        const double dy = std::log2(row.error) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw DegenerateFit("rate fit needs distinct n");
    const double slope = sxy / sxx;
    RateFit fit;
    fit.p = rows.front().p;
    fit.rate = -slope;
    fit.intercept = my - slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

RateFit fit_rate(const ErrorTable& table, double p) {
    const std::vector<ErrorRow> rows = table.rows_for(p);
    RateFit fit = fit_rate(rows);
    fit.p = p;
    return fit;
}

double occupation_fraction(const RowMajorMatrix& fine_states, const Hypersurface& surface,
                           double eps_tilde) {
    const Eigen::Index count = fine_states.rows() - 1;
    if (count < 1) throw Error("occupation fraction needs at least one fine step");
    std::size_t inside = 0;
    Vector x(fine_states.cols());
    for (Eigen::Index i = 0; i < count; ++i) {
        x = fine_states.row(i).transpose();
        if (surface.distance(x) < eps_tilde) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(count);
}

double crossing_fraction(const RowMajorMatrix& fine_states, const RowMajorMatrix& coarse_states,
                         const Hypersurface& surface) {
    const Eigen::Index fine = fine_states.rows() - 1;
    const Eigen::Index n = coarse_states.rows() - 1;
    if (fine < 1 || n < 1 || fine % n != 0)
        throw NotDivisible("coarse grid does not divide the fine grid");
    const Eigen::Index ratio = fine / n;
    std::size_t hits = 0;
    Vector x(fine_states.cols());
    for (Eigen::Index i = 0; i < fine; ++i) {
        x = fine_states.row(i).transpose();
        const double gap = (fine_states.row(i) - coarse_states.row(i / ratio)).norm();
        if (surface.distance(x) <= gap) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(fine);
}

namespace {

double sup_distance(const RowMajorMatrix& a, const RowMajorMatrix& b) {
    return (a - b).rowwise().norm().maxCoeff();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const SdeProblem problem = resolve_problem(config);
    problem.validate();
    std::optional<TransformedProblem> tf;
    if (config.scheme == SchemeKind::transformed_milstein) tf.emplace(problem, config.transform);

    const std::size_t m = config.reps;
    const std::size_t levels = config.n_list.size();
    const int d = problem.dim();
    std::vector<double> norms(m * levels, 0.0);
    std::vector<double> sup_norms(config.sup_error ? m * levels : 0, 0.0);
    std::vector<unsigned char> aborted(m, 0);

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_rep = m;
    std::exception_ptr error;

    auto worker = [&]() {
        for (;;) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= m) return;
            try {
                const PathBundle bundle = generate_fine_path(config.seed, rep, config.fine_n, d);
                const CoarseDrivers fine_drivers = make_drivers(bundle, config.fine_n);
                const Trajectory reference = milstein_path(problem, fine_drivers);
                const Vector ref_final = reference.final_state();
                for (std::size_t l = 0; l < levels; ++l) {
                    const std::size_t n = config.n_list[l];
                    const CoarseDrivers drivers = make_drivers(bundle, n);
                    const Trajectory traj =
                        run_scheme(config.scheme, problem, drivers, tf ? &*tf : nullptr);
                    norms[rep * levels + l] = (ref_final - traj.final_state()).norm();
                    if (config.sup_error) {
                        if (config.scheme == SchemeKind::transformed_milstein) {
                            const std::size_t ratio = config.fine_n / n;
                            RowMajorMatrix sub(static_cast<Eigen::Index>(n + 1), d);
                            for (std::size_t k = 0; k <= n; ++k)
                                sub.row(static_cast<Eigen::Index>(k)) =
                                    reference.states.row(static_cast<Eigen::Index>(k * ratio));
                            sup_norms[rep * levels + l] = sup_distance(sub, traj.states);
                        } else {
                            const RowMajorMatrix fine =
                                continuous_interpolation(problem, drivers, bundle, config.scheme);
                            sup_norms[rep * levels + l] = sup_distance(fine, reference.states);
                        }
                    }
                }
            } catch (const NonFinite&) {
                aborted[rep] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (rep < error_rep) {
                    error_rep = rep;
                    error = std::current_exception();
                }
            }
        }
    };

    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(config.threads, m));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    ExperimentResult result;
    result.aborted = static_cast<std::size_t>(std::count(aborted.begin(), aborted.end(), 1));
    if (static_cast<double>(result.aborted) > 1e-4 * static_cast<double>(m)) {
        std::ostringstream msg;
        msg << result.aborted << " of " << m << " repetitions produced non-finite states";
        throw TooManyAborts(msg.str(), result.aborted);
    }

    ErrorTable& table = result.table;
    table.scheme = std::string(scheme_name(config.scheme));
    table.problem = problem.name;
    table.reps = m;
    table.seed = config.seed;
    std::vector<double> column;
    column.reserve(m);
    auto collect = [&](const std::vector<double>& source, std::size_t l) {
        column.clear();
        for (std::size_t rep = 0; rep < m; ++rep)
            if (!aborted[rep]) column.push_back(source[rep * levels + l]);
    };
    for (double p : config.p_list) {
        for (std::size_t l = 0; l < levels; ++l) {
            collect(norms, l);
            const ErrorEstimate est = empirical_error_from_norms(column, p);
            table.rows.push_back({config.n_list[l], p, est.error, est.std_error});
        }
        if (levels >= 3) {
            try {
                table.rates.push_back(fit_rate(table, p));
            } catch (const DegenerateFit&) {
            }
        }
    }
    if (config.sup_error) {
        for (std::size_t l = 0; l < levels; ++l) {
            collect(sup_norms, l);
            const ErrorEstimate est = empirical_error_from_norms(column, 1.0);
            table.sup_rows.push_back({config.n_list[l], 1.0, est.error, est.std_error});
        }
    }
    result.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    return out;
}

}  // namespace

void write_csv(std::ostream& out, const ErrorTable& table) {
    out << "scheme,problem,n,p,error,stderr,reps,seed\n";
    auto emit = [&](const ErrorRow& row, const std::string& p) {
        out << table.scheme << ',' << table.problem << ',' << row.n << ',' << p << ','
            << format_double(row.error) << ',' << format_double(row.std_error) << ','
            << table.reps << ',' << table.seed << '\n';
    };
    for (const ErrorRow& row : table.rows) emit(row, format_double(row.p));
    for (const ErrorRow& row : table.sup_rows) emit(row, "sup");
    for (const RateFit& fit : table.rates)
        out << "#rate," << format_double(fit.p) << ',' << format_double(fit.rate) << ','
            << format_double(fit.r_squared) << '\n';
}

ErrorTable read_csv(std::istream& in) {
    ErrorTable table;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("scheme,", 0) != 0) throw Error("missing CSV header");
            header = true;
            continue;
        }
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != 8) throw Error("malformed CSV row: " + line);
        table.scheme = f[0];
        table.problem = f[1];
        table.reps = std::stoull(f[6]);
        table.seed = std::stoull(f[7]);
        ErrorRow row;
        row.n = std::stoull(f[2]);
        row.error = std::stod(f[4]);
        row.std_error = std::stod(f[5]);
        if (f[3] == "sup") {
            row.p = 1.0;
            table.sup_rows.push_back(row);
        } else {
            row.p = std::stod(f[3]);
            table.rows.push_back(row);
        }
    }
    if (!header) throw Error("empty CSV");
    return table;
}

}  // namespace discosde
