#include "discosde/brownian.hpp"
#include "discosde/config.hpp"
#include "discosde/harness.hpp"
#include "discosde/transform.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

using namespace discosde;

namespace {

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed,
            std::optional<unsigned> threads, std::optional<std::string> output) {
    ExperimentConfig config = load_config(path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    if (output) config.output = *output;

    const ExperimentResult result = run_experiment(config);
    if (config.output.empty() || config.output == "-") {
        write_csv(std::cout, result.table);
    } else {
        std::ofstream out(config.output);
        if (!out) throw Error("cannot write " + config.output);
        write_csv(out, result.table);
    }
    for (const RateFit& fit : result.table.rates)
        std::fprintf(stderr, "p=%g rate=%.4f r2=%.4f\n", fit.p, fit.rate, fit.r_squared);
    std::fprintf(stderr, "%zu reps, %zu aborted, %.1f s\n", result.table.reps, result.aborted,
                 result.seconds);
    return 0;
}

int cmd_validate(const std::string& path, std::size_t points) {
    const ExperimentConfig config = load_config(path);
    const SdeProblem problem = resolve_problem(config);
    problem.validate();

    SampleSpec spec;
    spec.seed = config.seed;
    const ConditionReport cond = validate_conditions(problem, spec);
    std::printf("problem %s (d = %d)\n", problem.name.c_str(), problem.dim());
    std::printf("inf |sigma^T n| on Theta  %.6g\n", cond.inf_normal_sigma_theta);
    std::printf("inf |sigma^T n| on Delta  %.6g\n", cond.inf_normal_sigma_delta);
    std::printf("growth constant           %.6g\n", cond.growth_constant);
    std::printf("sup |mu| near Theta       %.6g\n", cond.sup_mu_band);
    std::printf("sup |sigma| near Theta    %.6g\n", cond.sup_sigma_band);
    for (const std::string& v : cond.violations) std::printf("condition: %s\n", v.c_str());

    if (problem.theta.is_empty()) {
        std::printf("Theta is empty: transform is the identity\n");
        return cond.ok() ? 0 : 1;
    }
    const TransformedProblem tf(problem, config.transform);
    const EpsilonChoice& choice = tf.epsilon_choice();
    std::printf("epsilon %.6g (alpha sup %.6g, slope %.6g)%s\n", choice.epsilon, choice.alpha_sup,
                choice.alpha_slope, choice.identity ? " identity" : "");
    const TransformInvariantReport r = check_transform_invariants(tf, points, config.seed);
    auto line = [](const char* name, double value, bool ok) {
        std::printf("%-28s %-12.6g %s\n", name, value, ok ? "ok" : "FAILED");
    };
    line("|Phi| / eps^2", r.phi_ratio, r.phi_bound_ok());
    line("|Phi'| / (112 eps)", r.phi_grad_ratio, r.phi_grad_bound_ok());
    line("identity violations", static_cast<double>(r.identity_violations), r.identity_ok());
    line("G' vs finite differences", r.jacobian_fd_rel_error, r.jacobian_ok());
    line("inverse round trip", r.inverse_roundtrip, r.inverse_ok());
    line("sigma_G - sigma on Theta", r.sigma_on_surface, r.sigma_on_surface_ok());
    line("sigma_G commutativity", r.sigma_g_commutativity, r.commutativity_ok());
    std::printf("%-28s %-12.6g\n", "mu_G Lipschitz (sampled)", r.mu_g_lipschitz);
    std::printf("%-28s %-12.6g\n", "sigma_G Lipschitz (sampled)", r.sigma_g_lipschitz);
    return cond.ok() && r.all_ok() ? 0 : 1;
}

int cmd_rates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    const ErrorTable table = read_csv(in);
    std::vector<double> ps;
    for (const ErrorRow& row : table.rows)
        if (std::find(ps.begin(), ps.end(), row.p) == ps.end()) ps.push_back(row.p);
    std::printf("%s on %s, %zu reps\n", table.scheme.c_str(), table.problem.c_str(), table.reps);
    for (double p : ps) {
        const RateFit fit = fit_rate(table, p);
        std::printf("p=%-4g rate %.4f  r2 %.4f\n", p, fit.rate, fit.r_squared);
    }
    if (table.sup_rows.size() >= 3) {
        const RateFit fit = fit_rate(table.sup_rows);
        std::printf("sup    rate %.4f  r2 %.4f\n", fit.rate, fit.r_squared);
    }
    return 0;
}

int cmd_dump(std::uint64_t seed, std::uint64_t rep, std::size_t fine_n, int d,
             const std::string& path) {
    const PathBundle bundle = generate_fine_path(seed, rep, fine_n, d);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    write_bundle(out, bundle);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Euler and Milstein error experiments for SDEs with piecewise drift"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> output;
    auto* run = app.add_subcommand("run", "Run a Monte Carlo error experiment");
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Override the base seed");
    run->add_option("--threads", threads, "Worker threads");
    run->add_option("--output", output, "CSV output path ('-' for stdout)");

    std::size_t points = 10000;
    auto* validate = app.add_subcommand("validate", "Check conditions and transform invariants");
    validate->add_option("--config", config_path, "Config file")->required();
    validate->add_option("--points", points, "Sample points for the transform checks");

    std::string csv_path;
    auto* rates = app.add_subcommand("rates", "Fit convergence rates from an output CSV");
    rates->add_option("csv", csv_path, "CSV written by run")->required();

    std::uint64_t dump_seed = 1;
    std::uint64_t dump_rep = 0;
    std::size_t dump_n = 1024;
    int dump_d = 2;
    std::string dump_path;
    auto* dump = app.add_subcommand("dump-path", "Write one Brownian bundle in binary form");
    dump->add_option("--seed", dump_seed, "Base seed");
    dump->add_option("--rep", dump_rep, "Repetition index");
    dump->add_option("--fine-n", dump_n, "Fine step count");
    dump->add_option("--dim", dump_d, "Dimension");
    dump->add_option("--output", dump_path, "Output file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, seed, threads, output);
        if (*validate) return cmd_validate(config_path, points);
        if (*rates) return cmd_rates(csv_path);
        if (*dump) return cmd_dump(dump_seed, dump_rep, dump_n, dump_d, dump_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
