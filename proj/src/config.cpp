#include "discosde/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

namespace discosde {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double to_double(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("bad number '" + s + "' for key " + key);
    return v;
}

std::uint64_t to_u64(const std::string& raw, const std::string& key) {
    const std::string s = trim(raw);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("bad integer '" + s + "' for key " + key);
    return v;
}

bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("bad boolean '" + s + "' for key " + key);
}

Vector to_vector(const std::string& s, const std::string& key) {
    std::vector<double> values;
    try {
        values = parse_number_list(s);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(e.what()) + " (key " + key + ")");
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "problem",      "scheme",           "n_list",          "fine_n",
        "reps",         "p_list",           "seed",            "threads",
        "output",       "epsilon",          "newton_tol",      "newton_max_iter",
        "hessian_fd_step", "transform_samples", "sup_error",    "surface",
        "center",       "radius",           "normal",          "offset",
        "x0",           "drift_minus",      "drift_plus",      "drift_on_surface",
        "diffusion",    "diffusion_coeffs",
    };
    return keys;
}

PiecewiseSpec parse_piecewise(const ConfigEntries& e) {
    auto need = [&](const std::string& key) -> const std::string& {
        const auto it = e.find(key);
        if (it == e.end()) throw ConfigError("problem = piecewise requires key " + key);
        return it->second;
    };
    PiecewiseSpec spec;
    const std::string& surface = need("surface");
    if (surface == "sphere") {
        spec.surface = Hypersurface::sphere(to_vector(need("center"), "center"),
                                            to_double(need("radius"), "radius"));
    } else if (surface == "hyperplane") {
        spec.surface = Hypersurface::hyperplane(to_vector(need("normal"), "normal"),
                                                to_double(need("offset"), "offset"));
    } else if (surface == "empty") {
        spec.surface = Hypersurface::empty();
    } else {
        throw ConfigError("unknown surface '" + surface + "'");
    }
    spec.x0 = to_vector(need("x0"), "x0");
    spec.drift_minus = to_vector(need("drift_minus"), "drift_minus");
    spec.drift_plus = to_vector(need("drift_plus"), "drift_plus");
    if (const auto it = e.find("drift_on_surface"); it != e.end())
        spec.drift_on_surface = to_vector(it->second, "drift_on_surface");
    const std::string& diffusion = need("diffusion");
    if (diffusion == "shared_linear") {
        spec.diffusion = DiffusionKind::shared_linear;
    } else if (diffusion == "diagonal_linear") {
        spec.diffusion = DiffusionKind::diagonal_linear;
    } else if (diffusion == "constant") {
        spec.diffusion = DiffusionKind::constant;
    } else {
        throw ConfigError("unknown diffusion '" + diffusion + "'");
    }
    spec.diffusion_coeffs = to_vector(need("diffusion_coeffs"), "diffusion_coeffs");
    return spec;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& raw) {
    std::string s = trim(raw);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError("expected a bracketed list, got '" + s + "'");
    s = trim(s.substr(1, s.size() - 2));
    std::vector<double> out;
    if (s.empty()) return out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(to_double(item, "list"));
    return out;
}

ConfigEntries parse_entries(std::istream& in) {
    ConfigEntries entries;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(number) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
        if (!entries.emplace(key, value).second)
            throw ConfigError("line " + std::to_string(number) + ": duplicate key " + key);
    }
    return entries;
}

ExperimentConfig parse_config(std::istream& in) {
    const ConfigEntries e = parse_entries(in);
    for (const auto& [key, value] : e)
        if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");

    ExperimentConfig c;
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = e.find(key);
        return it == e.end() ? nullptr : &it->second;
    };
    if (auto v = get("problem")) c.problem = *v;
    if (c.problem == "piecewise" || get("surface")) c.inline_problem = parse_piecewise(e);
    if (auto v = get("scheme")) c.scheme = parse_scheme(*v);
    if (auto v = get("n_list")) {
        for (double x : parse_number_list(*v)) {
            if (x < 1 || x != static_cast<double>(static_cast<std::size_t>(x)))
                throw ConfigError("n_list entries must be positive integers");
            c.n_list.push_back(static_cast<std::size_t>(x));
        }
    }
    if (auto v = get("fine_n")) c.fine_n = to_u64(*v, "fine_n");
    if (auto v = get("reps")) c.reps = to_u64(*v, "reps");
    if (auto v = get("p_list")) c.p_list = parse_number_list(*v);
    if (auto v = get("seed")) c.seed = to_u64(*v, "seed");
    if (auto v = get("threads")) c.threads = static_cast<unsigned>(to_u64(*v, "threads"));
    if (auto v = get("output")) c.output = *v;
    if (auto v = get("epsilon")) c.transform.epsilon = to_double(*v, "epsilon");
    if (auto v = get("newton_tol")) c.transform.newton_tol = to_double(*v, "newton_tol");
    if (auto v = get("newton_max_iter"))
        c.transform.newton_max_iter = static_cast<int>(to_u64(*v, "newton_max_iter"));
    if (auto v = get("hessian_fd_step"))
        c.transform.hessian_fd_step = to_double(*v, "hessian_fd_step");
    if (auto v = get("transform_samples"))
        c.transform.samples = to_u64(*v, "transform_samples");
    if (auto v = get("sup_error")) c.sup_error = to_bool(*v, "sup_error");
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in);
}

}  // namespace discosde
