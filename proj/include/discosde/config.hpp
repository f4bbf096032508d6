#pragma once

#include "discosde/harness.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace discosde {

/// Raw `key = value` entries; bracketed values are kept verbatim.
using ConfigEntries = std::map<std::string, std::string>;

/// Flat UTF-8 key=value lines; '#' starts a comment; arrays are written
/// [a, b, c]. Duplicate keys raise ConfigError.
ConfigEntries parse_entries(std::istream& in);

std::vector<double> parse_number_list(const std::string& value);

/// Recognized keys:
///   problem, scheme, n_list, fine_n, reps, p_list, seed, threads, output,
///   epsilon, newton_tol, newton_max_iter, hessian_fd_step, transform_samples,
///   sup_error,
/// and for problem = piecewise:
///   surface (sphere | hyperplane | empty), center, radius, normal, offset,
///   x0, drift_minus, drift_plus, drift_on_surface,
///   diffusion (shared_linear | diagonal_linear | constant), diffusion_coeffs.
/// Unknown keys raise ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

}  // namespace discosde
