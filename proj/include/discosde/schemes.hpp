#pragma once

#include "discosde/brownian.hpp"
#include "discosde/coefficients.hpp"
#include "discosde/transform.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace discosde {

enum class SchemeKind { euler, milstein, transformed_milstein };

std::string_view scheme_name(SchemeKind kind) noexcept;
/// Throws ConfigError for unknown names.
SchemeKind parse_scheme(std::string_view name);

/// States of a scheme on the grid k/n, k = 0..n. Row 0 is x0.
struct Trajectory {
    std::size_t n = 0;
    RowMajorMatrix states;
    /// Time-continuous scheme on the fine grid, when requested.
    std::optional<RowMajorMatrix> fine_states;

    double time(std::size_t k) const noexcept {
        return static_cast<double>(k) / static_cast<double>(n);
    }
    Vector final_state() const { return states.row(states.rows() - 1).transpose(); }
};

/// X_{k+1} = X_k + mu(X_k)/n + sigma(X_k) dW_k.
Trajectory euler_path(const SdeProblem& problem, const CoarseDrivers& drivers);

/// X_{k+1} = X_k + mu/n + sigma dW_k + sum_{j1,j2} (dsigma_{j2} sigma_{j1}) J_{j1 j2}(k),
/// coefficients frozen at X_k, dsigma zero on Delta.
Trajectory milstein_path(const SdeProblem& problem, const CoarseDrivers& drivers);

/// The time-continuous scheme (Euler or Milstein) at every fine grid point
/// of `bundle`, which must be the parent of `drivers`. Row i is X(i / fine_n).
RowMajorMatrix continuous_interpolation(const SdeProblem& problem, const CoarseDrivers& drivers,
                                        const PathBundle& bundle,
                                        SchemeKind kind = SchemeKind::milstein);

/// Milstein on (G(x0), mu_G, sigma_G) mapped back through G^-1.
Trajectory transformed_milstein_path(const SdeProblem& problem, const TransformedProblem& tf,
                                     const CoarseDrivers& drivers);

/// Dispatch on `kind`; `tf` is required for transformed_milstein.
Trajectory run_scheme(SchemeKind kind, const SdeProblem& problem, const CoarseDrivers& drivers,
                      const TransformedProblem* tf = nullptr);

}  // namespace discosde
