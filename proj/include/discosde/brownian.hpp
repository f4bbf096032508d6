#pragma once

#include "discosde/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace discosde {

/// Brownian increments on the fine grid k/N, k = 0..N, of [0, 1].
/// Row k holds W_{(k+1)/N} - W_{k/N} (d components), stored row-major.
struct PathBundle {
    int d = 0;
    std::size_t fine_n = 0;
    std::vector<double> increments;
    std::uint64_t seed = 0;
    std::uint64_t rep_index = 0;

    double increment(std::size_t k, int j) const noexcept {
        return increments[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    }
    std::span<const double> row(std::size_t k) const noexcept {
        return {increments.data() + k * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }

    /// The same path observed on the grid of fine_n / factor steps.
    PathBundle coarsened(std::size_t factor) const;
};

/// N*d independent Normal(0, 1/N) variates from the Philox stream keyed by
/// (seed, rep_index). Pure function of its arguments.
PathBundle generate_fine_path(std::uint64_t seed, std::uint64_t rep_index, std::size_t fine_n,
                              int d);

/// Per-step Brownian data for a coarse grid of n steps.
struct CoarseDrivers {
    int d = 0;
    std::size_t n = 0;
    /// n x d, row-major.
    std::vector<double> increments;
    /// n blocks of d x d, block k row-major: iterated[k*d*d + j1*d + j2] = J_{j1 j2}(k).
    std::vector<double> iterated;

    double increment(std::size_t k, int j) const noexcept {
        return increments[k * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    }
    double J(std::size_t k, int j1, int j2) const noexcept {
        const auto dd = static_cast<std::size_t>(d);
        return iterated[k * dd * dd + static_cast<std::size_t>(j1) * dd +
                        static_cast<std::size_t>(j2)];
    }
    double& J(std::size_t k, int j1, int j2) noexcept {
        const auto dd = static_cast<std::size_t>(d);
        return iterated[k * dd * dd + static_cast<std::size_t>(j1) * dd +
                        static_cast<std::size_t>(j2)];
    }
    double step() const noexcept { return 1.0 / static_cast<double>(n); }
};

/// n x d coarse increments; row k sums the fine increments of (k/n, (k+1)/n].
/// Throws NotDivisible unless n divides fine_n.
RowMajorMatrix aggregate(const PathBundle& bundle, std::size_t n);

/// Iterated Ito integrals J_{j1 j2}(k) = int_{k/n}^{(k+1)/n} (W_{j1,s} - W_{j1,k/n}) dW_{j2,s},
/// flattened as in CoarseDrivers::iterated:
///  - diagonal in closed form ((dW_j)^2 - 1/n) / 2,
///  - j1 < j2 by the fine-grid left-point sum,
///  - j1 > j2 from J_{j1 j2} + J_{j2 j1} = dW_{j1} dW_{j2}.
std::vector<double> iterated_integrals(const PathBundle& bundle, std::size_t n);

/// Coarse increments and iterated integrals in one pass (the two agree
/// bitwise with aggregate() and iterated_integrals()).
CoarseDrivers make_drivers(const PathBundle& bundle, std::size_t n);

/// Binary dump: magic "DSDE", version u32, N u64, d u32, seed u64, rep u64,
/// then N*d little-endian f64, row-major.
void write_bundle(std::ostream& out, const PathBundle& bundle);
PathBundle read_bundle(std::istream& in);

inline constexpr std::uint32_t kBundleFormatVersion = 1;

}  // namespace discosde
