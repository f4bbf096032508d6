#include "discosde/brownian.hpp"

#include "discosde/random.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

namespace discosde {

namespace {

void require_divides(std::size_t fine_n, std::size_t n) {
    if (n == 0 || fine_n % n != 0) {
        std::ostringstream msg;
        msg << "coarse step count " << n << " does not divide fine step count " << fine_n;
        throw NotDivisible(msg.str());
    }
}

}  // namespace

PathBundle generate_fine_path(std::uint64_t seed, std::uint64_t rep_index, std::size_t fine_n,
                              int d) {
    if (fine_n < 1 || d < 1) throw Error("fine path needs N >= 1 and d >= 1");
    PathBundle bundle;
    bundle.d = d;
    bundle.fine_n = fine_n;
    bundle.seed = seed;
    bundle.rep_index = rep_index;
    bundle.increments.resize(fine_n * static_cast<std::size_t>(d));
    CounterRng rng(seed, rep_index);
    const double scale = std::sqrt(1.0 / static_cast<double>(fine_n));
    for (double& v : bundle.increments) v = scale * rng.normal();
    return bundle;
}

PathBundle PathBundle::coarsened(std::size_t factor) const {
    require_divides(fine_n, factor == 0 ? 0 : fine_n / factor);
    if (factor == 0 || fine_n % factor != 0) throw NotDivisible("factor must divide fine_n");
    PathBundle out;
    out.d = d;
    out.fine_n = fine_n / factor;
    out.seed = seed;
    out.rep_index = rep_index;
    const RowMajorMatrix agg = aggregate(*this, out.fine_n);
    out.increments.assign(agg.data(), agg.data() + agg.size());
    return out;
}

RowMajorMatrix aggregate(const PathBundle& bundle, std::size_t n) {
    require_divides(bundle.fine_n, n);
    const std::size_t ratio = bundle.fine_n / n;
    RowMajorMatrix out = RowMajorMatrix::Zero(static_cast<Eigen::Index>(n), bundle.d);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = k * ratio; i < (k + 1) * ratio; ++i) {
            for (int j = 0; j < bundle.d; ++j)
                out(static_cast<Eigen::Index>(k), j) += bundle.increment(i, j);
        }
    }
    return out;
}

CoarseDrivers make_drivers(const PathBundle& bundle, std::size_t n) {
    require_divides(bundle.fine_n, n);
    const int d = bundle.d;
    const auto dd = static_cast<std::size_t>(d);
    const std::size_t ratio = bundle.fine_n / n;
    const double h = 1.0 / static_cast<double>(n);

    CoarseDrivers drivers;
    drivers.d = d;
    drivers.n = n;
    drivers.increments.assign(n * dd, 0.0);
    drivers.iterated.assign(n * dd * dd, 0.0);

    std::vector<double> partial(dd);
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(partial.begin(), partial.end(), 0.0);
        double* block = drivers.iterated.data() + k * dd * dd;
        for (std::size_t i = k * ratio; i < (k + 1) * ratio; ++i) {
            const auto row = bundle.row(i);
            for (std::size_t j1 = 0; j1 < dd; ++j1)
                for (std::size_t j2 = j1 + 1; j2 < dd; ++j2) block[j1 * dd + j2] += partial[j1] * row[j2];
            for (std::size_t j = 0; j < dd; ++j) partial[j] += row[j];
        }
        double* inc = drivers.increments.data() + k * dd;
        for (std::size_t j = 0; j < dd; ++j) inc[j] = partial[j];
        for (std::size_t j = 0; j < dd; ++j) block[j * dd + j] = 0.5 * (inc[j] * inc[j] - h);
        for (std::size_t j1 = 0; j1 < dd; ++j1)
            for (std::size_t j2 = j1 + 1; j2 < dd; ++j2)
                block[j2 * dd + j1] = inc[j1] * inc[j2] - block[j1 * dd + j2];
    }
    return drivers;
}

std::vector<double> iterated_integrals(const PathBundle& bundle, std::size_t n) {
    return make_drivers(bundle, n).iterated;
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::ostream& out, T value) {
    unsigned char bytes[sizeof(T)];
    std::uint64_t bits = 0;
    if constexpr (std::is_same_v<T, double>) {
        bits = std::bit_cast<std::uint64_t>(value);
    } else {
        bits = static_cast<std::uint64_t>(value);
    }
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("truncated bundle file");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= std::uint64_t{bytes[i]} << (8 * i);
    if constexpr (std::is_same_v<T, double>) {
        return std::bit_cast<double>(bits);
    } else {
        return static_cast<T>(bits);
    }
}

constexpr char kMagic[4] = {'D', 'S', 'D', 'E'};

}  // namespace

void write_bundle(std::ostream& out, const PathBundle& bundle) {
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kBundleFormatVersion);
    put_le<std::uint64_t>(out, bundle.fine_n);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.d));
    put_le<std::uint64_t>(out, bundle.seed);
    put_le<std::uint64_t>(out, bundle.rep_index);
    for (double v : bundle.increments) put_le<double>(out, v);
    if (!out) throw Error("failed to write bundle");
}

PathBundle read_bundle(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw Error("not a DSDE bundle file");
    const auto version = get_le<std::uint32_t>(in);
    if (version != kBundleFormatVersion) throw Error("unsupported bundle version");
    PathBundle bundle;
    bundle.fine_n = get_le<std::uint64_t>(in);
    bundle.d = static_cast<int>(get_le<std::uint32_t>(in));
    bundle.seed = get_le<std::uint64_t>(in);
    bundle.rep_index = get_le<std::uint64_t>(in);
    bundle.increments.resize(bundle.fine_n * static_cast<std::size_t>(bundle.d));
    for (double& v : bundle.increments) v = get_le<double>(in);
    return bundle;
}

}  // namespace discosde
