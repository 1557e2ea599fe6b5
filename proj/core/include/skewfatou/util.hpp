#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace skewfatou {

using cplx = std::complex<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

// Deterministic engine: the raw seed is whitened through splitmix64 so that
// nearby (seed, stream) pairs give unrelated streams.
std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream = 0);

// Shortest-uniqueness-safe decimal formatting (17 significant digits,
// locale independent). Used for every number that lands in a CSV or report,
// so re-runs are byte-identical.
std::string fmt_double(double x, int significant = 17);
std::string fmt_cplx(cplx v, int significant = 17);

// Locale-independent parse; throws std::invalid_argument on trailing junk.
double parse_double(const std::string& s);

} // namespace skewfatou
