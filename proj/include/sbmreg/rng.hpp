#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace sbmreg {

using Rng = std::mt19937_64;

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Deterministic substream derived from (seed, a, b, c).  Streams are
// independent of scheduling, so parallel maps over particles or restarts
// reproduce bit-identical results.
inline Rng substream(std::uint64_t seed, std::uint64_t a = 0,
                     std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = detail::splitmix64(seed);
    s = detail::splitmix64(s ^ detail::splitmix64(a));
    s = detail::splitmix64(s ^ detail::splitmix64(b));
    s = detail::splitmix64(s ^ detail::splitmix64(c));
    return Rng(s);
}

inline double runif(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double rnorm(Rng& rng) {
    return std::normal_distribution<double>(0.0, 1.0)(rng);
}

inline double rgamma(Rng& rng, double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(rng);
}

inline long rpois(Rng& rng, double mean) {
    return std::poisson_distribution<long>(mean)(rng);
}

// Index draw proportional to the (nonnegative) entries of w.
inline int rcat(Rng& rng, const Eigen::VectorXd& w) {
    const double total = w.sum();
    double u = runif(rng) * total;
    const int K = static_cast<int>(w.size());
    for (int k = 0; k < K; ++k) {
        u -= w[k];
        if (u <= 0.0) return k;
    }
    return K - 1;
}

inline Eigen::VectorXd rdirichlet(Rng& rng, const Eigen::VectorXd& conc) {
    const int K = static_cast<int>(conc.size());
    Eigen::VectorXd g(K);
    for (int k = 0; k < K; ++k) g[k] = rgamma(rng, conc[k]);
    const double s = g.sum();
    if (s <= 0.0) {
        // All-zero gamma draws can occur for tiny concentrations.
        return Eigen::VectorXd::Constant(K, 1.0 / K);
    }
    return g / s;
}

}  // namespace sbmreg
