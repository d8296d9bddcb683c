#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "sbmreg/rng.hpp"
#include "sbmreg/types.hpp"

namespace sbmreg {

// Poisson log-pmf at count y for log-rate eta: -e^eta + y*eta - log(y!).
inline double poisson_log_pmf(double y, double eta) {
    return -std::exp(eta) + y * eta - std::lgamma(y + 1.0);
}

inline double log_sum_exp(const VectorXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

// log p_theta(Y, Z): sum_i log nu_{Z_i}
//                  + sum_{i<j} [-e^eta + Y_ij eta - log Y_ij!],
// eta = alpha_{Z_i Z_j} + x_ij' beta.
double complete_log_likelihood(const ObservedNetwork& net,
                               const LatentAssignment& z,
                               const ModelParams& theta);

constexpr std::int64_t kDefaultEnumerationCap = std::int64_t(1) << 20;

// log p_theta(Y) by log-sum-exp over all K^n assignments.  Exact oracle;
// throws InputError when K^n exceeds the cap.
double log_likelihood_enumerate(const ObservedNetwork& net,
                                const ModelParams& theta,
                                std::int64_t cap = kDefaultEnumerationCap);

// Dirichlet(e) log-density at nu; -inf on the simplex boundary.
double log_dirichlet(const VectorXd& nu, const VectorXd& e);

// Gaussian log-density of gamma_pack(alpha,beta) at (gamma0, V0) plus
// Dirichlet(e0) log-density of nu.
double log_prior(const ModelParams& theta, const PriorHyper& hyper);

struct SimulatedNetwork {
    LatentAssignment z;
    ObservedNetwork net;
};

// Z_i iid categorical(nu); Y_ij | Z ~ Poisson(exp(alpha_{Z_i Z_j} + x_ij' beta))
// for i<j, mirrored, zero diagonal.  X has pair_count(n) rows.
SimulatedNetwork simulate(const ModelParams& theta, const MatrixXd& X, int n,
                          Rng& rng);

// Exact p(Z | Y, theta) over all K^n assignments.
struct EnumeratedPosterior {
    int n = 0;
    int K = 0;
    VectorXd log_prob;  // K^n entries, normalized

    // Assignment for a flat index (node 0 is the fastest-varying digit).
    LatentAssignment decode(std::int64_t idx) const;
    std::int64_t encode(const LatentAssignment& z) const;

    // P(Z_i = k | Y, theta)
    double marginal(int i, int k) const;
};

EnumeratedPosterior posterior_enumerate(const ObservedNetwork& net,
                                        const ModelParams& theta,
                                        std::int64_t cap = kDefaultEnumerationCap);

// Per-pair Poisson log-pmf table: entry(p, k*K+l) = log f_P(Y_p; e^{alpha_kl + x_p' beta}).
// Shared by the enumeration oracles, the VE step and the SMC kernel.
MatrixXd pair_log_pmf_table(const ObservedNetwork& net, const ModelParams& theta);

}  // namespace sbmreg
