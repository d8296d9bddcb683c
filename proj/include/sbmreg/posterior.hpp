#pragma once

#include <string>
#include <vector>

#include "sbmreg/smc.hpp"

namespace sbmreg {

struct KPosterior {
    std::vector<int> K_values;
    VectorXd log_evidence;  // one per K
    VectorXd prior;         // pi(K), normalized
    VectorXd prob;          // posterior over K, normalized

    int mode() const {
        int best = 0;
        for (int i = 1; i < prob.size(); ++i)
            if (prob[i] > prob[best]) best = i;
        return K_values[best];
    }
};

// Normalizes pi(K) exp(log evidence) with log-sum-exp.  Uniform prior when
// `prior` is empty.
KPosterior k_posterior(const std::vector<int>& K_values,
                       const VectorXd& log_evidence,
                       const VectorXd& prior = VectorXd());

// Pools per-K weighted scalar samples with weights p(K) W^{m,K}.
struct WeightedSample {
    VectorXd value;
    VectorXd weight;
};
WeightedSample model_average(const std::vector<WeightedSample>& per_K,
                             const KPosterior& kpost);

// Blocks sorted by increasing alpha_kk (ties by nu descending); the result maps
// canonical position -> original label.  Makes block positions comparable
// across particles despite label switching.
std::vector<int> canonical_block_order(const ModelParams& theta);

// Block-constant function on the unit square: phi(u,v) = alpha_{k(u) k(v)}
// where k(u) is the canonical block whose cumulative-nu interval contains u.
// Evaluated at the G x G grid midpoints.
MatrixXd particle_graphon(const ModelParams& theta, int G);

struct GraphonEstimate {
    int G = 0;
    MatrixXd phi;  // G x G, pointwise weighted particle mean
};

GraphonEstimate graphon_mean(const std::vector<Particle>& particles, int G);

// Weighted mean over (K-conditional estimate, p(K)) pairs.
GraphonEstimate graphon_mean_over_K(const std::vector<GraphonEstimate>& per_K,
                                    const KPosterior& kpost);

// Posterior mean of the latent coordinate of each node: per particle the
// midpoint of the canonical cumulative-nu interval of its block, averaged
// with particle weights.
VectorXd latent_coordinates(const std::vector<Particle>& particles);

// Plug-in mutual information of the Z sample: weighted joint frequency of the
// full configuration against the product of site marginals, clipped at 0.
double mutual_information_estimate(const std::vector<Particle>& particles);

}  // namespace sbmreg
