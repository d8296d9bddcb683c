#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sbmreg/posterior.hpp"

namespace sbmreg {

struct PhiFunction {
    std::string name;
    std::function<double(const ModelParams&)> eval;
};

// Scalar summaries of theta used to probe calibration, all invariant under
// block-label permutation (checked with a random permutation at build time).
// The canonical battery (K=2, d=4) has 14 entries: beta_sum, prop_absdiff,
// beta_1..beta_4, alpha_diag_sum, alpha_sum, alpha_sum_plus_beta_r,
// alpha_diag_sum_plus_beta_sum, alpha_sum_plus_beta_sum_plus_prop_absdiff.
// alpha_sum counts ordered pairs (off-diagonals twice); prop_absdiff is
// dropped when K != 2.
std::vector<PhiFunction> phi_battery(int K, int d);

// Number of sample members with phi(theta_m) strictly below phi(theta_true).
int u_statistic(const PhiFunction& phi, const ModelParams& theta_true,
                const std::vector<ModelParams>& sample);

// Discrete KL(empirical || uniform) of U values over {0..M} binned into
// equal-width bins, Laplace smoothing 0.5 per bin.
double kl_to_uniform(const std::vector<int>& u_values, int M, int bins = 20);

enum class SbcSampler { ProxyOnly, SmcFromApprox, SmcFromPrior };

struct SbcConfig {
    int S = 50;    // replicates
    int n = 20;
    int M = 500;   // posterior sample size per replicate
    SbcSampler sampler = SbcSampler::SmcFromApprox;
    SmcConfig smc;          // used by the SMC samplers
    VemOptions vem;
    std::uint64_t seed = 0;
};

struct SbcResult {
    std::vector<std::string> phi_names;
    // u[s][j]: rank of replicate s under phi j; -1 marks a skipped replicate.
    std::vector<std::vector<int>> u;
    int skipped = 0;
    int M = 0;

    std::vector<int> ranks_for(int j) const {
        std::vector<int> out;
        for (const auto& row : u)
            if (row[j] >= 0) out.push_back(row[j]);
        return out;
    }
};

// Self-consistency loop: draw theta from the prior, simulate a network on the
// fixed covariates X, sample M draws by the chosen method (weighted samples
// are multinomially resampled to unweighted first), record the rank of the
// true theta under every phi.  Failures skip the replicate and are counted.
SbcResult sbc_run(const SbcConfig& cfg, const PriorHyper& hyper,
                  const MatrixXd& X);

}  // namespace sbmreg
