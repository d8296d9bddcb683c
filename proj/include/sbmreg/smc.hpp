#pragma once

#include <vector>

#include "sbmreg/proxy.hpp"

namespace sbmreg {

struct Particle {
    LatentAssignment z;
    ModelParams theta;
    double log_r = 0.0;  // log prior + complete log-likelihood - start log-density
    double log_w = 0.0;  // raw weight, log scale
    double W = 0.0;      // normalized weight
};

struct TraceRecord {
    int h = 0;
    double rho = 0.0;
    double cess = 0.0;        // at the chosen rho, before reweighting
    double ess = 0.0;         // after reweighting
    bool resampled = false;
    double log_evidence_increment = 0.0;
    double accept_gamma = 0.0;   // MH acceptance rate over particles and sweeps
    double z_change_rate = 0.0;  // fraction of Gibbs site updates that moved
    double mi = 0.0;             // mutual-information estimate of the Z sample
    double path_u = 0.0;         // sum_m W_m log r_m, for path-sampling evidence
};

using TemperTrace = std::vector<TraceRecord>;

struct SmcConfig {
    int M = 2000;
    double tau1 = 0.9;          // cESS fraction kept per temperature step
    double tau2 = 0.8;          // ESS fraction below which we resample
    int sweeps = 3;             // kernel sweeps per temperature step
    double rho_tol = 1e-8;      // bisection tolerance for the next rho
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (M < 2) throw InputError("smc: M must be >= 2");
        if (!(tau1 > 0.0 && tau1 <= 1.0)) throw InputError("smc: tau1 must be in (0,1]");
        if (!(tau2 > 0.0 && tau2 <= 1.0)) throw InputError("smc: tau2 must be in (0,1]");
        if (sweeps < 1) throw InputError("smc: sweeps must be >= 1");
    }
};

// Where the tempered path starts: at the fitted proxy (the accelerated
// sampler) or at pi(theta) p_theta(Z) (the classical prior start).
struct SmcStart {
    enum Mode { FromProxy, FromPrior } mode = FromProxy;
    const ProxyPosterior* proxy = nullptr;  // required in FromProxy mode

    static SmcStart from_proxy(const ProxyPosterior& p) { return {FromProxy, &p}; }
    static SmcStart from_prior() { return {FromPrior, nullptr}; }
};

// Log-density of the start distribution at (Z, theta).
double start_log_density(const SmcStart& start, const PriorHyper& hyper,
                         const LatentAssignment& z, const ModelParams& theta);

// (1-rho) * start + rho * (log prior + complete log-likelihood):
// the log of the unnormalized bridge gamma_rho.
double tempered_log_density(double rho, const SmcStart& start,
                            const PriorHyper& hyper, const ObservedNetwork& net,
                            const LatentAssignment& z, const ModelParams& theta);

// M (sum_m W_m r_m^D)^2 / sum_m W_m r_m^{2D} with D = rho - rho_prev,
// evaluated in log space; in (0, M].
double cess(double rho, double rho_prev, const VectorXd& W, const VectorXd& log_r);

// Largest rho in (rho_prev, 1] with cess(rho) >= tau1 * M, by bisection to
// absolute tolerance; returns 1 when the whole remaining path qualifies and
// rho_prev + 1e-10 when not even the floor increment does.
double find_next_rho(double rho_prev, const VectorXd& W, const VectorXd& log_r,
                     double tau1, int M, double tol = 1e-8);

// (sum W)^2 / sum W^2 for normalized W.
double ess(const VectorXd& W);

// M iid categorical(W) draws; weights reset to 1 (log 0), normalized to 1/M.
void resample_multinomial(std::vector<Particle>& particles, Rng& rng);

struct KernelStats {
    int gamma_proposals = 0;
    int gamma_accepts = 0;
    int z_updates = 0;
    int z_changes = 0;
};

// One tempered MCMC pass: systematic-scan Gibbs on Z, exact Dirichlet Gibbs
// on nu, random-walk Metropolis on gamma with proposal covariance
// (2.38^2/dim) * Sigma * lambda^2.  Leaves the rho-tempered density invariant.
void kernel_step(double rho, const SmcStart& start, const PriorHyper& hyper,
                 const ObservedNetwork& net, Particle& particle, int sweeps,
                 double lambda, const MatrixXd& proposal_chol, Rng& rng,
                 KernelStats& stats);

// Dirichlet parameter of the exact tempered nu-conditional given Z:
// e0 + (1-rho) N~ + rho N(Z) from the proxy start, e0 + N(Z) from the prior.
VectorXd tempered_dirichlet_param(double rho, const SmcStart& start,
                                  const PriorHyper& hyper,
                                  const LatentAssignment& z);

struct SmcResult {
    std::vector<Particle> particles;
    TemperTrace trace;
    double lambda = 1.0;  // final MH scale after adaptation
};

// Adaptive tempering from the start distribution to the posterior.  Each
// temperature step: bisect for rho, reweight with the pre-move ratios,
// resample when ESS < tau2 M, move every particle (one rng substream per
// (seed, h, m)), recompute r.  The trace row h=0 records the initial state.
SmcResult run_smc(const ObservedNetwork& net, const SmcStart& start,
                  const PriorHyper& hyper, const SmcConfig& config);

// sum_h log sum_m W_{h-1}^m (r_{h-1}^m)^{rho_h - rho_{h-1}}: the product
// estimator, accumulated from pre-move weights.
double log_evidence_product(const TemperTrace& trace);

// Trapezoid rule sum_h (D_h/2)(U_h + U_{h-1}) with U_h = sum_m W_h^m log r_h^m.
double log_evidence_path_sampling(const TemperTrace& trace);

}  // namespace sbmreg
