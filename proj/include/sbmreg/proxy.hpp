#pragma once

#include "sbmreg/vem.hpp"

namespace sbmreg {

// Factorized surrogate for p(Z, theta | Y): independent categoricals on Z
// (rows of tau), Gaussian on the packed gamma, Dirichlet on nu.
struct ProxyPosterior {
    MatrixXd tau;              // n x K, floored to [1e-12, 1-1e-12], renormalized
    VectorXd gamma_mean;       // K(K+1)/2 + d
    MatrixXd gamma_cov;        // symmetric positive definite
    VectorXd dirichlet_param;  // e0 + column sums of the fit's tau
    MatrixXd gamma_chol;       // lower Cholesky factor of gamma_cov
    bool ridged = false;       // curvature needed repair

    int n() const { return static_cast<int>(tau.rows()); }
    int K() const { return static_cast<int>(tau.cols()); }
    int gamma_size() const { return static_cast<int>(gamma_mean.size()); }
    int d() const { return gamma_size() - K() * (K() + 1) / 2; }
};

// Curvature of the bound in the packed gamma: alpha block diagonal with
// entries -sum_p s_ab e^eta, beta rows -sum_p s_ab e^eta x_p and
// -sum_p m_p x_p x_p'; every (alpha_kl, alpha_k'l') cross entry with
// {k,l} != {k',l'} is exactly zero.  Symmetric negative semidefinite.
MatrixXd hessian_gamma(const ObservedNetwork& net, const ModelParams& theta_tilde,
                       const MatrixXd& tau);

// Curvature of the bound in nu at fixed tau: diag(-N~_k / nu_k^2).  Not used
// by the proxy construction (the Dirichlet component is exact); kept because
// it completes the block-diagonal picture and is cheap to verify.
MatrixXd hessian_nu(const MatrixXd& tau, const VectorXd& nu);

// Combines curvature and prior: gamma precision V0^{-1} + (-H), mean the
// precision-weighted average of gamma0 and the fit's gamma; Dirichlet
// parameter e0 + N~.  If -H has an eigenvalue below 1e-10 a ridge of
// (1e-8 + |min eig|) I is added first.
ProxyPosterior build_proxy(const VariationalFit& fit, const PriorHyper& hyper);

// Same construction from explicit pieces; lets tests inject a curvature
// (e.g. H = 0 recovers the prior exactly up to the ridge).
ProxyPosterior build_proxy_from_hessian(const MatrixXd& tau,
                                        const VectorXd& gamma_tilde,
                                        const MatrixXd& H,
                                        const PriorHyper& hyper);

// sum_i log tau_{i,Z_i} + Gaussian log-density of gamma_pack(theta)
// + Dirichlet log-density of nu.  -inf when some tau_{i,Z_i} = 0.
double proxy_log_density(const ProxyPosterior& p, const LatentAssignment& z,
                         const ModelParams& theta);

// Z_i ~ categorical(tau_i.), gamma = mean + L xi, nu ~ Dirichlet(param).
// Draw order is fixed (Z by node, gamma, nu) so streams are reproducible.
std::pair<LatentAssignment, ModelParams> proxy_sample(const ProxyPosterior& p,
                                                      Rng& rng);

}  // namespace sbmreg
