#pragma once

#include <vector>

#include "sbmreg/model.hpp"

namespace sbmreg {

struct VemOptions {
    double tol_tau = 1e-6;    // VE fixed-point stopping rule (max abs change)
    double tol_elbo = 1e-8;   // EM stopping rule on the bound
    double tol_grad = 1e-8;   // M-step Newton stopping rule (gradient max-norm)
    int max_em = 200;
    int max_fixed_point = 100;
    int max_newton = 60;
    int restarts = 5;
    int threads = 1;
    double degenerate_block_ridge = 1e-8;  // added when some block weight < 1e-6
};

struct VariationalFit {
    MatrixXd tau;            // n x K, rows on the simplex
    ModelParams theta;       // variational optimum
    double elbo_value = 0.0;
    VectorXd block_weights;  // column sums of tau
    MatrixXd curvature;      // Hessian of the bound in packed gamma at the optimum
    std::vector<double> elbo_history;  // bound after each EM iteration, best restart
    bool converged = false;
    int iterations = 0;
    bool ridge_applied = false;
};

// Mean-field lower bound on log p_theta(Y):
//   sum_ik tau_ik log nu_k
// + sum_{i<j} sum_{kl} tau_ik tau_jl log f_P(Y_ij; e^{alpha_kl + x_ij' beta})
// - sum_ik tau_ik log tau_ik   (0 log 0 = 0)
double elbo(const ObservedNetwork& net, const ModelParams& theta,
            const MatrixXd& tau);

// Fixed point of tau_ik ~ nu_k prod_{j!=i} prod_l f_P(...)^{tau_jl}, iterated
// site-by-site in log space until max abs change < tol.  Never returns a tau
// with a lower bound than tau_init.
MatrixXd ve_step(const ObservedNetwork& net, const ModelParams& theta,
                 const MatrixXd& tau_init, double tol = 1e-6, int max_iter = 100);

struct MStepInfo {
    double grad_max_norm = 0.0;
    int newton_iterations = 0;
    bool ridge_applied = false;
};

// The M-step objective sum_{i<j} sum_{k<=l} s_kl (eta Y_ij - e^eta) in the
// packed gamma, with symmetrized weights s_kl = tau_ik tau_jl + tau_il tau_jk
// off the diagonal; equals the gamma-dependent part of the bound.
double m_objective(const ObservedNetwork& net, const MatrixXd& tau,
                   const VectorXd& gamma);

// Analytic gradient and Hessian of m_objective; the Hessian doubles as the
// curvature the proxy is built from.
void m_objective_derivatives(const ObservedNetwork& net, const MatrixXd& tau,
                             const VectorXd& gamma, VectorXd& g, MatrixXd& H);

// nu in closed form; gamma by Newton with step halving on the weighted
// Poisson objective sum_{i<j} sum_{kl} tau_ik tau_jl (eta Y_ij - e^eta).
ModelParams m_step(const ObservedNetwork& net, const MatrixXd& tau,
                   const ModelParams& theta_init, const VemOptions& opts = {},
                   MStepInfo* info = nullptr);

// Alternates ve_step / m_step from a spectral initialization plus perturbed
// restarts; returns the restart with the highest bound.
VariationalFit fit_vem(const ObservedNetwork& net, int K,
                       const VemOptions& opts, Rng& rng);

// J - (1/2) (K(K+1)/2 + d) log(n(n-1)/2) - (1/2)(K-1) log n
double pseudo_icl(const VariationalFit& fit, const ObservedNetwork& net);

// Spectral clustering of log(1+Y) into K groups; returns hard labels.
VectorXi spectral_labels(const ObservedNetwork& net, int K, Rng& rng);

}  // namespace sbmreg
