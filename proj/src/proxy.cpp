#include "sbmreg/proxy.hpp"

#include <cmath>
#include <limits>

namespace sbmreg {

MatrixXd hessian_gamma(const ObservedNetwork& net, const ModelParams& theta_tilde,
                       const MatrixXd& tau) {
    const int q = gamma_dim(theta_tilde.K(), net.d);
    VectorXd g(q);
    MatrixXd H(q, q);
    m_objective_derivatives(net, tau, gamma_pack(theta_tilde.alpha, theta_tilde.beta),
                            g, H);
    if (!H.allFinite()) throw NumericalError("hessian_gamma: non-finite rates");
    return H;
}

MatrixXd hessian_nu(const MatrixXd& tau, const VectorXd& nu) {
    const int K = static_cast<int>(nu.size());
    const VectorXd n_tilde = tau.colwise().sum().transpose();
    MatrixXd H = MatrixXd::Zero(K, K);
    for (int k = 0; k < K; ++k) H(k, k) = -n_tilde[k] / (nu[k] * nu[k]);
    return H;
}

ProxyPosterior build_proxy_from_hessian(const MatrixXd& tau,
                                        const VectorXd& gamma_tilde,
                                        const MatrixXd& H,
                                        const PriorHyper& hyper) {
    hyper.validate();
    const int q = static_cast<int>(gamma_tilde.size());
    if (H.rows() != q || H.cols() != q || hyper.gamma_size() != q)
        throw InputError("build_proxy: gamma dimension mismatch");
    if (static_cast<int>(tau.cols()) != hyper.K())
        throw InputError("build_proxy: tau and e0 disagree on K");

    ProxyPosterior p;

    // Curvature A = -H must be positive definite for the Gaussian to be
    // proper; empty blocks leave zero eigenvalues, repaired with a ridge.
    MatrixXd A = -H;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(A);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < 1e-10) {
        A.diagonal().array() += 1e-8 + std::abs(min_eig);
        p.ridged = true;
    }

    const Eigen::LLT<MatrixXd> prior_llt(hyper.V0);
    if (prior_llt.info() != Eigen::Success)
        throw NumericalError("build_proxy: V0 is not positive definite");
    const MatrixXd V0_inv = prior_llt.solve(MatrixXd::Identity(q, q));

    const MatrixXd prec = V0_inv + A;
    const Eigen::LLT<MatrixXd> prec_llt(prec);
    if (prec_llt.info() != Eigen::Success)
        throw NumericalError("build_proxy: combined precision not positive definite");
    p.gamma_cov = prec_llt.solve(MatrixXd::Identity(q, q));
    p.gamma_cov = ((p.gamma_cov + p.gamma_cov.transpose()) / 2.0).eval();
    p.gamma_mean = prec_llt.solve(V0_inv * hyper.gamma0 + A * gamma_tilde);

    Eigen::LLT<MatrixXd> cov_llt(p.gamma_cov);
    if (cov_llt.info() != Eigen::Success)
        throw NumericalError("build_proxy: covariance lost definiteness");
    p.gamma_chol = cov_llt.matrixL();

    p.dirichlet_param = hyper.e0 + tau.colwise().sum().transpose();

    // Sampling table: clip away exact zeros so every reachable state keeps a
    // finite start density, then renormalize rows.
    p.tau = tau.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);
    const VectorXd row_sum = p.tau.rowwise().sum();
    p.tau.array().colwise() /= row_sum.array();
    return p;
}

ProxyPosterior build_proxy(const VariationalFit& fit, const PriorHyper& hyper) {
    if (fit.curvature.size() == 0)
        throw InputError("build_proxy: fit carries no curvature (use fit_vem)");
    return build_proxy_from_hessian(fit.tau,
                                    gamma_pack(fit.theta.alpha, fit.theta.beta),
                                    fit.curvature, hyper);
}

double proxy_log_density(const ProxyPosterior& p, const LatentAssignment& z,
                         const ModelParams& theta) {
    const int n = p.n(), K = p.K();
    if (z.n() != n) throw InputError("proxy_log_density: z size mismatch");
    z.validate(K);
    if (theta.K() != K || gamma_dim(K, theta.d()) != p.gamma_size())
        throw InputError("proxy_log_density: theta dimension mismatch");

    double lp = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = p.tau(i, z.z[i]);
        if (t <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(t);
    }

    const VectorXd gamma = gamma_pack(theta.alpha, theta.beta);
    const int q = p.gamma_size();
    const VectorXd u = p.gamma_chol.triangularView<Eigen::Lower>().solve(
        (gamma - p.gamma_mean).eval());
    double log_det = 0.0;
    for (int r = 0; r < q; ++r) log_det += std::log(p.gamma_chol(r, r));
    lp += -0.5 * q * std::log(2.0 * M_PI) - log_det - 0.5 * u.squaredNorm();

    lp += log_dirichlet(theta.nu, p.dirichlet_param);
    return lp;
}

std::pair<LatentAssignment, ModelParams> proxy_sample(const ProxyPosterior& p,
                                                      Rng& rng) {
    const int n = p.n(), K = p.K(), q = p.gamma_size();
    LatentAssignment z;
    z.z.resize(n);
    for (int i = 0; i < n; ++i) z.z[i] = rcat(rng, p.tau.row(i).transpose());

    VectorXd xi(q);
    for (int r = 0; r < q; ++r) xi[r] = rnorm(rng);
    const VectorXd gamma = p.gamma_mean + p.gamma_chol * xi;

    ModelParams theta;
    theta.nu = rdirichlet(rng, p.dirichlet_param);
    std::tie(theta.alpha, theta.beta) = gamma_unpack(K, p.d(), gamma);
    return {std::move(z), std::move(theta)};
}

}  // namespace sbmreg
