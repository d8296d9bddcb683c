#include "sbmreg/vem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <vector>

namespace sbmreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// x'log(y) with the convention 0*log(0) = 0.
double xlogy_sum(const VectorXd& x, const VectorXd& y) {
    double s = 0.0;
    for (int k = 0; k < x.size(); ++k) {
        if (x[k] > 0.0) s += x[k] * std::log(y[k]);
    }
    return s;
}

}  // namespace

double elbo(const ObservedNetwork& net, const ModelParams& theta,
            const MatrixXd& tau) {
    const int n = net.n, K = theta.K();
    if (tau.rows() != n || tau.cols() != K)
        throw InputError("elbo: tau must be n x K");
    const MatrixXd L = pair_log_pmf_table(net, theta);

    double mix = 0.0, entropy = 0.0;
    for (int i = 0; i < n; ++i) {
        mix += xlogy_sum(tau.row(i).transpose(), theta.nu);
        for (int k = 0; k < K; ++k) {
            const double t = tau(i, k);
            if (t > 0.0) entropy -= t * std::log(t);
        }
    }
    double data = 0.0;
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p)
            for (int k = 0; k < K; ++k) {
                double inner = 0.0;
                for (int l = 0; l < K; ++l) inner += L(p, k * K + l) * tau(j, l);
                data += tau(i, k) * inner;
            }
    return mix + data + entropy;
}

MatrixXd ve_step(const ObservedNetwork& net, const ModelParams& theta,
                 const MatrixXd& tau_init, double tol, int max_iter) {
    const int n = net.n, K = theta.K();
    if (tau_init.rows() != n || tau_init.cols() != K)
        throw InputError("ve_step: tau must be n x K");
    const MatrixXd L = pair_log_pmf_table(net, theta);
    if (!L.allFinite())
        throw NumericalError("ve_step: non-finite pair log-pmf (check rates)");
    VectorXd log_nu(K);
    for (int k = 0; k < K; ++k)
        log_nu[k] = theta.nu[k] > 0.0 ? std::log(theta.nu[k]) : kNegInf;

    const double j_before = elbo(net, theta, tau_init);
    MatrixXd tau = tau_init;
    VectorXd score(K);
    for (int sweep = 0; sweep < max_iter; ++sweep) {
        double delta = 0.0;
        for (int i = 0; i < n; ++i) {
            score = log_nu;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                const int p = j < i ? pair_index(n, j, i) : pair_index(n, i, j);
                for (int k = 0; k < K; ++k) {
                    double inner = 0.0;
                    for (int l = 0; l < K; ++l) inner += L(p, k * K + l) * tau(j, l);
                    score[k] += inner;
                }
            }
            const double m = score.maxCoeff();
            VectorXd w = (score.array() - m).exp();
            w /= w.sum();
            delta = std::max(delta, (w - tau.row(i).transpose()).cwiseAbs().maxCoeff());
            tau.row(i) = w.transpose();
        }
        if (delta < tol) break;
    }
    const double j_after = elbo(net, theta, tau);
    if (j_after < j_before - 1e-8 * (1.0 + std::abs(j_before)))
        throw NumericalError("ve_step: bound decreased, fixed point is broken");
    return tau;
}

namespace {

// Symmetrized pair weights for the packed alpha entries: for a<b the weight is
// tau_ia tau_jb + tau_ib tau_ja, on the diagonal tau_ia tau_ja.  P x K(K+1)/2.
MatrixXd packed_pair_weights(const MatrixXd& tau, int n) {
    const int K = static_cast<int>(tau.cols());
    const int qa = K * (K + 1) / 2;
    MatrixXd W(pair_count(n), qa);
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            int t = 0;
            for (int a = 0; a < K; ++a)
                for (int b = a; b < K; ++b, ++t)
                    W(p, t) = a == b ? tau(i, a) * tau(j, a)
                                     : tau(i, a) * tau(j, b) + tau(i, b) * tau(j, a);
        }
    return W;
}

// Weighted Poisson objective sum_p sum_t w_pt (eta Y_p - e^eta); -inf on overflow.
double weighted_poisson_objective(const ObservedNetwork& net, const VectorXd& ypair,
                                  const MatrixXd& W, const VectorXd& gamma, int K) {
    const int qa = K * (K + 1) / 2;
    const VectorXd beta = gamma.tail(net.d);
    double f = 0.0;
    for (int p = 0; p < W.rows(); ++p) {
        const double xb = net.d > 0 ? net.X.row(p).dot(beta) : 0.0;
        for (int t = 0; t < qa; ++t) {
            const double eta = gamma[t] + xb;
            if (eta > 700.0) return kNegInf;
            f += W(p, t) * (eta * ypair[p] - std::exp(eta));
        }
    }
    return f;
}

void objective_derivatives(const ObservedNetwork& net, const VectorXd& ypair,
                           const MatrixXd& W, const VectorXd& gamma, int K,
                           VectorXd& g, MatrixXd& H) {
    const int d = net.d, qa = K * (K + 1) / 2, q = qa + d;
    const VectorXd beta = gamma.tail(d);
    g.setZero(q);
    H.setZero(q, q);
    for (int p = 0; p < W.rows(); ++p) {
        const double xb = d > 0 ? net.X.row(p).dot(beta) : 0.0;
        const double y = ypair[p];
        double rate_sum = 0.0, resid_sum = 0.0;
        for (int t = 0; t < qa; ++t) {
            const double we = W(p, t) * std::exp(gamma[t] + xb);
            rate_sum += we;
            resid_sum += W(p, t) * y - we;
            g[t] += W(p, t) * y - we;
            if (d > 0) H.block(qa, t, d, 1).noalias() -= we * net.X.row(p).transpose();
            H(t, t) -= we;
        }
        if (d > 0) {
            g.tail(d).noalias() += resid_sum * net.X.row(p).transpose();
            H.bottomRightCorner(d, d).noalias() -=
                rate_sum * net.X.row(p).transpose() * net.X.row(p);
        }
    }
    for (int r = 0; r < q; ++r)  // mirror the strictly lower part
        for (int c = r + 1; c < q; ++c) H(r, c) = H(c, r);
}

}  // namespace

double m_objective(const ObservedNetwork& net, const MatrixXd& tau,
                   const VectorXd& gamma) {
    const int K = static_cast<int>(tau.cols());
    return weighted_poisson_objective(net, net.pair_counts(),
                                      packed_pair_weights(tau, net.n), gamma, K);
}

void m_objective_derivatives(const ObservedNetwork& net, const MatrixXd& tau,
                             const VectorXd& gamma, VectorXd& g, MatrixXd& H) {
    const int K = static_cast<int>(tau.cols());
    objective_derivatives(net, net.pair_counts(), packed_pair_weights(tau, net.n),
                          gamma, K, g, H);
}

ModelParams m_step(const ObservedNetwork& net, const MatrixXd& tau,
                   const ModelParams& theta_init, const VemOptions& opts,
                   MStepInfo* info) {
    const int n = net.n, K = static_cast<int>(tau.cols());
    if (tau.rows() != n) throw InputError("m_step: tau must have n rows");
    const int qa = K * (K + 1) / 2, q = qa + net.d;

    ModelParams theta = theta_init;
    const VectorXd n_tilde = tau.colwise().sum().transpose();
    theta.nu = n_tilde / static_cast<double>(n);

    const VectorXd ypair = net.pair_counts();
    const MatrixXd W = packed_pair_weights(tau, n);
    const bool degenerate = (n_tilde.array() < 1e-6).any();
    double ridge = degenerate ? opts.degenerate_block_ridge : 0.0;
    bool ridged = degenerate;

    VectorXd gamma = gamma_pack(theta.alpha, theta.beta);
    double f_cur = weighted_poisson_objective(net, ypair, W, gamma, K);
    if (!std::isfinite(f_cur)) {
        gamma.setZero();  // restart from a safe point if the seed overflows
        f_cur = weighted_poisson_objective(net, ypair, W, gamma, K);
    }
    VectorXd g(q);
    MatrixXd H(q, q);
    int it = 0;
    for (; it < opts.max_newton; ++it) {
        objective_derivatives(net, ypair, W, gamma, K, g, H);
        if (g.cwiseAbs().maxCoeff() < opts.tol_grad) break;
        MatrixXd A = -H;
        if (ridge > 0.0) A.diagonal().array() += ridge;
        Eigen::LLT<MatrixXd> llt(A);
        while (llt.info() != Eigen::Success) {
            ridge = std::max(ridge * 10.0, 1e-8);
            ridged = true;
            A = -H;
            A.diagonal().array() += ridge;
            llt.compute(A);
            if (ridge > 1e6) throw NumericalError("m_step: Hessian repair failed");
        }
        VectorXd dir = llt.solve(g);
        double step = 1.0, f_new = kNegInf;
        while (step > 1e-12) {
            f_new = weighted_poisson_objective(net, ypair, W, gamma + step * dir, K);
            if (f_new >= f_cur) break;
            step *= 0.5;
        }
        const double flat = 4.0 * std::numeric_limits<double>::epsilon() *
                            (1.0 + std::abs(f_cur));
        if (f_new - f_cur <= flat) {
            // The step's gain underflows f's resolution here and the
            // backtracking test goes blind (it starts accepting sub-ulp tie
            // steps); switch to shrinking the gradient with the full step,
            // and stop once even that makes no progress.
            VectorXd g_full(q);
            MatrixXd H_full(q, q);
            objective_derivatives(net, ypair, W, gamma + dir, K, g_full, H_full);
            if (g_full.cwiseAbs().maxCoeff() >= g.cwiseAbs().maxCoeff()) break;
            gamma += dir;
            f_cur = weighted_poisson_objective(net, ypair, W, gamma, K);
            continue;
        }
        gamma += step * dir;
        f_cur = f_new;
    }
    objective_derivatives(net, ypair, W, gamma, K, g, H);
    if (info) {
        info->grad_max_norm = g.cwiseAbs().maxCoeff();
        info->newton_iterations = it;
        info->ridge_applied = ridged;
    }
    std::tie(theta.alpha, theta.beta) = gamma_unpack(K, net.d, gamma);
    return theta;
}

VectorXi spectral_labels(const ObservedNetwork& net, int K, Rng& rng) {
    const int n = net.n;
    if (K <= 1 || n <= K) return VectorXi::Zero(n);

    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A(i, j) = std::log1p(static_cast<double>(net.Y(i, j)));
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(A);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(eig.eigenvalues()[a]) > std::abs(eig.eigenvalues()[b]);
    });
    MatrixXd E(n, K);
    for (int k = 0; k < K; ++k)
        E.col(k) = eig.eigenvectors().col(order[k]) *
                   std::sqrt(std::abs(eig.eigenvalues()[order[k]]));

    // k-means++ seeding then Lloyd iterations on the embedding rows
    MatrixXd C(K, K);
    C.row(0) = E.row(static_cast<int>(rng() % n));
    VectorXd d2 = (E.rowwise() - C.row(0)).rowwise().squaredNorm();
    for (int k = 1; k < K; ++k) {
        const double total = d2.sum();
        int pick = 0;
        if (total > 0.0) {
            double u = runif(rng) * total, acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (u <= acc) { pick = i; break; }
            }
        } else {
            pick = static_cast<int>(rng() % n);
        }
        C.row(k) = E.row(pick);
        d2 = d2.cwiseMin((E.rowwise() - C.row(k)).rowwise().squaredNorm());
    }
    VectorXi labels = VectorXi::Zero(n);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (E.row(i) - C.row(0)).squaredNorm();
            for (int k = 1; k < K; ++k) {
                const double dk = (E.row(i) - C.row(k)).squaredNorm();
                if (dk < bd) { bd = dk; best = k; }
            }
            if (labels[i] != best) { labels[i] = best; changed = true; }
        }
        for (int k = 0; k < K; ++k) {
            int cnt = 0;
            RowVectorXd mean = RowVectorXd::Zero(K);
            for (int i = 0; i < n; ++i)
                if (labels[i] == k) { mean += E.row(i); ++cnt; }
            if (cnt > 0) {
                C.row(k) = mean / cnt;
            } else {
                // revive an empty cluster at the point farthest from its center
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double di = (E.row(i) - C.row(labels[i])).squaredNorm();
                    if (di > fd) { fd = di; far = i; }
                }
                C.row(k) = E.row(far);
                labels[far] = k;
                changed = true;
            }
        }
        if (!changed) break;
    }
    return labels;
}

namespace {

struct RestartResult {
    double J = kNegInf;
    MatrixXd tau;
    ModelParams theta;
    std::vector<double> history;
    bool converged = false;
    int iterations = 0;
    bool ridged = false;
};

RestartResult run_restart(const ObservedNetwork& net, int K, const VemOptions& opts,
                          const VectorXi& labels, int restart, Rng& rng) {
    const int n = net.n;
    MatrixXd tau(n, K);
    if (restart == 0) {
        tau.setConstant(K > 1 ? 0.05 / (K - 1) : 1.0);
        for (int i = 0; i < n; ++i) tau(i, labels[i]) = K > 1 ? 0.95 : 1.0;
    } else {
        for (int i = 0; i < n; ++i) {
            VectorXd conc = VectorXd::Constant(K, 0.5);
            conc[labels[i]] += 4.0;
            tau.row(i) = rdirichlet(rng, conc).transpose();
        }
    }

    ModelParams theta;
    theta.nu = VectorXd::Constant(K, 1.0 / K);
    const double ybar =
        (net.Y.cast<double>().sum() / 2.0 + 0.5) / (pair_count(n) + 1.0);
    theta.alpha = MatrixXd::Constant(K, K, std::log(ybar));
    theta.beta = VectorXd::Zero(net.d);

    RestartResult out;
    double J_prev = kNegInf;
    MStepInfo info;
    for (int it = 0; it < opts.max_em; ++it) {
        theta = m_step(net, tau, theta, opts, &info);
        out.ridged = out.ridged || info.ridge_applied;
        tau = ve_step(net, theta, tau, opts.tol_tau, opts.max_fixed_point);
        const double J = elbo(net, theta, tau);
        out.iterations = it + 1;
        out.history.push_back(J);
        if (!std::isfinite(J)) return out;
        if (std::abs(J - J_prev) < opts.tol_elbo) {
            out.converged = true;
            J_prev = J;
            break;
        }
        J_prev = J;
    }
    out.J = J_prev;
    out.tau = std::move(tau);
    out.theta = std::move(theta);
    return out;
}

}  // namespace

VariationalFit fit_vem(const ObservedNetwork& net, int K,
                       const VemOptions& opts, Rng& rng) {
    if (K < 1) throw InputError("fit_vem: K must be >= 1");
    const std::uint64_t base = rng();

    RestartResult best;
    int best_r = -1;
    const int R = std::max(1, opts.restarts);
    for (int r = 0; r < R; ++r) {
        Rng sub = substream(base, static_cast<std::uint64_t>(r));
        const VectorXi labels = spectral_labels(net, K, sub);
        RestartResult res = run_restart(net, K, opts, labels, r, sub);
        if (res.J > best.J) {
            best = std::move(res);
            best_r = r;
        }
    }
    if (best_r < 0 || !std::isfinite(best.J))
        throw NumericalError("fit_vem: all restarts diverged");

    VariationalFit fit;
    fit.tau = std::move(best.tau);
    fit.theta = std::move(best.theta);
    fit.elbo_value = best.J;
    fit.elbo_history = std::move(best.history);
    fit.block_weights = fit.tau.colwise().sum().transpose();
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    fit.ridge_applied = best.ridged;
    const int q = gamma_dim(K, net.d);
    VectorXd g(q);
    fit.curvature.resize(q, q);
    m_objective_derivatives(net, fit.tau,
                            gamma_pack(fit.theta.alpha, fit.theta.beta), g,
                            fit.curvature);
    return fit;
}

double pseudo_icl(const VariationalFit& fit, const ObservedNetwork& net) {
    const int K = fit.theta.K(), d = fit.theta.d();
    const double P = static_cast<double>(pair_count(net.n));
    return fit.elbo_value - 0.5 * (K * (K + 1) / 2 + d) * std::log(P) -
           0.5 * (K - 1) * std::log(static_cast<double>(net.n));
}

}  // namespace sbmreg
