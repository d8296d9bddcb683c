#include "sbmreg/model.hpp"

#include <cmath>
#include <limits>

namespace sbmreg {

namespace {

// Largest log-rate we hand to the Poisson sampler; counts cap at 2^31-1.
constexpr double kMaxLogRate = 21.48;  // log(INT32_MAX) ~ 21.487

double check_dims(const ObservedNetwork& net, const ModelParams& theta) {
    if (theta.d() != net.d)
        throw InputError("beta length does not match covariate dimension");
    return 0.0;
}


}  // namespace

MatrixXd pair_log_pmf_table(const ObservedNetwork& net, const ModelParams& theta) {
    check_dims(net, theta);
    const int K = theta.K();
    const int P = net.pairs();
    const VectorXd xb = net.d > 0 ? VectorXd(net.X * theta.beta)
                                  : VectorXd::Zero(P);
    MatrixXd table(P, K * K);
    for (int i = 0, p = 0; i < net.n; ++i) {
        for (int j = i + 1; j < net.n; ++j, ++p) {
            const double y = net.Y(i, j);
            const double lg = std::lgamma(y + 1.0);
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < K; ++l) {
                    const double eta = theta.alpha(k, l) + xb[p];
                    table(p, k * K + l) = -std::exp(eta) + y * eta - lg;
                }
        }
    }
    return table;
}

double complete_log_likelihood(const ObservedNetwork& net,
                               const LatentAssignment& z,
                               const ModelParams& theta) {
    check_dims(net, theta);
    z.validate(theta.K());
    if (z.n() != net.n) throw InputError("assignment length does not match n");

    double total = 0.0;
    for (int i = 0; i < net.n; ++i) total += std::log(theta.nu[z.z[i]]);

    const VectorXd xb = net.d > 0 ? VectorXd(net.X * theta.beta)
                                  : VectorXd::Zero(net.pairs());
    for (int i = 0, p = 0; i < net.n; ++i)
        for (int j = i + 1; j < net.n; ++j, ++p) {
            const double eta = theta.alpha(z.z[i], z.z[j]) + xb[p];
            total += poisson_log_pmf(net.Y(i, j), eta);
        }
    return total;
}

namespace {

// Runs fn(z, complete_ll) over every assignment via an odometer on z.
template <typename Fn>
void enumerate_assignments(const ObservedNetwork& net, const ModelParams& theta,
                           std::int64_t cap, Fn&& fn) {
    const int n = net.n;
    const int K = theta.K();
    double total_configs = std::pow(static_cast<double>(K), n);
    if (total_configs > static_cast<double>(cap))
        throw InputError("enumeration cap exceeded: K^n = " +
                         std::to_string(total_configs) + " > " +
                         std::to_string(cap));

    const MatrixXd table = pair_log_pmf_table(net, theta);
    VectorXd log_nu = theta.nu.array().log();

    VectorXi z = VectorXi::Zero(n);
    const std::int64_t count = static_cast<std::int64_t>(total_configs);
    for (std::int64_t idx = 0;; ++idx) {
        double ll = 0.0;
        for (int i = 0; i < n; ++i) ll += log_nu[z[i]];
        for (int i = 0, p = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++p) ll += table(p, z[i] * K + z[j]);
        fn(idx, ll);
        if (idx + 1 == count) break;
        for (int i = 0; i < n; ++i) {  // odometer, node 0 fastest
            if (++z[i] < K) break;
            z[i] = 0;
        }
    }
}

}  // namespace

double log_likelihood_enumerate(const ObservedNetwork& net,
                                const ModelParams& theta, std::int64_t cap) {
    check_dims(net, theta);
    // Streaming log-sum-exp: rescale the partial sum whenever the max moves.
    double m = -std::numeric_limits<double>::infinity();
    double s = 0.0;
    enumerate_assignments(net, theta, cap, [&](std::int64_t, double ll) {
        if (ll <= m) {
            s += std::exp(ll - m);
        } else {
            s = std::isfinite(m) ? s * std::exp(m - ll) + 1.0 : 1.0;
            m = ll;
        }
    });
    return m + std::log(s);
}

EnumeratedPosterior posterior_enumerate(const ObservedNetwork& net,
                                        const ModelParams& theta,
                                        std::int64_t cap) {
    check_dims(net, theta);
    EnumeratedPosterior post;
    post.n = net.n;
    post.K = theta.K();
    const std::int64_t count =
        static_cast<std::int64_t>(std::pow(static_cast<double>(post.K), post.n));
    post.log_prob.resize(count);
    enumerate_assignments(net, theta, cap,
                          [&](std::int64_t idx, double ll) { post.log_prob[idx] = ll; });
    post.log_prob.array() -= log_sum_exp(post.log_prob);
    return post;
}

LatentAssignment EnumeratedPosterior::decode(std::int64_t idx) const {
    LatentAssignment z;
    z.z.resize(n);
    for (int i = 0; i < n; ++i) {
        z.z[i] = static_cast<int>(idx % K);
        idx /= K;
    }
    return z;
}

std::int64_t EnumeratedPosterior::encode(const LatentAssignment& z) const {
    std::int64_t idx = 0;
    for (int i = n - 1; i >= 0; --i) idx = idx * K + z.z[i];
    return idx;
}

double EnumeratedPosterior::marginal(int i, int k) const {
    double m = log_prob.maxCoeff();
    double num = 0.0;
    std::int64_t stride = 1;
    for (int a = 0; a < i; ++a) stride *= K;
    for (std::int64_t idx = 0; idx < log_prob.size(); ++idx)
        if ((idx / stride) % K == k) num += std::exp(log_prob[idx] - m);
    double den = 0.0;
    for (std::int64_t idx = 0; idx < log_prob.size(); ++idx)
        den += std::exp(log_prob[idx] - m);
    return num / den;
}

double log_dirichlet(const VectorXd& nu, const VectorXd& e) {
    if (nu.size() != e.size()) throw InputError("nu and e0 dimensions differ");
    double lp = std::lgamma(e.sum());
    for (int k = 0; k < e.size(); ++k) {
        if (!(nu[k] > 0.0)) return -std::numeric_limits<double>::infinity();
        lp += -std::lgamma(e[k]) + (e[k] - 1.0) * std::log(nu[k]);
    }
    return lp;
}

double log_prior(const ModelParams& theta, const PriorHyper& hyper) {
    if (hyper.K() != theta.K())
        throw InputError("e0 length does not match K");
    const VectorXd gamma = gamma_pack(theta.alpha, theta.beta);
    if (gamma.size() != hyper.gamma_size())
        throw InputError("gamma0 length does not match K(K+1)/2 + d");

    Eigen::LLT<MatrixXd> llt(hyper.V0);
    if (llt.info() != Eigen::Success)
        throw NumericalError("V0 Cholesky failed in log_prior");
    const VectorXd diff = gamma - hyper.gamma0;
    const VectorXd half = llt.matrixL().solve(diff);
    double log_det = 0.0;
    for (int i = 0; i < gamma.size(); ++i)
        log_det += 2.0 * std::log(llt.matrixL()(i, i));
    const double p = static_cast<double>(gamma.size());
    const double gauss = -0.5 * p * std::log(2.0 * M_PI) - 0.5 * log_det -
                         0.5 * half.squaredNorm();
    return gauss + log_dirichlet(theta.nu, hyper.e0);
}

SimulatedNetwork simulate(const ModelParams& theta, const MatrixXd& X, int n,
                          Rng& rng) {
    theta.validate();
    if (X.rows() != pair_count(n))
        throw InputError("X must have n(n-1)/2 rows");
    if (X.cols() != theta.d())
        throw InputError("X columns must match beta length");

    LatentAssignment z;
    z.z.resize(n);
    for (int i = 0; i < n; ++i) z.z[i] = rcat(rng, theta.nu);

    const VectorXd xb = theta.d() > 0 ? VectorXd(X * theta.beta)
                                      : VectorXd::Zero(pair_count(n));
    MatrixXi Y = MatrixXi::Zero(n, n);
    for (int i = 0, p = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            const double eta = theta.alpha(z.z[i], z.z[j]) + xb[p];
            // Rates above exp(21.48) would overflow the int32 count cap.
            const double rate = std::exp(std::min(eta, kMaxLogRate));
            const long y = rpois(rng, rate);
            Y(i, j) = static_cast<int>(y);
            Y(j, i) = Y(i, j);
        }

    SimulatedNetwork out;
    out.z = std::move(z);
    out.net = ObservedNetwork::create(std::move(Y), X);
    return out;
}

}  // namespace sbmreg
