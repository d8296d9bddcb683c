#include "sbmreg/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace sbmreg {

KPosterior k_posterior(const std::vector<int>& K_values,
                       const VectorXd& log_evidence, const VectorXd& prior) {
    const int R = static_cast<int>(K_values.size());
    if (R == 0) throw InputError("k_posterior: empty K range");
    if (log_evidence.size() != R)
        throw InputError("k_posterior: one evidence per K required");

    KPosterior kp;
    kp.K_values = K_values;
    kp.log_evidence = log_evidence;
    kp.prior = prior.size() == 0 ? VectorXd::Constant(R, 1.0 / R)
                                 : VectorXd(prior / prior.sum());
    VectorXd lp(R);
    for (int r = 0; r < R; ++r) {
        if (kp.prior[r] < 0.0) throw InputError("k_posterior: negative prior mass");
        lp[r] = (kp.prior[r] > 0.0 ? std::log(kp.prior[r])
                                   : -std::numeric_limits<double>::infinity()) +
                log_evidence[r];
    }
    const double norm = log_sum_exp(lp);
    kp.prob.resize(R);
    // scalar exp: the packet version clamps -inf to a denormal instead of 0
    for (int r = 0; r < R; ++r) kp.prob[r] = std::exp(lp[r] - norm);
    kp.prob /= kp.prob.sum();
    return kp;
}

WeightedSample model_average(const std::vector<WeightedSample>& per_K,
                             const KPosterior& kpost) {
    if (per_K.size() != kpost.K_values.size())
        throw InputError("model_average: one sample per K required");
    Eigen::Index total = 0;
    for (const auto& s : per_K) total += s.value.size();
    WeightedSample pooled;
    pooled.value.resize(total);
    pooled.weight.resize(total);
    Eigen::Index at = 0;
    for (std::size_t r = 0; r < per_K.size(); ++r) {
        const auto& s = per_K[r];
        if (s.value.size() != s.weight.size())
            throw InputError("model_average: ragged weighted sample");
        pooled.value.segment(at, s.value.size()) = s.value;
        pooled.weight.segment(at, s.weight.size()) = kpost.prob[r] * s.weight;
        at += s.value.size();
    }
    pooled.weight /= pooled.weight.sum();
    return pooled;
}

std::vector<int> canonical_block_order(const ModelParams& theta) {
    const int K = theta.K();
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (theta.alpha(a, a) != theta.alpha(b, b))
            return theta.alpha(a, a) < theta.alpha(b, b);
        if (theta.nu[a] != theta.nu[b]) return theta.nu[a] > theta.nu[b];
        return a < b;
    });
    return order;
}

namespace {

// Cumulative block widths in canonical order; cum[c] = nu+_{c+1}.
VectorXd canonical_cum(const ModelParams& theta, const std::vector<int>& order) {
    const int K = theta.K();
    VectorXd cum(K);
    double acc = 0.0;
    for (int c = 0; c < K; ++c) {
        acc += theta.nu[order[c]];
        cum[c] = acc;
    }
    return cum;
}

int block_at(const VectorXd& cum, double u) {
    const int K = static_cast<int>(cum.size());
    const int c = static_cast<int>(
        std::lower_bound(cum.data(), cum.data() + K, u) - cum.data());
    return std::min(c, K - 1);
}

}  // namespace

MatrixXd particle_graphon(const ModelParams& theta, int G) {
    if (G < 1) throw InputError("particle_graphon: grid must be positive");
    theta.validate();
    const std::vector<int> order = canonical_block_order(theta);
    const VectorXd cum = canonical_cum(theta, order);
    std::vector<int> cell(G);
    for (int g = 0; g < G; ++g)
        cell[g] = order[block_at(cum, (g + 0.5) / G)];
    MatrixXd phi(G, G);
    for (int gu = 0; gu < G; ++gu)
        for (int gv = 0; gv < G; ++gv) phi(gu, gv) = theta.alpha(cell[gu], cell[gv]);
    return phi;
}

GraphonEstimate graphon_mean(const std::vector<Particle>& particles, int G) {
    if (particles.empty()) throw InputError("graphon: empty particle system");
    GraphonEstimate est;
    est.G = G;
    est.phi = MatrixXd::Zero(G, G);
    for (const Particle& part : particles)
        est.phi += part.W * particle_graphon(part.theta, G);
    return est;
}

GraphonEstimate graphon_mean_over_K(const std::vector<GraphonEstimate>& per_K,
                                    const KPosterior& kpost) {
    if (per_K.size() != kpost.K_values.size())
        throw InputError("graphon: one estimate per K required");
    GraphonEstimate est;
    est.G = per_K.front().G;
    est.phi = MatrixXd::Zero(est.G, est.G);
    for (std::size_t r = 0; r < per_K.size(); ++r) {
        if (per_K[r].G != est.G) throw InputError("graphon: grid mismatch");
        est.phi += kpost.prob[r] * per_K[r].phi;
    }
    return est;
}

VectorXd latent_coordinates(const std::vector<Particle>& particles) {
    if (particles.empty()) throw InputError("latent_coordinates: empty system");
    const int n = particles.front().z.n();
    VectorXd U = VectorXd::Zero(n);
    for (const Particle& part : particles) {
        const std::vector<int> order = canonical_block_order(part.theta);
        const VectorXd cum = canonical_cum(part.theta, order);
        const int K = part.theta.K();
        std::vector<int> canon_of(K);  // original label -> canonical position
        for (int c = 0; c < K; ++c) canon_of[order[c]] = c;
        for (int i = 0; i < n; ++i) {
            const int c = canon_of[part.z.z[i]];
            const double lo = c == 0 ? 0.0 : cum[c - 1];
            U[i] += part.W * 0.5 * (lo + cum[c]);
        }
    }
    return U;
}

double mutual_information_estimate(const std::vector<Particle>& particles) {
    const int M = static_cast<int>(particles.size());
    if (M < 2) throw InputError("mutual information needs at least two particles");
    const int n = particles.front().z.n();
    const int K = particles.front().theta.K();

    std::map<std::vector<int>, double> joint;
    MatrixXd marginal = MatrixXd::Zero(n, K);
    for (const Particle& part : particles) {
        std::vector<int> key(part.z.z.data(), part.z.z.data() + n);
        joint[key] += part.W;
        for (int i = 0; i < n; ++i) marginal(i, part.z.z[i]) += part.W;
    }
    double mi = 0.0;
    for (const Particle& part : particles) {
        if (part.W <= 0.0) continue;
        std::vector<int> key(part.z.z.data(), part.z.z.data() + n);
        double lp = std::log(joint.at(key));
        for (int i = 0; i < n; ++i) lp -= std::log(marginal(i, part.z.z[i]));
        mi += part.W * lp;
    }
    return std::max(mi, 0.0);
}

}  // namespace sbmreg
