#include "sbmreg/smc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "sbmreg/posterior.hpp"

namespace sbmreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log pi(theta) + log p_theta(Y, Z): the unnormalized posterior.
double target_log_density(const PriorHyper& hyper, const ObservedNetwork& net,
                          const LatentAssignment& z, const ModelParams& theta) {
    return log_prior(theta, hyper) + complete_log_likelihood(net, z, theta);
}

}  // namespace

double start_log_density(const SmcStart& start, const PriorHyper& hyper,
                         const LatentAssignment& z, const ModelParams& theta) {
    if (start.mode == SmcStart::FromProxy) {
        if (!start.proxy) throw InputError("smc: proxy start without a proxy");
        return proxy_log_density(*start.proxy, z, theta);
    }
    double lp = log_prior(theta, hyper);
    for (int i = 0; i < z.n(); ++i) {
        const double nu = theta.nu[z.z[i]];
        if (nu <= 0.0) return kNegInf;
        lp += std::log(nu);
    }
    return lp;
}

double tempered_log_density(double rho, const SmcStart& start,
                            const PriorHyper& hyper, const ObservedNetwork& net,
                            const LatentAssignment& z, const ModelParams& theta) {
    if (rho < 0.0 || rho > 1.0) throw InputError("smc: rho must be in [0,1]");
    if (rho == 0.0) return start_log_density(start, hyper, z, theta);
    if (rho == 1.0) return target_log_density(hyper, net, z, theta);
    const double s = start_log_density(start, hyper, z, theta);
    const double t = target_log_density(hyper, net, z, theta);
    if (!std::isfinite(s) || !std::isfinite(t)) return kNegInf;
    return (1.0 - rho) * s + rho * t;
}

double cess(double rho, double rho_prev, const VectorXd& W, const VectorXd& log_r) {
    const int M = static_cast<int>(W.size());
    if (W.maxCoeff() <= 0.0) throw NumericalError("cess: all weights are zero");
    const double delta = rho - rho_prev;
    if (delta == 0.0) return static_cast<double>(M);
    VectorXd a(M), b(M);
    for (int m = 0; m < M; ++m) {
        const double lw = W[m] > 0.0 ? std::log(W[m]) : kNegInf;
        a[m] = lw + delta * log_r[m];
        b[m] = lw + 2.0 * delta * log_r[m];
    }
    return static_cast<double>(M) *
           std::exp(2.0 * log_sum_exp(a) - log_sum_exp(b));
}

double find_next_rho(double rho_prev, const VectorXd& W, const VectorXd& log_r,
                     double tau1, int M, double tol) {
    const double target = tau1 * static_cast<double>(M);
    if (cess(1.0, rho_prev, W, log_r) >= target) return 1.0;
    const double floor = std::min(rho_prev + 1e-10, 1.0);
    if (floor >= 1.0) return 1.0;
    if (cess(floor, rho_prev, W, log_r) < target) return floor;  // degenerate ratios
    double lo = floor, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (cess(mid, rho_prev, W, log_r) >= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double ess(const VectorXd& W) {
    const double s = W.sum();
    return s * s / W.squaredNorm();
}

void resample_multinomial(std::vector<Particle>& particles, Rng& rng) {
    const int M = static_cast<int>(particles.size());
    VectorXd cum(M);
    double acc = 0.0;
    for (int m = 0; m < M; ++m) {
        acc += particles[m].W;
        cum[m] = acc;
    }
    std::vector<Particle> out;
    out.reserve(M);
    for (int m = 0; m < M; ++m) {
        const double u = runif(rng) * acc;
        const int idx = static_cast<int>(
            std::lower_bound(cum.data(), cum.data() + M, u) - cum.data());
        out.push_back(particles[std::min(idx, M - 1)]);
        out.back().log_w = 0.0;
        out.back().W = 1.0 / M;
    }
    particles = std::move(out);
}

VectorXd tempered_dirichlet_param(double rho, const SmcStart& start,
                                  const PriorHyper& hyper,
                                  const LatentAssignment& z) {
    const int K = hyper.K();
    VectorXd counts = VectorXd::Zero(K);
    for (int i = 0; i < z.n(); ++i) counts[z.z[i]] += 1.0;
    if (start.mode == SmcStart::FromPrior) return hyper.e0 + counts;
    const VectorXd n_tilde = start.proxy->dirichlet_param - hyper.e0;
    return hyper.e0 + (1.0 - rho) * n_tilde + rho * counts;
}

namespace {

// gamma-dependent part of the tempered log-density, up to constants shared by
// a proposal and the current state: tempered Gaussian pieces plus rho times
// the pairwise Poisson terms (log y! omitted, it cancels in MH ratios).
double gamma_part(double rho, const SmcStart& start, const PriorHyper& hyper,
                  const ObservedNetwork& net, const VectorXd& ypair,
                  const LatentAssignment& z, const VectorXd& gamma,
                  const MatrixXd& alpha, const VectorXd& beta) {
    const int n = net.n;
    double cll = 0.0;
    int p = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j, ++p) {
            const double eta =
                alpha(z.z[i], z.z[j]) + (net.d > 0 ? net.X.row(p).dot(beta) : 0.0);
            if (eta > 700.0) return kNegInf;
            cll += ypair[p] * eta - std::exp(eta);
        }

    const VectorXd dp = gamma - hyper.gamma0;
    const Eigen::LLT<MatrixXd> llt(hyper.V0);
    const double prior_quad = -0.5 * dp.dot(llt.solve(dp));

    if (start.mode == SmcStart::FromPrior) return prior_quad + rho * cll;

    const ProxyPosterior& proxy = *start.proxy;
    const VectorXd u = proxy.gamma_chol.triangularView<Eigen::Lower>().solve(
        (gamma - proxy.gamma_mean).eval());
    const double proxy_quad = -0.5 * u.squaredNorm();
    return (1.0 - rho) * proxy_quad + rho * (prior_quad + cll);
}

}  // namespace

void kernel_step(double rho, const SmcStart& start, const PriorHyper& hyper,
                 const ObservedNetwork& net, Particle& particle, int sweeps,
                 double lambda, const MatrixXd& proposal_chol, Rng& rng,
                 KernelStats& stats) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw InputError("kernel_step: rho must be in (0,1]");
    const int n = net.n, K = hyper.K();
    const int q = gamma_dim(K, net.d);
    const bool from_proxy = start.mode == SmcStart::FromProxy;
    const VectorXd ypair = net.pair_counts();
    const double mh_scale = 2.38 / std::sqrt(static_cast<double>(q)) * lambda;

    LatentAssignment& z = particle.z;
    ModelParams& theta = particle.theta;
    VectorXd gamma = gamma_pack(theta.alpha, theta.beta);

    // Per-pair eta y - e^eta for every ordered block pair; log y! drops out of
    // every conditional below.
    MatrixXd G(net.pairs(), K * K);
    VectorXd logits(K), log_nu(K);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        int p = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j, ++p) {
                const double xb = net.d > 0 ? net.X.row(p).dot(theta.beta) : 0.0;
                for (int a = 0; a < K; ++a)
                    for (int b = a; b < K; ++b) {
                        const double eta = theta.alpha(a, b) + xb;
                        const double v = ypair[p] * eta - std::exp(eta);
                        G(p, a * K + b) = v;
                        G(p, b * K + a) = v;
                    }
            }
        for (int k = 0; k < K; ++k)
            log_nu[k] = theta.nu[k] > 0.0 ? std::log(theta.nu[k]) : kNegInf;

        // (a) systematic-scan Gibbs on Z with the exact tempered conditional
        for (int i = 0; i < n; ++i) {
            for (int k = 0; k < K; ++k) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const int pij =
                        j < i ? pair_index(net.n, j, i) : pair_index(net.n, i, j);
                    s += G(pij, k * K + z.z[j]);
                }
                if (from_proxy)
                    logits[k] = (1.0 - rho) * std::log(start.proxy->tau(i, k)) +
                                rho * (log_nu[k] + s);
                else
                    logits[k] = log_nu[k] + rho * s;
            }
            const double mx = logits.maxCoeff();
            if (!std::isfinite(mx))
                throw NumericalError("kernel_step: degenerate Z conditional");
            const VectorXd w = (logits.array() - mx).exp();
            const int knew = rcat(rng, w);
            ++stats.z_updates;
            if (knew != z.z[i]) {
                z.z[i] = knew;
                ++stats.z_changes;
            }
        }

        // (b) exact Dirichlet Gibbs on nu
        theta.nu = rdirichlet(rng, tempered_dirichlet_param(rho, start, hyper, z));

        // (c) random-walk Metropolis on gamma
        VectorXd xi(q);
        for (int r = 0; r < q; ++r) xi[r] = rnorm(rng);
        const VectorXd prop = gamma + mh_scale * (proposal_chol * xi);
        auto [alpha_p, beta_p] = gamma_unpack(K, net.d, prop);
        const double cur = gamma_part(rho, start, hyper, net, ypair, z, gamma,
                                      theta.alpha, theta.beta);
        const double nxt =
            gamma_part(rho, start, hyper, net, ypair, z, prop, alpha_p, beta_p);
        if (!std::isfinite(cur))
            throw NumericalError("kernel_step: non-finite tempered density");
        ++stats.gamma_proposals;
        if (std::log(runif(rng)) < nxt - cur) {
            gamma = prop;
            theta.alpha = std::move(alpha_p);
            theta.beta = std::move(beta_p);
            ++stats.gamma_accepts;
        }
    }
}

namespace {

Particle draw_start(const SmcStart& start, const PriorHyper& hyper, int n,
                    const Eigen::LLT<MatrixXd>& prior_chol, Rng& rng) {
    Particle part;
    if (start.mode == SmcStart::FromProxy) {
        std::tie(part.z, part.theta) = proxy_sample(*start.proxy, rng);
        return part;
    }
    const int q = hyper.gamma_size(), K = hyper.K();
    VectorXd xi(q);
    for (int r = 0; r < q; ++r) xi[r] = rnorm(rng);
    const VectorXd gamma =
        hyper.gamma0 + MatrixXd(prior_chol.matrixL()) * xi;
    part.theta.nu = rdirichlet(rng, hyper.e0);
    std::tie(part.theta.alpha, part.theta.beta) =
        gamma_unpack(K, q - K * (K + 1) / 2, gamma);
    part.z.z.resize(n);
    for (int i = 0; i < n; ++i) part.z.z[i] = rcat(rng, part.theta.nu);
    return part;
}

}  // namespace

SmcResult run_smc(const ObservedNetwork& net, const SmcStart& start,
                  const PriorHyper& hyper, const SmcConfig& config) {
    config.validate();
    hyper.validate();
    if (start.mode == SmcStart::FromProxy && !start.proxy)
        throw InputError("run_smc: proxy start without a proxy");
    if (hyper.gamma_size() != gamma_dim(hyper.K(), net.d))
        throw InputError("run_smc: hyperparameter dimensions do not match data");
    const int M = config.M, n = net.n;

    const Eigen::LLT<MatrixXd> prior_chol(hyper.V0);
    if (prior_chol.info() != Eigen::Success)
        throw NumericalError("run_smc: V0 is not positive definite");
    MatrixXd proposal_chol;
    if (start.mode == SmcStart::FromProxy)
        proposal_chol = start.proxy->gamma_chol;
    else
        proposal_chol = MatrixXd(prior_chol.matrixL());

    SmcResult res;
    res.particles.resize(M);
    for (int m = 0; m < M; ++m) {
        Rng rng = substream(config.seed, 0, static_cast<std::uint64_t>(m));
        res.particles[m] = draw_start(start, hyper, n, prior_chol, rng);
        res.particles[m].log_w = 0.0;
        res.particles[m].W = 1.0 / M;
        res.particles[m].log_r =
            target_log_density(hyper, net, res.particles[m].z,
                               res.particles[m].theta) -
            start_log_density(start, hyper, res.particles[m].z,
                              res.particles[m].theta);
        if (!std::isfinite(res.particles[m].log_r))
            throw NumericalError("run_smc: non-finite start ratio");
    }

    auto record_state = [&](TraceRecord& rec) {
        VectorXd logr(M);
        for (int m = 0; m < M; ++m) logr[m] = res.particles[m].log_r;
        rec.path_u = 0.0;
        for (int m = 0; m < M; ++m) rec.path_u += res.particles[m].W * logr[m];
        rec.mi = mutual_information_estimate(res.particles);
    };

    TraceRecord init;
    init.h = 0;
    init.rho = 0.0;
    init.cess = M;
    init.ess = M;
    record_state(init);
    res.trace.push_back(init);

    double rho = 0.0, lambda = 1.0;
    for (int h = 1; rho < 1.0; ++h) {
        if (h > 1000000) throw NumericalError("run_smc: tempering stalled");
        VectorXd W(M), logr(M);
        for (int m = 0; m < M; ++m) {
            W[m] = res.particles[m].W;
            logr[m] = res.particles[m].log_r;
        }
        const double rho_next =
            find_next_rho(rho, W, logr, config.tau1, M, config.rho_tol);
        const double delta = rho_next - rho;

        TraceRecord rec;
        rec.h = h;
        rec.rho = rho_next;
        rec.cess = cess(rho_next, rho, W, logr);

        // product-estimator increment and reweighting, both from pre-move state
        VectorXd lw(M);
        for (int m = 0; m < M; ++m)
            lw[m] = (W[m] > 0.0 ? std::log(W[m]) : kNegInf) + delta * logr[m];
        rec.log_evidence_increment = log_sum_exp(lw);
        if (!std::isfinite(rec.log_evidence_increment))
            throw NumericalError("run_smc: degenerate evidence increment");

        double lw_max = kNegInf;
        for (int m = 0; m < M; ++m) {
            res.particles[m].log_w += delta * logr[m];
            lw_max = std::max(lw_max, res.particles[m].log_w);
        }
        double wsum = 0.0;
        for (int m = 0; m < M; ++m)
            wsum += std::exp(res.particles[m].log_w - lw_max);
        for (int m = 0; m < M; ++m)
            res.particles[m].W = std::exp(res.particles[m].log_w - lw_max) / wsum;

        for (int m = 0; m < M; ++m) W[m] = res.particles[m].W;
        rec.ess = ess(W);
        if (rec.ess < config.tau2 * M) {
            Rng rng = substream(config.seed, static_cast<std::uint64_t>(h),
                                static_cast<std::uint64_t>(M));
            resample_multinomial(res.particles, rng);
            rec.resampled = true;
        }

        KernelStats stats;
        for (int m = 0; m < M; ++m) {
            Rng rng = substream(config.seed, static_cast<std::uint64_t>(h),
                                static_cast<std::uint64_t>(m));
            kernel_step(rho_next, start, hyper, net, res.particles[m],
                        config.sweeps, lambda, proposal_chol, rng, stats);
            res.particles[m].log_r =
                target_log_density(hyper, net, res.particles[m].z,
                                   res.particles[m].theta) -
                start_log_density(start, hyper, res.particles[m].z,
                                  res.particles[m].theta);
        }
        rec.accept_gamma =
            stats.gamma_proposals > 0
                ? static_cast<double>(stats.gamma_accepts) / stats.gamma_proposals
                : 0.0;
        rec.z_change_rate =
            stats.z_updates > 0
                ? static_cast<double>(stats.z_changes) / stats.z_updates
                : 0.0;
        record_state(rec);
        res.trace.push_back(rec);

        // Robbins-Monro drift of the proposal scale toward 0.234 acceptance,
        // frozen within each temperature step.
        lambda *= std::exp(std::pow(static_cast<double>(h), -0.6) *
                           (rec.accept_gamma - 0.234));
        lambda = std::clamp(lambda, 1e-3, 1e3);
        rho = rho_next;
    }
    res.lambda = lambda;
    return res;
}

double log_evidence_product(const TemperTrace& trace) {
    double acc = 0.0;
    for (const TraceRecord& rec : trace)
        if (rec.h > 0) acc += rec.log_evidence_increment;
    return acc;
}

double log_evidence_path_sampling(const TemperTrace& trace) {
    double acc = 0.0;
    for (std::size_t h = 1; h < trace.size(); ++h)
        acc += 0.5 * (trace[h].rho - trace[h - 1].rho) *
               (trace[h].path_u + trace[h - 1].path_u);
    return acc;
}

}  // namespace sbmreg
