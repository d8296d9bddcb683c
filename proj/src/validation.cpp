#include "sbmreg/validation.hpp"

#include <cmath>
#include <utility>

namespace sbmreg {

namespace {

double alpha_ordered_sum(const ModelParams& t) {
    return t.alpha.sum();  // ordered pairs: off-diagonals counted twice
}

double alpha_diag_sum(const ModelParams& t) { return t.alpha.diagonal().sum(); }

double prop_absdiff(const ModelParams& t) { return std::abs(t.nu[0] - t.nu[1]); }

ModelParams permute_labels(const ModelParams& t, const std::vector<int>& perm) {
    const int K = t.K();
    ModelParams out = t;
    for (int k = 0; k < K; ++k) {
        out.nu[k] = t.nu[perm[k]];
        for (int l = 0; l < K; ++l) out.alpha(k, l) = t.alpha(perm[k], perm[l]);
    }
    return out;
}

void assert_permutation_invariant(const std::vector<PhiFunction>& battery, int K,
                                  int d) {
    Rng rng = substream(0x5b5b5b, static_cast<std::uint64_t>(K),
                        static_cast<std::uint64_t>(d));
    ModelParams t;
    t.nu = rdirichlet(rng, VectorXd::Constant(K, 1.0));
    t.alpha.resize(K, K);
    for (int a = 0; a < K; ++a)
        for (int b = a; b < K; ++b) t.alpha(a, b) = t.alpha(b, a) = rnorm(rng);
    t.beta.resize(d);
    for (int r = 0; r < d; ++r) t.beta[r] = rnorm(rng);

    std::vector<int> perm(K);
    for (int k = 0; k < K; ++k) perm[k] = k;
    for (int k = K - 1; k > 0; --k)
        std::swap(perm[k], perm[static_cast<int>(rng() % (k + 1))]);
    const ModelParams tp = permute_labels(t, perm);
    for (const PhiFunction& phi : battery)
        if (std::abs(phi.eval(t) - phi.eval(tp)) > 1e-12)
            throw NumericalError("phi battery: " + phi.name +
                                 " is not label-permutation invariant");
}

}  // namespace

std::vector<PhiFunction> phi_battery(int K, int d) {
    if (K < 1 || d < 0) throw InputError("phi_battery: bad dimensions");
    std::vector<PhiFunction> battery;
    auto add = [&](std::string name, std::function<double(const ModelParams&)> f) {
        battery.push_back({std::move(name), std::move(f)});
    };

    if (d > 0) add("beta_sum", [](const ModelParams& t) { return t.beta.sum(); });
    if (K == 2) add("prop_absdiff", prop_absdiff);
    for (int r = 0; r < d; ++r)
        add("beta_" + std::to_string(r + 1),
            [r](const ModelParams& t) { return t.beta[r]; });
    add("alpha_diag_sum", alpha_diag_sum);
    add("alpha_sum", alpha_ordered_sum);
    for (int r = 0; r < d; ++r)
        add("alpha_sum_plus_beta_" + std::to_string(r + 1),
            [r](const ModelParams& t) { return t.alpha.sum() + t.beta[r]; });
    if (d > 0)
        add("alpha_diag_sum_plus_beta_sum", [](const ModelParams& t) {
            return t.alpha.diagonal().sum() + t.beta.sum();
        });
    if (K == 2)
        add("alpha_sum_plus_beta_sum_plus_prop_absdiff", [](const ModelParams& t) {
            return t.alpha.sum() + t.beta.sum() + std::abs(t.nu[0] - t.nu[1]);
        });
    else
        add("alpha_sum_plus_beta_sum", [](const ModelParams& t) {
            return t.alpha.sum() + t.beta.sum();
        });

    assert_permutation_invariant(battery, K, d);
    return battery;
}

int u_statistic(const PhiFunction& phi, const ModelParams& theta_true,
                const std::vector<ModelParams>& sample) {
    if (sample.empty()) throw InputError("u_statistic: empty sample");
    const double truth = phi.eval(theta_true);
    int u = 0;
    for (const ModelParams& t : sample)
        if (phi.eval(t) < truth) ++u;
    return u;
}

double kl_to_uniform(const std::vector<int>& u_values, int M, int bins) {
    if (bins < 2) throw InputError("kl_to_uniform: need at least two bins");
    std::vector<double> count(bins, 0.0);
    for (int u : u_values) {
        if (u < 0 || u > M) throw InputError("kl_to_uniform: rank out of range");
        const int b = std::min(bins - 1, u * bins / (M + 1));
        count[b] += 1.0;
    }
    const double total = static_cast<double>(u_values.size()) + 0.5 * bins;
    const double q = 1.0 / bins;
    double kl = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double p = (count[b] + 0.5) / total;
        kl += p * std::log(p / q);
    }
    return kl;
}

namespace {

ModelParams draw_prior_theta(const PriorHyper& hyper, int d,
                             const Eigen::LLT<MatrixXd>& V0_llt, Rng& rng) {
    const int K = hyper.K(), q = hyper.gamma_size();
    VectorXd xi(q);
    for (int r = 0; r < q; ++r) xi[r] = rnorm(rng);
    const VectorXd gamma = hyper.gamma0 + MatrixXd(V0_llt.matrixL()) * xi;
    ModelParams theta;
    theta.nu = rdirichlet(rng, hyper.e0);
    std::tie(theta.alpha, theta.beta) = gamma_unpack(K, d, gamma);
    return theta;
}

std::vector<ModelParams> resample_thetas(const std::vector<Particle>& particles,
                                         int M, Rng& rng) {
    const int N = static_cast<int>(particles.size());
    VectorXd W(N);
    for (int m = 0; m < N; ++m) W[m] = particles[m].W;
    std::vector<ModelParams> out;
    out.reserve(M);
    for (int m = 0; m < M; ++m) out.push_back(particles[rcat(rng, W)].theta);
    return out;
}

}  // namespace

SbcResult sbc_run(const SbcConfig& cfg, const PriorHyper& hyper,
                  const MatrixXd& X) {
    hyper.validate();
    const int K = hyper.K();
    const int d = hyper.gamma_size() - K * (K + 1) / 2;
    if (X.rows() != pair_count(cfg.n) || X.cols() != d)
        throw InputError("sbc_run: covariate table must be pair_count(n) x d");
    const std::vector<PhiFunction> battery = phi_battery(K, d);

    SbcResult res;
    res.M = cfg.M;
    for (const PhiFunction& phi : battery) res.phi_names.push_back(phi.name);

    const Eigen::LLT<MatrixXd> V0_llt(hyper.V0);
    if (V0_llt.info() != Eigen::Success)
        throw NumericalError("sbc_run: V0 is not positive definite");

    for (int s = 0; s < cfg.S; ++s) {
        Rng rng = substream(cfg.seed, 0xCA11, static_cast<std::uint64_t>(s));
        std::vector<int> row(battery.size(), -1);
        try {
            const ModelParams truth = draw_prior_theta(hyper, d, V0_llt, rng);
            const SimulatedNetwork sim = simulate(truth, X, cfg.n, rng);

            std::vector<ModelParams> sample;
            if (cfg.sampler == SbcSampler::SmcFromPrior) {
                SmcConfig smc = cfg.smc;
                smc.M = cfg.M;
                smc.seed = rng();
                const SmcResult run =
                    run_smc(sim.net, SmcStart::from_prior(), hyper, smc);
                sample = resample_thetas(run.particles, cfg.M, rng);
            } else {
                const VariationalFit fit = fit_vem(sim.net, K, cfg.vem, rng);
                const ProxyPosterior proxy = build_proxy(fit, hyper);
                if (cfg.sampler == SbcSampler::ProxyOnly) {
                    sample.reserve(cfg.M);
                    for (int m = 0; m < cfg.M; ++m)
                        sample.push_back(proxy_sample(proxy, rng).second);
                } else {
                    SmcConfig smc = cfg.smc;
                    smc.M = cfg.M;
                    smc.seed = rng();
                    const SmcResult run =
                        run_smc(sim.net, SmcStart::from_proxy(proxy), hyper, smc);
                    sample = resample_thetas(run.particles, cfg.M, rng);
                }
            }
            for (std::size_t j = 0; j < battery.size(); ++j)
                row[j] = u_statistic(battery[j], truth, sample);
        } catch (const std::runtime_error&) {
            ++res.skipped;
        }
        res.u.push_back(std::move(row));
    }
    return res;
}

}  // namespace sbmreg
