#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sbmreg/smc.hpp"
#include "test_support.hpp"

using namespace sbmreg;

namespace {

PriorHyper make_hyper(int K, int d) {
    PriorHyper h;
    const int q = gamma_dim(K, d);
    h.gamma0.resize(q);
    for (int r = 0; r < q; ++r) h.gamma0[r] = 0.3 * std::sin(1.0 + r);
    h.V0 = 0.5 * MatrixXd::Identity(q, q);
    h.e0 = VectorXd::Constant(K, 3.0);
    return h;
}

// n = 4 with fixed counts: the workhorse for the one-dimensional chains.
ObservedNetwork four_node_net() {
    MatrixXi Y = MatrixXi::Zero(4, 4);
    const int y[6] = {2, 1, 3, 0, 2, 1};
    int p = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j, ++p) Y(i, j) = Y(j, i) = y[p];
    return ObservedNetwork::create(Y, MatrixXd(6, 0));
}

PriorHyper scalar_hyper() {
    PriorHyper h;
    h.gamma0 = VectorXd::Zero(1);
    h.V0 = MatrixXd::Constant(1, 1, 0.3);
    h.e0 = VectorXd::Constant(1, 2.0);
    return h;
}

Particle scalar_particle(double a) {
    Particle part;
    part.z.z = Eigen::VectorXi::Zero(4);
    part.theta.nu = VectorXd::Ones(1);
    part.theta.alpha = MatrixXd::Constant(1, 1, a);
    part.theta.beta = VectorXd(0);
    return part;
}

// Quadrature moments of a density proportional to exp(g) on [lo, hi].
struct QuadMoments {
    double mean = 0.0;
    double below = 0.0;  // P(x < cut)
};

QuadMoments quad_moments(const std::function<double(double)>& g, double lo,
                         double hi, double cut) {
    const auto dens = [&](double x) { return std::exp(g(x)); };
    const double Z = ts::simpson(dens, lo, hi, 4000);
    QuadMoments q;
    q.mean = ts::simpson([&](double x) { return x * dens(x); }, lo, hi, 4000) / Z;
    q.below = ts::simpson(dens, lo, cut, 4000) / Z;
    return q;
}

// Runs the tempered kernel on the four-node single-block problem and checks
// the long-run alpha distribution against quadrature.
void check_scalar_chain(double rho, const SmcStart& start, const MatrixXd& chol,
                        const std::function<double(double)>& g, std::uint64_t seed) {
    const ObservedNetwork net = four_node_net();
    const PriorHyper hyper = scalar_hyper();
    const QuadMoments q = quad_moments(g, -4.0, 4.0, /*cut*/ 0.3);

    Rng rng = substream(seed);
    Particle part = scalar_particle(0.0);
    KernelStats stats;
    const int T = 30000, burn = 2000;
    std::vector<double> draws, below;
    draws.reserve(T - burn);
    for (int t = 0; t < T; ++t) {
        kernel_step(rho, start, hyper, net, part, 1, 1.0, chol, rng, stats);
        if (t >= burn) {
            const double a = part.theta.alpha(0, 0);
            draws.push_back(a);
            below.push_back(a < 0.3 ? 1.0 : 0.0);
        }
    }
    CHECK(stats.gamma_accepts > 100);

    double mean = 0.0, freq = 0.0;
    for (std::size_t t = 0; t < draws.size(); ++t) {
        mean += draws[t];
        freq += below[t];
    }
    mean /= draws.size();
    freq /= below.size();
    CHECK(std::abs(mean - q.mean) < 4.0 * ts::batch_means_se(draws) + 1e-3);
    CHECK(std::abs(freq - q.below) < 4.0 * ts::batch_means_se(below) + 0.01);
}

}  // namespace

TEST_CASE("tempered density interpolates start and target") {
    Rng rng = substream(501);
    const ts::Instance inst = ts::random_instance(6, 2, 1, rng, 0.8, 0.4);
    const PriorHyper hyper = make_hyper(2, 1);
    const MatrixXd tau = ts::random_tau(6, 2, rng);
    const ProxyPosterior proxy = build_proxy_from_hessian(
        tau, gamma_pack(inst.theta.alpha, inst.theta.beta),
        hessian_gamma(inst.net, inst.theta, tau), hyper);

    const LatentAssignment z = inst.z;
    const ModelParams& theta = inst.theta;
    const double target =
        log_prior(theta, hyper) + complete_log_likelihood(inst.net, z, theta);

    for (const SmcStart& start :
         {SmcStart::from_proxy(proxy), SmcStart::from_prior()}) {
        const double s = start_log_density(start, hyper, z, theta);
        CHECK(tempered_log_density(0.0, start, hyper, inst.net, z, theta) == s);
        CHECK(tempered_log_density(1.0, start, hyper, inst.net, z, theta) ==
              doctest::Approx(target).epsilon(1e-12));
        CHECK(tempered_log_density(0.5, start, hyper, inst.net, z, theta) ==
              doctest::Approx(0.5 * s + 0.5 * target).epsilon(1e-12));
        CHECK_THROWS_AS(
            tempered_log_density(-0.1, start, hyper, inst.net, z, theta),
            InputError);
        CHECK_THROWS_AS(
            tempered_log_density(1.1, start, hyper, inst.net, z, theta),
            InputError);
    }

    // The prior start factorizes as pi(theta) p_theta(Z).
    double expect = log_prior(theta, hyper);
    for (int i = 0; i < 6; ++i) expect += std::log(theta.nu[z.z[i]]);
    CHECK(start_log_density(SmcStart::from_prior(), hyper, z, theta) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("conditional effective sample size formula") {
    VectorXd W(2), log_r(2);
    W << 0.5, 0.5;
    log_r << std::log(4.0), 0.0;

    CHECK(cess(0.7, 0.7, W, log_r) == 2.0);
    CHECK(cess(1.0, 0.0, W, log_r) ==
          doctest::Approx(2.0 * 2.5 * 2.5 / 8.5).epsilon(1e-12));

    // Identical ratios leave the criterion at M for any step size.
    VectorXd same = VectorXd::Constant(2, -3.7);
    CHECK(cess(0.8, 0.2, W, same) == doctest::Approx(2.0).epsilon(1e-12));

    VectorXd zero = VectorXd::Zero(2);
    CHECK_THROWS_AS(cess(0.5, 0.0, zero, log_r), NumericalError);
}

TEST_CASE("effective sample size of normalized weights") {
    VectorXd uniform = VectorXd::Constant(4, 0.25);
    CHECK(ess(uniform) == doctest::Approx(4.0).epsilon(1e-12));
    VectorXd point(3);
    point << 1.0, 0.0, 0.0;
    CHECK(ess(point) == doctest::Approx(1.0).epsilon(1e-12));
    VectorXd skew(2);
    skew << 0.75, 0.25;
    CHECK(ess(skew) == doctest::Approx(1.6).epsilon(1e-12));
}

TEST_CASE("temperature search solves the criterion") {
    const VectorXd W = VectorXd::Constant(2, 0.5);

    SUBCASE("identical ratios absorb the whole path") {
        const VectorXd log_r = VectorXd::Constant(2, 2.3);
        CHECK(find_next_rho(0.0, W, log_r, 0.9, 2) == 1.0);
        CHECK(find_next_rho(0.6, W, log_r, 0.99, 2) == 1.0);
    }

    SUBCASE("the analytic crossing at one half") {
        // With ratios (1, 1/4) the criterion equals 0.9 M exactly where
        // (1 + x)^2 / (1 + x^2) = 1.8 for x = 4^{-rho}, i.e. at rho = 1/2.
        VectorXd log_r(2);
        log_r << 0.0, std::log(0.25);
        const double rho = find_next_rho(0.0, W, log_r, 0.9, 2, 1e-10);
        CHECK(rho == doctest::Approx(0.5).epsilon(1e-7));

        // Grid scan agrees with the bisection.
        double best = 0.0;
        for (double cand = 1e-3; cand <= 1.0; cand += 1e-3)
            if (cess(cand, 0.0, W, log_r) >= 1.8) best = cand;
        CHECK(std::abs(rho - best) < 2e-3);
    }

    SUBCASE("degenerate ratios fall back to the floor step") {
        VectorXd log_r(2);
        log_r << 0.0, -1e6;
        const double rho = find_next_rho(0.0, W, log_r, 1.0 - 1e-15, 2);
        CHECK(rho == 1e-10);
    }

    SUBCASE("near the end of the path") {
        const VectorXd log_r = VectorXd::Constant(2, -1.0);
        CHECK(find_next_rho(1.0 - 1e-12, W, log_r, 0.9, 2) == 1.0);
    }
}

TEST_CASE("multinomial resampling") {
    const auto tagged = [](int m) {
        Particle part;
        part.z.z = Eigen::VectorXi::Zero(1);
        part.theta.nu = VectorXd::Ones(1);
        part.theta.alpha = MatrixXd::Constant(1, 1, static_cast<double>(m));
        part.theta.beta = VectorXd(0);
        return part;
    };

    SUBCASE("a degenerate weight keeps only its particle") {
        std::vector<Particle> parts;
        for (int m = 0; m < 5; ++m) {
            parts.push_back(tagged(m));
            parts.back().W = m == 2 ? 1.0 : 0.0;
        }
        Rng rng = substream(502);
        resample_multinomial(parts, rng);
        VectorXd W(5);
        for (int m = 0; m < 5; ++m) {
            CHECK(parts[m].theta.alpha(0, 0) == 2.0);
            CHECK(parts[m].W == doctest::Approx(0.2).epsilon(1e-15));
            CHECK(parts[m].log_w == 0.0);
            W[m] = parts[m].W;
        }
        CHECK(ess(W) == doctest::Approx(5.0).epsilon(1e-12));
    }

    SUBCASE("uniform weights keep origins uniform on average") {
        Rng rng = substream(503);
        VectorXd counts = VectorXd::Zero(5);
        const int R = 4000;
        for (int rep = 0; rep < R; ++rep) {
            std::vector<Particle> parts;
            for (int m = 0; m < 5; ++m) {
                parts.push_back(tagged(m));
                parts.back().W = 0.2;
            }
            resample_multinomial(parts, rng);
            for (int m = 0; m < 5; ++m)
                counts[static_cast<int>(parts[m].theta.alpha(0, 0))] += 1.0;
        }
        const double total = 5.0 * R;
        const double se = std::sqrt(total * 0.2 * 0.8);
        for (int m = 0; m < 5; ++m)
            CHECK(std::abs(counts[m] - total * 0.2) < 4.0 * se);
    }
}

TEST_CASE("tempered mixing-weight conditional") {
    Rng rng = substream(504);
    const PriorHyper hyper = make_hyper(2, 1);
    const MatrixXd tau = ts::random_tau(7, 2, rng);
    const ProxyPosterior proxy = build_proxy_from_hessian(
        tau, VectorXd::Zero(4), MatrixXd::Zero(4, 4), hyper);
    const LatentAssignment z = ts::random_assignment(7, 2, rng);
    VectorXd counts = VectorXd::Zero(2);
    for (int i = 0; i < 7; ++i) counts[z.z[i]] += 1.0;
    const VectorXd n_tilde = proxy.dirichlet_param - hyper.e0;

    const SmcStart from_proxy = SmcStart::from_proxy(proxy);
    const SmcStart from_prior = SmcStart::from_prior();

    CHECK((tempered_dirichlet_param(1.0, from_proxy, hyper, z) -
           (hyper.e0 + counts))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    CHECK((tempered_dirichlet_param(0.3, from_proxy, hyper, z) -
           (hyper.e0 + 0.7 * n_tilde + 0.3 * counts))
              .cwiseAbs()
              .maxCoeff() < 1e-9);
    for (double rho : {0.1, 0.5, 1.0})
        CHECK((tempered_dirichlet_param(rho, from_prior, hyper, z) -
               (hyper.e0 + counts))
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
}

TEST_CASE("single-site conditional matches the tempered density") {
    // One sweep updates site 0 exactly once, so its post-sweep value is a
    // draw from the full conditional; compare frequencies with the ratio of
    // tempered densities over the two states of site 0.
    Rng rng = substream(505);
    const ts::Instance inst = ts::random_instance(4, 2, 1, rng, 0.9, 0.4);
    const PriorHyper hyper = make_hyper(2, 1);
    const MatrixXd tau = ts::random_tau(4, 2, rng);
    const ProxyPosterior proxy = build_proxy_from_hessian(
        tau, gamma_pack(inst.theta.alpha, inst.theta.beta),
        hessian_gamma(inst.net, inst.theta, tau), hyper);
    const SmcStart start = SmcStart::from_proxy(proxy);
    const double rho = 0.6;

    Particle base;
    base.z = ts::random_assignment(4, 2, rng);
    base.theta = ts::random_theta(2, 1, rng, 0.8, 0.4);

    VectorXd lp(2);
    for (int k = 0; k < 2; ++k) {
        LatentAssignment zk = base.z;
        zk.z[0] = k;
        lp[k] = tempered_log_density(rho, start, hyper, inst.net, zk, base.theta);
    }
    const double p0 = 1.0 / (1.0 + std::exp(lp[1] - lp[0]));

    const int R = 20000;
    double hits = 0.0;
    for (int rep = 0; rep < R; ++rep) {
        Particle part = base;
        Rng step_rng = substream(506, rep);
        KernelStats stats;
        kernel_step(rho, start, hyper, inst.net, part, 1, 1.0, proxy.gamma_chol,
                    step_rng, stats);
        if (part.z.z[0] == 0) hits += 1.0;
    }
    const double freq = hits / R;
    CHECK(std::abs(freq - p0) < 4.0 * std::sqrt(p0 * (1.0 - p0) / R));
}

TEST_CASE("kernel leaves the scalar posterior invariant") {
    const auto cll_part = [](double a) { return 9.0 * a - 6.0 * std::exp(a); };
    const auto prior_part = [](double a) { return -a * a / 0.6; };
    const MatrixXd prior_chol = MatrixXd::Constant(1, 1, std::sqrt(0.3));

    SUBCASE("at the target") {
        check_scalar_chain(
            1.0, SmcStart::from_prior(), prior_chol,
            [&](double a) { return prior_part(a) + cll_part(a); }, 601);
    }
    SUBCASE("halfway along the bridge") {
        check_scalar_chain(
            0.5, SmcStart::from_prior(), prior_chol,
            [&](double a) { return prior_part(a) + 0.5 * cll_part(a); }, 602);
    }
    SUBCASE("bridging from an explicit start") {
        const PriorHyper hyper = scalar_hyper();
        MatrixXd H(1, 1);
        H << -2.0;
        const ProxyPosterior proxy = build_proxy_from_hessian(
            MatrixXd::Ones(4, 1), VectorXd::Constant(1, 1.1), H, hyper);
        const double m = proxy.gamma_mean[0];
        const double c = proxy.gamma_cov(0, 0);
        check_scalar_chain(
            0.6, SmcStart::from_proxy(proxy), proxy.gamma_chol,
            [&](double a) {
                return 0.4 * (-0.5 * (a - m) * (a - m) / c) +
                       0.6 * (prior_part(a) + cll_part(a));
            },
            603);
    }
}

TEST_CASE("an empty network is absorbed in a single step") {
    // No pairs: the likelihood is constant, the start ratio is identically
    // zero, and both evidence estimators must return exactly log 1.
    const ObservedNetwork net =
        ObservedNetwork::create(MatrixXi::Zero(1, 1), MatrixXd(0, 0));
    PriorHyper hyper;
    hyper.gamma0 = VectorXd::Zero(1);
    hyper.V0 = MatrixXd::Constant(1, 1, 0.4);
    hyper.e0 = VectorXd::Constant(1, 2.0);

    SmcConfig cfg;
    cfg.M = 64;
    cfg.seed = 604;
    const SmcResult res = run_smc(net, SmcStart::from_prior(), hyper, cfg);

    REQUIRE(res.trace.size() == 2);
    CHECK(res.trace[1].rho == 1.0);
    CHECK(std::abs(log_evidence_product(res.trace)) < 1e-12);
    CHECK(std::abs(log_evidence_path_sampling(res.trace)) < 1e-12);
    for (const Particle& part : res.particles) CHECK(part.log_r == 0.0);
}

TEST_CASE("runs are reproducible bit for bit") {
    Rng rng = substream(507);
    const ts::Instance inst = ts::random_instance(6, 2, 1, rng, 0.8, 0.4);
    const PriorHyper hyper = make_hyper(2, 1);
    SmcConfig cfg;
    cfg.M = 50;
    cfg.seed = 605;
    cfg.sweeps = 2;

    const SmcResult a = run_smc(inst.net, SmcStart::from_prior(), hyper, cfg);
    const SmcResult b = run_smc(inst.net, SmcStart::from_prior(), hyper, cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t h = 0; h < a.trace.size(); ++h) {
        CHECK(a.trace[h].rho == b.trace[h].rho);
        CHECK(a.trace[h].log_evidence_increment ==
              b.trace[h].log_evidence_increment);
        CHECK(a.trace[h].ess == b.trace[h].ess);
    }
    for (int m = 0; m < cfg.M; ++m) {
        CHECK((a.particles[m].theta.alpha.array() ==
               b.particles[m].theta.alpha.array())
                  .all());
        CHECK((a.particles[m].z.z.array() == b.particles[m].z.z.array()).all());
    }
}

TEST_CASE("first temperature step is rebuilt from its substreams") {
    Rng rng = substream(508);
    const ts::Instance inst = ts::random_instance(8, 2, 1, rng, 0.8, 0.4);
    const PriorHyper hyper = make_hyper(2, 1);
    VemOptions vopts;
    vopts.restarts = 2;
    const VariationalFit fit = fit_vem(inst.net, 2, vopts, rng);
    const ProxyPosterior proxy = build_proxy(fit, hyper);

    SmcConfig cfg;
    cfg.M = 8;
    cfg.seed = 99;
    cfg.sweeps = 1;
    const SmcResult res =
        run_smc(inst.net, SmcStart::from_proxy(proxy), hyper, cfg);

    // Initial particles come from substream (seed, 0, m); their ratios fix
    // the first temperature and the first evidence increment.
    VectorXd logr(8);
    for (int m = 0; m < 8; ++m) {
        Rng stream = substream(99, 0, static_cast<std::uint64_t>(m));
        auto [z, theta] = proxy_sample(proxy, stream);
        logr[m] = log_prior(theta, hyper) +
                  complete_log_likelihood(inst.net, z, theta) -
                  proxy_log_density(proxy, z, theta);
    }
    const VectorXd W = VectorXd::Constant(8, 1.0 / 8.0);
    const double rho1 = find_next_rho(0.0, W, logr, cfg.tau1, 8, cfg.rho_tol);
    CHECK(res.trace[1].rho == rho1);
    CHECK(res.trace[1].cess ==
          doctest::Approx(cess(rho1, 0.0, W, logr)).epsilon(1e-12));

    VectorXd lw(8);
    for (int m = 0; m < 8; ++m) lw[m] = std::log(1.0 / 8.0) + rho1 * logr[m];
    CHECK(res.trace[1].log_evidence_increment ==
          doctest::Approx(log_sum_exp(lw)).epsilon(1e-12));

    double u0 = 0.0;
    for (int m = 0; m < 8; ++m) u0 += logr[m] / 8.0;
    CHECK(res.trace[0].path_u == doctest::Approx(u0).epsilon(1e-12));
    CHECK(res.trace[0].cess == 8.0);
    CHECK(res.trace[0].ess == 8.0);
}

TEST_CASE("trace invariants along a full run") {
    Rng rng = substream(509);
    const ts::Instance inst = ts::random_instance(10, 2, 1, rng, 0.9, 0.4);
    const PriorHyper hyper = make_hyper(2, 1);
    VemOptions vopts;
    vopts.restarts = 2;
    const VariationalFit fit = fit_vem(inst.net, 2, vopts, rng);
    const ProxyPosterior proxy = build_proxy(fit, hyper);

    SmcConfig cfg;
    cfg.M = 300;
    cfg.seed = 606;

    SmcStart start = SmcStart::from_prior();
    SUBCASE("from the prior") { start = SmcStart::from_prior(); }
    SUBCASE("from the fitted start") { start = SmcStart::from_proxy(proxy); }

    const SmcResult res = run_smc(inst.net, start, hyper, cfg);
    REQUIRE(res.trace.size() >= 2);
    CHECK(res.trace.front().rho == 0.0);
    CHECK(res.trace.back().rho == 1.0);

    for (std::size_t h = 1; h < res.trace.size(); ++h) {
        const TraceRecord& rec = res.trace[h];
        const double prev = res.trace[h - 1].rho;
        CHECK(rec.rho > prev);
        CHECK(std::isfinite(rec.log_evidence_increment));
        CHECK(rec.ess <= cfg.M + 1e-9);
        const bool floored = rec.rho <= prev + 1e-10 + cfg.rho_tol;
        if (!floored) CHECK(rec.cess >= cfg.tau1 * cfg.M - 1e-6);
        CHECK(rec.resampled == (rec.ess < cfg.tau2 * cfg.M));
        CHECK(rec.accept_gamma >= 0.0);
        CHECK(rec.accept_gamma <= 1.0);
        CHECK(rec.mi >= 0.0);
    }

    double wsum = 0.0;
    for (const Particle& part : res.particles) wsum += part.W;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));

    for (int m = 0; m < 5; ++m) {
        const Particle& part = res.particles[m];
        const double expect =
            log_prior(part.theta, hyper) +
            complete_log_likelihood(inst.net, part.z, part.theta) -
            start_log_density(start, hyper, part.z, part.theta);
        CHECK(part.log_r == doctest::Approx(expect).epsilon(1e-9));
    }

    CHECK(res.lambda >= 1e-3);
    CHECK(res.lambda <= 1e3);
    CHECK(std::isfinite(log_evidence_product(res.trace)));
    CHECK(std::isfinite(log_evidence_path_sampling(res.trace)));

    // Both estimators are deterministic functions of the trace.
    double acc = 0.0;
    for (const TraceRecord& rec : res.trace)
        if (rec.h > 0) acc += rec.log_evidence_increment;
    CHECK(log_evidence_product(res.trace) == acc);
    double path = 0.0;
    for (std::size_t h = 1; h < res.trace.size(); ++h)
        path += 0.5 * (res.trace[h].rho - res.trace[h - 1].rho) *
                (res.trace[h].path_u + res.trace[h - 1].path_u);
    CHECK(log_evidence_path_sampling(res.trace) == path);
}

TEST_CASE("evidence estimates agree with brute-force integration") {
    Rng rng = substream(510);
    const ModelParams truth = ts::random_theta(2, 1, rng, 0.8, 0.3);
    const MatrixXd X = ts::random_covariates(5, 1, rng);
    const SimulatedNetwork sim = simulate(truth, X, 5, rng);
    PriorHyper hyper = make_hyper(2, 1);
    hyper.V0 = 0.25 * MatrixXd::Identity(4, 4);
    hyper.e0 = VectorXd::Constant(2, 2.0);

    // Monte Carlo over the prior with the latent blocks summed out exactly.
    const int S = 200000;
    Rng mc = substream(511);
    const MatrixXd L = hyper.V0.llt().matrixL();
    std::vector<double> lp(S);
    for (int s = 0; s < S; ++s) {
        VectorXd xi(4);
        for (int r = 0; r < 4; ++r) xi[r] = rnorm(mc);
        ModelParams theta;
        std::tie(theta.alpha, theta.beta) =
            gamma_unpack(2, 1, (hyper.gamma0 + L * xi).eval());
        theta.nu = rdirichlet(mc, hyper.e0);
        lp[s] = log_likelihood_enumerate(sim.net, theta);
    }
    const double oracle = ts::log_mean_exp(lp);
    const double mx = *std::max_element(lp.begin(), lp.end());
    double mean_w = 0.0, sq_w = 0.0;
    for (double v : lp) {
        const double w = std::exp(v - mx);
        mean_w += w;
        sq_w += w * w;
    }
    mean_w /= S;
    const double sd_w = std::sqrt(sq_w / S - mean_w * mean_w);
    const double oracle_se = sd_w / (mean_w * std::sqrt(static_cast<double>(S)));
    REQUIRE(oracle_se < 0.05);

    SmcConfig cfg;
    cfg.M = 1000;
    cfg.sweeps = 2;
    cfg.seed = 512;
    const SmcResult prior_run =
        run_smc(sim.net, SmcStart::from_prior(), hyper, cfg);

    VemOptions vopts;
    vopts.restarts = 2;
    Rng fit_rng = substream(513);
    const VariationalFit fit = fit_vem(sim.net, 2, vopts, fit_rng);
    const ProxyPosterior proxy = build_proxy(fit, hyper);
    const SmcResult proxy_run =
        run_smc(sim.net, SmcStart::from_proxy(proxy), hyper, cfg);

    const double tol = std::max(0.15, 5.0 * oracle_se);
    for (const SmcResult* res : {&prior_run, &proxy_run}) {
        const double product = log_evidence_product(res->trace);
        const double path = log_evidence_path_sampling(res->trace);
        CHECK(std::abs(product - oracle) < tol);
        CHECK(std::abs(path - product) < 0.2);
    }
    CHECK(proxy_run.trace.size() <= prior_run.trace.size() + 1);
}

TEST_CASE("configuration and input validation") {
    Rng rng = substream(514);
    const ts::Instance inst = ts::random_instance(5, 2, 1, rng);
    const PriorHyper hyper = make_hyper(2, 1);

    SmcConfig bad;
    bad.M = 1;
    CHECK_THROWS_AS(run_smc(inst.net, SmcStart::from_prior(), hyper, bad),
                    InputError);
    bad.M = 10;
    bad.tau1 = 0.0;
    CHECK_THROWS_AS(run_smc(inst.net, SmcStart::from_prior(), hyper, bad),
                    InputError);
    bad.tau1 = 0.9;
    bad.sweeps = 0;
    CHECK_THROWS_AS(run_smc(inst.net, SmcStart::from_prior(), hyper, bad),
                    InputError);

    SmcStart broken;
    broken.mode = SmcStart::FromProxy;
    broken.proxy = nullptr;
    CHECK_THROWS_AS(run_smc(inst.net, broken, hyper, SmcConfig{}), InputError);

    const PriorHyper wrong = make_hyper(2, 0);  // net has one covariate
    CHECK_THROWS_AS(run_smc(inst.net, SmcStart::from_prior(), wrong, SmcConfig{}),
                    InputError);
}
