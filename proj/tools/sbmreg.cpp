// Command-line front end: simulate / fit-vem / sample / select-k / graphon / sbc.
// Exit codes: 0 success, 2 input validation, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbmreg/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sbmreg;

namespace {

struct CommonArgs {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& common) {
    cmd->add_option("--seed", common.seed, "Random seed (default 0)");
    cmd->add_option("--threads", common.threads, "Worker cap (currently serial)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", common.out, "Output directory")->required();
}

void ensure_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory " + dir);
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

ManifestEntry hash_input(const std::string& path) {
    return {path, fnv1a_hex(fnv1a_file(path))};
}

MatrixXd gaussian_covariates(int n, int d, Rng& rng) {
    MatrixXd X(pair_count(n), d);
    for (int p = 0; p < X.rows(); ++p)
        for (int c = 0; c < d; ++c) X(p, c) = rnorm(rng);
    return X;
}

ObservedNetwork load_network_with_covariates(const std::string& net_path,
                                             const std::string& cov_path) {
    ObservedNetwork net = load_network(net_path);
    if (!cov_path.empty()) {
        MatrixXd X = load_covariates(cov_path, net.n);
        net.d = static_cast<int>(X.cols());
        net.X = std::move(X);
    }
    return net;
}

void save_tau(const std::string& path, const MatrixXd& tau) {
    std::ostringstream out;
    out << "node";
    for (int k = 0; k < tau.cols(); ++k) out << ",tau_" << (k + 1);
    out << '\n';
    for (int i = 0; i < tau.rows(); ++i) {
        out << (i + 1);
        for (int k = 0; k < tau.cols(); ++k) out << ',' << format_double(tau(i, k));
        out << '\n';
    }
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path);
    f << out.str();
}

// Kolmogorov-Smirnov distance of (U+0.5)/(M+1) ranks against Uniform(0,1).
double ks_distance(std::vector<int> ranks, int M) {
    std::sort(ranks.begin(), ranks.end());
    const double S = static_cast<double>(ranks.size());
    double d = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const double u = (ranks[i] + 0.5) / (M + 1.0);
        d = std::max(d, std::abs((i + 1) / S - u));
        d = std::max(d, std::abs(u - i / S));
    }
    return d;
}

// Per-K prior: alpha prior means on the diagonal spread linearly over
// [alpha_lo, alpha_hi], off-diagonals at alpha_offdiag, shared beta block,
// V0 = v0 * I, e0 constant.
PriorHyper hyper_for_K(int K, double alpha_lo, double alpha_hi,
                       double alpha_offdiag, const VectorXd& beta0, double v0,
                       double e0) {
    const int d = static_cast<int>(beta0.size());
    const int q = gamma_dim(K, d);
    PriorHyper hyper;
    hyper.gamma0.resize(q);
    for (int a = 0; a < K; ++a) {
        const double diag =
            K == 1 ? 0.5 * (alpha_lo + alpha_hi)
                   : alpha_lo + (alpha_hi - alpha_lo) * a / (K - 1.0);
        for (int b = a; b < K; ++b)
            hyper.gamma0[alpha_pack_index(K, a, b)] = (a == b) ? diag : alpha_offdiag;
    }
    hyper.gamma0.tail(d) = beta0;
    hyper.V0 = v0 * MatrixXd::Identity(q, q);
    hyper.e0 = VectorXd::Constant(K, e0);
    return hyper;
}

struct SampleOutputs {
    SmcResult run;
    double log_ev_product = 0.0;
    double log_ev_path = 0.0;
};

SampleOutputs run_sampler(const ObservedNetwork& net, const PriorHyper& hyper,
                          int K, bool from_prior, const SmcConfig& smc,
                          const VemOptions& vem, std::uint64_t fit_seed,
                          const std::string& out_dir, const std::string& tag) {
    SampleOutputs so;
    if (from_prior) {
        so.run = run_smc(net, SmcStart::from_prior(), hyper, smc);
    } else {
        Rng rng = substream(fit_seed, 0xF17);
        const VariationalFit fit = fit_vem(net, K, vem, rng);
        const ProxyPosterior proxy = build_proxy(fit, hyper);
        if (!out_dir.empty())
            save_proxy(join(out_dir, "proxy" + tag + ".json"), proxy);
        so.run = run_smc(net, SmcStart::from_proxy(proxy), hyper, smc);
    }
    so.log_ev_product = log_evidence_product(so.run.trace);
    so.log_ev_path = log_evidence_path_sampling(so.run.trace);
    if (!out_dir.empty()) {
        save_particles(join(out_dir, "particles" + tag + ".jsonl"),
                       so.run.particles);
        save_trace(join(out_dir, "trace" + tag + ".csv"), so.run.trace);
    }
    return so;
}

int cmd_simulate(const CommonArgs& common, const std::string& hyper_path,
                 const std::string& theta_path, int n,
                 std::vector<std::string>& args) {
    ensure_out(common.out);
    std::vector<ManifestEntry> inputs;
    Rng rng = substream(common.seed, 0x51);

    ModelParams theta;
    int d = 0;
    if (!theta_path.empty()) {
        theta = load_theta(theta_path);
        d = theta.d();
        inputs.push_back(hash_input(theta_path));
    } else if (!hyper_path.empty()) {
        const PriorHyper hyper = load_hyper(hyper_path);
        inputs.push_back(hash_input(hyper_path));
        const int K = hyper.K();
        d = hyper.gamma_size() - K * (K + 1) / 2;
        const Eigen::LLT<MatrixXd> llt(hyper.V0);
        VectorXd xi(hyper.gamma_size());
        for (int r = 0; r < xi.size(); ++r) xi[r] = rnorm(rng);
        const VectorXd gamma = hyper.gamma0 + MatrixXd(llt.matrixL()) * xi;
        theta.nu = rdirichlet(rng, hyper.e0);
        std::tie(theta.alpha, theta.beta) = gamma_unpack(K, d, gamma);
    } else {
        throw InputError("simulate: provide --hyper or --theta");
    }

    const MatrixXd X = gaussian_covariates(n, d, rng);
    const SimulatedNetwork sim = simulate(theta, X, n, rng);

    save_network_dense(join(common.out, "network.csv"), sim.net);
    if (d > 0) save_covariates(join(common.out, "covariates.csv"), X, n);
    save_theta(join(common.out, "theta.json"), theta);
    save_assignment(join(common.out, "assignment.csv"), sim.z);
    save_manifest(join(common.out, "manifest.json"), "simulate", args, inputs);
    return 0;
}

int cmd_fit_vem(const CommonArgs& common, const std::string& net_path,
                const std::string& cov_path, int kmin, int kmax, int restarts,
                std::vector<std::string>& args) {
    ensure_out(common.out);
    std::vector<ManifestEntry> inputs{hash_input(net_path)};
    if (!cov_path.empty()) inputs.push_back(hash_input(cov_path));
    const ObservedNetwork net = load_network_with_covariates(net_path, cov_path);

    VemOptions opts;
    opts.restarts = restarts;
    std::ostringstream summary;
    summary << "K,elbo,pseudo_icl,converged,iterations\n";
    for (int K = kmin; K <= kmax; ++K) {
        Rng rng = substream(common.seed, 0xF17, static_cast<std::uint64_t>(K));
        const VariationalFit fit = fit_vem(net, K, opts, rng);
        save_theta(join(common.out, "theta_K" + std::to_string(K) + ".json"),
                   fit.theta);
        save_tau(join(common.out, "tau_K" + std::to_string(K) + ".csv"), fit.tau);
        summary << K << ',' << format_double(fit.elbo_value) << ','
                << format_double(pseudo_icl(fit, net)) << ','
                << (fit.converged ? 1 : 0) << ',' << fit.iterations << '\n';
    }
    std::ofstream f(join(common.out, "fit_summary.csv"));
    f << summary.str();
    save_manifest(join(common.out, "manifest.json"), "fit-vem", args, inputs);
    return 0;
}

int cmd_sample(const CommonArgs& common, const std::string& net_path,
               const std::string& cov_path, const std::string& hyper_path, int K,
               bool from_prior, SmcConfig smc, int restarts,
               std::vector<std::string>& args) {
    ensure_out(common.out);
    std::vector<ManifestEntry> inputs{hash_input(net_path), hash_input(hyper_path)};
    if (!cov_path.empty()) inputs.push_back(hash_input(cov_path));
    const ObservedNetwork net = load_network_with_covariates(net_path, cov_path);
    const PriorHyper hyper = load_hyper(hyper_path);
    if (hyper.K() != K)
        throw InputError("sample: --k disagrees with the hyperparameter file");

    smc.seed = common.seed;
    VemOptions vem;
    vem.restarts = restarts;
    const SampleOutputs so =
        run_sampler(net, hyper, K, from_prior, smc, vem, common.seed, common.out, "");

    json ev;
    ev["log_evidence_product"] = so.log_ev_product;
    ev["log_evidence_path_sampling"] = so.log_ev_path;
    ev["temperature_steps"] = static_cast<int>(so.run.trace.size()) - 1;
    std::ofstream f(join(common.out, "evidence.json"));
    f << ev.dump(2) << "\n";
    save_manifest(join(common.out, "manifest.json"), "sample", args, inputs);
    return 0;
}

int cmd_select_k(const CommonArgs& common, const std::string& net_path,
                 const std::string& cov_path, int kmin, int kmax, double alpha_lo,
                 double alpha_hi, double alpha_offdiag,
                 const std::string& beta0_csv, double v0, double e0,
                 SmcConfig smc, int restarts, std::vector<std::string>& args) {
    ensure_out(common.out);
    std::vector<ManifestEntry> inputs{hash_input(net_path)};
    if (!cov_path.empty()) inputs.push_back(hash_input(cov_path));
    const ObservedNetwork net = load_network_with_covariates(net_path, cov_path);

    VectorXd beta0 = VectorXd::Zero(net.d);
    if (!beta0_csv.empty()) {
        const auto fields = [&] {
            std::vector<std::string> out;
            std::istringstream ss(beta0_csv);
            std::string f;
            while (std::getline(ss, f, ',')) out.push_back(f);
            return out;
        }();
        if (static_cast<int>(fields.size()) != net.d)
            throw InputError("select-k: --beta0 must list d values");
        for (int r = 0; r < net.d; ++r) beta0[r] = std::stod(fields[r]);
    }

    VemOptions vem;
    vem.restarts = restarts;
    std::vector<int> K_values;
    VectorXd log_ev(kmax - kmin + 1);
    std::vector<std::vector<Particle>> per_K_particles;
    for (int K = kmin; K <= kmax; ++K) {
        const PriorHyper hyper =
            hyper_for_K(K, alpha_lo, alpha_hi, alpha_offdiag, beta0, v0, e0);
        SmcConfig sk = smc;
        sk.seed = substream(common.seed, 0x5e1, static_cast<std::uint64_t>(K))();
        const SampleOutputs so =
            run_sampler(net, hyper, K, false, sk, vem, sk.seed, common.out,
                        "_K" + std::to_string(K));
        K_values.push_back(K);
        log_ev[K - kmin] = so.log_ev_product;
        per_K_particles.push_back(so.run.particles);
    }

    const KPosterior kp = k_posterior(K_values, log_ev);
    {
        std::ostringstream out;
        out << "K,log_evidence,prior,prob\n";
        for (std::size_t r = 0; r < K_values.size(); ++r)
            out << K_values[r] << ',' << format_double(kp.log_evidence[r]) << ','
                << format_double(kp.prior[r]) << ',' << format_double(kp.prob[r])
                << '\n';
        std::ofstream f(join(common.out, "kposterior.csv"));
        f << out.str();
    }

    if (net.d > 0) {
        // pooled beta sample with weights p(K) W^{m,K}
        std::ostringstream out;
        out << "K,particle";
        for (int r = 0; r < net.d; ++r) out << ",beta_" << (r + 1);
        out << ",weight\n";
        MatrixXd pooled_beta(0, net.d);
        VectorXd pooled_w(0);
        for (std::size_t r = 0; r < per_K_particles.size(); ++r) {
            const auto& ps = per_K_particles[r];
            const Eigen::Index base = pooled_w.size();
            pooled_beta.conservativeResize(base + ps.size(), net.d);
            pooled_w.conservativeResize(base + ps.size());
            for (std::size_t m = 0; m < ps.size(); ++m) {
                const double w = kp.prob[r] * ps[m].W;
                out << K_values[r] << ',' << (m + 1);
                for (int c = 0; c < net.d; ++c)
                    out << ',' << format_double(ps[m].theta.beta[c]);
                out << ',' << format_double(w) << '\n';
                pooled_beta.row(base + m) = ps[m].theta.beta.transpose();
                pooled_w[base + m] = w;
            }
        }
        std::ofstream f(join(common.out, "beta_pooled.csv"));
        f << out.str();

        // weighted posterior correlations among the beta components
        pooled_w /= pooled_w.sum();
        const VectorXd mean = pooled_beta.transpose() * pooled_w;
        MatrixXd cov = MatrixXd::Zero(net.d, net.d);
        for (Eigen::Index m = 0; m < pooled_beta.rows(); ++m) {
            const VectorXd dv = pooled_beta.row(m).transpose() - mean;
            cov += pooled_w[m] * dv * dv.transpose();
        }
        std::ostringstream cs;
        cs << "i,j,correlation\n";
        for (int a = 0; a < net.d; ++a)
            for (int b = a + 1; b < net.d; ++b)
                cs << (a + 1) << ',' << (b + 1) << ','
                   << format_double(cov(a, b) / std::sqrt(cov(a, a) * cov(b, b)))
                   << '\n';
        std::ofstream cf(join(common.out, "beta_correlations.csv"));
        cf << cs.str();
    }

    save_manifest(join(common.out, "manifest.json"), "select-k", args, inputs);
    return 0;
}

int cmd_graphon(const CommonArgs& common, const std::string& particles_path,
                int grid, std::vector<std::string>& args) {
    ensure_out(common.out);
    std::vector<ManifestEntry> inputs{hash_input(particles_path)};
    const std::vector<Particle> particles = load_particles(particles_path);
    if (particles.empty()) throw InputError("graphon: no particles in input");

    const GraphonEstimate est = graphon_mean(particles, grid);
    {
        std::ostringstream out;
        for (int r = 0; r < est.G; ++r) {
            for (int c = 0; c < est.G; ++c) {
                if (c) out << ',';
                out << format_double(est.phi(r, c));
            }
            out << '\n';
        }
        std::ofstream f(join(common.out, "graphon.csv"));
        f << out.str();
    }
    {
        json meta;
        meta["grid"] = est.G;
        meta["particles"] = static_cast<int>(particles.size());
        std::ofstream f(join(common.out, "graphon_meta.json"));
        f << meta.dump(2) << "\n";
    }
    {
        const VectorXd U = latent_coordinates(particles);
        std::ostringstream out;
        out << "node,u\n";
        for (int i = 0; i < U.size(); ++i)
            out << (i + 1) << ',' << format_double(U[i]) << '\n';
        std::ofstream f(join(common.out, "latent_coords.csv"));
        f << out.str();
    }
    save_manifest(join(common.out, "manifest.json"), "graphon", args, inputs);
    return 0;
}

int cmd_sbc(const CommonArgs& common, const std::string& hyper_path, int S, int n,
            int M, const std::string& sampler_name, SmcConfig smc, int restarts,
            std::vector<std::string>& args) {
    ensure_out(common.out);
    std::vector<ManifestEntry> inputs{hash_input(hyper_path)};
    const PriorHyper hyper = load_hyper(hyper_path);
    const int K = hyper.K();
    const int d = hyper.gamma_size() - K * (K + 1) / 2;

    SbcConfig cfg;
    cfg.S = S;
    cfg.n = n;
    cfg.M = M;
    cfg.seed = common.seed;
    cfg.smc = smc;
    cfg.vem.restarts = restarts;
    if (sampler_name == "proxy-only")
        cfg.sampler = SbcSampler::ProxyOnly;
    else if (sampler_name == "smc-from-approx")
        cfg.sampler = SbcSampler::SmcFromApprox;
    else if (sampler_name == "smc-from-prior")
        cfg.sampler = SbcSampler::SmcFromPrior;
    else
        throw InputError("sbc: unknown sampler '" + sampler_name + "'");

    Rng xrng = substream(common.seed, 0xC0);
    const MatrixXd X = gaussian_covariates(n, d, xrng);
    const SbcResult res = sbc_run(cfg, hyper, X);

    {
        std::ostringstream out;
        out << "replicate,phi_name,method,U,M\n";
        for (std::size_t s = 0; s < res.u.size(); ++s)
            for (std::size_t j = 0; j < res.phi_names.size(); ++j)
                if (res.u[s][j] >= 0)
                    out << (s + 1) << ',' << res.phi_names[j] << ',' << sampler_name
                        << ',' << res.u[s][j] << ',' << res.M << '\n';
        std::ofstream f(join(common.out, "sbc_ranks.csv"));
        f << out.str();
    }
    {
        std::ostringstream out;
        out << "phi_name,method,KL,KS\n";
        for (std::size_t j = 0; j < res.phi_names.size(); ++j) {
            const std::vector<int> ranks = res.ranks_for(static_cast<int>(j));
            if (ranks.empty()) continue;
            out << res.phi_names[j] << ',' << sampler_name << ','
                << format_double(kl_to_uniform(ranks, res.M)) << ','
                << format_double(ks_distance(ranks, res.M)) << '\n';
        }
        std::ofstream f(join(common.out, "sbc_summary.csv"));
        f << out.str();
    }
    if (res.skipped > 0)
        std::cerr << "sbc: " << res.skipped << " replicate(s) skipped\n";
    save_manifest(join(common.out, "manifest.json"), "sbc", args, inputs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian Poisson block models with covariates: variational fit, "
                 "proxy-accelerated SMC posterior sampling, model choice"};
    app.require_subcommand(1);
    app.set_config("--config");

    std::vector<std::string> args(argv + 1, argv + argc);

    CommonArgs common;
    std::string net_path, cov_path, hyper_path, theta_path, particles_path;
    std::string sampler_name = "smc-from-approx", beta0_csv;
    int n = 0, K = 2, kmin = 1, kmax = 4, restarts = 5, grid = 200;
    int S = 50, M_sbc = 500;
    bool from_prior = false;
    double alpha_lo = 0.0, alpha_hi = 0.0, alpha_offdiag = 0.0, v0 = 1.0, e0 = 1.0;
    SmcConfig smc;

    auto* sim = app.add_subcommand("simulate", "Draw theta (or load it) and emit a network");
    add_common(sim, common);
    sim->add_option("--hyper", hyper_path, "Prior hyperparameter JSON");
    sim->add_option("--theta", theta_path, "Exact parameter JSON (skips the prior draw)");
    sim->add_option("--n", n, "Number of nodes")->required()->check(CLI::PositiveNumber);

    auto* fit = app.add_subcommand("fit-vem", "Variational EM over a K range");
    add_common(fit, common);
    fit->add_option("--network", net_path, "Network file (dense CSV or edge-list TSV)")->required();
    fit->add_option("--covariates", cov_path, "Pair covariate CSV");
    fit->add_option("--kmin", kmin, "Smallest K")->check(CLI::PositiveNumber);
    fit->add_option("--kmax", kmax, "Largest K")->check(CLI::PositiveNumber);
    fit->add_option("--restarts", restarts, "VEM restarts")->check(CLI::PositiveNumber);

    auto* smp = app.add_subcommand("sample", "Posterior sampling by adaptive SMC");
    add_common(smp, common);
    smp->add_option("--network", net_path, "Network file")->required();
    smp->add_option("--covariates", cov_path, "Pair covariate CSV");
    smp->add_option("--hyper", hyper_path, "Prior hyperparameter JSON")->required();
    smp->add_option("--k", K, "Number of blocks")->required()->check(CLI::PositiveNumber);
    smp->add_flag("--from-prior", from_prior, "Start the path at the prior instead of the fitted proxy");
    smp->add_option("--particles", smc.M, "Particle count")->check(CLI::Range(2, 1000000));
    smp->add_option("--tau1", smc.tau1, "cESS fraction per step");
    smp->add_option("--tau2", smc.tau2, "ESS fraction triggering resampling");
    smp->add_option("--sweeps", smc.sweeps, "Kernel sweeps per temperature");
    smp->add_option("--restarts", restarts, "VEM restarts for the proxy fit");

    auto* sel = app.add_subcommand("select-k", "Evidence-based choice of K");
    add_common(sel, common);
    sel->add_option("--network", net_path, "Network file")->required();
    sel->add_option("--covariates", cov_path, "Pair covariate CSV");
    sel->add_option("--kmin", kmin, "Smallest K")->check(CLI::PositiveNumber);
    sel->add_option("--kmax", kmax, "Largest K")->check(CLI::PositiveNumber);
    sel->add_option("--alpha-lo", alpha_lo, "Smallest prior mean for diagonal alpha");
    sel->add_option("--alpha-hi", alpha_hi, "Largest prior mean for diagonal alpha");
    sel->add_option("--alpha-offdiag", alpha_offdiag, "Prior mean for off-diagonal alpha");
    sel->add_option("--beta0", beta0_csv, "Comma-separated prior means for beta");
    sel->add_option("--v0", v0, "Prior variance scale for gamma");
    sel->add_option("--e0", e0, "Dirichlet concentration per block");
    sel->add_option("--particles", smc.M, "Particle count")->check(CLI::Range(2, 1000000));
    sel->add_option("--tau1", smc.tau1, "cESS fraction per step");
    sel->add_option("--tau2", smc.tau2, "ESS fraction triggering resampling");
    sel->add_option("--sweeps", smc.sweeps, "Kernel sweeps per temperature");
    sel->add_option("--restarts", restarts, "VEM restarts for the proxy fits");

    auto* gra = app.add_subcommand("graphon", "Residual graphon and latent coordinates");
    add_common(gra, common);
    gra->add_option("--particles-file", particles_path, "Particle JSONL")->required();
    gra->add_option("--grid", grid, "Grid resolution")->check(CLI::PositiveNumber);

    auto* sbc = app.add_subcommand("sbc", "Simulation-based calibration");
    add_common(sbc, common);
    sbc->add_option("--hyper", hyper_path, "Prior hyperparameter JSON")->required();
    sbc->add_option("--replicates", S, "Replicates S")->check(CLI::PositiveNumber);
    sbc->add_option("--n", n, "Nodes per replicate")->required()->check(CLI::PositiveNumber);
    sbc->add_option("--sample-size", M_sbc, "Posterior draws per replicate")->check(CLI::PositiveNumber);
    sbc->add_option("--sampler", sampler_name, "proxy-only | smc-from-approx | smc-from-prior");
    sbc->add_option("--tau1", smc.tau1, "cESS fraction per step");
    sbc->add_option("--tau2", smc.tau2, "ESS fraction triggering resampling");
    sbc->add_option("--sweeps", smc.sweeps, "Kernel sweeps per temperature");
    sbc->add_option("--restarts", restarts, "VEM restarts inside each replicate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(common, hyper_path, theta_path, n, args);
        if (fit->parsed())
            return cmd_fit_vem(common, net_path, cov_path, kmin, kmax, restarts, args);
        if (smp->parsed())
            return cmd_sample(common, net_path, cov_path, hyper_path, K, from_prior,
                              smc, restarts, args);
        if (sel->parsed())
            return cmd_select_k(common, net_path, cov_path, kmin, kmax, alpha_lo,
                                alpha_hi, alpha_offdiag, beta0_csv, v0, e0, smc,
                                restarts, args);
        if (gra->parsed()) return cmd_graphon(common, particles_path, grid, args);
        if (sbc->parsed())
            return cmd_sbc(common, hyper_path, S, n, M_sbc, sampler_name, smc,
                           restarts, args);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
