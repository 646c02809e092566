// Batch front end for the squeezed-vacuum tomography pipeline:
//   simulate -> bin -> fit/ml -> analyze -> wigner, plus replicate-table1
// which chains all stages on synthetic data with file-based handoff.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sqtom/analysis.hpp"
#include "sqtom/data.hpp"
#include "sqtom/errors.hpp"
#include "sqtom/model.hpp"
#include "sqtom/reconstruct.hpp"
#include "sqtom/sampler.hpp"
#include "sqtom/version.hpp"

namespace fs = std::filesystem;
using namespace sqtom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitConvergence = 4;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Canonical "key=value;" string of the effective options -> stable hash.
struct ConfigHash {
    std::string canon;
    void add(const std::string& k, const std::string& v) { canon += k + "=" + v + ";"; }
    void add(const std::string& k, double v) { add(k, io::format_double(v)); }
    void add(const std::string& k, std::uint64_t v) { add(k, std::to_string(v)); }
    void add(const std::string& k, std::int64_t v) { add(k, std::to_string(v)); }
    void add(const std::string& k, int v) { add(k, std::to_string(v)); }
    std::string hash() const { return hex64(fnv1a(canon)); }
};

Metadata make_meta(std::uint64_t seed, const ConfigHash& config) {
    return {{"seed", std::to_string(seed)},
            {"config_hash", config.hash()},
            {"version", kVersion}};
}

void warn_phase_wrap(const StateParams& p) {
    if (phase_wrap_caution(p))
        std::cerr << "warning: sqrt(v_phi) exceeds pi/2; the unwrapped phase-noise model "
                     "ignores circular wrap-around at this noise level\n";
}

std::vector<Chain> load_chain_dir(const std::string& dir) {
    std::vector<std::pair<int, fs::path>> found;
    if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("chain_", 0) == 0 && name.size() > 10 &&
            name.substr(name.size() - 4) == ".csv") {
            try {
                found.emplace_back(std::stoi(name.substr(6)), entry.path());
            } catch (const std::exception&) {
            }
        }
    }
    if (found.empty()) throw InputError("no chain_*.csv files in " + dir);
    std::sort(found.begin(), found.end());
    std::vector<Chain> chains;
    for (const auto& [idx, path] : found) chains.push_back(load_chain_csv(path.string()));
    return chains;
}

struct FitOptions {
    std::uint64_t seed = 0;
    std::uint64_t iterations = 40000;
    unsigned n_chains = 4;
    std::uint64_t burn_in = 2000;
    std::uint64_t thin = 10;
    bool no_adapt = false;
    double target_acceptance = 0.44;
    double sigma_x = 0.0042, sigma_p = 0.022, sigma_phi = 0.0037;
    int nodes = 320;
    unsigned threads = 0;

    SamplerConfig to_config() const {
        SamplerConfig c;
        c.iterations = iterations;
        c.n_chains = n_chains;
        c.burn_in = burn_in;
        c.thin = thin;
        c.adapt = !no_adapt;
        c.target_acceptance = target_acceptance;
        c.seed = seed;
        c.proposal = {sigma_x, sigma_p, sigma_phi};
        c.quad = {nodes};
        return c;
    }
    void add_hash(ConfigHash& h) const {
        h.add("iterations", iterations);
        h.add("chains", std::uint64_t(n_chains));
        h.add("burn_in", burn_in);
        h.add("thin", thin);
        h.add("adapt", no_adapt ? "0" : "1");
        h.add("target_acceptance", target_acceptance);
        h.add("sigma_x", sigma_x);
        h.add("sigma_p", sigma_p);
        h.add("sigma_phi", sigma_phi);
        h.add("nodes", nodes);
    }
};

void add_fit_options(CLI::App* cmd, FitOptions& opt) {
    cmd->add_option("--seed", opt.seed, "Master seed for all randomness");
    cmd->add_option("--iterations", opt.iterations, "Chain length")->capture_default_str();
    cmd->add_option("--chains", opt.n_chains, "Number of chains")->capture_default_str();
    cmd->add_option("--burn-in", opt.burn_in, "Discarded initial iterations")
        ->capture_default_str();
    cmd->add_option("--thin", opt.thin, "Retain every thin-th sample")->capture_default_str();
    cmd->add_flag("--no-adapt", opt.no_adapt, "Disable proposal adaptation during burn-in");
    cmd->add_option("--target-acceptance", opt.target_acceptance, "Adaptation target")
        ->capture_default_str();
    cmd->add_option("--sigma-x", opt.sigma_x, "Initial proposal sigma for v_x")
        ->capture_default_str();
    cmd->add_option("--sigma-p", opt.sigma_p, "Initial proposal sigma for v_p")
        ->capture_default_str();
    cmd->add_option("--sigma-phi", opt.sigma_phi, "Initial proposal sigma for v_phi")
        ->capture_default_str();
    cmd->add_option("--nodes", opt.nodes, "Gauss-Hermite nodes for the phase integral")
        ->capture_default_str();
    cmd->add_option("--threads", opt.threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
}

struct FitOutputs {
    std::vector<Chain> chains;
    PosteriorSummary summary;
    std::array<double, 3> r_hat{};
    double acceptance = 0.0;
};

FitOutputs fit_pipeline(const Dataset& data, const FitOptions& opt, const std::string& out_dir,
                        const Metadata& meta) {
    fs::create_directories(out_dir);
    FitOutputs out;
    out.chains = run_chains(data, opt.to_config(), opt.threads);
    for (std::size_t c = 0; c < out.chains.size(); ++c)
        save_chain_csv(out.chains[c], (fs::path(out_dir) / ("chain_" + std::to_string(c) + ".csv")).string(),
                       meta);
    out.summary = summarize(out.chains);
    for (const auto& chain : out.chains) out.acceptance += chain.acceptance_rate();
    out.acceptance /= double(out.chains.size());
    if (out.chains.size() >= 2) {
        for (int i = 0; i < 3; ++i) out.r_hat[i] = gelman_rubin(out.chains, Param(i));
    } else {
        out.r_hat = {1.0, 1.0, 1.0};
    }
    return out;
}

void require_converged(const std::array<double, 3>& r_hat) {
    for (int i = 0; i < 3; ++i) {
        if (!(r_hat[i] < 1.1))
            throw ConvergenceError("convergence gate: R-hat for " +
                                   std::string(kParamNames[i]) + " = " +
                                   io::format_double(r_hat[i]) + " >= 1.1");
    }
}

int cmd_simulate(double vx, double vp, double vphi, const std::vector<double>& thetas,
                 std::uint64_t n, std::uint64_t seed, const std::string& out, int) {
    const StateParams truth{vx, vp, vphi};
    truth.require_physical();
    warn_phase_wrap(truth);
    if (n < 1) throw InputError("simulate: --n must be >= 1");
    if (thetas.empty()) throw InputError("simulate: need at least one --theta");

    ConfigHash hash;
    hash.add("cmd", "simulate");
    hash.add("v_x", vx);
    hash.add("v_p", vp);
    hash.add("v_phi", vphi);
    for (double t : thetas) hash.add("theta", t);
    hash.add("n", n);
    hash.add("seed", seed);

    std::vector<SampleSet> sets;
    for (std::size_t k = 0; k < thetas.size(); ++k)
        sets.push_back(simulate_samples(truth, {thetas[k]}, n,
                                        derive_seed(seed, seed_stream::simulate, k)));
    save_samples(sets, out, make_meta(seed, hash));

    std::printf("simulated %zu settings x %llu samples at truth (v_x=%s, v_p=%s, v_phi=%s), "
                "seed %llu -> %s\n",
                thetas.size(), (unsigned long long)n, io::format_double(vx).c_str(),
                io::format_double(vp).c_str(), io::format_double(vphi).c_str(),
                (unsigned long long)seed, out.c_str());
    return kExitOk;
}

int cmd_bin(const std::string& in, int bins, const std::string& out, std::uint64_t seed) {
    ConfigHash hash;
    hash.add("cmd", "bin");
    hash.add("in", in);
    hash.add("bins", bins);
    hash.add("seed", seed);

    const auto sets = load_samples(in);
    Dataset ds;
    for (const auto& set : sets) ds.histograms.push_back(bin_samples(set, bins));
    ds.validate();
    save_dataset(ds, out, make_meta(seed, hash));
    std::printf("binned %zu settings into %d bins each -> %s\n", sets.size(), bins, out.c_str());
    return kExitOk;
}

int cmd_fit(const std::string& in, const std::string& out_dir, const FitOptions& opt) {
    ConfigHash hash;
    hash.add("cmd", "fit");
    hash.add("in", in);
    hash.add("seed", opt.seed);
    opt.add_hash(hash);
    const auto meta = make_meta(opt.seed, hash);

    const Dataset data = load_dataset(in);
    const FitOutputs out = fit_pipeline(data, opt, out_dir, meta);

    save_summary_json((fs::path(out_dir) / "fit_summary.json").string(), out.summary, nullptr,
                      nullptr, &out.r_hat, out.acceptance, nullptr, meta);
    std::printf("fit: %u chains x %llu iterations, %zu retained samples\n", opt.n_chains,
                (unsigned long long)opt.iterations, out.summary.n_retained);
    for (int i = 0; i < 3; ++i)
        std::printf("  %-6s mean %-12.6g std %-12.6g R-hat %.4f\n", kParamNames[i],
                    out.summary.mean[i], out.summary.std[i], out.r_hat[i]);
    std::printf("  acceptance rate %.3f\n", out.acceptance);
    require_converged(out.r_hat);
    return kExitOk;
}

int cmd_ml(const std::string& in, const std::string& out, const FitOptions& opt) {
    ConfigHash hash;
    hash.add("cmd", "ml");
    hash.add("in", in);
    hash.add("seed", opt.seed);
    opt.add_hash(hash);

    const Dataset data = load_dataset(in);
    Rng init_rng(derive_seed(opt.seed, seed_stream::greedy, 1));
    const auto result = run_greedy_ml(init_params(init_rng), data, opt.to_config());

    std::ofstream os(out);
    if (!os) throw InputError("cannot open for writing: " + out);
    os << "{\n  \"v_x\": " << io::format_double(result.params.v_x)
       << ",\n  \"v_p\": " << io::format_double(result.params.v_p)
       << ",\n  \"v_phi\": " << io::format_double(result.params.v_phi)
       << ",\n  \"log_lik\": " << io::format_double(result.log_lik.value)
       << ",\n  \"iterations\": " << result.trace.size()
       << ",\n  \"meta\": " << io::meta_json(make_meta(opt.seed, hash)) << "\n}\n";
    if (!os) throw InputError("write failed: " + out);

    std::printf("maximum likelihood: v_x=%.6g v_p=%.6g v_phi=%.6g (log-lik %.6f) -> %s\n",
                result.params.v_x, result.params.v_p, result.params.v_phi,
                result.log_lik.value, out.c_str());
    return kExitOk;
}

int cmd_analyze(const std::string& chain_dir, const std::string& in, const std::string& out_dir,
                int marginal_bins, int nodes, unsigned threads, std::uint64_t seed) {
    ConfigHash hash;
    hash.add("cmd", "analyze");
    hash.add("chains", chain_dir);
    hash.add("in", in);
    hash.add("marginal_bins", marginal_bins);
    hash.add("nodes", nodes);
    hash.add("seed", seed);
    const auto meta = make_meta(seed, hash);

    const auto chains = load_chain_dir(chain_dir);
    const Dataset data = load_dataset(in);
    const QuadratureSpec spec{nodes};

    const auto summary = summarize(chains);
    std::array<double, 3> r_hat{1.0, 1.0, 1.0};
    const bool have_rhat = chains.size() >= 2;
    if (have_rhat)
        for (int i = 0; i < 3; ++i) r_hat[i] = gelman_rubin(chains, Param(i));

    const StateParams at_mean{summary.mean[0], summary.mean[1], summary.mean[2]};
    const auto fisher = fisher_matrix(at_mean, data, spec);
    const auto ratios = compare(summary, fisher);

    double acceptance = 0.0;
    for (const auto& chain : chains) acceptance += chain.acceptance_rate();
    acceptance /= double(chains.size());

    const auto purity_post = derived_posterior(
        chains, [&](const StateParams& p) { return purity(p, spec); }, marginal_bins, threads);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    save_summary_json((dir / "summary.json").string(), summary, &fisher, &ratios,
                      have_rhat ? &r_hat : nullptr, acceptance, &purity_post, meta);
    for (int i = 0; i < 3; ++i)
        save_marginal_csv(marginal_histogram(chains, Param(i), marginal_bins),
                          (dir / ("marginal_" + std::string(kParamNames[i]) + ".csv")).string(),
                          meta);
    save_marginal_csv(purity_post.marginal, (dir / "purity_posterior.csv").string(), meta);

    std::printf("%s", ratios.table(summary, fisher).c_str());
    std::printf("purity posterior: %.6g +/- %.3g\n", purity_post.mean, purity_post.std);
    if (have_rhat) {
        std::printf("R-hat: %.4f %.4f %.4f\n", r_hat[0], r_hat[1], r_hat[2]);
        require_converged(r_hat);
    }
    return kExitOk;
}

int cmd_wigner(const std::string& chain_dir, const std::string& out, const GridSpec& grid,
               std::uint64_t subsample, int nodes, unsigned threads, std::uint64_t seed) {
    ConfigHash hash;
    hash.add("cmd", "wigner");
    hash.add("chains", chain_dir);
    hash.add("x_min", grid.x_min);
    hash.add("x_max", grid.x_max);
    hash.add("p_min", grid.p_min);
    hash.add("p_max", grid.p_max);
    hash.add("nx", grid.nx);
    hash.add("np", grid.np);
    hash.add("subsample", subsample);
    hash.add("nodes", nodes);
    hash.add("seed", seed);

    const auto chains = load_chain_dir(chain_dir);
    const auto w = reconstruct_wigner(chains, grid, QuadratureSpec{nodes}, subsample, threads);
    save_wigner_csv(w, out, make_meta(seed, hash));
    std::printf("wigner grid %dx%d from %llu posterior samples -> %s\n", grid.nx, grid.np,
                (unsigned long long)std::min<std::size_t>(subsample, w.mean.size()), out.c_str());
    return kExitOk;
}

struct Table1Options {
    std::uint64_t seed = 0;
    std::string out_dir = "table1";
    double vx = 0.316, vp = 6.889, vphi = 0.171;
    std::uint64_t n = 100000;
    int bins = 70;
    FitOptions fit;
};

int cmd_replicate_table1(const Table1Options& opt) {
    const StateParams truth{opt.vx, opt.vp, opt.vphi};
    truth.require_physical();
    warn_phase_wrap(truth);

    ConfigHash hash;
    hash.add("cmd", "replicate-table1");
    hash.add("seed", opt.seed);
    hash.add("v_x", opt.vx);
    hash.add("v_p", opt.vp);
    hash.add("v_phi", opt.vphi);
    hash.add("n", opt.n);
    hash.add("bins", opt.bins);
    opt.fit.add_hash(hash);
    const auto meta = make_meta(opt.seed, hash);

    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    std::string stage = "simulate";
    try {
        // file-based handoff: every stage reads what the previous one wrote
        std::vector<SampleSet> sets;
        for (std::size_t k = 0; k < 2; ++k) {
            const double theta = k == 0 ? 0.0 : kPi / 2;
            sets.push_back(simulate_samples(truth, {theta}, opt.n,
                                            derive_seed(opt.seed, seed_stream::simulate, k)));
        }
        save_samples(sets, (dir / "samples.csv").string(), meta);

        stage = "bin";
        const auto loaded_sets = load_samples((dir / "samples.csv").string());
        Dataset ds;
        for (const auto& set : loaded_sets) ds.histograms.push_back(bin_samples(set, opt.bins));
        ds.validate();
        save_dataset(ds, (dir / "dataset.json").string(), meta);

        stage = "fit";
        const Dataset data = load_dataset((dir / "dataset.json").string());
        FitOptions fit = opt.fit;
        fit.seed = opt.seed;
        const FitOutputs mcmc = fit_pipeline(data, fit, opt.out_dir, meta);

        stage = "ml";
        Rng init_rng(derive_seed(opt.seed, seed_stream::greedy, 1));
        const auto ml = run_greedy_ml(init_params(init_rng), data, fit.to_config());
        bool ml_monotone = true;
        for (std::size_t i = 1; i < ml.trace.size(); ++i)
            if (ml.trace[i] < ml.trace[i - 1]) ml_monotone = false;

        stage = "analyze";
        const QuadratureSpec spec{fit.nodes};
        const StateParams at_mean{mcmc.summary.mean[0], mcmc.summary.mean[1],
                                  mcmc.summary.mean[2]};
        const auto fisher = fisher_matrix(at_mean, data, spec);
        const auto ratios = compare(mcmc.summary, fisher);
        const auto purity_post = derived_posterior(
            mcmc.chains, [&](const StateParams& p) { return purity(p, spec); }, 100, fit.threads);
        save_summary_json((dir / "summary.json").string(), mcmc.summary, &fisher, &ratios,
                          &mcmc.r_hat, mcmc.acceptance, &purity_post, meta);
        for (int i = 0; i < 3; ++i)
            save_marginal_csv(marginal_histogram(mcmc.chains, Param(i), 100),
                              (dir / ("marginal_" + std::string(kParamNames[i]) + ".csv")).string(),
                              meta);
        save_marginal_csv(purity_post.marginal, (dir / "purity_posterior.csv").string(), meta);

        stage = "wigner";
        GridSpec grid;
        grid.nx = grid.np = 81;
        const auto wgrid = reconstruct_wigner(mcmc.chains, grid, spec, 200, fit.threads);
        save_wigner_csv(wgrid, (dir / "wigner.csv").string(), meta);

        stage = "report";
        double best_mcmc = -1e308;
        for (const auto& chain : mcmc.chains)
            for (std::size_t i : chain.retained_indices())
                best_mcmc = std::max(best_mcmc, chain.states[i].log_lik.value);

        const std::array<double, 3> truth_arr{truth.v_x, truth.v_p, truth.v_phi};
        const std::array<double, 3> ml_arr{ml.params.v_x, ml.params.v_p, ml.params.v_phi};
        bool mean_ok = true, ratio_ok = true, ml_ok = true;
        for (int i = 0; i < 3; ++i) {
            mean_ok &= std::abs(mcmc.summary.mean[i] - truth_arr[i]) <=
                       4.0 * mcmc.summary.std[i];
            ratio_ok &= std::abs(ratios.ratio[i] - 1.0) <= 0.20;
            ml_ok &= std::abs(ml_arr[i] - truth_arr[i]) <= 4.0 * fisher.sigma[i];
        }
        bool rhat_ok = true;
        for (double r : mcmc.r_hat) rhat_ok &= r < 1.1;
        const bool acc_ok = mcmc.acceptance >= 0.2 && mcmc.acceptance <= 0.6;
        const bool ml_tops = ml.log_lik.value >= best_mcmc - 1e-6;
        const bool purity_mean_ok = purity_post.mean >= 0.55 && purity_post.mean <= 0.58;
        const bool purity_std_ok = purity_post.std >= 0.0014 && purity_post.std <= 0.0042;
        const bool all_pass = mean_ok && ratio_ok && ml_ok && rhat_ok && acc_ok && ml_monotone &&
                              ml_tops && purity_mean_ok && purity_std_ok;

        std::ofstream os(dir / "table1_report.json");
        if (!os) throw InputError("cannot open table1_report.json for writing");
        auto arr3 = [](const std::array<double, 3>& a) {
            return "[" + io::format_double(a[0]) + ", " + io::format_double(a[1]) + ", " +
                   io::format_double(a[2]) + "]";
        };
        os << "{\n";
        os << "  \"truth\": " << arr3(truth_arr) << ",\n";
        os << "  \"mcmc_mean\": " << arr3(mcmc.summary.mean) << ",\n";
        os << "  \"ml_estimate\": " << arr3(ml_arr) << ",\n";
        os << "  \"sigma_mcmc\": " << arr3(mcmc.summary.std) << ",\n";
        os << "  \"sigma_fisher\": " << arr3(fisher.sigma) << ",\n";
        os << "  \"ratios\": " << arr3(ratios.ratio) << ",\n";
        os << "  \"r_hat\": " << arr3(mcmc.r_hat) << ",\n";
        os << "  \"acceptance_rate\": " << io::format_double(mcmc.acceptance) << ",\n";
        os << "  \"ml_log_lik\": " << io::format_double(ml.log_lik.value) << ",\n";
        os << "  \"best_mcmc_log_lik\": " << io::format_double(best_mcmc) << ",\n";
        os << "  \"purity_mean\": " << io::format_double(purity_post.mean) << ",\n";
        os << "  \"purity_std\": " << io::format_double(purity_post.std) << ",\n";
        os << "  \"checks\": {\n";
        os << "    \"mcmc_mean_within_4_sigma\": " << (mean_ok ? "true" : "false") << ",\n";
        os << "    \"sigma_ratio_within_20pct\": " << (ratio_ok ? "true" : "false") << ",\n";
        os << "    \"r_hat_below_1.1\": " << (rhat_ok ? "true" : "false") << ",\n";
        os << "    \"acceptance_in_0.2_0.6\": " << (acc_ok ? "true" : "false") << ",\n";
        os << "    \"ml_within_4_fisher_sigma\": " << (ml_ok ? "true" : "false") << ",\n";
        os << "    \"ml_trace_monotone\": " << (ml_monotone ? "true" : "false") << ",\n";
        os << "    \"ml_tops_mcmc_samples\": " << (ml_tops ? "true" : "false") << ",\n";
        os << "    \"purity_mean_in_0.55_0.58\": " << (purity_mean_ok ? "true" : "false")
           << ",\n";
        os << "    \"purity_std_in_band\": " << (purity_std_ok ? "true" : "false") << "\n";
        os << "  },\n";
        os << "  \"all_pass\": " << (all_pass ? "true" : "false") << ",\n";
        os << "  \"meta\": " << io::meta_json(meta) << "\n";
        os << "}\n";
        if (!os) throw InputError("write failed: table1_report.json");

        std::printf("\nparameter  truth      mcmc_mean   ml_est      sigma_mcmc  sigma_fisher\n");
        for (int i = 0; i < 3; ++i)
            std::printf("%-9s  %-9.4g  %-10.6g  %-10.6g  %-10.4g  %-10.4g\n", kParamNames[i],
                        truth_arr[i], mcmc.summary.mean[i], ml_arr[i], mcmc.summary.std[i],
                        fisher.sigma[i]);
        std::printf("purity posterior: %.6g +/- %.3g\n", purity_post.mean, purity_post.std);
        std::printf("acceptance %.3f, R-hat max %.4f, retained %zu\n", mcmc.acceptance,
                    std::max({mcmc.r_hat[0], mcmc.r_hat[1], mcmc.r_hat[2]}),
                    mcmc.summary.n_retained);
        auto flag = [](bool ok) { return ok ? "[PASS]" : "[FAIL]"; };
        std::printf("%s mcmc means within 4 sigma of truth\n", flag(mean_ok));
        std::printf("%s sigma_mcmc/sigma_fisher within 20%%\n", flag(ratio_ok));
        std::printf("%s R-hat < 1.1\n", flag(rhat_ok));
        std::printf("%s acceptance in [0.2, 0.6]\n", flag(acc_ok));
        std::printf("%s ml within 4 fisher sigma\n", flag(ml_ok));
        std::printf("%s ml trace monotone\n", flag(ml_monotone));
        std::printf("%s ml log-lik tops mcmc samples\n", flag(ml_tops));
        std::printf("%s purity mean in [0.55, 0.58]\n", flag(purity_mean_ok));
        std::printf("%s purity std in [0.0014, 0.0042]\n", flag(purity_std_ok));
        std::printf("report -> %s\n", (dir / "table1_report.json").string().c_str());

        require_converged(mcmc.r_hat);
        return kExitOk;
    } catch (const Error&) {
        std::fprintf(stderr, "replicate-table1: stage '%s' failed\n", stage.c_str());
        throw;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian tomography of phase-diffused squeezed vacuum states from binned "
                 "homodyne data"};
    app.set_config("--config", "", "Optional key=value config file (flags take precedence)");
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Draw synthetic homodyne samples");
    double vx = 0.316, vp = 6.889, vphi = 0.171;
    std::vector<double> thetas;
    std::uint64_t sim_n = 100000, sim_seed = 0;
    std::string sim_out = "samples.csv";
    sim->add_option("--vx", vx, "Squeezed-quadrature variance")->capture_default_str();
    sim->add_option("--vp", vp, "Anti-squeezed-quadrature variance")->capture_default_str();
    sim->add_option("--vphi", vphi, "Phase-noise variance (rad^2)")->capture_default_str();
    sim->add_option("--theta", thetas, "Measurement phases (default: 0 and pi/2)");
    sim->add_option("--n", sim_n, "Samples per setting")->capture_default_str();
    sim->add_option("--seed", sim_seed, "Master seed");
    sim->add_option("--out", sim_out, "Output CSV")->capture_default_str();

    // bin
    auto* bin = app.add_subcommand("bin", "Bin a samples CSV into a dataset");
    std::string bin_in, bin_out = "dataset.json";
    int bin_bins = 70;
    std::uint64_t bin_seed = 0;
    bin->add_option("--in", bin_in, "Samples CSV")->required();
    bin->add_option("--bins", bin_bins, "Bins per setting")->capture_default_str();
    bin->add_option("--out", bin_out, "Output dataset JSON")->capture_default_str();
    bin->add_option("--seed", bin_seed, "Seed recorded in metadata");

    // fit
    auto* fit = app.add_subcommand("fit", "Sample the posterior with Metropolis-Hastings");
    std::string fit_in, fit_out = "fit";
    FitOptions fit_opt;
    fit->add_option("--in", fit_in, "Dataset JSON")->required();
    fit->add_option("--out-dir", fit_out, "Output directory")->capture_default_str();
    add_fit_options(fit, fit_opt);

    // ml
    auto* ml = app.add_subcommand("ml", "Greedy maximum-likelihood climb");
    std::string ml_in, ml_out = "ml.json";
    FitOptions ml_opt;
    ml->add_option("--in", ml_in, "Dataset JSON")->required();
    ml->add_option("--out", ml_out, "Output JSON")->capture_default_str();
    add_fit_options(ml, ml_opt);

    // analyze
    auto* ana = app.add_subcommand("analyze", "Posterior summaries, Fisher matrix, purity");
    std::string ana_chains, ana_in, ana_out = "analysis";
    int ana_bins = 100, ana_nodes = 320;
    unsigned ana_threads = 0;
    std::uint64_t ana_seed = 0;
    ana->add_option("--chains", ana_chains, "Directory with chain_*.csv")->required();
    ana->add_option("--in", ana_in, "Dataset JSON (for the Fisher matrix)")->required();
    ana->add_option("--out-dir", ana_out, "Output directory")->capture_default_str();
    ana->add_option("--marginal-bins", ana_bins, "Histogram bins for marginals")
        ->capture_default_str();
    ana->add_option("--nodes", ana_nodes, "Gauss-Hermite nodes")->capture_default_str();
    ana->add_option("--threads", ana_threads, "Worker threads (0 = hardware)");
    ana->add_option("--seed", ana_seed, "Seed recorded in metadata");

    // wigner
    auto* wig = app.add_subcommand("wigner", "Posterior-averaged Wigner reconstruction");
    std::string wig_chains, wig_out = "wigner.csv";
    GridSpec wig_grid;
    std::uint64_t wig_sub = 500;
    int wig_nodes = 320;
    unsigned wig_threads = 0;
    std::uint64_t wig_seed = 0;
    wig->add_option("--chains", wig_chains, "Directory with chain_*.csv")->required();
    wig->add_option("--out", wig_out, "Output CSV")->capture_default_str();
    wig->add_option("--x-min", wig_grid.x_min)->capture_default_str();
    wig->add_option("--x-max", wig_grid.x_max)->capture_default_str();
    wig->add_option("--p-min", wig_grid.p_min)->capture_default_str();
    wig->add_option("--p-max", wig_grid.p_max)->capture_default_str();
    wig->add_option("--nx", wig_grid.nx, "Grid cells along x")->capture_default_str();
    wig->add_option("--np", wig_grid.np, "Grid cells along p")->capture_default_str();
    wig->add_option("--subsample", wig_sub, "Posterior samples to average")
        ->capture_default_str();
    wig->add_option("--nodes", wig_nodes, "Gauss-Hermite nodes")->capture_default_str();
    wig->add_option("--threads", wig_threads, "Worker threads (0 = hardware)");
    wig->add_option("--seed", wig_seed, "Seed recorded in metadata");

    // replicate-table1
    auto* rep = app.add_subcommand("replicate-table1",
                                   "Full synthetic pipeline with pass/fail report");
    Table1Options rep_opt;
    rep->add_option("--seed", rep_opt.seed, "Master seed");
    rep->add_option("--out-dir", rep_opt.out_dir, "Output directory")->capture_default_str();
    rep->add_option("--vx", rep_opt.vx, "Truth v_x")->capture_default_str();
    rep->add_option("--vp", rep_opt.vp, "Truth v_p")->capture_default_str();
    rep->add_option("--vphi", rep_opt.vphi, "Truth v_phi")->capture_default_str();
    rep->add_option("--n", rep_opt.n, "Samples per setting")->capture_default_str();
    rep->add_option("--bins", rep_opt.bins, "Bins per setting")->capture_default_str();
    add_fit_options(rep, rep_opt.fit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (sim->parsed()) {
            if (thetas.empty()) thetas = {0.0, kPi / 2};
            return cmd_simulate(vx, vp, vphi, thetas, sim_n, sim_seed, sim_out, 0);
        }
        if (bin->parsed()) return cmd_bin(bin_in, bin_bins, bin_out, bin_seed);
        if (fit->parsed()) return cmd_fit(fit_in, fit_out, fit_opt);
        if (ml->parsed()) return cmd_ml(ml_in, ml_out, ml_opt);
        if (ana->parsed())
            return cmd_analyze(ana_chains, ana_in, ana_out, ana_bins, ana_nodes, ana_threads,
                               ana_seed);
        if (wig->parsed())
            return cmd_wigner(wig_chains, wig_out, wig_grid, wig_sub, wig_nodes, wig_threads,
                              wig_seed);
        if (rep->parsed()) {
            rep_opt.fit.seed = rep_opt.seed;
            return cmd_replicate_table1(rep_opt);
        }
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConvergence;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitInput;
}
