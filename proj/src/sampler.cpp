#include "sqtom/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"

namespace sqtom {

namespace {

constexpr std::size_t kAdaptWindow = 100;
constexpr double kSigmaFloor = 1e-12;

enum class AcceptRule { metropolis, greedy };

StateParams propose(const StateParams& current, const ProposalSpec& proposal, Rng& rng) {
    StateParams next = current;
    next.v_x += proposal.sigma_x * draw_normal(rng);
    next.v_p += proposal.sigma_p * draw_normal(rng);
    next.v_phi += proposal.sigma_phi * draw_normal(rng);
    return next;
}

ChainState step_impl(const ChainState& current, const LogTarget& target,
                     const ProposalSpec& proposal, Rng& rng, AcceptRule rule) {
    const StateParams trial = propose(current, proposal, rng);
    if (!trial.physical()) {
        ChainState next = current;
        next.accepted = false;
        return next;
    }
    const LogLikelihood trial_lik = target(trial);
    const double lnr = log_ratio(trial_lik, current.log_lik);
    bool accept;
    if (rule == AcceptRule::greedy) {
        accept = lnr >= 0.0;
    } else {
        accept = std::log(uniform01(rng)) < lnr;  // U == r resolved as rejection
    }
    if (accept) return {trial, trial_lik, true};
    ChainState next = current;
    next.accepted = false;
    return next;
}

void adapt_sigma(ProposalSpec& proposal, std::size_t accepted_in_window, double target_rate) {
    const double a = double(accepted_in_window) / double(kAdaptWindow);
    const double factor = std::exp((a - target_rate) / 2.0);
    proposal.sigma_x = std::max(kSigmaFloor, proposal.sigma_x * factor);
    proposal.sigma_p = std::max(kSigmaFloor, proposal.sigma_p * factor);
    proposal.sigma_phi = std::max(kSigmaFloor, proposal.sigma_phi * factor);
}

Chain run_impl(const StateParams& init, const LogTarget& target, const SamplerConfig& config,
               Rng& rng, AcceptRule rule) {
    config.validate();
    init.require_physical();

    ProposalSpec proposal = config.proposal;

    Chain chain;
    chain.burn_in = config.burn_in;
    chain.thin = config.thin;
    chain.states.reserve(config.iterations);
    chain.states.push_back({init, target(init), true});

    std::size_t window_accepted = 0;
    for (std::size_t t = 1; t < config.iterations; ++t) {
        chain.states.push_back(step_impl(chain.states.back(), target, proposal, rng, rule));
        if (!config.adapt) continue;
        if (chain.states.back().accepted) ++window_accepted;
        if (t % kAdaptWindow == 0) {
            // Metropolis: adapt only through the end of burn-in, then freeze
            // so the retained samples come from a fixed kernel. Greedy: keep
            // adapting, shrinking steps as the climb stalls.
            if (rule == AcceptRule::greedy || t <= config.burn_in)
                adapt_sigma(proposal, window_accepted, config.target_acceptance);
            window_accepted = 0;
        }
    }
    chain.proposal = proposal;
    return chain;
}

LogTarget dataset_target(const Dataset& data, const QuadratureSpec& spec) {
    data.validate();
    if (data.total_counts() == 0) throw InputError("sampler: dataset has zero total counts");
    return [&data, spec](const StateParams& p) { return log_likelihood(p, data, spec); };
}

}  // namespace

void ProposalSpec::validate() const {
    if (!(sigma_x > 0.0 && sigma_p > 0.0 && sigma_phi > 0.0))
        throw InputError("ProposalSpec: all proposal sigmas must be > 0");
}

void SamplerConfig::validate() const {
    proposal.validate();
    quad.validate();
    if (iterations <= burn_in) throw InputError("SamplerConfig: iterations must exceed burn_in");
    if (thin < 1) throw InputError("SamplerConfig: thin must be >= 1");
    if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
        throw InputError("SamplerConfig: target_acceptance must be in (0,1)");
    if (n_chains < 1) throw InputError("SamplerConfig: n_chains must be >= 1");
}

std::vector<std::size_t> Chain::retained_indices() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = burn_in; i < states.size(); i += thin) idx.push_back(i);
    return idx;
}

std::vector<StateParams> Chain::retained_params() const {
    std::vector<StateParams> out;
    for (std::size_t i : retained_indices()) out.push_back(states[i].params);
    return out;
}

std::size_t Chain::n_retained() const {
    return burn_in < states.size() ? (states.size() - burn_in + thin - 1) / thin : 0;
}

double Chain::acceptance_rate() const {
    if (states.size() <= burn_in) return 0.0;
    std::size_t accepted = 0;
    for (std::size_t i = burn_in; i < states.size(); ++i)
        if (states[i].accepted) ++accepted;
    return double(accepted) / double(states.size() - burn_in);
}

void Chain::validate() const {
    if (states.empty()) throw InputError("Chain: empty");
    if (burn_in >= states.size()) throw InputError("Chain: burn_in must be < chain length");
    if (thin < 1) throw InputError("Chain: thin must be >= 1");
    for (const auto& s : states) s.params.require_physical();
}

StateParams init_params(Rng& rng) {
    StateParams p;
    do {
        p.v_x = 10.0 * uniform01(rng);
        p.v_p = 10.0 * uniform01(rng);
    } while (p.v_x * p.v_p < 1.0);
    p.v_phi = uniform01(rng);
    return p;
}

ChainState mh_step(const ChainState& current, const LogTarget& target,
                   const ProposalSpec& proposal, Rng& rng) {
    return step_impl(current, target, proposal, rng, AcceptRule::metropolis);
}

ChainState greedy_step(const ChainState& current, const LogTarget& target,
                       const ProposalSpec& proposal, Rng& rng) {
    return step_impl(current, target, proposal, rng, AcceptRule::greedy);
}

Chain run_chain(const StateParams& init, const LogTarget& target, const SamplerConfig& config,
                std::uint64_t chain_seed) {
    Rng rng(chain_seed);
    Chain chain = run_impl(init, target, config, rng, AcceptRule::metropolis);
    chain.seed = chain_seed;
    return chain;
}

Chain run_chain(const StateParams& init, const Dataset& data, const SamplerConfig& config,
                unsigned chain_index) {
    const auto target = dataset_target(data, config.quad);
    return run_chain(init, target, config, derive_seed(config.seed, seed_stream::chain, chain_index));
}

std::vector<Chain> run_chains(const Dataset& data, const SamplerConfig& config, unsigned threads) {
    config.validate();
    const auto target = dataset_target(data, config.quad);

    std::vector<Chain> chains(config.n_chains);
    std::atomic<unsigned> next{0};
    auto worker = [&]() {
        for (;;) {
            const unsigned c = next.fetch_add(1);
            if (c >= config.n_chains) return;
            const std::uint64_t chain_seed = derive_seed(config.seed, seed_stream::chain, c);
            Rng rng(chain_seed);
            const StateParams init = init_params(rng);  // same stream feeds the chain steps
            Chain chain = run_impl(init, target, config, rng, AcceptRule::metropolis);
            chain.seed = chain_seed;
            chains[c] = std::move(chain);
        }
    };

    unsigned nt = threads == 0 ? std::thread::hardware_concurrency() : threads;
    nt = std::max(1u, std::min(nt, config.n_chains));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return chains;
}

GreedyResult run_greedy_ml(const StateParams& init, const LogTarget& target,
                           const SamplerConfig& config) {
    const std::uint64_t seed = derive_seed(config.seed, seed_stream::greedy, 0);
    Rng rng(seed);
    const Chain chain = run_impl(init, target, config, rng, AcceptRule::greedy);
    GreedyResult result;
    result.params = chain.states.back().params;
    result.log_lik = chain.states.back().log_lik;
    result.trace.reserve(chain.states.size());
    for (const auto& s : chain.states) result.trace.push_back(s.log_lik.value);
    return result;
}

GreedyResult run_greedy_ml(const StateParams& init, const Dataset& data,
                           const SamplerConfig& config) {
    return run_greedy_ml(init, dataset_target(data, config.quad), config);
}

void save_chain_csv(const Chain& chain, const std::string& path, const Metadata& meta) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);
    Metadata all = meta;
    all.emplace_back("chain_seed", std::to_string(chain.seed));
    all.emplace_back("burn_in", std::to_string(chain.burn_in));
    all.emplace_back("thin", std::to_string(chain.thin));
    all.emplace_back("sigma_x", io::format_double(chain.proposal.sigma_x));
    all.emplace_back("sigma_p", io::format_double(chain.proposal.sigma_p));
    all.emplace_back("sigma_phi", io::format_double(chain.proposal.sigma_phi));
    io::write_meta_comments(os, all);
    os << "iter,v_x,v_p,v_phi,log_lik,accepted\n";
    for (std::size_t i = 0; i < chain.states.size(); ++i) {
        const auto& s = chain.states[i];
        os << i << "," << io::format_double(s.params.v_x) << "," << io::format_double(s.params.v_p)
           << "," << io::format_double(s.params.v_phi) << ","
           << io::format_double(s.log_lik.value) << "," << (s.accepted ? 1 : 0) << "\n";
    }
    if (!os) throw InputError("write failed: " + path);
}

Chain load_chain_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open for reading: " + path);
    std::string line;
    const Metadata meta = io::read_meta_comments(is, line);
    if (line != "iter,v_x,v_p,v_phi,log_lik,accepted")
        throw InputError(path + ": expected chain CSV header");

    Chain chain;
    for (const auto& [k, v] : meta) {
        try {
            if (k == "chain_seed") chain.seed = std::stoull(v);
            else if (k == "burn_in") chain.burn_in = std::stoull(v);
            else if (k == "thin") chain.thin = std::stoull(v);
            else if (k == "sigma_x") chain.proposal.sigma_x = std::stod(v);
            else if (k == "sigma_p") chain.proposal.sigma_p = std::stod(v);
            else if (k == "sigma_phi") chain.proposal.sigma_phi = std::stod(v);
        } catch (const std::exception&) {
            throw InputError(path + ": bad metadata value for " + k);
        }
    }

    std::size_t row = 0;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6)
            throw InputError(path + ": malformed chain row " + std::to_string(row));
        ChainState s;
        try {
            s.params.v_x = std::stod(fields[1]);
            s.params.v_p = std::stod(fields[2]);
            s.params.v_phi = std::stod(fields[3]);
            s.log_lik.value = std::stod(fields[4]);
            s.accepted = std::stoi(fields[5]) != 0;
        } catch (const std::exception&) {
            throw InputError(path + ": malformed number in chain row " + std::to_string(row));
        }
        chain.states.push_back(s);
    }
    chain.validate();
    return chain;
}

}  // namespace sqtom
