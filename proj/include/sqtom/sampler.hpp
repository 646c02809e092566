#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqtom/data.hpp"
#include "sqtom/likelihood.hpp"
#include "sqtom/rng.hpp"

namespace sqtom {

// Standard deviations of the independent Gaussian jump proposal.
struct ProposalSpec {
    double sigma_x = 0.0042;
    double sigma_p = 0.022;
    double sigma_phi = 0.0037;

    void validate() const;  // all > 0
};

// One sampler state. Stored parameters are always physical; rejected steps
// copy the previous state with accepted = false.
struct ChainState {
    StateParams params;
    LogLikelihood log_lik;
    bool accepted = false;
};

struct Chain {
    std::vector<ChainState> states;
    std::uint64_t seed = 0;
    ProposalSpec proposal;  // values after burn-in freezing
    std::size_t burn_in = 0;
    std::size_t thin = 1;

    // Indices burn_in, burn_in + thin, ... into states.
    std::vector<std::size_t> retained_indices() const;
    std::vector<StateParams> retained_params() const;
    std::size_t n_retained() const;
    // Fraction of accepted steps at indices >= burn_in.
    double acceptance_rate() const;
    void validate() const;  // burn_in < len, thin >= 1, all states physical
};

struct SamplerConfig {
    std::size_t iterations = 40000;
    unsigned n_chains = 4;
    std::size_t burn_in = 2000;
    std::size_t thin = 10;
    bool adapt = true;
    double target_acceptance = 0.44;
    std::uint64_t seed = 0;
    ProposalSpec proposal;
    QuadratureSpec quad;

    void validate() const;  // iterations > burn_in, 0 < target < 1, thin >= 1
};

// Any log-density over the parameter space; must return the -infinity
// sentinel (never NaN) for zero-density points.
using LogTarget = std::function<LogLikelihood(const StateParams&)>;

// Uniform draw over the physical region: v_x, v_p from (0,10) redrawn until
// v_x*v_p >= 1, then v_phi from (0,1).
StateParams init_params(Rng& rng);

// One Metropolis-Hastings transition. Draws the proposal offsets in field
// order (x, p, phi); an unphysical proposal is rejected outright without
// consuming the acceptance uniform; otherwise accepts iff ln U < ln r.
ChainState mh_step(const ChainState& current, const LogTarget& target,
                   const ProposalSpec& proposal, Rng& rng);

// Greedy variant of the transition: accepts iff ln r >= 0 (no uniform drawn).
ChainState greedy_step(const ChainState& current, const LogTarget& target,
                       const ProposalSpec& proposal, Rng& rng);

// Runs one chain of config.iterations states (the first is the evaluated
// initial point). With config.adapt, every 100 steps during burn-in each
// proposal sigma is scaled by exp((a - target)/2), a the window acceptance
// rate; the proposal is frozen after burn-in so the retained samples come
// from a fixed kernel.
Chain run_chain(const StateParams& init, const LogTarget& target, const SamplerConfig& config,
                std::uint64_t chain_seed);
Chain run_chain(const StateParams& init, const Dataset& data, const SamplerConfig& config,
                unsigned chain_index = 0);

// config.n_chains independent chains with seeds derived from (config.seed,
// chain index); initial points drawn by init_params from each chain's own
// stream. Chains run concurrently on up to `threads` threads (0 = hardware
// concurrency); results are identical regardless of thread count.
std::vector<Chain> run_chains(const Dataset& data, const SamplerConfig& config,
                              unsigned threads = 0);

struct GreedyResult {
    StateParams params;
    LogLikelihood log_lik;
    std::vector<double> trace;  // log-likelihood after every iteration, non-decreasing
};

// Maximum-likelihood hill climb: the greedy acceptance rule with proposal
// adaptation kept active for the whole run (the adaptation drives the step
// size down as the climb stalls, refining the optimum).
GreedyResult run_greedy_ml(const StateParams& init, const Dataset& data,
                           const SamplerConfig& config);
GreedyResult run_greedy_ml(const StateParams& init, const LogTarget& target,
                           const SamplerConfig& config);

// Chain file: CSV "iter,v_x,v_p,v_phi,log_lik,accepted", one row per
// iteration, preceded by "# key=value" lines carrying seed/burn_in/thin and
// the frozen proposal (plus any caller metadata).
void save_chain_csv(const Chain& chain, const std::string& path, const Metadata& meta = {});
Chain load_chain_csv(const std::string& path);

}  // namespace sqtom
