#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sqtom/data.hpp"
#include "sqtom/sampler.hpp"

namespace sqtom {

enum class Param { v_x = 0, v_p = 1, v_phi = 2 };

inline constexpr std::array<const char*, 3> kParamNames{"v_x", "v_p", "v_phi"};

double param_value(const StateParams& p, Param id);

using Matrix3 = std::array<std::array<double, 3>, 3>;

// Sample statistics over the pooled retained samples of one or more chains.
struct PosteriorSummary {
    std::array<double, 3> mean{};
    std::array<double, 3> std{};  // unbiased, n-1
    Matrix3 correlation{};
    std::size_t n_retained = 0;
};

// Requires >= 100 retained samples; a zero standard deviation on any
// parameter raises NumericalError (stuck sampler).
PosteriorSummary summarize(std::span<const Chain> chains);

// Normalized histogram density over retained samples of one parameter;
// trapezoid integral 1 within rounding.
struct Marginal {
    Param parameter = Param::v_x;
    std::vector<double> centers;
    std::vector<double> density;
};

Marginal marginal_histogram(std::span<const Chain> chains, Param id, int n_bins = 100);

// Potential scale reduction factor over >= 2 chains of equal retained
// length: R = sqrt((W(n-1)/n + B/n) / W). Returns +infinity when the
// within-chain variance is zero but chains disagree.
double gelman_rubin(std::span<const Chain> chains, Param id);

struct FisherMatrix {
    Matrix3 matrix{};               // F_ij, symmetric by construction
    std::array<double, 3> sigma{};  // sqrt of the inverse's diagonal
};

// Expected Fisher information of the binned multinomial model:
//   F_ij = sum_theta N_theta sum_l (dP_l/dl_i)(dP_l/dl_j)/P_l,
// derivatives by central differences with relative step 1e-5. Only the
// shape of `data` is used (settings, edges, per-setting totals). Raises
// NumericalError if F is singular.
FisherMatrix fisher_matrix(const StateParams& params, const Dataset& data,
                           const QuadratureSpec& spec = {});

struct ComparisonReport {
    std::array<double, 3> ratio{};  // sigma_mcmc / sigma_fisher per parameter

    std::string table(const PosteriorSummary& summary, const FisherMatrix& fisher) const;
};

ComparisonReport compare(const PosteriorSummary& summary, const FisherMatrix& fisher);

// Distribution of f over the retained samples (posterior propagation).
struct DerivedPosterior {
    std::vector<double> values;  // f at every retained sample, pooled chain order
    double mean = 0.0;
    double std = 0.0;  // unbiased, n-1
    Marginal marginal;
};

// Raises NumericalError naming the first offending sample if f returns a
// non-finite value. Evaluation may be spread over threads (0 = hardware
// concurrency); results do not depend on the thread count.
DerivedPosterior derived_posterior(std::span<const Chain> chains,
                                   const std::function<double(const StateParams&)>& f,
                                   int n_bins = 100, unsigned threads = 1);

// Summary report JSON: means, stds, correlation, fisher_sigma, ratios,
// r_hat, acceptance_rate, n_retained (+ optional derived-purity stats and
// metadata). Pass nullptr for sections that were not computed.
void save_summary_json(const std::string& path, const PosteriorSummary& summary,
                       const FisherMatrix* fisher, const ComparisonReport* ratios,
                       const std::array<double, 3>* r_hat, double acceptance_rate,
                       const DerivedPosterior* purity, const Metadata& meta = {});

// Marginal / derived-posterior CSV: "center,density" rows.
void save_marginal_csv(const Marginal& marginal, const std::string& path,
                       const Metadata& meta = {});

}  // namespace sqtom
