#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sqtom/io.hpp"
#include "sqtom/model.hpp"

namespace sqtom {

// Raw homodyne samples for one measurement setting.
struct SampleSet {
    PhaseQuadrature theta;
    std::vector<double> samples;

    void validate() const;  // non-empty, all finite
};

// Binned measurement record: counts over interior_edges.size() + 1 bins,
// outer bins open to +-infinity. Bins are half-open [Q_l, Q_{l+1}): a sample
// exactly on an edge belongs to the upper bin.
struct QuadratureHistogram {
    PhaseQuadrature theta;
    std::vector<double> interior_edges;
    std::vector<std::int64_t> counts;

    std::int64_t total() const;
    void validate() const;
};

// One histogram per distinct measurement setting (distinct mod pi).
struct Dataset {
    std::vector<QuadratureHistogram> histograms;

    std::int64_t total_counts() const;
    void validate() const;
};

// Draws n samples from the exact forward model: per sample, phase
// u ~ N(0, v_phi) then quadrature x ~ N(0, Vt(u + theta)). Each normal
// consumes two uniforms (Box-Muller), so the stream layout is fixed and a
// seed fully determines the output.
SampleSet simulate_samples(const StateParams& params, PhaseQuadrature theta, std::size_t n,
                           std::uint64_t seed);

inline constexpr double kSpanSigmas = 5.0;

// Span rule: num_bins - 1 equally spaced interior edges over
// [-kSpanSigmas*sd, +kSpanSigmas*sd] of the set's sample standard deviation.
QuadratureHistogram bin_samples(const SampleSet& set, int num_bins);

// Explicit strictly increasing interior edges.
QuadratureHistogram bin_samples(const SampleSet& set, std::span<const double> interior_edges);

// Samples file: UTF-8 CSV with header "theta_radians,value", one sample per
// row; a file may mix settings. Loading groups rows by setting in order of
// first appearance.
void save_samples(const std::vector<SampleSet>& sets, const std::string& path,
                  const Metadata& meta = {});
std::vector<SampleSet> load_samples(const std::string& path);

// Histogram file: JSON object {"theta": number, "interior_edges": [...],
// "counts": [...]}; dataset file: JSON array of such objects. Unknown keys
// (e.g. "meta") are ignored on load.
void save_histogram(const QuadratureHistogram& hist, const std::string& path,
                    const Metadata& meta = {});
QuadratureHistogram load_histogram(const std::string& path);
void save_dataset(const Dataset& dataset, const std::string& path, const Metadata& meta = {});
Dataset load_dataset(const std::string& path);

}  // namespace sqtom
