#include "sqtom/likelihood.hpp"

#include <cmath>
#include <limits>

namespace sqtom {

bool LogLikelihood::impossible() const {
    return value == -std::numeric_limits<double>::infinity();
}

LogLikelihood LogLikelihood::impossible_point() {
    return {-std::numeric_limits<double>::infinity()};
}

LogLikelihood log_likelihood(const StateParams& params, const Dataset& data,
                             const QuadratureSpec& spec) {
    if (!params.physical()) return LogLikelihood::impossible_point();

    double lambda = 0.0;
    for (const auto& hist : data.histograms) {
        const auto prob = bin_probabilities(params, hist.theta, hist.interior_edges, spec);
        for (std::size_t l = 0; l < prob.size(); ++l) {
            const auto n = hist.counts[l];
            if (n == 0) continue;  // zero-count bins contribute 0 even if P underflows
            if (prob[l] < kProbFloor) return LogLikelihood::impossible_point();
            lambda += double(n) * std::log(prob[l]);
        }
    }
    return {lambda};
}

double log_ratio(LogLikelihood a, LogLikelihood b) {
    if (a.impossible() && b.impossible()) return 0.0;
    if (a.impossible()) return -std::numeric_limits<double>::infinity();
    if (b.impossible()) return std::numeric_limits<double>::infinity();
    return a.value - b.value;
}

double likelihood_ratio_log(const StateParams& a, const StateParams& b, const Dataset& data,
                            const QuadratureSpec& spec) {
    return log_ratio(log_likelihood(a, data, spec), log_likelihood(b, data, spec));
}

}  // namespace sqtom
