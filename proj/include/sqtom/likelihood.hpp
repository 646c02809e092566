#pragma once

#include "sqtom/data.hpp"
#include "sqtom/model.hpp"

namespace sqtom {

// Log of the multinomial likelihood up to parameter-independent terms
// (nats). -infinity marks a zero-likelihood point (unphysical parameters or
// counts in a bin whose probability underflowed); never NaN.
struct LogLikelihood {
    double value = 0.0;

    bool impossible() const;
    static LogLikelihood impossible_point();
};

// Bin probabilities are floored here before taking logs; a floored bin with
// zero counts contributes exactly 0.
inline constexpr double kProbFloor = 1e-300;

// Lambda = sum over settings and bins of n * ln P. Returns the -infinity
// sentinel if some bin has counts but a probability below the floor.
LogLikelihood log_likelihood(const StateParams& params, const Dataset& data,
                             const QuadratureSpec& spec = {});

// ln r = Lambda(a) - Lambda(b), with the sentinel cases resolved explicitly:
// exactly one impossible side gives -/+infinity, two impossible sides give 0.
double log_ratio(LogLikelihood a, LogLikelihood b);

double likelihood_ratio_log(const StateParams& a, const StateParams& b, const Dataset& data,
                            const QuadratureSpec& spec = {});

}  // namespace sqtom
