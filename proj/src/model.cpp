#include "sqtom/model.hpp"

#include <cmath>

#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"

namespace sqtom {

namespace {

// Phase offsets and weights for E[f(phi)], phi ~ N(0, v_phi). For v_phi = 0
// the mixture collapses to the single point phi = 0.
struct PhaseNodes {
    std::vector<double> phi;
    const std::vector<double>* w;

    PhaseNodes(double v_phi, const QuadratureSpec& spec) {
        spec.validate();
        if (v_phi == 0.0) {
            static const std::vector<double> unit{1.0};
            phi.assign(1, 0.0);
            w = &unit;
            return;
        }
        const auto& rule = gauss_hermite(spec.nodes);
        const double sd = std::sqrt(v_phi);
        phi.resize(rule.nodes.size());
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) phi[i] = sd * rule.nodes[i];
        w = &rule.weights;
    }
};

}  // namespace

bool StateParams::physical() const {
    return in_domain() && v_x * v_p >= 1.0;
}

void StateParams::require_physical() const {
    if (!physical())
        throw InputError("unphysical state parameters: require v_x > 0, v_p > 0, v_phi >= 0, "
                         "v_x*v_p >= 1");
}

bool StateParams::in_domain() const {
    return std::isfinite(v_x) && std::isfinite(v_p) && std::isfinite(v_phi) && v_x > 0.0 &&
           v_p > 0.0 && v_phi >= 0.0;
}

void StateParams::require_domain() const {
    if (!in_domain())
        throw InputError("state parameters outside model domain: require finite v_x > 0, "
                         "v_p > 0, v_phi >= 0");
}

double PhaseQuadrature::canonical() const {
    double t = std::fmod(theta, kPi);
    if (t < 0.0) t += kPi;
    return t;
}

void QuadratureSpec::validate() const {
    if (nodes < 8) throw InputError("QuadratureSpec: nodes must be >= 8");
}

double rotated_variance(const StateParams& params, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    return params.v_x * c * c + params.v_p * s * s;
}

double wigner(const StateParams& params, double x, double p, const QuadratureSpec& spec) {
    params.require_domain();
    const PhaseNodes nodes(params.v_phi, spec);
    const double norm = 1.0 / (2.0 * kPi * std::sqrt(params.v_x * params.v_p));
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.phi.size(); ++i) {
        const double c = std::cos(nodes.phi[i]);
        const double s = std::sin(nodes.phi[i]);
        const double xr = x * c + p * s;
        const double pr = p * c - x * s;
        acc += (*nodes.w)[i] *
               std::exp(-(xr * xr / (2.0 * params.v_x) + pr * pr / (2.0 * params.v_p)));
    }
    return norm * acc;
}

double homodyne_pdf(const StateParams& params, PhaseQuadrature theta, double x,
                    const QuadratureSpec& spec) {
    params.require_domain();
    const PhaseNodes nodes(params.v_phi, spec);
    double acc = 0.0;
    for (std::size_t i = 0; i < nodes.phi.size(); ++i) {
        const double v = rotated_variance(params, nodes.phi[i] + theta.theta);
        acc += (*nodes.w)[i] * std::exp(-x * x / (2.0 * v)) / std::sqrt(v);
    }
    return acc / std::sqrt(2.0 * kPi);
}

std::vector<double> bin_probabilities(const StateParams& params, PhaseQuadrature theta,
                                      std::span<const double> interior_edges,
                                      const QuadratureSpec& spec) {
    params.require_domain();
    for (std::size_t l = 0; l + 1 < interior_edges.size(); ++l) {
        if (!(interior_edges[l] < interior_edges[l + 1]))
            throw InputError("bin_probabilities: interior edges must be strictly increasing");
    }
    for (double e : interior_edges) {
        if (!std::isfinite(e)) throw InputError("bin_probabilities: edges must be finite");
    }

    const PhaseNodes nodes(params.v_phi, spec);
    const std::size_t n_bins = interior_edges.size() + 1;
    std::vector<double> prob(n_bins, 0.0);
    for (std::size_t i = 0; i < nodes.phi.size(); ++i) {
        const double inv_sd = 1.0 / std::sqrt(rotated_variance(params, nodes.phi[i] + theta.theta));
        const double wi = (*nodes.w)[i];
        double prev_cdf = 0.0;
        for (std::size_t l = 0; l < interior_edges.size(); ++l) {
            const double cdf = normal_cdf(interior_edges[l] * inv_sd);
            prob[l] += wi * (cdf - prev_cdf);
            prev_cdf = cdf;
        }
        prob[n_bins - 1] += wi * (1.0 - prev_cdf);
    }
    return prob;
}

double purity(const StateParams& params, const QuadratureSpec& spec) {
    params.require_domain();
    const PhaseNodes nodes(params.v_phi, spec);
    const std::size_t n = nodes.phi.size();

    // Rotated covariance entries: S11 = Vt(phi), S22 = Vt(phi + pi/2),
    // S12 = (v_x - v_p) sin(phi) cos(phi).
    std::vector<double> s11(n), s22(n), s12(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = std::cos(nodes.phi[i]);
        const double s = std::sin(nodes.phi[i]);
        s11[i] = params.v_x * c * c + params.v_p * s * s;
        s22[i] = params.v_x * s * s + params.v_p * c * c;
        s12[i] = (params.v_x - params.v_p) * s * c;
    }

    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Diagonal term plus doubled upper triangle.
        const double dii = (s11[i] + s11[i]) * (s22[i] + s22[i]) - (s12[i] + s12[i]) * (s12[i] + s12[i]);
        acc += (*nodes.w)[i] * (*nodes.w)[i] / std::sqrt(dii);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a11 = s11[i] + s11[j];
            const double a22 = s22[i] + s22[j];
            const double a12 = s12[i] + s12[j];
            acc += 2.0 * (*nodes.w)[i] * (*nodes.w)[j] / std::sqrt(a11 * a22 - a12 * a12);
        }
    }
    return 2.0 * acc;
}

bool phase_wrap_caution(const StateParams& params) {
    return std::sqrt(params.v_phi) > kPi / 2.0;
}

}  // namespace sqtom
