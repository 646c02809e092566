#pragma once

#include <span>
#include <vector>

namespace sqtom {

// Parameter vector of the phase-diffused squeezed vacuum model. Variances
// are vacuum-normalized (vacuum: v_x = v_p = 1); v_phi is the variance of
// the zero-mean Gaussian phase noise in rad^2.
struct StateParams {
    double v_x = 1.0;
    double v_p = 1.0;
    double v_phi = 0.0;

    // Positivity plus the Heisenberg constraint v_x * v_p >= 1 (the boundary
    // counts as physical).
    bool physical() const;
    void require_physical() const;  // throws InputError

    // Where the model map itself is defined: v_x > 0, v_p > 0, v_phi >= 0,
    // all finite. The Heisenberg constraint is the prior's support, enforced
    // by the sampler and likelihood, not by the forward model (Fisher
    // derivatives may straddle the boundary).
    bool in_domain() const;
    void require_domain() const;
};

// One homodyne measurement setting. The model is pi-periodic in theta.
struct PhaseQuadrature {
    double theta = 0.0;  // radians

    double canonical() const;  // wrapped into [0, pi)
};

// Node count for the Gauss-Hermite discretization of the phase integral.
struct QuadratureSpec {
    int nodes = 320;

    void validate() const;  // nodes >= 8
};

// Vt(phi) = v_x cos^2(phi) + v_p sin^2(phi): variance of the quadrature
// rotated by phi.
double rotated_variance(const StateParams& params, double phi);

// Wigner function of the phase-diffused state at phase-space point (x, p):
// the Gaussian mixture over phi ~ N(0, v_phi).
double wigner(const StateParams& params, double x, double p, const QuadratureSpec& spec = {});

// Homodyne marginal density p(x | theta): mixture of zero-mean Gaussians
// with variance Vt(phi + theta), phi ~ N(0, v_phi).
double homodyne_pdf(const StateParams& params, PhaseQuadrature theta, double x,
                    const QuadratureSpec& spec = {});

// Outcome probabilities of binned homodyne detection. interior_edges are the
// L-1 strictly increasing finite bin boundaries; the outer bins extend to
// +-infinity, so the result has interior_edges.size() + 1 entries summing
// to 1. The x-integral over each bin is done analytically per phase node as
// a difference of normal CDFs.
std::vector<double> bin_probabilities(const StateParams& params, PhaseQuadrature theta,
                                      std::span<const double> interior_edges,
                                      const QuadratureSpec& spec = {});

// Purity 4*pi*int int W^2 dx dp, evaluated as the pairwise overlap of the
// mixture's Gaussian components:
//   mu = 2 E_{phi,phi'}[ det(S(phi) + S(phi'))^(-1/2) ],
// S(phi) the rotated covariance diag(v_x, v_p). Exact 1/sqrt(v_x v_p) at
// v_phi = 0, and 1 for vacuum.
double purity(const StateParams& params, const QuadratureSpec& spec = {});

// Phase noise is modeled on the real line, not wrapped on the circle; when
// sqrt(v_phi) exceeds pi/2 the distinction starts to matter.
bool phase_wrap_caution(const StateParams& params);

}  // namespace sqtom
