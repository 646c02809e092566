#include "sqtom/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"

namespace sqtom {

namespace {

constexpr std::size_t kMinRetained = 100;

std::vector<StateParams> pooled_retained(std::span<const Chain> chains) {
    std::vector<StateParams> pooled;
    for (const auto& chain : chains) {
        auto r = chain.retained_params();
        pooled.insert(pooled.end(), r.begin(), r.end());
    }
    return pooled;
}

std::vector<double> pooled_values(std::span<const Chain> chains, Param id) {
    std::vector<double> v;
    for (const auto& chain : chains)
        for (std::size_t i : chain.retained_indices())
            v.push_back(param_value(chain.states[i].params, id));
    return v;
}

double mean_of(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / double(v.size());
}

double variance_of(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / double(v.size() - 1);
}

Marginal histogram_of(std::span<const double> values, Param id, int n_bins) {
    if (n_bins < 1) throw InputError("marginal_histogram: n_bins must be >= 1");
    if (values.size() < std::size_t(n_bins))
        throw InputError("marginal_histogram: fewer retained samples than bins");

    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        // constant sequence: all mass in one bin of a tiny symmetric range
        const double pad = std::max(1e-12, std::abs(lo) * 1e-12);
        lo -= pad;
        hi += pad;
    }
    const double width = (hi - lo) / n_bins;

    Marginal marginal;
    marginal.parameter = id;
    marginal.centers.resize(n_bins);
    marginal.density.assign(n_bins, 0.0);
    for (int b = 0; b < n_bins; ++b) marginal.centers[b] = lo + (b + 0.5) * width;
    for (double x : values) {
        int b = int((x - lo) / width);
        b = std::clamp(b, 0, n_bins - 1);  // x == hi lands in the last bin
        marginal.density[b] += 1.0;
    }
    for (double& d : marginal.density) d /= double(values.size()) * width;
    return marginal;
}

}  // namespace

double param_value(const StateParams& p, Param id) {
    switch (id) {
        case Param::v_x: return p.v_x;
        case Param::v_p: return p.v_p;
        case Param::v_phi: return p.v_phi;
    }
    throw InputError("unknown parameter id");
}

PosteriorSummary summarize(std::span<const Chain> chains) {
    const auto pooled = pooled_retained(chains);
    if (pooled.size() < kMinRetained)
        throw InputError("summarize: need >= " + std::to_string(kMinRetained) +
                         " retained samples, have " + std::to_string(pooled.size()));

    PosteriorSummary s;
    s.n_retained = pooled.size();
    std::array<std::vector<double>, 3> cols;
    for (int i = 0; i < 3; ++i) {
        cols[i].reserve(pooled.size());
        for (const auto& p : pooled) cols[i].push_back(param_value(p, Param(i)));
        s.mean[i] = mean_of(cols[i]);
        s.std[i] = std::sqrt(variance_of(cols[i], s.mean[i]));
        if (s.std[i] == 0.0)
            throw NumericalError("summarize: degenerate chain, zero variance in " +
                                 std::string(kParamNames[i]));
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double cov = 0.0;
            for (std::size_t k = 0; k < pooled.size(); ++k)
                cov += (cols[i][k] - s.mean[i]) * (cols[j][k] - s.mean[j]);
            cov /= double(pooled.size() - 1);
            s.correlation[i][j] = cov / (s.std[i] * s.std[j]);
        }
    }
    return s;
}

Marginal marginal_histogram(std::span<const Chain> chains, Param id, int n_bins) {
    return histogram_of(pooled_values(chains, id), id, n_bins);
}

double gelman_rubin(std::span<const Chain> chains, Param id) {
    if (chains.size() < 2) throw InputError("gelman_rubin: need >= 2 chains");
    const std::size_t m = chains.size();

    std::vector<std::vector<double>> per_chain;
    for (const auto& chain : chains) {
        std::vector<double> v;
        for (std::size_t i : chain.retained_indices())
            v.push_back(param_value(chain.states[i].params, id));
        per_chain.push_back(std::move(v));
    }
    const std::size_t n = per_chain[0].size();
    for (const auto& v : per_chain) {
        if (v.size() != n) throw InputError("gelman_rubin: chains have unequal retained lengths");
    }
    if (n < 2) throw InputError("gelman_rubin: need >= 2 retained samples per chain");

    std::vector<double> means(m);
    double w = 0.0;
    for (std::size_t c = 0; c < m; ++c) {
        means[c] = mean_of(per_chain[c]);
        w += variance_of(per_chain[c], means[c]);
    }
    w /= double(m);

    const double grand = mean_of(means);
    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= double(n) / double(m - 1);

    if (w == 0.0) {
        if (b == 0.0) return 1.0;  // identical constant chains
        return std::numeric_limits<double>::infinity();
    }
    const double nn = double(n);
    return std::sqrt((w * (nn - 1.0) / nn + b / nn) / w);
}

FisherMatrix fisher_matrix(const StateParams& params, const Dataset& data,
                           const QuadratureSpec& spec) {
    params.require_physical();
    data.validate();

    constexpr double kRelStep = 1e-5;
    FisherMatrix fm;
    for (const auto& hist : data.histograms) {
        const double n_theta = double(hist.total());
        if (n_theta < 1) throw InputError("fisher_matrix: setting with zero counts");

        const auto p0 = bin_probabilities(params, hist.theta, hist.interior_edges, spec);
        std::array<std::vector<double>, 3> dp;
        for (int i = 0; i < 3; ++i) {
            auto field = [i](StateParams& q) -> double& {
                return i == 0 ? q.v_x : i == 1 ? q.v_p : q.v_phi;
            };
            StateParams plus = params, minus = params;
            const double h = kRelStep * std::max(std::abs(field(plus)), 1e-8);
            field(plus) += h;
            field(minus) -= h;
            dp[i].resize(p0.size());
            if (minus.in_domain()) {
                const auto pp = bin_probabilities(plus, hist.theta, hist.interior_edges, spec);
                const auto pm = bin_probabilities(minus, hist.theta, hist.interior_edges, spec);
                for (std::size_t l = 0; l < p0.size(); ++l)
                    dp[i][l] = (pp[l] - pm[l]) / (2.0 * h);
            } else {
                // second-order one-sided stencil at the v_phi = 0 boundary
                StateParams plus2 = params;
                field(plus2) += 2.0 * h;
                const auto pp = bin_probabilities(plus, hist.theta, hist.interior_edges, spec);
                const auto pp2 = bin_probabilities(plus2, hist.theta, hist.interior_edges, spec);
                for (std::size_t l = 0; l < p0.size(); ++l)
                    dp[i][l] = (-3.0 * p0[l] + 4.0 * pp[l] - pp2[l]) / (2.0 * h);
            }
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < p0.size(); ++l) {
                    const double p = std::max(p0[l], 1e-300);
                    acc += dp[i][l] * dp[j][l] / p;
                }
                fm.matrix[i][j] += n_theta * acc;
                if (i != j) fm.matrix[j][i] = fm.matrix[i][j];
            }
        }
    }

    // 3x3 inverse via the adjugate; reject near-singular matrices.
    const auto& f = fm.matrix;
    const double det = f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) -
                       f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0]) +
                       f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
    double scale = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) scale = std::max(scale, std::abs(f[i][j]));
    if (scale == 0.0 || std::abs(det) < 1e-12 * scale * scale * scale)
        throw NumericalError("fisher_matrix: singular Fisher matrix (uninformative binning)");

    const double inv00 = (f[1][1] * f[2][2] - f[1][2] * f[2][1]) / det;
    const double inv11 = (f[0][0] * f[2][2] - f[0][2] * f[2][0]) / det;
    const double inv22 = (f[0][0] * f[1][1] - f[0][1] * f[1][0]) / det;
    for (int i = 0; i < 3; ++i) {
        const double v = i == 0 ? inv00 : i == 1 ? inv11 : inv22;
        if (v <= 0.0)
            throw NumericalError("fisher_matrix: Fisher matrix not positive definite");
        fm.sigma[i] = std::sqrt(v);
    }
    return fm;
}

ComparisonReport compare(const PosteriorSummary& summary, const FisherMatrix& fisher) {
    ComparisonReport report;
    for (int i = 0; i < 3; ++i) report.ratio[i] = summary.std[i] / fisher.sigma[i];
    return report;
}

std::string ComparisonReport::table(const PosteriorSummary& summary,
                                    const FisherMatrix& fisher) const {
    char buf[160];
    std::string out = "parameter  sigma_mcmc   sigma_fisher  ratio\n";
    for (int i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof(buf), "%-9s  %-11.4g  %-12.4g  %.4f\n", kParamNames[i],
                      summary.std[i], fisher.sigma[i], ratio[i]);
        out += buf;
    }
    return out;
}

DerivedPosterior derived_posterior(std::span<const Chain> chains,
                                   const std::function<double(const StateParams&)>& f,
                                   int n_bins, unsigned threads) {
    const auto pooled = pooled_retained(chains);
    if (pooled.size() < kMinRetained)
        throw InputError("derived_posterior: need >= " + std::to_string(kMinRetained) +
                         " retained samples, have " + std::to_string(pooled.size()));

    DerivedPosterior d;
    d.values.resize(pooled.size());
    parallel_for_blocks(pooled.size(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) d.values[i] = f(pooled[i]);
    });
    for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (!std::isfinite(d.values[i])) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "derived_posterior: non-finite value at retained sample %zu "
                          "(v_x=%.6g, v_p=%.6g, v_phi=%.6g)",
                          i, pooled[i].v_x, pooled[i].v_p, pooled[i].v_phi);
            throw NumericalError(buf);
        }
    }
    d.mean = mean_of(d.values);
    const double var = d.values.size() > 1 ? variance_of(d.values, d.mean) : 0.0;
    d.std = std::sqrt(std::max(0.0, var));
    d.marginal = histogram_of(d.values, Param::v_x, n_bins);
    return d;
}

void save_summary_json(const std::string& path, const PosteriorSummary& summary,
                       const FisherMatrix* fisher, const ComparisonReport* ratios,
                       const std::array<double, 3>* r_hat, double acceptance_rate,
                       const DerivedPosterior* purity, const Metadata& meta) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);

    auto arr3 = [](const std::array<double, 3>& a) {
        return "[" + io::format_double(a[0]) + ", " + io::format_double(a[1]) + ", " +
               io::format_double(a[2]) + "]";
    };
    os << "{\n";
    os << "  \"means\": " << arr3(summary.mean) << ",\n";
    os << "  \"stds\": " << arr3(summary.std) << ",\n";
    os << "  \"correlation\": [";
    for (int i = 0; i < 3; ++i) {
        os << (i ? ", " : "") << arr3(summary.correlation[i]);
    }
    os << "],\n";
    if (fisher) {
        os << "  \"fisher_sigma\": " << arr3(fisher->sigma) << ",\n";
        os << "  \"fisher_matrix\": [";
        for (int i = 0; i < 3; ++i) os << (i ? ", " : "") << arr3(fisher->matrix[i]);
        os << "],\n";
    }
    if (ratios) os << "  \"ratios\": " << arr3(ratios->ratio) << ",\n";
    if (r_hat) os << "  \"r_hat\": " << arr3(*r_hat) << ",\n";
    if (purity) {
        os << "  \"purity_mean\": " << io::format_double(purity->mean) << ",\n";
        os << "  \"purity_std\": " << io::format_double(purity->std) << ",\n";
    }
    os << "  \"acceptance_rate\": " << io::format_double(acceptance_rate) << ",\n";
    os << "  \"n_retained\": " << summary.n_retained;
    if (!meta.empty()) os << ",\n  \"meta\": " << io::meta_json(meta);
    os << "\n}\n";
    if (!os) throw InputError("write failed: " + path);
}

void save_marginal_csv(const Marginal& marginal, const std::string& path, const Metadata& meta) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);
    io::write_meta_comments(os, meta);
    os << "center,density\n";
    for (std::size_t i = 0; i < marginal.centers.size(); ++i)
        os << io::format_double(marginal.centers[i]) << ","
           << io::format_double(marginal.density[i]) << "\n";
    if (!os) throw InputError("write failed: " + path);
}

}  // namespace sqtom
