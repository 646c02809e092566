#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sqtom/analysis.hpp"
#include "sqtom/data.hpp"
#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"

using namespace sqtom;

namespace {

const StateParams kTableOne{0.316, 6.889, 0.171};

Chain chain_from_params(const std::vector<StateParams>& values) {
    Chain chain;
    chain.burn_in = 0;
    chain.thin = 1;
    for (const auto& v : values) chain.states.push_back({v, {0.0}, true});
    return chain;
}

Dataset table_one_dataset(std::size_t n_per_setting, std::uint64_t seed, int bins = 70) {
    Dataset ds;
    int k = 0;
    for (double theta : {0.0, kPi / 2}) {
        const auto set = simulate_samples(kTableOne, {theta}, n_per_setting,
                                          derive_seed(seed, seed_stream::simulate, k++));
        ds.histograms.push_back(bin_samples(set, bins));
    }
    return ds;
}

// Synthetic "posterior" cloud with known moments and correlation.
std::vector<StateParams> gaussian_cloud(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<StateParams> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = draw_normal(rng);
        const double b = 0.6 * a + 0.8 * draw_normal(rng);
        const double c = -0.3 * a + draw_normal(rng) * 0.2;
        out.push_back({3.0 + 0.1 * a, 5.0 + 0.25 * b, 0.5 + 0.05 * c});
    }
    return out;
}

// Eigenvalues of a symmetric 3x3 matrix (trigonometric closed form).
std::array<double, 3> sym_eigenvalues(const Matrix3& a) {
    const double p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    if (p1 == 0.0) return {a[0][0], a[1][1], a[2][2]};
    const double q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    double p2 = 2.0 * p1;
    for (int i = 0; i < 3; ++i) p2 += (a[i][i] - q) * (a[i][i] - q);
    const double p = std::sqrt(p2 / 6.0);
    Matrix3 b{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) b[i][j] = (a[i][j] - (i == j ? q : 0.0)) / p;
    const double detb = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) -
                        b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0]) +
                        b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    const double r = std::clamp(detb / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
    return {e1, 3.0 * q - e1 - e3, e3};
}

}  // namespace

TEST_SUITE_BEGIN("analysis");

TEST_CASE("summarize matches hand-computed statistics on a tiny profile") {
    // Four distinct values replicated 25x (the minimum retained count is 100).
    const std::vector<double> vx{0.3, 0.32, 0.34, 0.3};
    const std::vector<double> vp{6.0, 7.0, 6.5, 6.1};
    const std::vector<double> vphi{0.1, 0.2, 0.15, 0.18};
    std::vector<StateParams> values;
    for (int rep = 0; rep < 25; ++rep)
        for (int i = 0; i < 4; ++i) values.push_back({vx[i], vp[i], vphi[i]});
    const Chain chain = chain_from_params(values);
    const auto s = summarize(std::vector<Chain>{chain});
    CHECK(s.n_retained == 100);

    auto stats = [](const std::vector<double>& four) {
        double m = (four[0] + four[1] + four[2] + four[3]) / 4.0;
        double ss = 0.0;
        for (double v : four) ss += (v - m) * (v - m);
        // 25 copies: SS scales by 25, denominator is n-1 = 99
        return std::pair{m, std::sqrt(25.0 * ss / 99.0)};
    };
    const auto [mx, sx] = stats(vx);
    const auto [mp, sp] = stats(vp);
    const auto [mf, sf] = stats(vphi);
    CHECK(s.mean[0] == doctest::Approx(mx).epsilon(1e-14));
    CHECK(s.mean[1] == doctest::Approx(mp).epsilon(1e-14));
    CHECK(s.mean[2] == doctest::Approx(mf).epsilon(1e-14));
    CHECK(s.std[0] == doctest::Approx(sx).epsilon(1e-13));
    CHECK(s.std[1] == doctest::Approx(sp).epsilon(1e-13));
    CHECK(s.std[2] == doctest::Approx(sf).epsilon(1e-13));
    for (int i = 0; i < 3; ++i) {
        CHECK(s.correlation[i][i] == doctest::Approx(1.0).epsilon(1e-12));
        for (int j = 0; j < 3; ++j) {
            CHECK(s.correlation[i][j] == doctest::Approx(s.correlation[j][i]).epsilon(1e-14));
            CHECK(std::abs(s.correlation[i][j]) <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("summarize rejects degenerate and undersized chains") {
    const Chain constant = chain_from_params(std::vector<StateParams>(200, {3.0, 4.0, 0.1}));
    CHECK_THROWS_AS(summarize(std::vector<Chain>{constant}), NumericalError);
    const Chain tiny = chain_from_params(std::vector<StateParams>(8, {3.0, 4.0, 0.1}));
    CHECK_THROWS_AS(summarize(std::vector<Chain>{tiny}), InputError);
}

TEST_CASE("correlation matrix is positive semidefinite") {
    const Chain chain = chain_from_params(gaussian_cloud(5000, 404));
    const auto s = summarize(std::vector<Chain>{chain});
    for (double eig : sym_eigenvalues(s.correlation)) CHECK(eig > -1e-10);
}

TEST_CASE("marginal histogram integrates to one") {
    const Chain chain = chain_from_params(gaussian_cloud(3000, 405));
    for (Param id : {Param::v_x, Param::v_p, Param::v_phi}) {
        const auto m = marginal_histogram(std::vector<Chain>{chain}, id, 60);
        REQUIRE(m.centers.size() == 60);
        double integral = 0.0;
        const double width = m.centers[1] - m.centers[0];
        for (double d : m.density) {
            CHECK(d >= 0.0);
            integral += d * width;
        }
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("marginal of a constant sequence is a single spike") {
    const Chain chain = chain_from_params(std::vector<StateParams>(150, {2.0, 3.0, 0.25}));
    const auto m = marginal_histogram(std::vector<Chain>{chain}, Param::v_p, 10);
    const double width = m.centers[1] - m.centers[0];
    int nonzero = 0;
    for (double d : m.density) {
        if (d > 0.0) {
            ++nonzero;
            CHECK(d == doctest::Approx(1.0 / width).epsilon(1e-12));
        }
    }
    CHECK(nonzero == 1);
}

TEST_CASE("marginal mode sits near the mean for a unimodal cloud") {
    const Chain chain = chain_from_params(gaussian_cloud(20000, 406));
    const auto s = summarize(std::vector<Chain>{chain});
    for (int i = 0; i < 3; ++i) {
        const auto m = marginal_histogram(std::vector<Chain>{chain}, Param(i), 50);
        const auto it = std::max_element(m.density.begin(), m.density.end());
        const double mode = m.centers[it - m.density.begin()];
        CHECK(std::abs(mode - s.mean[i]) < 2.0 * s.std[i]);
    }
}

TEST_CASE("marginal requires enough samples") {
    const Chain chain = chain_from_params(gaussian_cloud(30, 407));
    CHECK_THROWS_AS(marginal_histogram(std::vector<Chain>{chain}, Param::v_x, 50), InputError);
}

TEST_CASE("gelman_rubin limits") {
    const Chain a = chain_from_params(gaussian_cloud(500, 408));
    Chain b = a;  // identical copy: B = 0
    const double n = double(a.states.size());
    const double rhat = gelman_rubin(std::vector<Chain>{a, b}, Param::v_x);
    CHECK(rhat == doctest::Approx(std::sqrt((n - 1.0) / n)).epsilon(1e-12));

    const Chain c1 = chain_from_params(std::vector<StateParams>(200, {2.0, 3.0, 0.1}));
    const Chain c2 = chain_from_params(std::vector<StateParams>(200, {4.0, 3.0, 0.1}));
    CHECK(gelman_rubin(std::vector<Chain>{c1, c2}, Param::v_x) ==
          std::numeric_limits<double>::infinity());

    CHECK_THROWS_AS(gelman_rubin(std::vector<Chain>{a}, Param::v_x), InputError);
}

TEST_CASE("gelman_rubin near one for well-mixed chains") {
    std::vector<Chain> chains;
    for (int c = 0; c < 4; ++c) chains.push_back(chain_from_params(gaussian_cloud(2000, 500 + c)));
    for (Param id : {Param::v_x, Param::v_p, Param::v_phi}) {
        const double rhat = gelman_rubin(chains, id);
        CHECK(rhat < 1.1);
        CHECK(rhat > 0.9);
    }
}

TEST_CASE("fisher matrix symmetry, positivity, and the 5-point stencil oracle") {
    const auto ds = table_one_dataset(100000, 606);
    const auto fm = fisher_matrix(kTableOne, ds);

    double fmax = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) fmax = std::max(fmax, std::abs(fm.matrix[i][j]));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(fm.matrix[i][j] - fm.matrix[j][i]) <= 1e-10 * fmax);
    for (int i = 0; i < 3; ++i) CHECK(fm.sigma[i] > 0.0);

    // Independent 5-point-stencil recomputation of F.
    Matrix3 oracle{};
    for (const auto& hist : ds.histograms) {
        const double n_theta = double(hist.total());
        const auto p0 = bin_probabilities(kTableOne, hist.theta, hist.interior_edges);
        std::array<std::vector<double>, 3> dp;
        for (int i = 0; i < 3; ++i) {
            auto shifted = [&](double mult) {
                StateParams q = kTableOne;
                double& f = i == 0 ? q.v_x : i == 1 ? q.v_p : q.v_phi;
                const double h = 1e-5 * std::abs(f);
                f += mult * h;
                return bin_probabilities(q, hist.theta, hist.interior_edges);
            };
            const double h = 1e-5 * std::abs(i == 0   ? kTableOne.v_x
                                             : i == 1 ? kTableOne.v_p
                                                      : kTableOne.v_phi);
            const auto pp2 = shifted(2.0), pp1 = shifted(1.0), pm1 = shifted(-1.0),
                       pm2 = shifted(-2.0);
            dp[i].resize(p0.size());
            for (std::size_t l = 0; l < p0.size(); ++l)
                dp[i][l] = (-pp2[l] + 8.0 * pp1[l] - 8.0 * pm1[l] + pm2[l]) / (12.0 * h);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < p0.size(); ++l)
                    acc += dp[i][l] * dp[j][l] / std::max(p0[l], 1e-300);
                oracle[i][j] += n_theta * acc;
            }
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(fm.matrix[i][j] - oracle[i][j]) <= 1e-6 * std::abs(oracle[i][j]));
}

TEST_CASE("fisher scales linearly in the counts") {
    const auto ds = table_one_dataset(20000, 607, 40);
    const auto base = fisher_matrix(kTableOne, ds);
    auto doubled = ds;
    for (auto& h : doubled.histograms)
        for (auto& c : h.counts) c *= 2;
    const auto twice = fisher_matrix(kTableOne, doubled);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            CHECK(twice.matrix[i][j] == doctest::Approx(2.0 * base.matrix[i][j]).epsilon(1e-14));
        CHECK(twice.sigma[i] ==
              doctest::Approx(base.sigma[i] / std::sqrt(2.0)).epsilon(1e-10));
    }
}

TEST_CASE("fisher of a single-bin dataset is singular") {
    Dataset ds;
    ds.histograms.push_back({{0.0}, {}, {1000}});
    CHECK_THROWS_AS(fisher_matrix(kTableOne, ds), NumericalError);
}

TEST_CASE("compare reports unit ratios for matching inputs") {
    PosteriorSummary s;
    s.std = {0.005, 0.03, 0.002};
    FisherMatrix f;
    f.sigma = {0.005, 0.03, 0.002};
    const auto report = compare(s, f);
    for (double r : report.ratio) CHECK(r == 1.0);
    CHECK_FALSE(report.table(s, f).empty());
}

TEST_CASE("derived_posterior of the identity reproduces the marginal") {
    const Chain chain = chain_from_params(gaussian_cloud(4000, 609));
    const auto direct = marginal_histogram(std::vector<Chain>{chain}, Param::v_x, 40);
    const auto derived = derived_posterior(
        std::vector<Chain>{chain}, [](const StateParams& p) { return p.v_x; }, 40);
    CHECK(derived.marginal.centers == direct.centers);
    CHECK(derived.marginal.density == direct.density);

    // explicit composition: applying f to identity-mapped samples changes nothing
    std::vector<double> manual;
    for (const auto& p : chain.retained_params()) manual.push_back(p.v_x);
    CHECK(derived.values == manual);
}

TEST_CASE("derived_posterior of a constant is a zero-width spike") {
    const Chain chain = chain_from_params(gaussian_cloud(500, 610));
    const auto d = derived_posterior(
        std::vector<Chain>{chain}, [](const StateParams&) { return 7.25; }, 10);
    CHECK(d.mean == doctest::Approx(7.25).epsilon(1e-15));
    CHECK(d.std == 0.0);
}

TEST_CASE("derived_posterior names the offending sample on non-finite values") {
    const Chain chain = chain_from_params(gaussian_cloud(300, 611));
    CHECK_THROWS_WITH_AS(
        derived_posterior(
            std::vector<Chain>{chain},
            [](const StateParams& p) {
                return p.v_x > 3.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
            },
            10),
        doctest::Contains("non-finite"), NumericalError);
}

TEST_CASE("derived_posterior is independent of the thread count") {
    const Chain chain = chain_from_params(gaussian_cloud(2000, 612));
    const auto f = [](const StateParams& p) { return p.v_x * p.v_p + p.v_phi; };
    const auto one = derived_posterior(std::vector<Chain>{chain}, f, 25, 1);
    const auto four = derived_posterior(std::vector<Chain>{chain}, f, 25, 4);
    CHECK(one.values == four.values);
    CHECK(one.mean == four.mean);
    CHECK(one.std == four.std);
}

TEST_CASE("posterior width shrinks with the square root of the data volume") {
    SamplerConfig config;
    config.iterations = 4000;
    config.burn_in = 1000;
    config.thin = 5;
    config.n_chains = 2;
    config.seed = 777;

    const auto small = table_one_dataset(5000, 613, 40);
    const auto big = table_one_dataset(20000, 614, 40);
    const auto s_small = summarize(run_chains(small, config, 2));
    const auto s_big = summarize(run_chains(big, config, 2));
    for (int i = 0; i < 3; ++i) {
        const double shrink = s_small.std[i] / s_big.std[i];
        CHECK(shrink > 1.5);
        CHECK(shrink < 2.5);
    }
}

TEST_SUITE_END();
