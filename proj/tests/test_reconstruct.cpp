#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"
#include "sqtom/reconstruct.hpp"
#include "sqtom/rng.hpp"

using namespace sqtom;
namespace fs = std::filesystem;

namespace {

const StateParams kVacuum{1.0, 1.0, 0.0};
const StateParams kTableOne{0.316, 6.889, 0.171};

Chain chain_from_params(const std::vector<StateParams>& values) {
    Chain chain;
    chain.burn_in = 0;
    chain.thin = 1;
    for (const auto& v : values) chain.states.push_back({v, {0.0}, true});
    return chain;
}

// Small jittered cloud standing in for a converged posterior.
std::vector<StateParams> jittered(const StateParams& center, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<StateParams> out;
    while (out.size() < n) {
        StateParams p{center.v_x + 0.006 * draw_normal(rng), center.v_p + 0.03 * draw_normal(rng),
                      center.v_phi + 0.002 * draw_normal(rng)};
        if (p.physical()) out.push_back(p);
    }
    return out;
}

}  // namespace

TEST_SUITE_BEGIN("reconstruct");

TEST_CASE("single vacuum sample gives the vacuum Gaussian with zero spread") {
    const Chain chain = chain_from_params({kVacuum});
    GridSpec grid;
    grid.x_min = -3;
    grid.x_max = 3;
    grid.p_min = -3;
    grid.p_max = 3;
    grid.nx = grid.np = 21;
    const auto w = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 10, 1);
    for (int ix = 0; ix < grid.nx; ++ix) {
        for (int ip = 0; ip < grid.np; ++ip) {
            const double x = w.x_axis[ix], p = w.p_axis[ip];
            const double expect = std::exp(-(x * x + p * p) / 2.0) / (2.0 * kPi);
            CHECK(w.at_mean(ix, ip) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(w.at_std(ix, ip) == 0.0);
        }
    }
}

TEST_CASE("grid mean is centrally symmetric") {
    const Chain chain = chain_from_params(jittered(kTableOne, 40, 42));
    GridSpec grid;
    grid.x_min = -2;
    grid.x_max = 2;
    grid.p_min = -5;
    grid.p_max = 5;
    grid.nx = 15;
    grid.np = 17;
    const auto w = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 40, 2);
    for (int ix = 0; ix < grid.nx; ++ix)
        for (int ip = 0; ip < grid.np; ++ip)
            CHECK(std::abs(w.at_mean(ix, ip) - w.at_mean(grid.nx - 1 - ix, grid.np - 1 - ip)) <
                  1e-10);
}

TEST_CASE("constant chain gives zero spread, varied chain does not") {
    const Chain constant = chain_from_params(std::vector<StateParams>(25, kTableOne));
    GridSpec grid;
    grid.nx = grid.np = 9;
    grid.x_min = -2;
    grid.x_max = 2;
    grid.p_min = -6;
    grid.p_max = 6;
    const auto w0 = reconstruct_wigner(std::vector<Chain>{constant}, grid, {}, 25, 1);
    for (double s : w0.std) CHECK(s == 0.0);

    const Chain varied = chain_from_params(jittered(kTableOne, 25, 7));
    const auto w1 = reconstruct_wigner(std::vector<Chain>{varied}, grid, {}, 25, 1);
    double max_std = 0.0;
    for (double s : w1.std) max_std = std::max(max_std, s);
    CHECK(max_std > 0.0);
}

TEST_CASE("posterior-mean cell agrees with the center parameters within its spread") {
    const Chain chain = chain_from_params(jittered(kTableOne, 200, 11));
    GridSpec grid;
    grid.nx = grid.np = 3;
    grid.x_min = -0.5;
    grid.x_max = 0.5;
    grid.p_min = -0.5;
    grid.p_max = 0.5;
    const auto w = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 200, 2);
    const double center_value = wigner(kTableOne, 0.0, 0.0);
    const int mid = 1;
    CHECK(std::abs(w.at_mean(mid, mid) - center_value) <
          3.0 * std::max(w.at_std(mid, mid), 1e-12));
}

TEST_CASE("grid mean integrates to one") {
    const Chain chain = chain_from_params(jittered(kTableOne, 20, 13));
    GridSpec grid;
    grid.x_min = -15;
    grid.x_max = 15;
    grid.p_min = -15;
    grid.p_max = 15;
    grid.nx = grid.np = 301;
    const auto w = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 20, 0);
    const double hx = w.x_axis[1] - w.x_axis[0];
    const double hp = w.p_axis[1] - w.p_axis[0];
    double total = 0.0;
    for (int ix = 0; ix < grid.nx; ++ix) {
        const double wx = (ix == 0 || ix == grid.nx - 1) ? 0.5 : 1.0;
        for (int ip = 0; ip < grid.np; ++ip) {
            const double wp = (ip == 0 || ip == grid.np - 1) ? 0.5 : 1.0;
            total += wx * wp * w.at_mean(ix, ip);
        }
    }
    CHECK(total * hx * hp == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("subsample growth stabilizes the grid") {
    const Chain chain = chain_from_params(jittered(kTableOne, 400, 17));
    GridSpec grid;
    grid.nx = grid.np = 11;
    grid.x_min = -2;
    grid.x_max = 2;
    grid.p_min = -6;
    grid.p_max = 6;
    const auto w200 = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 200, 2);
    const auto w400 = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 400, 2);
    for (std::size_t cell = 0; cell < w200.mean.size(); ++cell) {
        const double bound = 3.0 * w400.std[cell] / std::sqrt(200.0) + 1e-14;
        CHECK(std::abs(w200.mean[cell] - w400.mean[cell]) <= bound);
    }
}

TEST_CASE("empty chain set is rejected") {
    CHECK_THROWS_AS(reconstruct_wigner(std::vector<Chain>{}, GridSpec{}, {}, 10, 1), InputError);
    CHECK_THROWS_AS(
        reconstruct_wigner(std::vector<Chain>{}, GridSpec{0, 0, 0, 0, 5, 5}, {}, 10, 1),
        InputError);
}

TEST_CASE("wigner CSV layout is row-major with x slow") {
    const Chain chain = chain_from_params({kVacuum});
    GridSpec grid;
    grid.nx = 2;
    grid.np = 3;
    grid.x_min = 0;
    grid.x_max = 1;
    grid.p_min = 0;
    grid.p_max = 2;
    const auto w = reconstruct_wigner(std::vector<Chain>{chain}, grid, {}, 1, 1);
    const auto path = fs::temp_directory_path() / "sqtom_wigner_layout.csv";
    save_wigner_csv(w, path.string(), {{"seed", "0"}});

    std::ifstream is(path);
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(is, line))
        if (!line.empty() && line[0] != '#') rows.push_back(line);
    fs::remove(path);
    REQUIRE(rows.size() == 7);  // header + 6 cells
    CHECK(rows[0] == "x,p,mean,std");
    CHECK(rows[1].rfind("0,0,", 0) == 0);
    CHECK(rows[2].rfind("0,1,", 0) == 0);
    CHECK(rows[3].rfind("0,2,", 0) == 0);
    CHECK(rows[4].rfind("1,0,", 0) == 0);
}

TEST_SUITE_END();
