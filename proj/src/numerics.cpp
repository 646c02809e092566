#include "sqtom/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sqtom {

namespace {

// Roots and weights of the physicists' Hermite polynomial H_n via Newton
// iteration on the orthonormal three-term recurrence.
GaussianQuadratureRule build_rule(int n) {
    if (n < 1) throw std::invalid_argument("gauss_hermite: n must be >= 1");

    std::vector<double> x(n), w(n);
    const double pim4 = 0.7511255444649425;  // pi^(-1/4)
    const int m = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < m; ++i) {
        // Stieltjes-style initial guesses, refined by Newton.
        if (i == 0) {
            z = std::sqrt(double(2 * n + 1)) - 1.85575 * std::pow(double(2 * n + 1), -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(double(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * x[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * x[1];
        } else {
            z = 2.0 * z - x[i - 2];
        }
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) <= 1e-15 * (1.0 + std::abs(z))) break;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }

    // Rescale to the N(0,1) weight: node * sqrt(2), weights normalized to
    // sum to one (kills the ~1e-16 drift of sum(w)/sqrt(pi)).
    GaussianQuadratureRule rule;
    rule.nodes.reserve(n);
    rule.weights.reserve(n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) wsum += w[i];
    for (int i = n - 1; i >= 0; --i) {  // descending x[i] -> ascending nodes
        const double wn = w[i] / wsum;
        if (wn < 1e-18) continue;
        rule.nodes.push_back(-x[i] * std::sqrt(2.0));
        rule.weights.push_back(wn);
    }
    double kept = 0.0;
    for (double v : rule.weights) kept += v;
    for (double& v : rule.weights) v /= kept;
    return rule;
}

}  // namespace

const GaussianQuadratureRule& gauss_hermite(int n) {
    static std::mutex mu;
    static std::map<int, GaussianQuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * kPi);
}

void parallel_for_blocks(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    unsigned nt = threads == 0 ? std::thread::hardware_concurrency() : threads;
    nt = std::max(1u, std::min<unsigned>(nt, static_cast<unsigned>(n)));
    if (nt == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fn, begin, end);
    }
    for (auto& th : pool) th.join();
}

}  // namespace sqtom
