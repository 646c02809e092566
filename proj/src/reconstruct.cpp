#include "sqtom/reconstruct.hpp"

#include <cmath>
#include <fstream>

#include "sqtom/errors.hpp"
#include "sqtom/numerics.hpp"

namespace sqtom {

void GridSpec::validate() const {
    if (!(x_min < x_max) || !(p_min < p_max))
        throw InputError("GridSpec: empty phase-space ranges");
    if (nx < 2 || np < 2) throw InputError("GridSpec: need at least 2 cells per axis");
}

double WignerGrid::at_mean(int ix, int ip) const { return mean[std::size_t(ix) * p_axis.size() + ip]; }
double WignerGrid::at_std(int ix, int ip) const { return std[std::size_t(ix) * p_axis.size() + ip]; }

WignerGrid reconstruct_wigner(std::span<const Chain> chains, const GridSpec& grid,
                              const QuadratureSpec& spec, std::size_t subsample,
                              unsigned threads) {
    grid.validate();
    spec.validate();

    std::vector<StateParams> pooled;
    for (const auto& chain : chains) {
        auto r = chain.retained_params();
        pooled.insert(pooled.end(), r.begin(), r.end());
    }
    if (pooled.empty()) throw InputError("reconstruct_wigner: no retained samples");

    // Evenly strided subsample of the pooled retained set.
    std::vector<StateParams> picks;
    if (pooled.size() <= subsample) {
        picks = pooled;
    } else {
        picks.reserve(subsample);
        for (std::size_t k = 0; k < subsample; ++k)
            picks.push_back(pooled[k * pooled.size() / subsample]);
    }

    WignerGrid out;
    out.x_axis.resize(grid.nx);
    out.p_axis.resize(grid.np);
    for (int i = 0; i < grid.nx; ++i)
        out.x_axis[i] = grid.x_min + (grid.x_max - grid.x_min) * double(i) / double(grid.nx - 1);
    for (int j = 0; j < grid.np; ++j)
        out.p_axis[j] = grid.p_min + (grid.p_max - grid.p_min) * double(j) / double(grid.np - 1);

    const std::size_t n_cells = std::size_t(grid.nx) * grid.np;
    out.mean.assign(n_cells, 0.0);
    out.std.assign(n_cells, 0.0);

    parallel_for_blocks(n_cells, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t cell = begin; cell < end; ++cell) {
            const double x = out.x_axis[cell / grid.np];
            const double p = out.p_axis[cell % grid.np];
            double m = 0.0, ss = 0.0;  // Welford
            std::size_t n = 0;
            for (const auto& params : picks) {
                const double w = wigner(params, x, p, spec);
                ++n;
                const double d = w - m;
                m += d / double(n);
                ss += d * (w - m);
            }
            out.mean[cell] = m;
            out.std[cell] = n > 1 ? std::sqrt(std::max(0.0, ss / double(n - 1))) : 0.0;
        }
    });
    return out;
}

void save_wigner_csv(const WignerGrid& grid, const std::string& path, const Metadata& meta) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);
    io::write_meta_comments(os, meta);
    os << "x,p,mean,std\n";
    for (std::size_t ix = 0; ix < grid.x_axis.size(); ++ix) {
        for (std::size_t ip = 0; ip < grid.p_axis.size(); ++ip) {
            const std::size_t cell = ix * grid.p_axis.size() + ip;
            os << io::format_double(grid.x_axis[ix]) << "," << io::format_double(grid.p_axis[ip])
               << "," << io::format_double(grid.mean[cell]) << ","
               << io::format_double(grid.std[cell]) << "\n";
        }
    }
    if (!os) throw InputError("write failed: " + path);
}

}  // namespace sqtom
