#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sqtom/model.hpp"
#include "sqtom/sampler.hpp"

namespace sqtom {

struct GridSpec {
    double x_min = -4.0, x_max = 4.0;
    double p_min = -10.0, p_max = 10.0;
    int nx = 161, np = 161;

    void validate() const;
};

// Posterior-averaged Wigner function on a rectangular grid. mean and std are
// row-major with x as the slow index: cell (ix, ip) at [ix * np + ip].
struct WignerGrid {
    std::vector<double> x_axis, p_axis;
    std::vector<double> mean, std;

    double at_mean(int ix, int ip) const;
    double at_std(int ix, int ip) const;
};

// Evaluates the Wigner function of an evenly strided subsample of the pooled
// retained parameter vectors on every grid cell; mean/std are the per-cell
// sample statistics (std = 0 for a single sample). Cells are partitioned
// over threads (0 = hardware concurrency); output is independent of the
// partitioning.
WignerGrid reconstruct_wigner(std::span<const Chain> chains, const GridSpec& grid,
                              const QuadratureSpec& spec = {}, std::size_t subsample = 500,
                              unsigned threads = 0);

// CSV "x,p,mean,std", row-major over the grid.
void save_wigner_csv(const WignerGrid& grid, const std::string& path, const Metadata& meta = {});

}  // namespace sqtom
