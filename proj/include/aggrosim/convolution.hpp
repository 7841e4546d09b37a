#ifndef AGGROSIM_CONVOLUTION_HPP
#define AGGROSIM_CONVOLUTION_HPP

#include <memory>

#include "aggrosim/grid.hpp"

namespace aggrosim {

/** Free-space convolution on the doubled domain (Hockney method).
 *
 * Built from a wrap-ordered kernel table on the 2n-per-axis grid (see
 * sample_on_grid); apply(u) returns h^d * sum_j T[i-j] u_j, the exact discrete
 * convolution of cell averages with no periodic images. A convolver caches the
 * transformed table and FFTW plans; apply is safe to call repeatedly but a
 * convolver instance is not shared across threads. */
class FreeSpaceConvolver {
  public:
    FreeSpaceConvolver(const ScalarField& table, const GridSpec& grid);
    ~FreeSpaceConvolver();
    FreeSpaceConvolver(const FreeSpaceConvolver&) = delete;
    FreeSpaceConvolver& operator=(const FreeSpaceConvolver&) = delete;

    ScalarField apply(const ScalarField& u) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace aggrosim

#endif
