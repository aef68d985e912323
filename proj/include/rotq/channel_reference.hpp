#ifndef ROTQ_CHANNEL_REFERENCE_HPP
#define ROTQ_CHANNEL_REFERENCE_HPP

#include "rotq/channel.hpp"

namespace rotq {

// Serial reference implementations: every tensor entry is an independent 2D
// overlap integral evaluated pointwise on the grid. Slow but transparent;
// kept for validating the production kernels and for the benchmark. For
// masks with hard edges (aperture, knife) the plain tensor-product grid
// converges much more slowly than the arc-exact production path, so
// comparisons there need loose tolerances.
ModeCoupling mask_coupling_reference(const MaskSpec& mask, const BasisSpec& basis,
                                     const PolarGrid& grid);

ModeCoupling displacement_coupling_reference(double delta, double theta_d,
                                             const BasisSpec& basis, const PolarGrid& grid);

}  // namespace rotq

#endif
