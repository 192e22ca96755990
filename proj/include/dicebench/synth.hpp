#pragma once

#include <cstdint>
#include <vector>

#include "dicebench/grid.hpp"

namespace dicebench {

/// Synthetic-marginal pipeline: centered ball, isotropic Gaussian blur of
/// standard deviation rho, then a random smooth deformation. All length
/// parameters are in domain units (the grid covers the unit square).
struct SynthConfig {
    std::vector<std::size_t> dims = {200, 200};
    double radius = 0.2;
    double rho = 0.01;
    double deform_amplitude = 0.05;
    double deform_correlation = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Binary disc: cell value 1 where the cell center lies within radius of
/// the domain center (1/2, 1/2).
MarginalMap make_ball(std::vector<std::size_t> dims, double radius);

/// Separable Gaussian convolution with standard deviation rho in domain
/// units. The kernel is truncated at 4 sigma and renormalized to sum 1;
/// the boundary is zero-padded. rho = 0 returns the input unchanged.
MarginalMap gaussian_blur(const MarginalMap& m, double rho);

/// Warps m by a smooth random displacement field: two white-noise grids
/// are blurred at std = correlation, rescaled to RMS = amplitude, and used
/// as per-cell displacements; m is resampled by bilinear interpolation
/// with clamp-to-edge sampling. amplitude = 0 returns the input unchanged.
MarginalMap random_deformation(const MarginalMap& m, double amplitude,
                               double correlation, Rng& rng);

/// The full pipeline: deform(blur(ball)).
MarginalMap make_synthetic(const SynthConfig& cfg);

} // namespace dicebench
