#pragma once

#include <cstdint>
#include <vector>

#include "dicebench/grid.hpp"

namespace dicebench {

/// Exact solution of sup_s dice(m, s) over hard segmentations.
///
/// tau = sup_dice / 2 splits the domain into three regions: cells below
/// tau belong to no optimizer, cells above tau to every optimizer, and
/// cells equal to tau (the tie set) may go either way. A cell counts as a
/// tie when |m[i] - tau| <= 1e-9 * max(1, tau); exact float equality is
/// brittle after the sup/2 division and the tolerance sits far below any
/// realistic marginal quantization.
struct OptimalDiceSolution {
    double sup_dice = 0.0;
    double tau = 0.0;
    double below_mass = 0.0;
    double tie_mass = 0.0;
    double above_mass = 0.0;
    /// The marginal value t* attaining the threshold-search maximum
    /// (smallest such value when several tie).
    double argmax_threshold_value = 0.0;
    /// True when |m| = 0, in which case every soft segmentation is optimal.
    bool degenerate = false;

    double tie_tolerance() const;
};

OptimalDiceSolution solve_optimal_dice(const MarginalMap& m);

enum class VolumeMode {
    MinVolume, // strict threshold at tau: tie cells excluded
    MaxVolume, // non-strict threshold at tau: tie cells included
};

/// The smallest- or largest-volume optimizer for the marginal that
/// produced sol. Throws SolutionMismatch when re-evaluating dice does not
/// reproduce sol.sup_dice (i.e. sol belongs to a different marginal).
HardSegmentation optimal_segmentation(const OptimalDiceSolution& sol,
                                      const MarginalMap& m, VolumeMode mode);

enum class ExtremalKind {
    MinAttainer, // optimizer volume hits |m|^2 (lower bound)
    MaxAttainer, // optimizer volume hits 1 (upper bound)
};

struct ExtremalMarginal {
    MarginalMap marginal;
    double requested_volume = 0.0;
    /// |marginal| actually realized after rounding the two-level masses to
    /// whole cells; equals requested_volume for the max attainer.
    double realized_volume = 0.0;
};

/// Marginals of volume v whose optimizers attain the sharp volume bounds.
/// The max attainer is the constant-v map (unique optimizer: everything).
/// The min attainer takes value 1 on round(v^2*N) cells and v'/(1+v') on
/// the rest, which puts the whole complement on the tie set, so the
/// minimum optimizer volume is the measure of the 1-cells.
ExtremalMarginal construct_extremal(double v, ExtremalKind which,
                                    std::vector<std::size_t> dims);

struct BruteForceResult {
    double sup_dice = 0.0;
    /// Every bitmask attaining the maximum (bit i = cell i), ascending.
    std::vector<std::uint32_t> optimizers;
};

/// Exhaustive search over all 2^N segmentations; N <= 20.
BruteForceResult brute_force_optimal(const MarginalMap& m);

/// Structured record of the volume-bound and volume-ordering checks.
struct VolumeBoundsReport {
    double marginal_volume = 0.0;
    double vol_min = 0.0;       // volume of the strict-threshold optimizer
    double vol_max = 0.0;       // volume of the non-strict optimizer
    double lower_bound = 0.0;   // |m|^2 - 1/N
    double ce_volume = 0.0;     // |I[1/2,1] o m|, the 1/2-thresholded CE optimum
    bool bounds_ok = false;     // lower_bound <= vol_min and vol_max <= 1
    bool ordering_ok = false;   // ce_volume <= vol_min
};

VolumeBoundsReport volume_bounds_check(const MarginalMap& m);

/// Mean distance from a soft segmentation c to the nearest optimizer of m:
/// cells below tau contribute c, cells above contribute 1-c, tie cells 0.
double distance_to_optimal_set(const OptimalDiceSolution& sol,
                               const MarginalMap& m, const MarginalMap& c);

} // namespace dicebench
