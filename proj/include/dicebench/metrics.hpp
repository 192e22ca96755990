#pragma once

#include "dicebench/grid.hpp"

namespace dicebench {

/// Soft/hard error pair recorded at a descent iteration.
struct ErrorPair {
    double e0 = 0.0; // mean |sigma(f) - s*|
    double e1 = 0.0; // mean |(sigma(f) >= 1/2) - s*|
    int iteration = 1;
};

double sigmoid(double x);

/// Applies the sigmoid cell-wise; the soft segmentation of a logit field.
MarginalMap sigmoid_map(const LogitField& f);

/// Dice overlap of a hard segmentation against a marginal:
///   2 * mean(s*m) / (|s| + |m|), and 0 when both norms vanish.
double dice(const MarginalMap& m, const HardSegmentation& s);

/// Soft-Dice loss: 1 - dice extended to a soft prediction c.
/// Equals 1 when both norms vanish.
double soft_dice(const MarginalMap& m, const MarginalMap& c);

/// The Dice functional extended to soft predictions (1 - soft_dice).
/// Exposed on its own because the optimality statements are phrased in
/// terms of it.
double soft_dice_extension(const MarginalMap& m, const MarginalMap& c);

/// Mean binary cross-entropy of prediction c against target m, with c
/// clamped to [1e-12, 1 - 1e-12] so the value stays finite.
double cross_entropy(const MarginalMap& m, const MarginalMap& c);

/// e0 = mean |sigma(f) - s*|; e1 = same after 1/2-thresholding sigma(f).
ErrorPair error_pair(const LogitField& f, const HardSegmentation& s_star,
                     int iteration);

} // namespace dicebench
