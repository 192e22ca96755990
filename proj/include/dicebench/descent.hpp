#pragma once

#include <cstdint>
#include <vector>

#include "dicebench/grid.hpp"
#include "dicebench/metrics.hpp"

namespace dicebench {

struct DescentConfig {
    /// Step size is gamma = learning_rate_factor * N.
    double learning_rate_factor = 10.0;
    int iterations = 200;
    /// 1-based iterate indices at which errors and losses are recorded;
    /// must be sorted ascending with every entry <= iterations. Index 1 is
    /// the random initialization, before any update.
    std::vector<int> record_at = {1, 10, 20, 100, 200};
    std::uint64_t seed = 0;
    /// When set, the soft segmentation sigma(f_l) at every recorded l is
    /// kept in the trace (used by the figure exporter).
    bool capture_iterates = false;

    void validate() const;
};

struct DescentTrace {
    std::vector<ErrorPair> errors;      // one per record_at entry
    std::vector<double> losses;         // objective value per record_at entry
    LogitField final_logits;
    std::vector<MarginalMap> iterates;  // filled when capture_iterates
};

/// Independent standard-normal draw per cell, in flat order.
LogitField init_logits(std::vector<std::size_t> dims, Rng& rng);

/// Gradient of the soft-Dice extension D(c) = 2*mean(c*m)/(|c|+|m|) at
/// c = sigmoid(f), with respect to the logits:
///   g[i] = sigma(f[i]) * sigma(-f[i])
///          * (2*m[i]*(|c|+|m|) - 2*mean(c*m)) / (N * (|c|+|m|)^2).
/// The gradient of the soft-Dice loss is the negation.
Grid soft_dice_gradient(const MarginalMap& m, const LogitField& f);

/// Gradient ascent on the soft-Dice extension (equivalently descent on the
/// soft-Dice loss): f <- f + gamma * soft_dice_gradient(m, f), starting
/// from standard-normal logits seeded by cfg.seed (or from *initial when
/// given). Errors are measured against s_star; losses record soft_dice.
DescentTrace run_descent(const MarginalMap& m, const DescentConfig& cfg,
                         const HardSegmentation& s_star,
                         const LogitField* initial = nullptr);

/// Cross-entropy baseline: per-cell descent f <- f - eta*(sigma(f) - m)
/// with eta = min(learning_rate_factor, 4); the clamp keeps the per-cell
/// map inside its stability region (see README). Converges toward
/// sigma(f) = m. Errors are measured against the 1/2-threshold of m;
/// losses record cross_entropy.
DescentTrace run_ce_descent(const MarginalMap& m, const DescentConfig& cfg);

} // namespace dicebench
