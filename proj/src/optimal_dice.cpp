#include "dicebench/optimal_dice.hpp"

#include <algorithm>
#include <cmath>

#include "dicebench/metrics.hpp"

namespace dicebench {

double OptimalDiceSolution::tie_tolerance() const {
    return 1e-9 * std::max(1.0, tau);
}

OptimalDiceSolution solve_optimal_dice(const MarginalMap& m) {
    const auto& cells = m.grid.cells;
    std::size_t n = cells.size();

    OptimalDiceSolution sol;
    double total = sum_cells(cells);
    if (total == 0.0) {
        sol.degenerate = true;
        sol.tie_mass = 1.0;
        return sol;
    }

    // The objective 2*sum(m >= t)/(count(m >= t) + sum(m)) is piecewise
    // constant in t and only changes at cell values, so a descending scan
    // over the distinct values with running prefix sums finds the maximum.
    std::vector<double> sorted(cells);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());

    double best = -1.0;
    double best_t = 0.0;
    double prefix = 0.0;
    std::size_t i = 0;
    while (i < n) {
        double t = sorted[i];
        do {
            prefix += sorted[i];
            ++i;
        } while (i < n && sorted[i] == t);
        double objective =
            2.0 * prefix / (static_cast<double>(i) + total);
        // >= keeps the smallest maximizing t (the largest optimizer).
        if (objective >= best) {
            best = objective;
            best_t = t;
        }
    }

    sol.sup_dice = best;
    sol.tau = best / 2.0;
    sol.argmax_threshold_value = best_t;

    double tol = sol.tie_tolerance();
    std::size_t below = 0;
    std::size_t tie = 0;
    std::size_t above = 0;
    for (double v : cells) {
        if (std::abs(v - sol.tau) <= tol) {
            ++tie;
        } else if (v < sol.tau) {
            ++below;
        } else {
            ++above;
        }
    }
    double dn = static_cast<double>(n);
    sol.below_mass = static_cast<double>(below) / dn;
    sol.tie_mass = static_cast<double>(tie) / dn;
    sol.above_mass = static_cast<double>(above) / dn;
    return sol;
}

HardSegmentation optimal_segmentation(const OptimalDiceSolution& sol,
                                      const MarginalMap& m, VolumeMode mode) {
    double tol = sol.tie_tolerance();
    bool include_ties = mode == VolumeMode::MaxVolume;
    std::vector<double> out(m.size());
    const auto& cells = m.grid.cells;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        bool tie = std::abs(cells[i] - sol.tau) <= tol;
        bool in = tie ? include_ties : cells[i] > sol.tau;
        out[i] = in ? 1.0 : 0.0;
    }
    HardSegmentation s(Grid(m.grid.dims, std::move(out)));
    double achieved = dice(m, s);
    if (std::abs(achieved - sol.sup_dice) > 1e-9) {
        throw SolutionMismatch("optimal_segmentation: solution does not "
                               "match the given marginal");
    }
    return s;
}

ExtremalMarginal construct_extremal(double v, ExtremalKind which,
                                    std::vector<std::size_t> dims) {
    if (!(v > 0.0 && v <= 1.0)) {
        throw InvalidFraction("extremal volume must lie in (0,1]");
    }
    std::size_t n = cell_count(dims);
    if (which == ExtremalKind::MaxAttainer) {
        return ExtremalMarginal{
            MarginalMap(Grid::constant(std::move(dims), v)), v, v};
    }

    double dn = static_cast<double>(n);
    auto ones = static_cast<std::size_t>(std::llround(v * v * dn));
    if (ones == 0) {
        ones = 1; // keep the realized volume inside (0,1]
    }
    if (ones >= n) {
        return ExtremalMarginal{
            MarginalMap(Grid::constant(std::move(dims), 1.0)), v, 1.0};
    }
    // With k cells at 1 the realized volume is v' = sqrt(k/N); giving the
    // complement the value v'/(1+v') makes the thresholds t = 1 and t = v'
    // score the same dice 2v'/(1+v'), so tau lands exactly on the
    // complement value and the whole complement becomes the tie set.
    double realized = std::sqrt(static_cast<double>(ones) / dn);
    double low = realized / (1.0 + realized);
    std::vector<double> cells(n, low);
    std::fill(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(ones),
              1.0);
    return ExtremalMarginal{MarginalMap(Grid(std::move(dims), std::move(cells))),
                            v, realized};
}

BruteForceResult brute_force_optimal(const MarginalMap& m) {
    std::size_t n = m.size();
    if (n > 20) {
        throw TooLarge("brute_force_optimal: N must be <= 20");
    }
    const auto& cells = m.grid.cells;
    double total = sum_cells(cells);

    auto dice_of = [&](std::uint32_t mask) {
        double overlap = 0.0;
        int volume = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) {
                overlap += cells[i];
                ++volume;
            }
        }
        double denom = static_cast<double>(volume) + total;
        return denom == 0.0 ? 0.0 : 2.0 * overlap / denom;
    };

    std::uint32_t count = 1u << n;
    double best = 0.0;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        best = std::max(best, dice_of(mask));
    }
    BruteForceResult result;
    result.sup_dice = best;
    for (std::uint32_t mask = 0; mask < count; ++mask) {
        if (dice_of(mask) >= best - 1e-12) {
            result.optimizers.push_back(mask);
        }
    }
    return result;
}

VolumeBoundsReport volume_bounds_check(const MarginalMap& m) {
    OptimalDiceSolution sol = solve_optimal_dice(m);
    VolumeBoundsReport report;
    report.marginal_volume = l1_norm(m.grid);
    report.vol_min =
        l1_norm(optimal_segmentation(sol, m, VolumeMode::MinVolume).grid);
    report.vol_max =
        l1_norm(optimal_segmentation(sol, m, VolumeMode::MaxVolume).grid);
    double n = static_cast<double>(m.size());
    report.lower_bound =
        report.marginal_volume * report.marginal_volume - 1.0 / n;
    report.ce_volume = l1_norm(threshold(m, 0.5, ThresholdMode::NonStrict).grid);
    report.bounds_ok =
        report.lower_bound <= report.vol_min && report.vol_max <= 1.0;
    report.ordering_ok = report.ce_volume <= report.vol_min;
    return report;
}

double distance_to_optimal_set(const OptimalDiceSolution& sol,
                               const MarginalMap& m, const MarginalMap& c) {
    require_same_dims(m.grid, c.grid, "distance_to_optimal_set");
    if (sol.degenerate) {
        return 0.0; // every soft segmentation is optimal
    }
    double tol = sol.tie_tolerance();
    double s = 0.0;
    const auto& mc = m.grid.cells;
    const auto& cc = c.grid.cells;
    for (std::size_t i = 0; i < mc.size(); ++i) {
        if (std::abs(mc[i] - sol.tau) <= tol) {
            continue;
        }
        s += mc[i] < sol.tau ? cc[i] : 1.0 - cc[i];
    }
    return s / static_cast<double>(m.size());
}

} // namespace dicebench
