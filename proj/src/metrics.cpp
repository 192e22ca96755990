#include "dicebench/metrics.hpp"

#include <cmath>

namespace dicebench {

namespace {

// 2 * mean(c*m) / (|c| + |m|), the shared core of dice, soft_dice and
// soft_dice_extension. Both reductions run sequentially over the flat
// array so the three entry points agree bit for bit.
double overlap_ratio(const Grid& m, const Grid& c) {
    require_same_dims(m, c, "dice");
    double overlap = 0.0;
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
        overlap += c.cells[i] * m.cells[i];
    }
    double denom = sum_cells(c.cells) + sum_cells(m.cells);
    if (denom == 0.0) {
        return 0.0;
    }
    return 2.0 * overlap / denom; // the 1/N factors cancel
}

} // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

MarginalMap sigmoid_map(const LogitField& f) {
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = sigmoid(f.grid.cells[i]);
    }
    return MarginalMap(Grid(f.grid.dims, std::move(out)));
}

double dice(const MarginalMap& m, const HardSegmentation& s) {
    return overlap_ratio(m.grid, s.grid);
}

double soft_dice(const MarginalMap& m, const MarginalMap& c) {
    return 1.0 - overlap_ratio(m.grid, c.grid);
}

double soft_dice_extension(const MarginalMap& m, const MarginalMap& c) {
    return overlap_ratio(m.grid, c.grid);
}

double cross_entropy(const MarginalMap& m, const MarginalMap& c) {
    require_same_dims(m.grid, c.grid, "cross_entropy");
    constexpr double eps = 1e-12;
    double s = 0.0;
    for (std::size_t i = 0; i < m.grid.cells.size(); ++i) {
        double p = c.grid.cells[i];
        if (p < eps) {
            p = eps;
        } else if (p > 1.0 - eps) {
            p = 1.0 - eps;
        }
        double t = m.grid.cells[i];
        s -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return s / static_cast<double>(m.size());
}

ErrorPair error_pair(const LogitField& f, const HardSegmentation& s_star,
                     int iteration) {
    require_same_dims(f.grid, s_star.grid, "error_pair");
    double e0 = 0.0;
    double e1 = 0.0;
    for (std::size_t i = 0; i < f.grid.cells.size(); ++i) {
        double c = sigmoid(f.grid.cells[i]);
        double s = s_star.grid.cells[i];
        e0 += std::abs(c - s);
        e1 += std::abs((c >= 0.5 ? 1.0 : 0.0) - s);
    }
    double n = static_cast<double>(f.size());
    return ErrorPair{e0 / n, e1 / n, iteration};
}

} // namespace dicebench
