#include "dicebench/grid.hpp"

#include <cmath>
#include <numbers>

namespace dicebench {

std::size_t cell_count(const std::vector<std::size_t>& dims) {
    if (dims.empty()) {
        throw MalformedHeader("grid needs at least one dimension");
    }
    std::size_t n = 1;
    for (std::size_t d : dims) {
        if (d == 0) {
            throw MalformedHeader("grid extents must be positive");
        }
        n *= d;
    }
    return n;
}

Grid::Grid(std::vector<std::size_t> d, std::vector<double> c)
    : dims(std::move(d)), cells(std::move(c)) {
    if (cells.size() != cell_count(dims)) {
        throw MalformedHeader("cell count does not match grid extents");
    }
    for (double v : cells) {
        if (!std::isfinite(v)) {
            throw ValueOutOfRange("grid cells must be finite");
        }
    }
}

Grid Grid::constant(std::vector<std::size_t> dims, double value) {
    std::size_t n = cell_count(dims);
    return Grid(std::move(dims), std::vector<double>(n, value));
}

bool same_dims(const Grid& a, const Grid& b) {
    return a.dims == b.dims;
}

void require_same_dims(const Grid& a, const Grid& b, const char* where) {
    if (!same_dims(a, b)) {
        throw DimensionMismatch(std::string(where) + ": grid extents differ");
    }
}

MarginalMap::MarginalMap(Grid g) : grid(std::move(g)) {
    for (double v : grid.cells) {
        if (v < 0.0 || v > 1.0) {
            throw ValueOutOfRange("marginal cells must lie in [0,1]");
        }
    }
}

HardSegmentation::HardSegmentation(Grid g) : grid(std::move(g)) {
    for (double v : grid.cells) {
        if (v != 0.0 && v != 1.0) {
            throw ValueOutOfRange("segmentation cells must be exactly 0 or 1");
        }
    }
}

LogitField::LogitField(Grid g) : grid(std::move(g)) {}

std::uint64_t Rng::next_u64() {
    // SplitMix64 (Steele, Lea, Flood 2014).
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // u1 shifted into (0,1] so the log is always finite.
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

std::uint64_t Rng::seed_for(std::uint64_t stream) const {
    return mix_seed(state_, stream, 0);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    Rng g(base ^ (a * 0xd1342543de82ef95ULL) ^ (b * 0xaf251af3b0f025b5ULL));
    return g.next_u64();
}

double sum_cells(const std::vector<double>& cells) {
    double s = 0.0;
    for (double v : cells) {
        s += v;
    }
    return s;
}

double l1_norm(const Grid& g) {
    double s = 0.0;
    for (double v : g.cells) {
        s += std::abs(v);
    }
    return s / static_cast<double>(g.size());
}

double l1_distance(const Grid& a, const Grid& b) {
    require_same_dims(a, b, "l1_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        s += std::abs(a.cells[i] - b.cells[i]);
    }
    return s / static_cast<double>(a.size());
}

HardSegmentation threshold(const MarginalMap& c, double a, ThresholdMode mode) {
    if (!(a > 0.0 && a < 1.0)) {
        throw ThresholdOutOfRange("threshold level must lie in (0,1)");
    }
    std::vector<double> out(c.size());
    const auto& in = c.grid.cells;
    if (mode == ThresholdMode::NonStrict) {
        for (std::size_t i = 0; i < in.size(); ++i) {
            out[i] = in[i] >= a ? 1.0 : 0.0;
        }
    } else {
        for (std::size_t i = 0; i < in.size(); ++i) {
            out[i] = in[i] > a ? 1.0 : 0.0;
        }
    }
    return HardSegmentation(Grid(c.grid.dims, std::move(out)));
}

MarginalMap average_masks(const std::vector<HardSegmentation>& masks) {
    if (masks.empty()) {
        throw EmptyStack("average_masks: no masks given");
    }
    const Grid& first = masks.front().grid;
    std::vector<double> acc(first.size(), 0.0);
    for (const auto& mask : masks) {
        require_same_dims(first, mask.grid, "average_masks");
        for (std::size_t i = 0; i < acc.size(); ++i) {
            acc[i] += mask.grid.cells[i];
        }
    }
    // Division (not multiplication by 1/k) keeps the mean of k ones at
    // exactly 1.0 rather than a value one ulp above it.
    double k = static_cast<double>(masks.size());
    for (double& v : acc) {
        v /= k;
    }
    return MarginalMap(Grid(first.dims, std::move(acc)));
}

} // namespace dicebench
