#pragma once

#include <cstdint>
#include <vector>

#include "dicebench/errors.hpp"

namespace dicebench {

/// Dense rectangular lattice of doubles over the unit domain.
///
/// Cells are stored row-major (last dimension fastest). Every cell carries
/// measure 1/N, where N = product of the extents, so the whole grid always
/// has total measure 1. The weighting is applied inside the reductions and
/// never stored per cell.
struct Grid {
    std::vector<std::size_t> dims;
    std::vector<double> cells;

    Grid() = default;
    Grid(std::vector<std::size_t> dims, std::vector<double> cells);

    static Grid constant(std::vector<std::size_t> dims, double value);

    std::size_t size() const { return cells.size(); }
};

std::size_t cell_count(const std::vector<std::size_t>& dims);
bool same_dims(const Grid& a, const Grid& b);
void require_same_dims(const Grid& a, const Grid& b, const char* where);

/// Soft label / marginal probability field: values in [0,1].
struct MarginalMap {
    Grid grid;

    MarginalMap() = default;
    explicit MarginalMap(Grid g);

    std::size_t size() const { return grid.size(); }
};

/// Binary segmentation: values exactly 0.0 or 1.0.
struct HardSegmentation {
    Grid grid;

    HardSegmentation() = default;
    explicit HardSegmentation(Grid g);

    std::size_t size() const { return grid.size(); }
};

/// Logit field: any finite values.
struct LogitField {
    Grid grid;

    LogitField() = default;
    explicit LogitField(Grid g);

    std::size_t size() const { return grid.size(); }
};

/// Deterministic counter-based generator (SplitMix64).
///
/// The state advances by the 64-bit golden-ratio increment and each output
/// is an avalanche mix of the state, so the stream is a pure function of
/// (seed, call index) and reproduces across platforms. Normal variates are
/// produced from pairs of uniforms via the Box-Muller transform (no
/// rejection step, so the consumed-uniform count per call is fixed).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53 random bits.
    double uniform();

    /// Standard normal draw.
    double normal();

    std::uint64_t seed_for(std::uint64_t stream) const;

  private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent seed from (base, a, b); used to give every
/// (case, sample) run its own reproducible streams.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

/// Sequential sum over the flat array, in index order. Every reduction in
/// the library goes through this so results are bit-reproducible.
double sum_cells(const std::vector<double>& cells);

/// (1/N) * sum |g[i]|.
double l1_norm(const Grid& g);

/// (1/N) * sum |a[i] - b[i]|.
double l1_distance(const Grid& a, const Grid& b);

enum class ThresholdMode {
    NonStrict, // cell >= a
    Strict,    // cell > a
};

/// Super-level set of c at level a in (0,1).
HardSegmentation threshold(const MarginalMap& c, double a,
                           ThresholdMode mode = ThresholdMode::NonStrict);

/// Cell-wise mean of a non-empty stack of equally sized masks.
MarginalMap average_masks(const std::vector<HardSegmentation>& masks);

} // namespace dicebench
