#pragma once

#include <string>

#include "dicebench/grid.hpp"

namespace dicebench {

/// Binary grid format:
///   magic "DGRD", version u8 = 1, u8 n = number of dims,
///   n x u32 little-endian extents,
///   N x f64 little-endian cells in row-major order.
/// Round-trips bit-exactly.
Grid read_grid(const std::string& path);
void write_grid(const Grid& g, const std::string& path);

/// Role-checked loads; throw ValueOutOfRange when the cells do not fit.
MarginalMap read_marginal(const std::string& path);
HardSegmentation read_hard_segmentation(const std::string& path);

/// CSV alternative (2D only): first line "dims=d1xd2", then d1 lines of d2
/// comma-separated values. Cells are printed with 17 significant digits so
/// the round-trip is exact.
Grid read_grid_csv(const std::string& path);
void write_grid_csv(const Grid& g, const std::string& path);

/// "200x200" -> {200, 200}.
std::vector<std::size_t> parse_dims(const std::string& text);

} // namespace dicebench
