#include "dicebench/synth.hpp"

#include <algorithm>
#include <cmath>

namespace dicebench {

namespace {

std::vector<double> gaussian_kernel(double sigma_px) {
    int radius = static_cast<int>(std::ceil(4.0 * sigma_px));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        double w = std::exp(-0.5 * (k / sigma_px) * (k / sigma_px));
        kernel[static_cast<std::size_t>(k + radius)] = w;
        sum += w;
    }
    for (double& w : kernel) {
        w /= sum;
    }
    return kernel;
}

// 1D zero-padded convolution along the given axis of a 2D field.
std::vector<double> convolve_axis(const std::vector<double>& in,
                                  std::size_t rows, std::size_t cols,
                                  int axis, const std::vector<double>& kernel) {
    int radius = static_cast<int>(kernel.size() / 2);
    std::vector<double> out(in.size(), 0.0);
    auto at = [&](std::size_t r, std::size_t c) { return in[r * cols + c]; };
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            double acc = 0.0;
            if (axis == 0) {
                for (int k = -radius; k <= radius; ++k) {
                    auto rr = static_cast<long long>(r) + k;
                    if (rr < 0 || rr >= static_cast<long long>(rows)) {
                        continue;
                    }
                    acc += kernel[static_cast<std::size_t>(k + radius)] *
                           at(static_cast<std::size_t>(rr), c);
                }
            } else {
                for (int k = -radius; k <= radius; ++k) {
                    auto cc = static_cast<long long>(c) + k;
                    if (cc < 0 || cc >= static_cast<long long>(cols)) {
                        continue;
                    }
                    acc += kernel[static_cast<std::size_t>(k + radius)] *
                           at(r, static_cast<std::size_t>(cc));
                }
            }
            out[r * cols + c] = acc;
        }
    }
    return out;
}

std::vector<double> blur_field(const std::vector<double>& in, std::size_t rows,
                               std::size_t cols, double rho) {
    std::vector<double> result = in;
    double sigma_rows = rho * static_cast<double>(rows);
    double sigma_cols = rho * static_cast<double>(cols);
    if (static_cast<int>(std::ceil(4.0 * sigma_rows)) > 0) {
        result = convolve_axis(result, rows, cols, 0,
                               gaussian_kernel(sigma_rows));
    }
    if (static_cast<int>(std::ceil(4.0 * sigma_cols)) > 0) {
        result = convolve_axis(result, rows, cols, 1,
                               gaussian_kernel(sigma_cols));
    }
    return result;
}

void require_2d(const std::vector<std::size_t>& dims, const char* where) {
    if (dims.size() != 2) {
        throw DimensionMismatch(std::string(where) + ": expected a 2D grid");
    }
}

double clamp_unit(double v) {
    return std::min(1.0, std::max(0.0, v));
}

} // namespace

void SynthConfig::validate() const {
    require_2d(dims, "SynthConfig");
    if (!(radius > 0.0 && radius <= 0.5)) {
        throw InvalidRadius("radius must lie in (0, 0.5]");
    }
    if (rho < 0.0) {
        throw ConfigError("rho must be >= 0");
    }
    if (deform_amplitude < 0.0) {
        throw ConfigError("deform_amplitude must be >= 0");
    }
    if (deform_amplitude > 0.0 && deform_correlation <= 0.0) {
        throw ConfigError("deform_correlation must be > 0");
    }
}

MarginalMap make_ball(std::vector<std::size_t> dims, double radius) {
    require_2d(dims, "make_ball");
    if (!(radius > 0.0 && radius <= 0.5)) {
        throw InvalidRadius("radius must lie in (0, 0.5]");
    }
    std::size_t rows = dims[0];
    std::size_t cols = dims[1];
    std::vector<double> cells(rows * cols, 0.0);
    double r2 = radius * radius;
    for (std::size_t r = 0; r < rows; ++r) {
        double y = (static_cast<double>(r) + 0.5) / static_cast<double>(rows) -
                   0.5;
        for (std::size_t c = 0; c < cols; ++c) {
            double x =
                (static_cast<double>(c) + 0.5) / static_cast<double>(cols) -
                0.5;
            if (y * y + x * x <= r2) {
                cells[r * cols + c] = 1.0;
            }
        }
    }
    return MarginalMap(Grid(std::move(dims), std::move(cells)));
}

MarginalMap gaussian_blur(const MarginalMap& m, double rho) {
    require_2d(m.grid.dims, "gaussian_blur");
    if (rho < 0.0) {
        throw ConfigError("rho must be >= 0");
    }
    if (rho == 0.0) {
        return m;
    }
    std::vector<double> blurred =
        blur_field(m.grid.cells, m.grid.dims[0], m.grid.dims[1], rho);
    for (double& v : blurred) {
        v = clamp_unit(v);
    }
    return MarginalMap(Grid(m.grid.dims, std::move(blurred)));
}

MarginalMap random_deformation(const MarginalMap& m, double amplitude,
                               double correlation, Rng& rng) {
    require_2d(m.grid.dims, "random_deformation");
    if (amplitude < 0.0) {
        throw ConfigError("amplitude must be >= 0");
    }
    if (amplitude == 0.0) {
        return m;
    }
    if (correlation <= 0.0) {
        throw ConfigError("correlation must be > 0");
    }
    std::size_t rows = m.grid.dims[0];
    std::size_t cols = m.grid.dims[1];
    std::size_t n = rows * cols;

    // Displacement field: smoothed white noise, one component per axis
    // (row displacements drawn first), rescaled to the requested RMS.
    auto component = [&]() {
        std::vector<double> noise(n);
        for (double& v : noise) {
            v = rng.normal();
        }
        std::vector<double> smooth = blur_field(noise, rows, cols, correlation);
        double sq = 0.0;
        for (double v : smooth) {
            sq += v * v;
        }
        double rms = std::sqrt(sq / static_cast<double>(n));
        double scale = rms > 0.0 ? amplitude / rms : 0.0;
        for (double& v : smooth) {
            v *= scale;
        }
        return smooth;
    };
    std::vector<double> dy = component();
    std::vector<double> dx = component();

    const auto& src = m.grid.cells;
    auto sample = [&](double py, double px) {
        // clamp-to-edge bilinear sampling in pixel coordinates
        py = std::min(std::max(py, 0.0), static_cast<double>(rows - 1));
        px = std::min(std::max(px, 0.0), static_cast<double>(cols - 1));
        auto r0 = static_cast<std::size_t>(py);
        auto c0 = static_cast<std::size_t>(px);
        std::size_t r1 = std::min(r0 + 1, rows - 1);
        std::size_t c1 = std::min(c0 + 1, cols - 1);
        double fy = py - static_cast<double>(r0);
        double fx = px - static_cast<double>(c0);
        double top = src[r0 * cols + c0] * (1.0 - fx) + src[r0 * cols + c1] * fx;
        double bot = src[r1 * cols + c0] * (1.0 - fx) + src[r1 * cols + c1] * fx;
        return top * (1.0 - fy) + bot * fy;
    };

    std::vector<double> out(n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            std::size_t i = r * cols + c;
            double py = static_cast<double>(r) +
                        dy[i] * static_cast<double>(rows);
            double px = static_cast<double>(c) +
                        dx[i] * static_cast<double>(cols);
            out[i] = clamp_unit(sample(py, px));
        }
    }
    return MarginalMap(Grid(m.grid.dims, std::move(out)));
}

MarginalMap make_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    MarginalMap ball = make_ball(cfg.dims, cfg.radius);
    MarginalMap blurred = gaussian_blur(ball, cfg.rho);
    return random_deformation(blurred, cfg.deform_amplitude,
                              cfg.deform_correlation, rng);
}

} // namespace dicebench
