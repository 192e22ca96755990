#include "dicebench/descent.hpp"

#include <algorithm>
#include <cmath>

namespace dicebench {

namespace {

// Shared by soft_dice_gradient and the descent loop so both follow the
// same code path. sigma_buf receives sigmoid(f).
void gradient_into(const std::vector<double>& m_cells,
                   const std::vector<double>& f_cells,
                   std::vector<double>& sigma_buf,
                   std::vector<double>& grad_out) {
    std::size_t n = m_cells.size();
    sigma_buf.resize(n);
    grad_out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sigma_buf[i] = sigmoid(f_cells[i]);
    }
    double pred_sum = sum_cells(sigma_buf);
    double overlap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        overlap += sigma_buf[i] * m_cells[i];
    }
    double dn = static_cast<double>(n);
    double denom = (pred_sum + sum_cells(m_cells)) / dn; // |c| + |m|
    if (denom == 0.0) {
        throw DegenerateDenominator("soft_dice_gradient: |c| + |m| = 0");
    }
    double mean_overlap = overlap / dn;
    double scale = 1.0 / (dn * denom * denom);
    for (std::size_t i = 0; i < n; ++i) {
        double sp = sigma_buf[i] * (1.0 - sigma_buf[i]);
        grad_out[i] =
            sp * (2.0 * m_cells[i] * denom - 2.0 * mean_overlap) * scale;
    }
}

} // namespace

void DescentConfig::validate() const {
    if (learning_rate_factor <= 0.0) {
        throw ConfigError("learning_rate_factor must be positive");
    }
    if (iterations < 1) {
        throw ConfigError("iterations must be >= 1");
    }
    int prev = 0;
    for (int l : record_at) {
        if (l <= prev) {
            throw ConfigError("record_at must be strictly ascending");
        }
        if (l > iterations) {
            throw ConfigError("record_at entries must be <= iterations");
        }
        prev = l;
    }
}

LogitField init_logits(std::vector<std::size_t> dims, Rng& rng) {
    std::size_t n = cell_count(dims);
    std::vector<double> cells(n);
    for (double& v : cells) {
        v = rng.normal();
    }
    return LogitField(Grid(std::move(dims), std::move(cells)));
}

Grid soft_dice_gradient(const MarginalMap& m, const LogitField& f) {
    require_same_dims(m.grid, f.grid, "soft_dice_gradient");
    std::vector<double> sigma_buf;
    std::vector<double> grad(m.size());
    gradient_into(m.grid.cells, f.grid.cells, sigma_buf, grad);
    return Grid(m.grid.dims, std::move(grad));
}

DescentTrace run_descent(const MarginalMap& m, const DescentConfig& cfg,
                         const HardSegmentation& s_star,
                         const LogitField* initial) {
    cfg.validate();
    require_same_dims(m.grid, s_star.grid, "run_descent");

    std::vector<double> f;
    if (initial != nullptr) {
        require_same_dims(m.grid, initial->grid, "run_descent");
        f = initial->grid.cells;
    } else {
        Rng rng(cfg.seed);
        f = init_logits(m.grid.dims, rng).grid.cells;
    }

    double gamma = cfg.learning_rate_factor * static_cast<double>(m.size());
    std::vector<double> sigma_buf;
    std::vector<double> grad;

    DescentTrace trace;
    auto record_it = cfg.record_at.begin();
    for (int l = 1; l <= cfg.iterations; ++l) {
        if (record_it != cfg.record_at.end() && *record_it == l) {
            LogitField current(Grid(m.grid.dims, f));
            trace.errors.push_back(error_pair(current, s_star, l));
            MarginalMap soft = sigmoid_map(current);
            trace.losses.push_back(soft_dice(m, soft));
            if (cfg.capture_iterates) {
                trace.iterates.push_back(std::move(soft));
            }
            ++record_it;
        }
        if (l == cfg.iterations) {
            break;
        }
        gradient_into(m.grid.cells, f, sigma_buf, grad);
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] += gamma * grad[i];
        }
    }
    trace.final_logits = LogitField(Grid(m.grid.dims, std::move(f)));
    return trace;
}

DescentTrace run_ce_descent(const MarginalMap& m, const DescentConfig& cfg) {
    cfg.validate();
    HardSegmentation target = threshold(m, 0.5, ThresholdMode::NonStrict);

    Rng rng(cfg.seed);
    std::vector<double> f = init_logits(m.grid.dims, rng).grid.cells;

    // gamma * (1/N) * (sigma - m) gives a per-cell step of
    // learning_rate_factor * (sigma - m); anything above 4 (the inverse
    // curvature bound of the per-cell objective) oscillates instead of
    // converging, so the step is clamped there.
    double eta = std::min(cfg.learning_rate_factor, 4.0);

    DescentTrace trace;
    auto record_it = cfg.record_at.begin();
    for (int l = 1; l <= cfg.iterations; ++l) {
        if (record_it != cfg.record_at.end() && *record_it == l) {
            LogitField current(Grid(m.grid.dims, f));
            trace.errors.push_back(error_pair(current, target, l));
            MarginalMap soft = sigmoid_map(current);
            trace.losses.push_back(cross_entropy(m, soft));
            if (cfg.capture_iterates) {
                trace.iterates.push_back(std::move(soft));
            }
            ++record_it;
        }
        if (l == cfg.iterations) {
            break;
        }
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] -= eta * (sigmoid(f[i]) - m.grid.cells[i]);
        }
    }
    trace.final_logits = LogitField(Grid(m.grid.dims, std::move(f)));
    return trace;
}

} // namespace dicebench
