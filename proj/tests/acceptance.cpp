// Acceptance suite: one pass/fail line per criterion, nonzero exit when
// any fails. Criterion 8 shells out to the CLI binary given by --cli.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dicebench/experiments.hpp"
#include "dicebench/grid_io.hpp"

using namespace dicebench;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start)
            .count();
    }
};

MarginalMap random_marginal(std::size_t n, Rng& rng, bool quantized) {
    std::vector<double> cells(n);
    for (double& v : cells) {
        double u = rng.uniform();
        v = quantized ? std::floor(u * 6.0) / 5.0 : u;
    }
    return MarginalMap(Grid({n}, std::move(cells)));
}

// ---- criterion 1: solver equals the exhaustive oracle -------------------

Outcome criterion_oracle() {
    Rng rng(0xACCE97);
    double max_diff = 0.0;
    int violations = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        std::size_t n = 4 + rng.next_u64() % 13;
        MarginalMap m = random_marginal(n, rng, t % 2 == 1);
        OptimalDiceSolution sol = solve_optimal_dice(m);
        BruteForceResult bf = brute_force_optimal(m);
        max_diff = std::max(max_diff, std::abs(sol.sup_dice - bf.sup_dice));
        for (std::uint32_t mask : bf.optimizers) {
            for (std::size_t i = 0; i < n; ++i) {
                bool on = (mask >> i) & 1u;
                double v = m.grid.cells[i];
                if ((v < sol.tau - 1e-12 && on) ||
                    (v > sol.tau + 1e-12 && !on)) {
                    ++violations;
                }
            }
        }
    }
    Outcome out;
    out.pass = max_diff <= 1e-12 && violations == 0;
    std::ostringstream ss;
    ss << trials << " instances, max |sup diff| = " << max_diff << ", "
       << violations << " characterization violations";
    out.detail = ss.str();
    return out;
}

// ---- criterion 2: sharp volume bounds ------------------------------------

Outcome criterion_sharpness() {
    std::vector<std::size_t> dims = {100, 100};
    double n = static_cast<double>(cell_count(dims));
    double worst = 0.0;
    for (int i = 1; i <= 10; ++i) {
        double v = static_cast<double>(i) / 10.0;
        ExtremalMarginal low =
            construct_extremal(v, ExtremalKind::MinAttainer, dims);
        OptimalDiceSolution sol = solve_optimal_dice(low.marginal);
        double vol_min = l1_norm(
            optimal_segmentation(sol, low.marginal, VolumeMode::MinVolume)
                .grid);
        worst = std::max(worst, std::abs(vol_min - std::round(v * v * n) / n));

        ExtremalMarginal high =
            construct_extremal(v, ExtremalKind::MaxAttainer, dims);
        OptimalDiceSolution sol_high = solve_optimal_dice(high.marginal);
        double vol_max = l1_norm(
            optimal_segmentation(sol_high, high.marginal, VolumeMode::MaxVolume)
                .grid);
        worst = std::max(worst, std::abs(vol_max - 1.0));
    }

    int bound_violations = 0;
    Rng rng(0xACCE98);
    for (int t = 0; t < 200; ++t) {
        std::size_t size = 4 + rng.next_u64() % 61;
        VolumeBoundsReport r =
            volume_bounds_check(random_marginal(size, rng, t % 3 == 0));
        if (!r.bounds_ok) {
            ++bound_violations;
        }
    }

    Outcome out;
    out.pass = worst == 0.0 && bound_violations == 0;
    std::ostringstream ss;
    ss << "extremal volume deviation = " << worst << ", "
       << bound_violations << " random-marginal bound violations";
    out.detail = ss.str();
    return out;
}

// ---- criterion 3: gradient vs central finite differences ----------------

Outcome criterion_gradient() {
    Rng rng(0xACCE99);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 2 + rng.next_u64() % 63;
        MarginalMap m = random_marginal(n, rng, false);
        std::vector<double> f(n);
        for (double& v : f) {
            v = rng.normal();
        }
        Grid g = soft_dice_gradient(m, LogitField(Grid({n}, f)));
        for (std::size_t i = 0; i < n; ++i) {
            const double h = 1e-6;
            std::vector<double> probe = f;
            probe[i] = f[i] + h;
            double up = soft_dice_extension(
                m, sigmoid_map(LogitField(Grid({n}, probe))));
            probe[i] = f[i] - h;
            double down = soft_dice_extension(
                m, sigmoid_map(LogitField(Grid({n}, probe))));
            double fd = (up - down) / (2.0 * h);
            // the 1e-4 floor absorbs the ~1e-10 roundoff of the central
            // difference itself on components that nearly cancel
            double rel = std::abs(g.cells[i] - fd) /
                         std::max({std::abs(g.cells[i]), std::abs(fd), 1e-4});
            worst = std::max(worst, rel);
        }
    }
    Outcome out;
    out.pass = worst <= 1e-5;
    std::ostringstream ss;
    ss << "50 pairs, max relative error = " << worst;
    out.detail = ss.str();
    return out;
}

// ---- criteria 4 and 5: the synthetic sweep -------------------------------

SweepReport run_reference_sweep(const fs::path& scratch) {
    SweepSpec spec;
    spec.samples = 20;
    spec.seed = 20260810;
    spec.output_dir = (scratch / "sweep").string();
    for (int i = 1; i <= 9; ++i) {
        SweepCase c;
        char name[16];
        std::snprintf(name, sizeof name, "rho%02d", i);
        c.name = name;
        c.source.kind = CaseSource::Kind::Synth;
        c.source.synth.rho = 0.01 * i;
        spec.cases.push_back(std::move(c));
    }
    return run_sweep(spec);
}

Outcome criterion_table_trend(const SweepReport& report) {
    Outcome out;
    out.pass = true;
    std::ostringstream ss;

    double max_e0_final = 0.0;
    double max_e1_final = 0.0;
    double prev_e0_10 = -1.0;
    bool monotone = true;
    bool ordered = true;
    for (const auto& cr : report.cases) {
        if (!cr.error.empty()) {
            out.pass = false;
            ss << cr.name << " failed: " << cr.error << "; ";
            continue;
        }
        // record_at = {1, 10, 20, 100, 200}
        if (std::abs(cr.e0[0] - 0.5) > 0.02) {
            out.pass = false;
            ss << cr.name << " e0_1 = " << cr.e0[0] << " off 0.5; ";
        }
        max_e0_final = std::max(max_e0_final, cr.e0.back());
        max_e1_final = std::max(max_e1_final, cr.e1.back());
        for (std::size_t i = 0; i < cr.e0.size(); ++i) {
            // reference tables report three decimals; allow that
            // quantum of slack where the two errors statistically tie
            if (cr.e1[i] > cr.e0[i] + 1e-3) {
                ordered = false;
            }
        }
        if (cr.e0[1] < prev_e0_10) {
            monotone = false;
        }
        prev_e0_10 = cr.e0[1];
    }
    if (max_e0_final > 0.01 || max_e1_final > 0.01) {
        out.pass = false;
    }
    if (!monotone || !ordered) {
        out.pass = false;
    }
    ss << "max e0_200 = " << max_e0_final << ", max e1_200 = " << max_e1_final
       << ", e1<=e0 " << (ordered ? "holds" : "VIOLATED") << ", e0_10 "
       << (monotone ? "non-decreasing in rho" : "NOT monotone");
    out.detail = ss.str();
    return out;
}

Outcome criterion_calibration(const SweepReport& report) {
    Outcome out;
    out.pass = true;
    double worst = 0.0;
    for (const auto& cr : report.cases) {
        if (!cr.error.empty()) {
            out.pass = false;
            continue;
        }
        worst = std::max(worst, cr.calibration_max_dev);
    }
    if (worst > 1e-3) {
        out.pass = false;
    }
    std::ostringstream ss;
    ss << "max |dice(threshold) - sup_dice| over all runs and thresholds = "
       << worst;
    out.detail = ss.str();
    return out;
}

// ---- criterion 6: volume ordering against the CE baseline ---------------

Outcome criterion_volume_ordering() {
    Rng rng(0xACCE9A);
    int violations = 0;
    for (int t = 0; t < 200; ++t) {
        std::size_t n = 4 + rng.next_u64() % 61;
        VolumeBoundsReport r =
            volume_bounds_check(random_marginal(n, rng, t % 3 == 0));
        if (!r.ordering_ok) {
            ++violations;
        }
    }
    VolumeBoundsReport low =
        volume_bounds_check(MarginalMap(Grid::constant({32, 32}, 0.3)));
    bool gap = low.ce_volume == 0.0 && low.vol_min == 1.0;

    Outcome out;
    out.pass = violations == 0 && gap;
    std::ostringstream ss;
    ss << violations << " ordering violations; constant-0.3 marginal gap "
       << low.ce_volume << " vs " << low.vol_min;
    out.detail = ss.str();
    return out;
}

// ---- criterion 7: layer-cake reconstruction ------------------------------

Outcome criterion_layer_cake() {
    Rng rng(0xACCE9B);
    double worst_excess = -1.0;
    bool pass = true;
    for (int k_grid : {10, 100, 1000}) {
        for (int t = 0; t < 5; ++t) {
            std::size_t n = 16 + rng.next_u64() % 49;
            MarginalMap c = random_marginal(n, rng, false);
            std::vector<double> mean(n, 0.0);
            for (int k = 1; k <= k_grid; ++k) {
                double a = (static_cast<double>(k) - 0.5) /
                           static_cast<double>(k_grid);
                HardSegmentation s = threshold(c, a, ThresholdMode::NonStrict);
                for (std::size_t i = 0; i < n; ++i) {
                    mean[i] += s.grid.cells[i];
                }
            }
            double bound = 0.5 / k_grid + 1e-12;
            for (std::size_t i = 0; i < n; ++i) {
                double err = std::abs(mean[i] / k_grid - c.grid.cells[i]);
                worst_excess = std::max(worst_excess, err - bound);
                if (err > bound) {
                    pass = false;
                }
            }
        }
    }
    Outcome out;
    out.pass = pass;
    std::ostringstream ss;
    ss << "max error minus bound = " << worst_excess;
    out.detail = ss.str();
    return out;
}

// ---- criterion 8: CLI sweep determinism ----------------------------------

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

Outcome criterion_cli_determinism(const std::string& cli,
                                  const fs::path& scratch) {
    Outcome out;
    if (cli.empty()) {
        out.detail = "no --cli path given";
        return out;
    }
    fs::path conf_a = scratch / "det_a.cfg";
    fs::path conf_b = scratch / "det_b.cfg";
    fs::path out_a = scratch / "det_a";
    fs::path out_b = scratch / "det_b";
    for (auto [conf, dir] : {std::pair{conf_a, out_a}, {conf_b, out_b}}) {
        std::ofstream f(conf);
        f << "output_dir = " << dir.string() << "\n"
          << "samples = 2\n"
          << "seed = 99\n"
          << "iterations = 50\n"
          << "record_at = 1,50\n"
          << "case.r3.type = synth\n"
          << "case.r3.rho = 0.03\n"
          << "case.r3.dims = 64x64\n"
          << "case.r6.type = synth\n"
          << "case.r6.rho = 0.06\n"
          << "case.r6.dims = 64x64\n";
    }
    for (const fs::path& conf : {conf_a, conf_b}) {
        std::string cmd = cli + " sweep --config " + conf.string() +
                          " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) {
            out.detail = "cli sweep failed";
            return out;
        }
    }
    std::vector<std::string> names = {"report.csv", "runs/r3_s0.csv",
                                      "runs/r3_s1.csv", "runs/r6_s0.csv",
                                      "runs/r6_s1.csv"};
    for (const auto& name : names) {
        std::string a = read_file(out_a / name);
        std::string b = read_file(out_b / name);
        if (a.empty() || a != b) {
            out.detail = name + " differs between invocations";
            return out;
        }
    }
    out.pass = true;
    out.detail = std::to_string(names.size()) + " files byte-identical";
    return out;
}

int report_line(int index, const char* name, const Outcome& out,
                double seconds, double budget) {
    bool ok = out.pass && seconds <= budget;
    std::printf("%s  %d %-28s %s  [%.1fs / %.0fs]\n", ok ? "PASS" : "FAIL",
                index, name, out.detail.c_str(), seconds, budget);
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    fs::path scratch = "acceptance_scratch";
    for (int i = 1; i + 1 < argc; i += 2) {
        std::string key = argv[i];
        if (key == "--cli") {
            cli = argv[i + 1];
        } else if (key == "--scratch") {
            scratch = argv[i + 1];
        }
    }
    fs::create_directories(scratch);

    int failures = 0;

    {
        Timer t;
        Outcome out = criterion_oracle();
        failures += report_line(1, "oracle-equivalence", out, t.seconds(), 30);
    }
    {
        Timer t;
        Outcome out = criterion_sharpness();
        failures += report_line(2, "sharp-volume-bounds", out, t.seconds(), 10);
    }
    {
        Timer t;
        Outcome out = criterion_gradient();
        failures += report_line(3, "gradient-fidelity", out, t.seconds(), 5);
    }
    {
        Timer t;
        SweepReport report = run_reference_sweep(scratch);
        double sweep_seconds = t.seconds();
        failures += report_line(4, "synthetic-sweep-trend",
                                criterion_table_trend(report), sweep_seconds,
                                600);
        failures += report_line(5, "threshold-calibration",
                                criterion_calibration(report), sweep_seconds,
                                600);
    }
    {
        Timer t;
        Outcome out = criterion_volume_ordering();
        failures += report_line(6, "volume-ordering", out, t.seconds(), 5);
    }
    {
        Timer t;
        Outcome out = criterion_layer_cake();
        failures += report_line(7, "layer-cake", out, t.seconds(), 5);
    }
    {
        Timer t;
        Outcome out = criterion_cli_determinism(cli, scratch);
        failures += report_line(8, "sweep-determinism", out, t.seconds(), 120);
    }

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
