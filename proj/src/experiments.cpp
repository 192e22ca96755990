#include "dicebench/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "dicebench/grid_io.hpp"

namespace dicebench {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, sep)) {
        parts.push_back(trim(part));
    }
    return parts;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long long v = std::stoll(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument(value);
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for " + key + ": '" + value + "'");
    }
}

int resolve_workers(int requested, std::size_t jobs) {
    int workers = requested;
    if (workers <= 0) {
        if (const char* env = std::getenv("DICEBENCH_WORKERS")) {
            workers = std::atoi(env);
        }
    }
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
    }
    if (workers <= 0) {
        workers = 1;
    }
    return static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), jobs));
}

struct RunResult {
    std::vector<ErrorPair> errors;
    std::vector<double> losses;
    double sup_dice = 0.0;
    double tau = 0.0;
    double vol_min = 0.0;
    double vol_max = 0.0;
    double ce_volume = 0.0;
    double calibration_dev = 0.0;
    std::string error;
};

MarginalMap resolve_case_marginal(const CaseSource& source, std::uint64_t seed,
                                  std::uint64_t sample) {
    switch (source.kind) {
        case CaseSource::Kind::Synth: {
            SynthConfig cfg = source.synth;
            cfg.seed = mix_seed(seed, sample, 0);
            return make_synthetic(cfg);
        }
        case CaseSource::Kind::File:
            if (source.paths.size() != 1) {
                throw ConfigError("file case needs exactly one path");
            }
            return read_marginal(source.paths[0]);
        case CaseSource::Kind::Masks: {
            if (source.paths.empty()) {
                throw ConfigError("masks case needs at least one path");
            }
            std::vector<HardSegmentation> masks;
            masks.reserve(source.paths.size());
            for (const auto& path : source.paths) {
                masks.push_back(read_hard_segmentation(path));
            }
            return average_masks(masks);
        }
    }
    throw ConfigError("unknown case source");
}

RunResult execute_run(const SweepCase& sweep_case, const SweepSpec& spec,
                      int sample) {
    RunResult result;
    auto k = static_cast<std::uint64_t>(sample);
    MarginalMap m = resolve_case_marginal(sweep_case.source, spec.seed, k);

    OptimalDiceSolution sol = solve_optimal_dice(m);
    HardSegmentation s_star =
        optimal_segmentation(sol, m, VolumeMode::MaxVolume);

    DescentConfig descent_cfg = spec.descent;
    descent_cfg.seed = mix_seed(spec.seed, k, 1);
    DescentTrace trace = run_descent(m, descent_cfg, s_star);

    result.errors = trace.errors;
    result.losses = trace.losses;
    result.sup_dice = sol.sup_dice;
    result.tau = sol.tau;
    result.vol_min =
        l1_norm(optimal_segmentation(sol, m, VolumeMode::MinVolume).grid);
    result.vol_max = l1_norm(s_star.grid);
    result.ce_volume =
        l1_norm(threshold(m, 0.5, ThresholdMode::NonStrict).grid);

    MarginalMap final_soft = sigmoid_map(trace.final_logits);
    double dev = 0.0;
    for (double a : kCalibrationThresholds) {
        double d = dice(m, threshold(final_soft, a, ThresholdMode::NonStrict));
        dev = std::max(dev, std::abs(d - sol.sup_dice));
    }
    result.calibration_dev = dev;
    return result;
}

void write_trace_csv(const RunResult& run, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + path + " for writing");
    }
    out << "iteration,soft_dice,e0,e1\n";
    for (std::size_t i = 0; i < run.errors.size(); ++i) {
        out << run.errors[i].iteration << "," << fmt(run.losses[i]) << ","
            << fmt(run.errors[i].e0) << "," << fmt(run.errors[i].e1) << "\n";
    }
    if (!out.good()) {
        throw IoFailure("write error on " + path);
    }
}

} // namespace

void SweepSpec::validate() const {
    if (cases.empty()) {
        throw ConfigError("sweep needs at least one case");
    }
    if (samples < 1) {
        throw ConfigError("samples must be >= 1");
    }
    descent.validate();
    std::vector<std::string> names;
    for (const auto& c : cases) {
        if (c.name.empty()) {
            throw ConfigError("case names must be non-empty");
        }
        names.push_back(c.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        throw ConfigError("case names must be unique");
    }
}

SweepReport run_sweep(const SweepSpec& spec) {
    spec.validate();

    std::size_t n_cases = spec.cases.size();
    auto n_samples = static_cast<std::size_t>(spec.samples);
    std::size_t jobs = n_cases * n_samples;
    std::vector<RunResult> runs(jobs);

    // Runs are pure and indexed by (case, sample), so any scheduling
    // produces the same results vector.
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t job = next.fetch_add(1);
            if (job >= jobs) {
                return;
            }
            std::size_t case_idx = job / n_samples;
            int sample = static_cast<int>(job % n_samples);
            try {
                runs[job] = execute_run(spec.cases[case_idx], spec, sample);
            } catch (const std::exception& e) {
                runs[job].error = e.what();
            }
        }
    };
    int workers = resolve_workers(spec.workers, jobs);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    SweepReport report;
    report.record_at = spec.descent.record_at;

    namespace fs = std::filesystem;
    fs::create_directories(fs::path(spec.output_dir) / "runs");

    for (std::size_t ci = 0; ci < n_cases; ++ci) {
        CaseReport cr;
        cr.name = spec.cases[ci].name;
        cr.samples = spec.samples;
        cr.e0.assign(report.record_at.size(), 0.0);
        cr.e1.assign(report.record_at.size(), 0.0);

        for (std::size_t k = 0; k < n_samples; ++k) {
            const RunResult& run = runs[ci * n_samples + k];
            if (!run.error.empty() && cr.error.empty()) {
                cr.error = run.error;
            }
        }
        if (cr.error.empty()) {
            double dn = static_cast<double>(n_samples);
            for (std::size_t k = 0; k < n_samples; ++k) {
                const RunResult& run = runs[ci * n_samples + k];
                cr.sup_dice += run.sup_dice;
                cr.tau += run.tau;
                cr.vol_min += run.vol_min;
                cr.vol_max += run.vol_max;
                cr.ce_volume += run.ce_volume;
                cr.calibration_max_dev =
                    std::max(cr.calibration_max_dev, run.calibration_dev);
                for (std::size_t i = 0; i < report.record_at.size(); ++i) {
                    cr.e0[i] += run.errors[i].e0;
                    cr.e1[i] += run.errors[i].e1;
                }
            }
            cr.sup_dice /= dn;
            cr.tau /= dn;
            cr.vol_min /= dn;
            cr.vol_max /= dn;
            cr.ce_volume /= dn;
            for (std::size_t i = 0; i < report.record_at.size(); ++i) {
                cr.e0[i] /= dn;
                cr.e1[i] /= dn;
            }
            for (std::size_t k = 0; k < n_samples; ++k) {
                std::string path = (fs::path(spec.output_dir) / "runs" /
                                    (cr.name + "_s" + std::to_string(k) +
                                     ".csv"))
                                       .string();
                write_trace_csv(runs[ci * n_samples + k], path);
            }
        }
        report.cases.push_back(std::move(cr));
    }

    std::string report_path =
        (fs::path(spec.output_dir) / "report.csv").string();
    std::ofstream out(report_path, std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + report_path + " for writing");
    }
    write_sweep_report_csv(report, out);
    if (!out.good()) {
        throw IoFailure("write error on " + report_path);
    }
    return report;
}

void write_sweep_report_csv(const SweepReport& report, std::ostream& out) {
    out << "case,samples,status,sup_dice,tau,vol_min,vol_max,ce_volume,"
           "calibration_max_dev";
    for (int l : report.record_at) {
        out << ",e0_" << l << ",e1_" << l;
    }
    out << "\n";
    for (const auto& cr : report.cases) {
        out << cr.name << "," << cr.samples << ","
            << (cr.error.empty() ? "ok" : "error") << "," << fmt(cr.sup_dice)
            << "," << fmt(cr.tau) << "," << fmt(cr.vol_min) << ","
            << fmt(cr.vol_max) << "," << fmt(cr.ce_volume) << ","
            << fmt(cr.calibration_max_dev);
        for (std::size_t i = 0; i < report.record_at.size(); ++i) {
            if (cr.error.empty()) {
                out << "," << fmt(cr.e0[i]) << "," << fmt(cr.e1[i]);
            } else {
                out << ",,";
            }
        }
        out << "\n";
    }
}

SweepSpec parse_sweep_config(std::istream& in) {
    SweepSpec spec;
    std::vector<std::string> case_order;
    struct RawCase {
        std::string type;
        SynthConfig synth;
        std::vector<std::string> paths;
    };
    std::map<std::string, RawCase> raw_cases;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string text = trim(line);
        if (text.empty() || text[0] == '#') {
            continue;
        }
        std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        }
        std::string key = trim(text.substr(0, eq));
        std::string value = trim(text.substr(eq + 1));

        if (key.rfind("case.", 0) == 0) {
            std::string rest = key.substr(5);
            std::size_t dot = rest.find('.');
            if (dot == std::string::npos) {
                throw ConfigError("bad case key '" + key + "'");
            }
            std::string name = rest.substr(0, dot);
            std::string field = rest.substr(dot + 1);
            if (raw_cases.find(name) == raw_cases.end()) {
                case_order.push_back(name);
            }
            RawCase& rc = raw_cases[name];
            if (field == "type") {
                rc.type = value;
            } else if (field == "rho") {
                rc.synth.rho = parse_double(key, value);
            } else if (field == "radius") {
                rc.synth.radius = parse_double(key, value);
            } else if (field == "amplitude") {
                rc.synth.deform_amplitude = parse_double(key, value);
            } else if (field == "correlation") {
                rc.synth.deform_correlation = parse_double(key, value);
            } else if (field == "dims") {
                rc.synth.dims = parse_dims(value);
            } else if (field == "path") {
                rc.paths = {value};
            } else if (field == "paths") {
                rc.paths = split(value, ';');
            } else {
                throw ConfigError("unknown case key '" + key + "'");
            }
            continue;
        }

        if (key == "output_dir") {
            spec.output_dir = value;
        } else if (key == "samples") {
            spec.samples = static_cast<int>(parse_int(key, value));
        } else if (key == "seed") {
            spec.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "iterations") {
            spec.descent.iterations = static_cast<int>(parse_int(key, value));
        } else if (key == "record_at") {
            spec.descent.record_at.clear();
            for (const auto& part : split(value, ',')) {
                spec.descent.record_at.push_back(
                    static_cast<int>(parse_int(key, part)));
            }
        } else if (key == "gamma_factor") {
            spec.descent.learning_rate_factor = parse_double(key, value);
        } else if (key == "workers") {
            spec.workers = static_cast<int>(parse_int(key, value));
        } else {
            throw ConfigError("unknown key '" + key + "'");
        }
    }

    for (const auto& name : case_order) {
        const RawCase& rc = raw_cases[name];
        SweepCase sc;
        sc.name = name;
        if (rc.type == "synth") {
            sc.source.kind = CaseSource::Kind::Synth;
            sc.source.synth = rc.synth;
        } else if (rc.type == "file") {
            sc.source.kind = CaseSource::Kind::File;
            sc.source.paths = rc.paths;
        } else if (rc.type == "masks") {
            sc.source.kind = CaseSource::Kind::Masks;
            sc.source.paths = rc.paths;
        } else {
            throw ConfigError("case '" + name +
                              "' needs type = synth|file|masks");
        }
        spec.cases.push_back(std::move(sc));
    }
    spec.validate();
    return spec;
}

SweepSpec load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SourceNotFound("cannot open config " + path);
    }
    return parse_sweep_config(in);
}

bool VerificationReport::all_pass() const {
    for (const auto& r : results) {
        if (!r.pass) {
            return false;
        }
    }
    return true;
}

namespace {

MarginalMap random_marginal(std::size_t n, Rng& rng, bool quantized) {
    std::vector<double> cells(n);
    for (double& v : cells) {
        double u = rng.uniform();
        // quantized marginals mimic 5-rater averages and produce ties
        v = quantized ? std::floor(u * 6.0) / 5.0 : u;
    }
    return MarginalMap(Grid({n}, std::move(cells)));
}

} // namespace

VerificationReport verify_theorems(std::vector<std::size_t> dims, int trials,
                                   std::uint64_t seed) {
    if (trials < 1) {
        throw ConfigError("trials must be >= 1");
    }
    VerificationReport report;
    Rng rng(seed);

    // Suite 1: threshold search against the exhaustive oracle, plus the
    // three-case characterization of every oracle optimizer.
    {
        double max_sup_diff = 0.0;
        int characterization_violations = 0;
        int missing_extremes = 0;
        for (int t = 0; t < trials; ++t) {
            std::size_t n = 4 + static_cast<std::size_t>(rng.next_u64() % 13);
            MarginalMap m = random_marginal(n, rng, t % 2 == 1);
            OptimalDiceSolution sol = solve_optimal_dice(m);
            BruteForceResult bf = brute_force_optimal(m);
            max_sup_diff =
                std::max(max_sup_diff, std::abs(sol.sup_dice - bf.sup_dice));
            for (std::uint32_t mask : bf.optimizers) {
                for (std::size_t i = 0; i < n; ++i) {
                    bool on = (mask >> i) & 1u;
                    double v = m.grid.cells[i];
                    if (v < sol.tau - 1e-12 && on) {
                        ++characterization_violations;
                    }
                    if (v > sol.tau + 1e-12 && !on) {
                        ++characterization_violations;
                    }
                }
            }
            for (VolumeMode mode :
                 {VolumeMode::MinVolume, VolumeMode::MaxVolume}) {
                HardSegmentation s = optimal_segmentation(sol, m, mode);
                std::uint32_t mask = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (s.grid.cells[i] == 1.0) {
                        mask |= 1u << i;
                    }
                }
                if (!std::binary_search(bf.optimizers.begin(),
                                        bf.optimizers.end(), mask)) {
                    ++missing_extremes;
                }
            }
        }
        bool pass = max_sup_diff <= 1e-12 && characterization_violations == 0 &&
                    missing_extremes == 0;
        report.results.push_back(
            {"oracle-equivalence", pass, 1e-12 - max_sup_diff,
             "max sup diff " + fmt(max_sup_diff) + ", " +
                 std::to_string(characterization_violations) +
                 " characterization violations, " +
                 std::to_string(missing_extremes) +
                 " extreme optimizers missing from the oracle set"});
    }

    // Suite 2: sharpness of the volume bounds on the requested grid.
    {
        std::size_t n = cell_count(dims);
        double dn = static_cast<double>(n);
        double worst = 0.0;
        for (int i = 1; i <= 10; ++i) {
            double v = static_cast<double>(i) / 10.0;
            ExtremalMarginal low =
                construct_extremal(v, ExtremalKind::MinAttainer, dims);
            OptimalDiceSolution sol = solve_optimal_dice(low.marginal);
            double vol_min = l1_norm(
                optimal_segmentation(sol, low.marginal, VolumeMode::MinVolume)
                    .grid);
            double expected = std::round(v * v * dn) / dn;
            worst = std::max(worst, std::abs(vol_min - expected));

            ExtremalMarginal high =
                construct_extremal(v, ExtremalKind::MaxAttainer, dims);
            OptimalDiceSolution sol_high = solve_optimal_dice(high.marginal);
            double vol_max = l1_norm(optimal_segmentation(sol_high,
                                                          high.marginal,
                                                          VolumeMode::MaxVolume)
                                         .grid);
            worst = std::max(worst, std::abs(vol_max - 1.0));
        }
        report.results.push_back({"sharp-volume-bounds", worst == 0.0, -worst,
                                  "max deviation from the attained bound " +
                                      fmt(worst)});
    }

    // Suite 3: descent calibration — the thresholded final iterate scores
    // optimal Dice for every threshold, and the iterate itself lands next
    // to the optimizer set.
    {
        double max_dev = 0.0;
        double max_dist = 0.0;
        for (double rho : {0.01, 0.05, 0.09}) {
            SynthConfig cfg;
            cfg.dims = dims;
            cfg.rho = rho;
            cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(rho * 100), 7);
            MarginalMap m = make_synthetic(cfg);
            OptimalDiceSolution sol = solve_optimal_dice(m);
            HardSegmentation s_star =
                optimal_segmentation(sol, m, VolumeMode::MaxVolume);
            DescentConfig dc;
            dc.seed = mix_seed(seed, static_cast<std::uint64_t>(rho * 100), 8);
            DescentTrace trace = run_descent(m, dc, s_star);
            MarginalMap final_soft = sigmoid_map(trace.final_logits);
            for (double a : kCalibrationThresholds) {
                double d = dice(
                    m, threshold(final_soft, a, ThresholdMode::NonStrict));
                max_dev = std::max(max_dev, std::abs(d - sol.sup_dice));
            }
            max_dist = std::max(max_dist,
                                distance_to_optimal_set(sol, m, final_soft));
        }
        bool pass = max_dev <= 1e-3 && max_dist <= 0.005;
        report.results.push_back(
            {"calibration", pass, 1e-3 - max_dev,
             "max threshold-Dice deviation " + fmt(max_dev) +
                 ", max distance to optimizer set " + fmt(max_dist)});
    }

    // Suite 4: volume bounds and the cross-entropy volume ordering on
    // random and constant marginals.
    {
        int violations = 0;
        double min_margin = 1.0;
        auto check = [&](const MarginalMap& m) {
            VolumeBoundsReport r = volume_bounds_check(m);
            if (!r.bounds_ok || !r.ordering_ok) {
                ++violations;
            }
            min_margin = std::min(min_margin, r.vol_min - r.lower_bound);
            min_margin = std::min(min_margin, r.vol_min - r.ce_volume);
            min_margin = std::min(min_margin, 1.0 - r.vol_max);
        };
        for (int t = 0; t < trials; ++t) {
            std::size_t n = 4 + static_cast<std::size_t>(rng.next_u64() % 61);
            check(random_marginal(n, rng, t % 3 == 0));
        }
        check(MarginalMap(Grid::constant({64}, 0.3)));
        check(MarginalMap(Grid::constant({64}, 0.9)));
        report.results.push_back({"volume-ordering", violations == 0,
                                  min_margin,
                                  std::to_string(violations) +
                                      " violations, min margin " +
                                      fmt(min_margin)});
    }

    return report;
}

void emit_figure_data(const MarginalMap& m, const DescentConfig& cfg,
                      const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    OptimalDiceSolution sol = solve_optimal_dice(m);
    HardSegmentation s_star =
        optimal_segmentation(sol, m, VolumeMode::MaxVolume);

    DescentConfig capture_cfg = cfg;
    capture_cfg.capture_iterates = true;
    DescentTrace trace = run_descent(m, capture_cfg, s_star);

    write_grid(m.grid, (fs::path(out_dir) / "marginal.dgrd").string());
    for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "iterate_%04d.dgrd",
                      capture_cfg.record_at[i]);
        write_grid(trace.iterates[i].grid,
                   (fs::path(out_dir) / name).string());
    }
    write_grid(s_star.grid, (fs::path(out_dir) / "optimal.dgrd").string());

    std::string curves = (fs::path(out_dir) / "curves.csv").string();
    std::ofstream out(curves, std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + curves + " for writing");
    }
    out << "iteration,soft_dice,e0,e1\n";
    for (std::size_t i = 0; i < trace.errors.size(); ++i) {
        out << trace.errors[i].iteration << "," << fmt(trace.losses[i]) << ","
            << fmt(trace.errors[i].e0) << "," << fmt(trace.errors[i].e1)
            << "\n";
    }
    if (!out.good()) {
        throw IoFailure("write error on " + curves);
    }
}

} // namespace dicebench
