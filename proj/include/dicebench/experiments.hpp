#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dicebench/descent.hpp"
#include "dicebench/optimal_dice.hpp"
#include "dicebench/synth.hpp"

namespace dicebench {

/// Where a sweep case gets its marginal from.
struct CaseSource {
    enum class Kind {
        Synth, // generated by the synthetic pipeline
        File,  // a single marginal grid file
        Masks, // several rater masks, averaged cell-wise
    };
    Kind kind = Kind::Synth;
    SynthConfig synth;
    std::vector<std::string> paths;
};

struct SweepCase {
    std::string name;
    CaseSource source;
};

struct SweepSpec {
    std::vector<SweepCase> cases;
    int samples = 20;
    DescentConfig descent;
    std::string output_dir = "sweep_out";
    std::uint64_t seed = 0;
    /// 0 = DICEBENCH_WORKERS env var, else hardware concurrency.
    int workers = 0;

    void validate() const;
};

/// Thresholds at which the final iterate is re-scored against sup_dice.
inline constexpr double kCalibrationThresholds[] = {0.1, 0.3, 0.5, 0.7, 0.9};

/// Per-case aggregate over all samples. All e-values are means across the
/// case's runs, indexed like descent.record_at.
struct CaseReport {
    std::string name;
    int samples = 0;
    double sup_dice = 0.0;
    double tau = 0.0;
    double vol_min = 0.0;
    double vol_max = 0.0;
    double ce_volume = 0.0;
    /// Worst |dice(threshold(sigma(f_final), a)) - sup_dice| over all runs
    /// and all calibration thresholds a.
    double calibration_max_dev = 0.0;
    std::vector<double> e0;
    std::vector<double> e1;
    std::string error; // non-empty when the case aborted
};

struct SweepReport {
    std::vector<int> record_at;
    std::vector<CaseReport> cases;
};

/// Runs every (case, sample) pair, writes per-run traces under
/// <output_dir>/runs/ and the aggregate table to <output_dir>/report.csv,
/// and returns the aggregate. Sample k uses the same derived seeds in
/// every case, so cases are compared on paired draws. A failing case is
/// recorded in its report row; the other cases still run.
SweepReport run_sweep(const SweepSpec& spec);

/// Parses the flat key=value sweep config format (see README for keys).
SweepSpec parse_sweep_config(std::istream& in);
SweepSpec load_sweep_config(const std::string& path);

/// Writes report.csv content for a sweep report.
void write_sweep_report_csv(const SweepReport& report, std::ostream& out);

struct PropertyResult {
    std::string name;
    bool pass = false;
    /// Distance to the property's failure boundary (sign-normalized so
    /// larger is safer).
    double margin = 0.0;
    std::string detail;
};

struct VerificationReport {
    std::vector<PropertyResult> results;
    bool all_pass() const;
};

/// Checks, by construction and against the brute-force oracle: optimizer
/// characterization, sharp volume bounds, descent calibration, and the
/// volume ordering against the cross-entropy baseline.
VerificationReport verify_theorems(std::vector<std::size_t> dims, int trials,
                                   std::uint64_t seed);

/// Runs one descent on m and writes a figure bundle to out_dir: the
/// marginal, sigma(f_l) at each recorded iteration, the max-volume optimal
/// segmentation (7 grids for the default record list), and curves.csv with
/// the loss/error trajectory.
void emit_figure_data(const MarginalMap& m, const DescentConfig& cfg,
                      const std::string& out_dir);

} // namespace dicebench
