#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dicebench/experiments.hpp"
#include "dicebench/grid_io.hpp"

namespace {

using namespace dicebench;

std::vector<int> parse_record_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        out.push_back(std::stoi(part));
    }
    return out;
}

int cmd_synth(const SynthConfig& cfg, const std::string& out_path) {
    MarginalMap m = make_synthetic(cfg);
    write_grid(m.grid, out_path);
    std::printf("wrote %s (volume %.6f)\n", out_path.c_str(),
                l1_norm(m.grid));
    return 0;
}

int cmd_optimal(const std::string& in_path, const std::string& mode,
                const std::string& out_path, const std::string& report_path) {
    MarginalMap m = read_marginal(in_path);
    OptimalDiceSolution sol = solve_optimal_dice(m);
    VolumeMode volume_mode =
        mode == "min" ? VolumeMode::MinVolume : VolumeMode::MaxVolume;
    HardSegmentation s = optimal_segmentation(sol, m, volume_mode);
    if (!out_path.empty()) {
        write_grid(s.grid, out_path);
    }
    double vol_min =
        l1_norm(optimal_segmentation(sol, m, VolumeMode::MinVolume).grid);
    double vol_max =
        l1_norm(optimal_segmentation(sol, m, VolumeMode::MaxVolume).grid);
    if (!report_path.empty()) {
        std::ofstream rep(report_path, std::ios::trunc);
        if (!rep) {
            throw IoFailure("cannot open " + report_path + " for writing");
        }
        rep << "sup_dice,tau,below_mass,tie_mass,above_mass,vol_min,vol_max\n";
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      sol.sup_dice, sol.tau, sol.below_mass, sol.tie_mass,
                      sol.above_mass, vol_min, vol_max);
        rep << buf;
    }
    std::printf("sup_dice %.6f  tau %.6f  masses %.4f/%.4f/%.4f  "
                "volumes [%.4f, %.4f]\n",
                sol.sup_dice, sol.tau, sol.below_mass, sol.tie_mass,
                sol.above_mass, vol_min, vol_max);
    return 0;
}

int cmd_descend(const std::string& marginal_path, const DescentConfig& cfg,
                const std::string& out_path) {
    MarginalMap m = read_marginal(marginal_path);
    OptimalDiceSolution sol = solve_optimal_dice(m);
    HardSegmentation s_star =
        optimal_segmentation(sol, m, VolumeMode::MaxVolume);
    DescentTrace trace = run_descent(m, cfg, s_star);
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        throw IoFailure("cannot open " + out_path + " for writing");
    }
    out << "iteration,soft_dice,e0,e1\n";
    char buf[160];
    for (std::size_t i = 0; i < trace.errors.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n",
                      trace.errors[i].iteration, trace.losses[i],
                      trace.errors[i].e0, trace.errors[i].e1);
        out << buf;
    }
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_sweep(const std::string& config_path) {
    SweepSpec spec = load_sweep_config(config_path);
    SweepReport report = run_sweep(spec);
    bool all_ok = true;
    for (const auto& cr : report.cases) {
        if (cr.error.empty()) {
            std::printf("case %-16s sup_dice %.4f  e0_final %.6f  "
                        "e1_final %.6f\n",
                        cr.name.c_str(), cr.sup_dice,
                        cr.e0.empty() ? 0.0 : cr.e0.back(),
                        cr.e1.empty() ? 0.0 : cr.e1.back());
        } else {
            std::printf("case %-16s ERROR: %s\n", cr.name.c_str(),
                        cr.error.c_str());
            all_ok = false;
        }
    }
    std::printf("report written to %s/report.csv\n", spec.output_dir.c_str());
    return all_ok ? 0 : 1;
}

int cmd_verify(const std::string& dims_text, int trials, std::uint64_t seed) {
    VerificationReport report =
        verify_theorems(parse_dims(dims_text), trials, seed);
    for (const auto& r : report.results) {
        std::printf("%s  %-22s %s\n", r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.detail.c_str());
    }
    return report.all_pass() ? 0 : 1;
}

int cmd_figures(const std::string& marginal_path, const DescentConfig& cfg,
                const std::string& out_dir) {
    MarginalMap m = read_marginal(marginal_path);
    emit_figure_data(m, cfg, out_dir);
    std::printf("figure bundle written to %s\n", out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal Dice solutions and soft-Dice descent experiments"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic marginal");
    SynthConfig synth_cfg;
    std::string synth_dims = "200x200";
    std::string synth_out = "m.dgrd";
    synth->add_option("--rho", synth_cfg.rho, "blur standard deviation");
    synth->add_option("--seed", synth_cfg.seed, "rng seed");
    synth->add_option("--radius", synth_cfg.radius, "ball radius");
    synth->add_option("--dims", synth_dims, "grid extents, e.g. 200x200");
    synth->add_option("--amplitude", synth_cfg.deform_amplitude,
                      "deformation amplitude");
    synth->add_option("--correlation", synth_cfg.deform_correlation,
                      "deformation correlation length");
    synth->add_option("--out", synth_out, "output grid file");

    // optimal
    auto* optimal =
        app.add_subcommand("optimal", "solve sup Dice for a marginal");
    std::string optimal_in;
    std::string optimal_mode = "max";
    std::string optimal_out;
    std::string optimal_report;
    optimal->add_option("--in", optimal_in, "marginal grid file")->required();
    optimal->add_option("--mode", optimal_mode, "min or max volume optimizer")
        ->check(CLI::IsMember({"min", "max"}));
    optimal->add_option("--out", optimal_out, "optimizer grid file");
    optimal->add_option("--report", optimal_report, "solution report CSV");

    // descend
    auto* descend =
        app.add_subcommand("descend", "gradient descent on soft-Dice");
    std::string descend_marginal;
    std::string descend_record = "1,10,20,100,200";
    std::string descend_out = "trace.csv";
    DescentConfig descend_cfg;
    descend->add_option("--marginal", descend_marginal, "marginal grid file")
        ->required();
    descend->add_option("--seed", descend_cfg.seed, "init seed");
    descend->add_option("--iters", descend_cfg.iterations, "iterations");
    descend->add_option("--record", descend_record, "iterations to record");
    descend->add_option("--gamma-factor", descend_cfg.learning_rate_factor,
                        "learning rate is factor * N");
    descend->add_option("--out", descend_out, "trace CSV path");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a configured sweep");
    std::string sweep_config;
    sweep->add_option("--config", sweep_config, "sweep config file")
        ->required();

    // verify
    auto* verify =
        app.add_subcommand("verify", "run the theorem verification suites");
    std::string verify_dims = "100x100";
    int verify_trials = 200;
    std::uint64_t verify_seed = 12345;
    verify->add_option("--dims", verify_dims, "grid for the bound suites");
    verify->add_option("--trials", verify_trials, "random instances");
    verify->add_option("--seed", verify_seed, "rng seed");

    // figures
    auto* figures =
        app.add_subcommand("figures", "emit plot-ready grids and curves");
    std::string figures_marginal;
    std::string figures_out = "figures_out";
    std::string figures_record = "1,10,20,100,200";
    DescentConfig figures_cfg;
    figures->add_option("--marginal", figures_marginal, "marginal grid file")
        ->required();
    figures->add_option("--seed", figures_cfg.seed, "init seed");
    figures->add_option("--iters", figures_cfg.iterations, "iterations");
    figures->add_option("--record", figures_record, "iterations to record");
    figures->add_option("--out-dir", figures_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) {
            synth_cfg.dims = parse_dims(synth_dims);
            return cmd_synth(synth_cfg, synth_out);
        }
        if (optimal->parsed()) {
            return cmd_optimal(optimal_in, optimal_mode, optimal_out,
                               optimal_report);
        }
        if (descend->parsed()) {
            descend_cfg.record_at = parse_record_list(descend_record);
            return cmd_descend(descend_marginal, descend_cfg, descend_out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_config);
        }
        if (verify->parsed()) {
            return cmd_verify(verify_dims, verify_trials, verify_seed);
        }
        if (figures->parsed()) {
            figures_cfg.record_at = parse_record_list(figures_record);
            return cmd_figures(figures_marginal, figures_cfg, figures_out);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
