#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dicebench/experiments.hpp"
#include "dicebench/grid_io.hpp"

using namespace dicebench;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

fs::path fresh_dir(const char* name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

SweepSpec small_spec(const fs::path& out_dir) {
    std::istringstream cfg(
        "output_dir = " + out_dir.string() + "\n"
        "samples = 2\n"
        "seed = 11\n"
        "iterations = 30\n"
        "record_at = 1,30\n"
        "gamma_factor = 10\n"
        "case.rho02.type = synth\n"
        "case.rho02.rho = 0.02\n"
        "case.rho02.dims = 32x32\n"
        "case.rho05.type = synth\n"
        "case.rho05.rho = 0.05\n"
        "case.rho05.dims = 32x32\n");
    return parse_sweep_config(cfg);
}

// splits a CSV line on commas (no quoting in our files)
std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) {
        out.push_back(f);
    }
    return out;
}

} // namespace

TEST_CASE("sweep config parsing") {
    std::istringstream cfg(
        "# a comment\n"
        "samples = 3\n"
        "seed = 17\n"
        "output_dir = somewhere\n"
        "iterations = 50\n"
        "record_at = 1,10,50\n"
        "case.a.type = synth\n"
        "case.a.rho = 0.04\n"
        "case.a.dims = 16x16\n"
        "case.b.type = file\n"
        "case.b.path = /tmp/x.dgrd\n");
    SweepSpec spec = parse_sweep_config(cfg);
    CHECK(spec.samples == 3);
    CHECK(spec.seed == 17);
    CHECK(spec.output_dir == "somewhere");
    CHECK(spec.descent.iterations == 50);
    CHECK(spec.descent.record_at == std::vector<int>{1, 10, 50});
    REQUIRE(spec.cases.size() == 2);
    CHECK(spec.cases[0].name == "a");
    CHECK(spec.cases[0].source.kind == CaseSource::Kind::Synth);
    CHECK(spec.cases[0].source.synth.rho == 0.04);
    CHECK(spec.cases[1].source.kind == CaseSource::Kind::File);
    CHECK(spec.cases[1].source.paths ==
          std::vector<std::string>{"/tmp/x.dgrd"});
}

TEST_CASE("sweep config rejects bad input") {
    std::istringstream unknown("nonsense = 1\n");
    CHECK_THROWS_AS(parse_sweep_config(unknown), ConfigError);

    std::istringstream no_type("case.a.rho = 0.1\n");
    CHECK_THROWS_AS(parse_sweep_config(no_type), ConfigError);

    std::istringstream no_cases("samples = 5\n");
    CHECK_THROWS_AS(parse_sweep_config(no_cases), ConfigError);

    std::istringstream bad_number("samples = many\ncase.a.type = synth\n");
    CHECK_THROWS_AS(parse_sweep_config(bad_number), ConfigError);
}

TEST_CASE("run_sweep aggregates and reproduces byte-identically") {
    fs::path dir_a = fresh_dir("dicebench_sweep_a");
    SweepSpec spec = small_spec(dir_a);
    SweepReport report = run_sweep(spec);

    REQUIRE(report.cases.size() == 2);
    for (const auto& cr : report.cases) {
        CHECK(cr.error.empty());
        CHECK(cr.samples == 2);
        REQUIRE(cr.e0.size() == 2);
        for (std::size_t i = 0; i < cr.e0.size(); ++i) {
            CHECK(cr.e0[i] >= 0.0);
            CHECK(cr.e0[i] <= 1.0);
            CHECK(cr.e1[i] >= 0.0);
            CHECK(cr.e1[i] <= 1.0);
        }
        CHECK(cr.sup_dice > 0.0);
        CHECK(cr.sup_dice <= 1.0);
        CHECK(cr.vol_min <= cr.vol_max);
        CHECK(cr.ce_volume <= cr.vol_min + 1e-12);
    }

    // every run trace exists
    for (const auto& cr : report.cases) {
        for (int k = 0; k < cr.samples; ++k) {
            CHECK(fs::exists(dir_a / "runs" /
                             (cr.name + "_s" + std::to_string(k) + ".csv")));
        }
    }

    // recompute the e-means from the written traces
    for (const auto& cr : report.cases) {
        std::vector<double> e0_sum(report.record_at.size(), 0.0);
        std::vector<double> e1_sum(report.record_at.size(), 0.0);
        for (int k = 0; k < cr.samples; ++k) {
            std::ifstream in(dir_a / "runs" /
                             (cr.name + "_s" + std::to_string(k) + ".csv"));
            std::string line;
            std::getline(in, line); // header
            std::size_t row = 0;
            while (std::getline(in, line)) {
                auto f = fields(line);
                REQUIRE(f.size() == 4);
                e0_sum[row] += std::stod(f[2]);
                e1_sum[row] += std::stod(f[3]);
                ++row;
            }
            CHECK(row == report.record_at.size());
        }
        for (std::size_t i = 0; i < report.record_at.size(); ++i) {
            CHECK(std::abs(e0_sum[i] / cr.samples - cr.e0[i]) <= 1e-12);
            CHECK(std::abs(e1_sum[i] / cr.samples - cr.e1[i]) <= 1e-12);
        }
    }

    // a second invocation produces the same bytes everywhere, also when
    // the runs are spread over a worker pool
    fs::path dir_b = fresh_dir("dicebench_sweep_b");
    SweepSpec spec_b = small_spec(dir_b);
    spec_b.workers = 3;
    run_sweep(spec_b);
    CHECK(slurp(dir_a / "report.csv") == slurp(dir_b / "report.csv"));
    for (const auto& cr : report.cases) {
        for (int k = 0; k < cr.samples; ++k) {
            std::string name = cr.name + "_s" + std::to_string(k) + ".csv";
            CHECK(slurp(dir_a / "runs" / name) == slurp(dir_b / "runs" / name));
        }
    }

    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("report csv schema is stable") {
    SweepReport report;
    report.record_at = {1, 10, 20, 100, 200};
    CaseReport cr;
    cr.name = "demo";
    cr.samples = 1;
    cr.e0.assign(5, 0.25);
    cr.e1.assign(5, 0.125);
    report.cases.push_back(cr);

    std::ostringstream out;
    write_sweep_report_csv(report, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "case,samples,status,sup_dice,tau,vol_min,vol_max,ce_volume,"
          "calibration_max_dev,e0_1,e1_1,e0_10,e1_10,e0_20,e1_20,"
          "e0_100,e1_100,e0_200,e1_200");
    std::string row;
    std::getline(in, row);
    CHECK(fields(row).size() == 19);
    CHECK(fields(row)[0] == "demo");
    CHECK(fields(row)[2] == "ok");
}

TEST_CASE("a broken case does not sink the sweep") {
    fs::path dir = fresh_dir("dicebench_sweep_err");
    std::istringstream cfg(
        "output_dir = " + dir.string() + "\n"
        "samples = 1\n"
        "iterations = 5\n"
        "record_at = 1,5\n"
        "case.good.type = synth\n"
        "case.good.dims = 16x16\n"
        "case.bad.type = file\n"
        "case.bad.path = /nonexistent/m.dgrd\n");
    SweepReport report = run_sweep(parse_sweep_config(cfg));
    REQUIRE(report.cases.size() == 2);
    CHECK(report.cases[0].error.empty());
    CHECK_FALSE(report.cases[1].error.empty());

    // the report row carries the failure
    std::ifstream in(dir / "report.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    CHECK(fields(line)[2] == "ok");
    std::getline(in, line);
    CHECK(fields(line)[2] == "error");
    fs::remove_all(dir);
}

TEST_CASE("masks case averages rater files") {
    fs::path dir = fresh_dir("dicebench_sweep_masks");
    // two raters disagreeing on one cell of a 2x2 grid
    write_grid(Grid({2, 2}, {1, 1, 0, 0}), (dir / "r1.dgrd").string());
    write_grid(Grid({2, 2}, {1, 0, 0, 0}), (dir / "r2.dgrd").string());
    std::istringstream cfg(
        "output_dir = " + (dir / "out").string() + "\n"
        "samples = 1\n"
        "iterations = 40\n"
        "record_at = 40\n"
        "case.g.type = masks\n"
        "case.g.paths = " + (dir / "r1.dgrd").string() + ";" +
        (dir / "r2.dgrd").string() + "\n");
    SweepReport report = run_sweep(parse_sweep_config(cfg));
    REQUIRE(report.cases.size() == 1);
    CHECK(report.cases[0].error.empty());
    // marginal [1, 0.5, 0, 0]: sup over t in {1, 0.5}: t=1 gives
    // 2*1/(1+1.5) = 0.8, t=0.5 gives 2*1.5/(2+1.5) = 6/7; tau = 3/7
    CHECK(report.cases[0].sup_dice == doctest::Approx(6.0 / 7.0));
    fs::remove_all(dir);
}

TEST_CASE("verify_theorems passes at desk scale") {
    VerificationReport report = verify_theorems({32, 32}, 40, 2026);
    for (const auto& r : report.results) {
        INFO(r.name, ": ", r.detail);
        CHECK(r.pass);
    }
    CHECK(report.all_pass());
    CHECK(report.results.size() == 4);
}

TEST_CASE("figure bundle layout") {
    fs::path dir = fresh_dir("dicebench_figures");
    SynthConfig synth_cfg;
    synth_cfg.dims = {24, 24};
    synth_cfg.rho = 0.03;
    synth_cfg.seed = 3;
    MarginalMap m = make_synthetic(synth_cfg);

    DescentConfig cfg;
    cfg.seed = 4;
    emit_figure_data(m, cfg, dir.string());

    // one marginal, five iterates, one optimal segmentation
    std::vector<std::string> grids;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".dgrd") {
            grids.push_back(entry.path().filename().string());
        }
    }
    CHECK(grids.size() == 7);

    for (const auto& name : grids) {
        Grid g = read_grid((dir / name).string());
        CHECK(g.dims == std::vector<std::size_t>{24, 24});
    }
    HardSegmentation s =
        read_hard_segmentation((dir / "optimal.dgrd").string());
    CHECK(s.size() == 24 * 24);

    std::string curves = slurp(dir / "curves.csv");
    CHECK(curves.rfind("iteration,soft_dice,e0,e1\n", 0) == 0);
    fs::remove_all(dir);
}
