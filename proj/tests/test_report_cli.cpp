#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "capwave/multiplier.hpp"
#include "capwave/report.hpp"
#include "capwave/snapshot.hpp"

using namespace capwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("capwave_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

int cli(const std::string& args) {
    const std::string cmd = std::string(CAPWAVE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

} // namespace

TEST(Table, CsvFormatting) {
    Table t({{"t", "time", "1"}, {"label", "", ""}, {"count", "samples", "1"}});
    t.add_row({0.1, std::string("a"), 3LL});
    t.add_row({std::numeric_limits<double>::infinity(), std::string("b"), -1LL});
    t.add_row({std::nan(""), std::string("c"), 0LL});
    EXPECT_EQ(t.to_csv(), "t:time,label,count:samples\n0.10000000000000001,a,3\ninf,b,-1\nnan,c,0\n");
    EXPECT_DOUBLE_EQ(t.number(0, "t"), 0.1);
    EXPECT_DOUBLE_EQ(t.number(1, "count"), -1.0);
    EXPECT_THROW(t.number(0, "label"), PreconditionError);
    EXPECT_THROW(t.column_index("missing"), PreconditionError);
    EXPECT_THROW(t.add_row({1.0}), PreconditionError);
    EXPECT_THROW(Table({{"a,b", "", ""}}), PreconditionError);
}

TEST(Table, DoublesRoundTripThroughText) {
    for (double v : {1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) EXPECT_EQ(std::strtod(Table::format(Cell{v}).c_str(), nullptr), v);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
    const fs::path dir = scratch("atomic");
    const fs::path p = dir / "sub" / "x.txt";
    write_atomic(p, "first\n");
    write_atomic(p, "second\n");
    EXPECT_EQ(slurp(p), "second\n");
    EXPECT_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST(Files, ManifestFields) {
    const fs::path dir = scratch("manifest");
    Manifest m;
    m.subcommand = "x";
    m.seed = 9;
    Table t({{"a", "tag", "unit"}});
    m.add_output("a.csv", &t);
    m.write(dir);
    const auto j = manifest(dir);
    EXPECT_EQ(j["schema_version"], schema_version);
    EXPECT_EQ(j["seed"], 9);
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["outputs"][0]["columns"][0]["unit"], "unit");
}

TEST(Files, SnapshotRoundTrip) {
    const fs::path dir = scratch("snap");
    const GridSpec g(16, 3.0);
    const SpectralField f = sample(g, [](double x, double y) { return std::sin(2.0 * x) * std::cos(y) + 0.25; });
    write_snapshot((dir / "f").string(), {f, 1.5, "f"});
    const Snapshot s = read_snapshot((dir / "f").string());
    EXPECT_EQ(s.time, 1.5);
    EXPECT_TRUE(s.field.grid() == g);
    EXPECT_LE(l2_norm(s.field - f), 1e-14 * l2_norm(f));
    EXPECT_THROW(read_snapshot((dir / "nope").string()), ConfigError);
}

TEST(PlotData, ThreeKinds) {
    const fs::path dir = scratch("plot");
    Table decay({{"t", "", ""}, {"sup_norm", "", ""}});
    decay.add_row({1.0, 0.5});
    decay.add_row({2.0, 0.25});
    const auto files = emit_plot_data(decay, PlotKind::DecayLogLog, dir, "d");
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(slurp(dir / "d.dat"), "# t sup_norm\n1 0.5\n2 0.25\n");
    EXPECT_NE(slurp(dir / "d.gp").find("logscale"), std::string::npos);

    Table energy({{"t", "", ""}, {"energy", "", ""}, {"E_physical", "", ""}});
    energy.add_row({0.0, 99.0, 2.0});
    energy.add_row({1.0, 99.0, 2.5});
    emit_plot_data(energy, PlotKind::EnergyDrift, dir, "e");
    EXPECT_EQ(slurp(dir / "e.dat"), "# t drift\n0 0\n1 0.25\n");

    Table fit({{"log_param", "", ""}, {"log_peak", "", ""}, {"fit_line", "", ""}});
    fit.add_row({-1.0, -2.0, -2.1});
    emit_plot_data(fit, PlotKind::OrderFit, dir, "o");
    EXPECT_EQ(slurp(dir / "o.dat"), "# log_param log_maxval fit_line\n-1 -2 -2.1000000000000001\n");

    EXPECT_THROW(emit_plot_data(Table({{"t", "", ""}}), PlotKind::DecayLogLog, dir, "x"), PreconditionError);
    EXPECT_THROW(parse_plot_kind("pie"), ConfigError);
}

TEST(Cli, ConfigurationErrorsExitWithTwo) {
    const fs::path dir = scratch("cli_bad");
    EXPECT_EQ(cli(""), 2);
    EXPECT_EQ(cli("simulate --no-such-flag"), 2);
    spit(dir / "broken.json", "{ not json");
    EXPECT_EQ(cli("simulate --config " + (dir / "broken.json").string() + " --output-dir " + dir.string()), 2);
    spit(dir / "unknown.json", R"({"grid": {"n": 32}, "warp_factor": 9})");
    EXPECT_EQ(cli("simulate --config " + (dir / "unknown.json").string() + " --output-dir " + dir.string()), 2);
    spit(dir / "schema.json", R"({"schema_version": 99})");
    EXPECT_EQ(cli("cm-probe --config " + (dir / "schema.json").string() + " --output-dir " + dir.string()), 2);
    spit(dir / "grid.json", R"({"grid": {"n": 31, "L": 6.0}})");
    EXPECT_EQ(cli("simulate --config " + (dir / "grid.json").string() + " --output-dir " + dir.string()), 2);
    EXPECT_EQ(cli("symbol-order --symbol bogus --output-dir " + dir.string()), 2);
    EXPECT_EQ(cli("report --input " + (dir / "missing.csv").string() + " --output-dir " + dir.string()), 2);
}

TEST(Cli, NumericalFailureExitsWithThreeAndRecordsIt) {
    // An off-centre bump carries angular content far beyond m = 0.
    const fs::path dir = scratch("cli_numerical");
    const GridSpec g(32, 20.0);
    write_snapshot((dir / "bump").string(),
                   {sample(g, [](double x, double y) { return std::exp(-((x - 3.0) * (x - 3.0) + y * y)); }), 0.0, "bump"});
    spit(dir / "cfg.json",
         R"({"profile": {"field": ")" + (dir / "bump").string() + R"(", "m_max": 0, "rho_nodes": 12}, "t_grid": [1.0, 2.0]})");
    EXPECT_EQ(cli("decay-fit --config " + (dir / "cfg.json").string() + " --output-dir " + (dir / "out").string()), 3);
    const auto j = manifest(dir / "out");
    EXPECT_EQ(j["status"], "numerical_failure");
    EXPECT_FALSE(j["message"].get<std::string>().empty());
}

TEST(Cli, SymbolOrderWritesTablesAndIsDeterministic) {
    const fs::path a = scratch("cli_det_a"), b = scratch("cli_det_b");
    const std::string args = "symbol-order --symbol m1 --regime xi_small --output-dir ";
    ASSERT_EQ(cli(args + a.string()), 0);
    ASSERT_EQ(cli(args + b.string()), 0);
    for (const char* f : {"symbol_order.csv", "symbol_order_samples.csv", "order_fit.dat", "order_fit.gp"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    // manifests differ only in the output directory, which is not recorded
    EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
    EXPECT_EQ(manifest(a)["summary"]["all_meet_contract"], true);
    EXPECT_NE(slurp(a / "symbol_order.csv").find("slope:fitted vanishing order"), std::string::npos);
}

TEST(Cli, SeededProbeIsReproducible) {
    const fs::path dir = scratch("cli_cm");
    spit(dir / "cfg.json", R"({"grid": {"n": 16}, "j_lo": 0, "j_hi": 1, "trials": 2, "power_iterations": 4,
                                "exponents": [2, 2, "inf"], "symbol": "m1"})");
    const std::string base = "cm-probe --config " + (dir / "cfg.json").string() + " --seed 5 --output-dir ";
    ASSERT_EQ(cli(base + (dir / "a").string()), 0);
    ASSERT_EQ(cli(base + (dir / "b").string()), 0);
    EXPECT_EQ(slurp(dir / "a" / "cm_probe.csv"), slurp(dir / "b" / "cm_probe.csv"));
    EXPECT_EQ(manifest(dir / "a")["seed"], 5);
}

TEST(Cli, SimulateThenReport) {
    const fs::path dir = scratch("cli_sim");
    spit(dir / "cfg.json", R"({"grid": {"n": 32, "L": 20.0}, "dt": 0.01, "t_end": 0.05, "sample_every": 1,
                                "init": {"kind": "gaussian", "params": {"amplitude": 1e-3}}, "snapshots": true})");
    ASSERT_EQ(cli("simulate --config " + (dir / "cfg.json").string() + " --output-dir " + dir.string()), 0);
    EXPECT_TRUE(fs::exists(dir / "diagnostics.csv"));
    EXPECT_TRUE(fs::exists(dir / "energy_drift.dat"));
    EXPECT_TRUE(fs::exists(dir / "final_h.bin"));
    EXPECT_LE(manifest(dir)["summary"]["relative_energy_drift"].get<double>(), 1e-8);
    ASSERT_EQ(cli("report --kind energy --input " + (dir / "diagnostics.csv").string() + " --output-dir " +
                  (dir / "rep").string()),
              0);
    EXPECT_TRUE(fs::exists(dir / "rep" / "diagnostics_energy.dat"));
}
