#include <doctest.h>

#include "icc/csvio.hpp"
#include "icc/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string& cli_path() {
    static const std::string path = [] {
        const char* env = std::getenv("ICC_CLI");
        return std::string(env ? env : "");
    }();
    return path;
}

RunResult run_cli(const std::string& args) {
    RunResult r;
    const fs::path out = "cli_stdout.txt";
    const fs::path err = "cli_stderr.txt";
    const std::string cmd = "\"" + cli_path() + "\" " + args + " > " + out.string() + " 2> " +
                            err.string();
    const int status = std::system(cmd.c_str());
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    fs::remove(out);
    fs::remove(err);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_small_scenario(const fs::path& dir) {
    icc::ScenarioConfig cfg;
    cfg.set_k(3);
    cfg.m = 8;
    cfg.n = 24;
    cfg.set_snr_sense_db(-5.0);
    cfg.set_snr_report_db(10.0);
    const fs::path p = dir / "scenario.json";
    cfg.save(p.string());
    return p.string();
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("theory values match the closed forms") {
    REQUIRE_MESSAGE(!cli_path().empty(), "ICC_CLI must point at the command line binary");

    RunResult r = run_cli("theory hdf-bound --snr-report-db -3 --k 6");
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.945438748037918).epsilon(1e-9));

    r = run_cli("theory hdf-bound --snr-report-db -200 --k 6");
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.34375).epsilon(1e-6));

    r = run_cli("theory ber --snr-report-db 3");
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.02287840756108534).epsilon(1e-9));

    r = run_cli("theory hdf-bound --snr-report-db -3 --k 6 --p-local 0.9");
    CHECK(r.code == 0);
    CHECK(std::stod(r.out) < 0.945438748037918);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("theory hdf-bound --k 6").code == 2);  // missing required flag
    CHECK(run_cli("nonsense").code == 2);
    CHECK(run_cli("eval roc").code == 2);  // missing --config/--out
    const RunResult missing =
        run_cli("eval roc --config no_such_file.json --out x --method ed-hdf");
    CHECK(missing.code == 2);
    CHECK(missing.err.find("no_such_file.json") != std::string::npos);
}

TEST_CASE("version flag prints the toolkit version") {
    const RunResult r = run_cli("--version");
    CHECK(r.code == 0);
    CHECK(!r.out.empty());
}

TEST_CASE("roc runs are reproducible and carry their metadata") {
    const fs::path dir = fresh_dir("cli_roc_scratch");
    const std::string scenario = write_small_scenario(dir);
    const std::string out1 = (dir / "run1").string();
    const std::string out2 = (dir / "run2").string();
    const std::string args = " --config " + scenario +
                             " --method ed-sdf --trials 200 --pfa-grid 0.1,0.3 --seed 5";

    RunResult r = run_cli("eval roc" + args + " --out " + out1);
    CHECK(r.code == 0);
    REQUIRE(fs::exists(fs::path(out1) / "roc.csv"));
    CHECK(fs::exists(fs::path(out1) / "roc.csv.meta.json"));
    CHECK(fs::exists(fs::path(out1) / "manifest.json"));

    const std::string csv = slurp(fs::path(out1) / "roc.csv");
    CHECK(csv.find("target_pfa,threshold,empirical_pfa,empirical_pd,trials_h0,trials_h1") == 0);
    // header plus one row per grid point
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    r = run_cli("eval roc" + args + " --out " + out2);
    CHECK(r.code == 0);
    CHECK(slurp(fs::path(out2) / "roc.csv") == csv);

    const std::string meta = slurp(fs::path(out1) / "roc.csv.meta.json");
    CHECK(meta.find("\"seed\": 5") != std::string::npos);
    CHECK(meta.find("\"m\": 8") != std::string::npos);

    const std::string manifest = slurp(fs::path(out1) / "manifest.json");
    CHECK(manifest.find("\"command\"") != std::string::npos);
    CHECK(manifest.find("ed-sdf") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("learned methods demand a checkpoint") {
    const fs::path dir = fresh_dir("cli_ckpt_scratch");
    const std::string scenario = write_small_scenario(dir);
    const RunResult r = run_cli("eval roc --config " + scenario + " --method icc --out " +
                                (dir / "x").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("checkpoint") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("train then evaluate end to end") {
    const fs::path dir = fresh_dir("cli_train_scratch");
    const std::string scenario = write_small_scenario(dir);

    // minimal but real training run
    {
        std::ofstream tc(dir / "train.json");
        tc << R"({"epochs": 1, "batch_size": 8, "dataset_size": 16,)"
           << R"( "train_snr_sense_db": -5.0, "train_snr_report_db": 10.0, "seed": 3})";
    }
    const std::string train_dir = (dir / "ckpt").string();
    RunResult r = run_cli("train --config " + scenario + " --train-config " +
                          (dir / "train.json").string() + " --out " + train_dir);
    CHECK(r.code == 0);
    const std::string ckpt = train_dir + "/model.ckpt";
    REQUIRE(fs::exists(ckpt));
    const std::string loss = slurp(fs::path(train_dir) / "loss.csv");
    CHECK(loss.find("epoch,mean_loss") == 0);
    CHECK(std::count(loss.begin(), loss.end(), '\n') == 2);
    CHECK(fs::exists(fs::path(train_dir) / "manifest.json"));

    // the checkpoint drives every learned evaluation mode
    r = run_cli("eval roc --config " + scenario + " --method icc --checkpoint " + ckpt +
                " --trials 100 --pfa-grid 0.2 --out " + (dir / "roc").string());
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "roc" / "roc.csv"));

    r = run_cli("eval ablation --config " + scenario + " --checkpoint " + ckpt +
                " --trials 100 --pfa-grid 0.2 --out " + (dir / "abl").string());
    CHECK(r.code == 0);
    const std::string abl = slurp(dir / "abl" / "ablation.json");
    CHECK(abl.find("\"subchannels_orthogonal\": 24") != std::string::npos);  // 3 sensors x 8
    CHECK(abl.find("\"subchannels_aircomp\": 8") != std::string::npos);

    r = run_cli("eval constellation --config " + scenario + " --checkpoint " + ckpt +
                " --slots 4 --out " + (dir / "cons").string());
    CHECK(r.code == 0);
    const std::string cons = slurp(dir / "cons" / "constellation.csv");
    CHECK(cons.find("slot,sensor,symbol_index,re,im,label") == 0);
    // 4 slots x 3 sensors x 8 symbols plus the header
    CHECK(std::count(cons.begin(), cons.end(), '\n') == 1 + 4 * 3 * 8);

    // sweep over the sensor count with the fixed checkpoint
    r = run_cli("eval sweep --config " + scenario + " --method icc --checkpoint " + ckpt +
                " --axis k_sensors --values 2,3 --trials 100 --target-pfa 0.2 --out " +
                (dir / "sweep").string());
    CHECK(r.code == 0);
    const std::string sweep = slurp(dir / "sweep" / "sweep.csv");
    CHECK(sweep.find("k_sensors,target_pfa") == 0);
    CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 3);
    fs::remove_all(dir);
}

TEST_CASE("rank agreement verification prints a verdict") {
    const RunResult r = run_cli("eval verify-prop3 --trials 400 --seed 2");
    CHECK(r.code == 0);
    CHECK(r.out.find("rank agreement holds") != std::string::npos);
    CHECK(r.out.find("\"spearman_simplified_ed\"") != std::string::npos);
}

} // TEST_SUITE
