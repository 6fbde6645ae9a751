#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>

#ifndef PHASEFLOW_CLI_PATH
#define PHASEFLOW_CLI_PATH "phaseflow"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

struct TempDir {
    TempDir() {
        path = fs::temp_directory_path() /
               ("phaseflow_cli_" + std::to_string(std::random_device{}() % 1000000));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path path;
};

CliResult run_cli(const std::string& args, const fs::path& workdir) {
    const fs::path out = workdir / "stdout.txt";
    const std::string cmd = std::string(PHASEFLOW_CLI_PATH) + " " + args + " >" + out.string() +
                            " 2>" + (workdir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stdout_text = ss.str();
    return r;
}

json summary_line(const CliResult& r) {
    // exactly one machine-readable line on stdout
    std::stringstream ss(r.stdout_text);
    std::string line;
    std::size_t lines = 0;
    std::string last;
    while (std::getline(ss, line))
        if (!line.empty()) {
            ++lines;
            last = line;
        }
    REQUIRE(lines == 1);
    return json::parse(last);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("generate writes the documented trajectory layout") {
    TempDir tmp;
    const fs::path csv = tmp.path / "vdp.csv";
    const CliResult r = run_cli(
        "generate --system vdp --mu 2.0 --dt 0.1 --steps 399 --x0 \"2.0,0.0\" --out " +
            csv.string(),
        tmp.path);
    CHECK(r.exit_code == 0);
    const json s = summary_line(r);
    CHECK(s["rows"] == 400);
    CHECK(fs::exists(csv));
    CHECK(fs::exists(tmp.path / "vdp.meta.json"));

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,x1,x2");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 400);
}

TEST_CASE("missing x0 is a usage error") {
    TempDir tmp;
    const CliResult r = run_cli("generate --system vdp --steps 10", tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("order zero is rejected") {
    TempDir tmp;
    const fs::path csv = tmp.path / "t.csv";
    run_cli("generate --system vdp --mu 2 --dt 0.1 --steps 30 --x0 \"1,0\" --out " + csv.string(),
            tmp.path);
    const CliResult r =
        run_cli("sindy --data " + csv.string() + " --order 0 --out " + (tmp.path / "m.json").string(),
                tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("sindy round trip through the cli recovers vdp") {
    TempDir tmp;
    const fs::path csv = tmp.path / "train.csv";
    run_cli("generate --system vdp --mu 2.0 --dt 0.1 --steps 399 --x0 \"2.0,0.0\" --out " +
                csv.string(),
            tmp.path);
    const fs::path model = tmp.path / "sindy.json";
    const CliResult r = run_cli("sindy --data " + csv.string() +
                                    " --order 3 --threshold 2e-4 --out " + model.string(),
                                tmp.path);
    CHECK(r.exit_code == 0);
    const json s = summary_line(r);
    CHECK(s["nonzeros"] == 4);
    CHECK(fs::exists(model));
}

TEST_CASE("train then evaluate end to end") {
    TempDir tmp;
    const fs::path csv = tmp.path / "train.csv";
    run_cli("generate --system vdp --mu 2.0 --dt 0.1 --steps 199 --x0 \"2.0,0.0\" --out " +
                csv.string(),
            tmp.path);

    const fs::path model = tmp.path / "model.json";
    const CliResult tr = run_cli(
        "train --data " + csv.string() +
            " --layers 2-8-8-2 --activation swish --lr 2e-3 --batch 64 --epochs 200 "
            "--patience 200 --seed 3 --out " +
            model.string() + " --curve " + (tmp.path / "curve.csv").string(),
        tmp.path);
    CHECK(tr.exit_code == 0);
    const json ts = summary_line(tr);
    CHECK(ts.contains("best_val_loss"));
    CHECK(fs::exists(tmp.path / "curve.csv"));

    const CliResult ev = run_cli("eval --model " + model.string() + " --mode apriori --data " +
                                     csv.string() + " --out-dir " + (tmp.path / "rep").string(),
                                 tmp.path);
    CHECK(ev.exit_code == 0);
    CHECK(fs::exists(tmp.path / "rep" / "local_error.csv"));
    CHECK(fs::exists(tmp.path / "rep" / "eig.csv"));
    CHECK(fs::exists(tmp.path / "rep" / "summary.json"));

    const CliResult grid = run_cli("eval --model " + model.string() +
                                       " --mode grid --system vdp --mu 2.0 "
                                       "--bounds=-3:3,-5:5 --resolution 21 --out-dir " +
                                       (tmp.path / "grid").string(),
                                   tmp.path);
    CHECK(grid.exit_code == 0);
    CHECK(fs::exists(tmp.path / "grid" / "stepgrid.csv"));
}

TEST_CASE("uniform sampling feeds training through the pair format") {
    TempDir tmp;
    const fs::path pairs = tmp.path / "uniform.csv";
    const CliResult gen = run_cli(
        "generate --system vdp --mu 2.0 --sample uniform --n 120 --bounds=-3:3,-5:5 "
        "--seed 7 --out " +
            pairs.string(),
        tmp.path);
    CHECK(gen.exit_code == 0);
    CHECK(summary_line(gen)["samples"] == 120);

    const CliResult tr = run_cli("train --data " + pairs.string() +
                                     " --layers 2-4-2 --epochs 5 --batch 32 --seed 1 --out " +
                                     (tmp.path / "m.json").string(),
                                 tmp.path);
    CHECK(tr.exit_code == 0);
}

TEST_CASE("threshold zero yields the dense least-squares model") {
    TempDir tmp;
    const fs::path csv = tmp.path / "t.csv";
    run_cli("generate --system vdp --mu 2 --dt 0.1 --steps 120 --x0 \"2,0\" --out " +
                csv.string(),
            tmp.path);
    const CliResult r = run_cli(
        "sindy --data " + csv.string() + " --threshold 0 --order 3 --out " +
            (tmp.path / "dense.json").string(),
        tmp.path);
    CHECK(r.exit_code == 0);
    const json s = summary_line(r);
    CHECK(s["nonzeros"] == 2 * s["terms"].get<std::size_t>()); // nothing pruned
}

TEST_CASE("nonexistent dataset gives a usage error") {
    TempDir tmp;
    const CliResult r = run_cli("train --data /nonexistent.csv --layers 2-8-8-2", tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("model and data dimensions must agree") {
    TempDir tmp;
    const fs::path csv2 = tmp.path / "d2.csv";
    run_cli("generate --system vdp --mu 2 --dt 0.1 --steps 80 --x0 \"1,0\" --out " + csv2.string(),
            tmp.path);
    const fs::path model = tmp.path / "m.json";
    run_cli("train --data " + csv2.string() +
                " --layers 2-4-2 --epochs 5 --batch 16 --seed 1 --out " + model.string(),
            tmp.path);

    // 3-column data against the 2-dimensional model
    const fs::path csv3 = tmp.path / "d3.csv";
    {
        std::ofstream out(csv3);
        out << "t,x1,x2,x3\n";
        for (int i = 0; i < 30; ++i) out << 0.1 * i << ",1,2,3\n";
    }
    std::ofstream(tmp.path / "d3.meta.json") << "{\"dt\":0.1}\n";
    const CliResult r = run_cli("eval --model " + model.string() + " --mode apriori --data " +
                                    csv3.string() + " --out-dir " + (tmp.path / "rep").string(),
                                tmp.path);
    CHECK(r.exit_code == 2);
}

TEST_CASE("training divergence exits 3 and keeps a checkpoint") {
    TempDir tmp;
    const fs::path csv = tmp.path / "t.csv";
    run_cli("generate --system vdp --mu 2 --dt 0.1 --steps 120 --x0 \"2,0\" --out " +
                csv.string(),
            tmp.path);
    const fs::path model = tmp.path / "diverged.json";
    const CliResult r = run_cli("train --data " + csv.string() +
                                    " --layers 2-8-8-2 --activation elu --lr 1e154 --epochs 5 --batch 32 "
                                    "--seed 1 --out " +
                                    model.string(),
                                tmp.path);
    CHECK(r.exit_code == 3);
    CHECK(fs::exists(model));
    const json s = summary_line(r);
    CHECK(s["partial"] == true);
}

TEST_CASE("config file supplies defaults and flags win") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "cfg.json";
    const fs::path out_a = tmp.path / "a.csv";
    std::ofstream(cfg) << R"({"generate": {"system": "vdp", "mu": 2.0, "dt": 0.1,
                              "steps": 50, "x0": "1.0,0.0", "out": ")"
                       << out_a.string() << R"("}})";
    const CliResult a = run_cli("generate --config " + cfg.string(), tmp.path);
    CHECK(a.exit_code == 0);
    CHECK(fs::exists(out_a));

    // flag overrides the config's steps
    const fs::path out_b = tmp.path / "b.csv";
    const CliResult b = run_cli(
        "generate --config " + cfg.string() + " --steps 10 --out " + out_b.string(), tmp.path);
    CHECK(b.exit_code == 0);
    CHECK(summary_line(b)["rows"] == 11);

    // unknown keys are rejected
    const fs::path bad = tmp.path / "bad.json";
    std::ofstream(bad) << R"({"generate": {"system": "vdp", "bogus": 1}})";
    const CliResult c = run_cli("generate --config " + bad.string(), tmp.path);
    CHECK(c.exit_code == 2);
}

TEST_CASE("burgers generation at desk scale") {
    TempDir tmp;
    const fs::path dir = tmp.path / "burgers";
    const CliResult r = run_cli(
        "generate --system burgers --trajs 2 --snapshots 11 --modes 4 --n-grid 64 "
        "--nu 0.5 --t-end 1.0 --seed 5 --out " +
            dir.string(),
        tmp.path);
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "traj_000.csv"));
    CHECK(fs::exists(dir / "traj_001.csv"));
    const json s = summary_line(r);
    CHECK(s["trajectories"] == 2);

    // reruns overwrite in place
    const CliResult again = run_cli(
        "generate --system burgers --trajs 2 --snapshots 11 --modes 4 --n-grid 64 "
        "--nu 0.5 --t-end 1.0 --seed 5 --out " +
            dir.string(),
        tmp.path);
    CHECK(again.exit_code == 0);
}

} // TEST_SUITE
