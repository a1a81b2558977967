#include "doctest.h"

#include "ddlmi/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ddlmi;
using namespace ddlmi::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch()
{
    const auto dir = fs::temp_directory_path() / "ddlmi_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string at(const std::string& name) { return (scratch() / name).string(); }

int invoke(std::vector<std::string> args)
{
    args.insert(args.begin(), "ddlmi");
    return run(args);
}

io::json load(const std::string& path) { return io::read_json_file(path); }

std::vector<std::vector<std::string>> read_csv(const std::string& path)
{
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(cell);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST_CASE("synth on simulated continuous-time data")
{
    const auto data = at("vi_a.json");
    REQUIRE(invoke({"simulate", "experiment", "--system", "tape", "--eps", "2.5e-6", "--seed", "1", "--out", data}) == 0);
    const auto exp = load(data);
    CHECK(exp["domain"] == "ct");
    CHECK(exp["T"] == 200);

    const auto out = at("petersen.json");
    CHECK(invoke({"synth", "--data", data, "--disturbance", "2.5e-6", "--region", "wedge:0.3,2,0.5512", "--method",
               "petersen", "--out", out}) == 0);
    const auto r = load(out);
    CHECK(r["status"] == "Feasible");
    CHECK(r["K"].size() == 1);
    CHECK(r["K"][0].size() == 5);
    CHECK(r["min_margin"].get<double>() > 0.0);
    CHECK(r["verification"]["sound"] == true);
    CHECK(r["verification"]["samples"] == 200);

    // rank1 on a wedge needs the explicit approximation
    const auto r1 = at("rank1.json");
    CHECK(invoke({"synth", "--data", data, "--disturbance", "2.5e-6", "--region", "wedge:0.3,2,0.5512", "--method",
               "rank1", "--out", r1}) == 4);
    CHECK(load(r1)["status"] == "PreconditionError");
    CHECK(load(r1)["error"].get<std::string>().find("--inner-approx") != std::string::npos);

    const auto all = at("all.json");
    const int code = invoke({"synth", "--data", data, "--disturbance", "2.5e-6", "--region", "wedge:0.3,2,0.5512",
                          "--method", "all", "--inner-approx", "--samples", "20", "--out", all});
    const auto records = load(all);
    REQUIRE(records.is_array());
    CHECK(records.size() == synthesis::all_methods().size());
    int expected = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i]["method"] == synthesis::to_string(synthesis::all_methods()[i]));
        if (expected == 0) expected = records[i]["exit_code"].get<int>();
    }
    CHECK(code == expected);
}

TEST_CASE("synth errors")
{
    const auto data = at("dt.json");
    REQUIRE(invoke({"simulate", "experiment", "--system", "laplacian", "--eps", "1e-5", "--seed", "2", "--out", data}) == 0);
    CHECK(invoke({"synth", "--data", at("missing.json"), "--region", "schur"}) == 1);
    CHECK(invoke({"synth", "--data", data, "--region", "schur", "--method", "lqr"}) == 1);
    CHECK(invoke({"synth", "--data", data, "--region", "donut:1"}) == 1);
    CHECK(invoke({"frobnicate"}) == 1);

    const auto energy = at("energy.json");
    std::ofstream(energy) << R"({"type": "energy", "Delta": [[0.0447,0,0,0,0],[0,0.0447,0,0,0],[0,0,0.0447,0,0],
                                 [0,0,0,0.0447,0],[0,0,0,0,0.0447]]})";
    // the instantaneous program needs an instantaneous model
    CHECK(invoke({"synth", "--data", data, "--disturbance", energy, "--region", "disk:0.47,0.43", "--method",
               "sproc-instant", "--out", at("si.json")}) == 4);
    CHECK(invoke({"synth", "--data", data, "--disturbance", energy, "--region", "disk:0.47,0.43", "--method", "rank1",
               "--out", at("r1.json")}) == 0);

    // rank-deficient data: a zero input row
    auto j = load(data);
    for (auto& v : j["U0"][0]) v = 0.0;
    const auto flat = at("flat.json");
    std::ofstream(flat) << j.dump();
    CHECK(invoke({"synth", "--data", flat, "--region", "schur", "--method", "petersen", "--out", at("flat_out.json")}) ==
          4);
    CHECK(load(at("flat_out.json"))["error"].get<std::string>().find("rank") != std::string::npos);
}

TEST_CASE("region commands")
{
    const auto info = at("info.json");
    REQUIRE(invoke({"region", "info", "cone:0,0.785", "--out", info}) == 0);
    CHECK(load(info)["regions"][0]["class"] == "no rank-1 factor");
    REQUIRE(invoke({"region", "info", "disk:-1,1", "--out", info}) == 0);
    CHECK(load(info)["regions"][0]["rank_one"].is_object());
    REQUIRE(invoke({"region", "info", "wedge:0.3,2,0.5512", "--out", info}) == 0);
    CHECK(load(info)["inner_approx"]["disks"].size() == 2);

    const auto csv = at("hurwitz.csv");
    REQUIRE(invoke({"region", "boundary", "hurwitz", "--count", "400", "--out", csv}) == 0);
    const auto rows = read_csv(csv);
    REQUIRE(rows.size() > 50);
    CHECK(rows[0] == std::vector<std::string>{"re", "im", "margin"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(std::abs(std::stod(rows[i][0])) <= 1e-9);
        CHECK(std::abs(std::stod(rows[i][2])) <= 1e-6);
    }
}

TEST_CASE("single-bound sweep matches synth --method all")
{
    SweepConfig c;
    c.bench = benchmark("dt");
    c.eps = {1e-5};
    c.seed = 5;
    const auto r = run_sweep(c);
    REQUIRE(r.cells.size() == synthesis::all_methods().size());

    Case k;
    k.data = generate(c.bench, 5, 1e-5);
    k.model = consistency::InstantaneousBound{1e-5};
    k.target = c.bench.target;
    k.system = c.bench.system;
    const Pipeline p(k);
    for (std::size_t m = 0; m < r.cells.size(); ++m) {
        CAPTURE(synthesis::to_string(r.cells[m].method));
        CHECK(r.cells[m].status == p.run(r.cells[m].method).result->outcome.status);
    }
    std::ostringstream csv;
    write_sweep_csv(r, csv);
    CHECK(csv.str().rfind("eps,method,feasible,seeds,majority,mean_seconds\n", 0) == 0);

    // fixed mode reuses one realization per seed
    c.eps = {1e-4, 1e-5};
    c.seeds = 2;
    c.mode = SweepMode::Fixed;
    c.methods = {synthesis::Method::RankOne};
    const auto f = run_sweep(c);
    CHECK(f.cells.size() == 4);
    CHECK(f.config.eps.front() == 1e-4);
    for (int s = 0; s < 2; ++s)
        if (f.cell(0, 0, s).status == solve::Status::Feasible) CHECK(f.cell(1, 0, s).status == solve::Status::Feasible);
    CHECK(f.eps_max(synthesis::Method::RankOne, 0) >= 0.0);
    CHECK_THROWS_AS(f.eps_max(synthesis::Method::Petersen, 0), ValidationError);
}

TEST_CASE("demo dt writes the pipeline outputs")
{
    const auto dir = (scratch() / "demo_dt").string();
    fs::remove_all(dir);
    const int code = invoke({"demo", "dt", "--out-dir", dir, "--samples", "20", "--horizon", "20"});
    CHECK((code == 0 || code == 2 || code == 3));
    for (const char* f : {"experiment.json", "results.json", "eigenvalues.csv"}) CHECK(fs::exists(fs::path(dir) / f));
    const auto results = load((fs::path(dir) / "results.json").string());
    CHECK(results.size() == synthesis::all_methods().size());
    int trajectories = 0;
    for (const auto& r : results) {
        const std::string m = r["method"];
        const bool traj = fs::exists(fs::path(dir) / ("trajectory_" + m + ".csv"));
        trajectories += traj;
        if (traj) {
            const auto rows = read_csv((fs::path(dir) / ("trajectory_" + m + ".csv")).string());
            CHECK(rows[0].size() == 7);
            CHECK(rows.size() == 22);
        }
    }
    CHECK(trajectories == 3);

    const auto target = benchmark("dt").target.regions;
    const auto rows = read_csv((fs::path(dir) / "eigenvalues.csv").string());
    int boundary = 0, open = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] == "open_loop") ++open;
        if (rows[i][0] != "boundary") continue;
        ++boundary;
        CHECK(std::abs(target.margin({std::stod(rows[i][1]), std::stod(rows[i][2])})) <= 1e-6);
    }
    CHECK(open == 5);
    CHECK(boundary > 100);

    const auto resp = at("resp.csv");
    CHECK(invoke({"simulate", "response", "--system", "laplacian", "--result", (fs::path(dir) / "results.json").string(),
               "--method", "model", "--horizon", "10", "--out", resp}) == 0);
    CHECK(read_csv(resp).size() == 12);
}
