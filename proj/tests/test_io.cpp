#include "doctest.h"

#include "ddlmi/io.hpp"

#include <filesystem>
#include <fstream>
#include <set>

using namespace ddlmi;
using namespace ddlmi::io;

namespace {

std::set<std::string> keys(const json& j)
{
    std::set<std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it) out.insert(it.key());
    return out;
}

std::string temp_file(const std::string& name, const std::string& text)
{
    const auto dir = std::filesystem::temp_directory_path() / "ddlmi_io_test";
    std::filesystem::create_directories(dir);
    const auto p = (dir / name).string();
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("matrix json")
{
    Matrix m(2, 3);
    m << 1, 2, 3, 4, 5, -6.5;
    const json j = matrix_to_json(m);
    CHECK(j.dump() == "[[1.0,2.0,3.0],[4.0,5.0,-6.5]]");
    CHECK(matrix_from_json(j, "m") == m);
    CHECK(matrix_from_json(json::array(), "e", 0, 4).cols() == 4);
    CHECK(matrix_to_json(-Matrix::Zero(1, 1)).dump() == "[[0.0]]");
    CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,2],[3]]"), "bad"), DimensionError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,\"x\"]]"), "bad"), ValidationError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("3"), "bad"), ValidationError);
}

TEST_CASE("experiment schema")
{
    consistency::ExperimentData d;
    d.X0 = Matrix::Random(2, 4);
    d.U0 = Matrix::Random(1, 4);
    d.X1 = Matrix::Random(2, 4);
    d.Ts = 0.1;
    d.domain = TimeDomain::Continuous;
    const json j = experiment_to_json(d);
    CHECK(keys(j) == std::set<std::string>{"domain", "Ts", "n", "m", "T", "U0", "X0", "X1"});
    CHECK(j["domain"] == "ct");
    CHECK(j["T"] == 4);
    const auto back = experiment_from_json(j);
    CHECK(back.X0 == d.X0);
    CHECK(back.U0 == d.U0);
    CHECK(back.X1 == d.X1);
    CHECK(back.Ts == 0.1);
    CHECK(back.domain == TimeDomain::Continuous);

    // zero inputs keep their shape through n, m, T
    d.U0 = Matrix::Zero(0, 4);
    d.domain = TimeDomain::Discrete;
    const auto auton = experiment_from_json(experiment_to_json(d));
    CHECK(auton.m() == 0);
    CHECK(auton.T() == 4);
    CHECK(auton.domain == TimeDomain::Discrete);

    json bad = j;
    bad["n"] = 3;
    CHECK_THROWS_AS(experiment_from_json(bad), DimensionError);
    bad = j;
    bad["domain"] = "hybrid";
    CHECK_THROWS_AS(experiment_from_json(bad), ValidationError);
    bad = j;
    bad.erase("X1");
    CHECK_THROWS_AS(experiment_from_json(bad), ValidationError);
}

TEST_CASE("disturbance models")
{
    const std::vector<consistency::DisturbanceModel> models{
        consistency::EnergyBound{Matrix::Identity(2, 2)},
        consistency::EnergyQuadraticBound{-Matrix::Identity(2, 2), Matrix::Zero(3, 2), Matrix::Identity(3, 3)},
        consistency::InstantaneousBound{1e-5},
        consistency::InstantaneousQuadraticBound{-Matrix::Identity(2, 2), Matrix::Zero(1, 2), 2.0},
    };
    for (const auto& m : models) {
        const json j = disturbance_to_json(m);
        CHECK(j["type"] == consistency::model_name(m));
        CHECK(disturbance_to_json(disturbance_from_json(j)) == j);
    }
    CHECK(std::get<consistency::InstantaneousBound>(load_disturbance("2.5e-6")).eps == 2.5e-6);
    CHECK_THROWS_AS(load_disturbance("abc"), ValidationError);
    CHECK_THROWS_AS(disturbance_from_json(json{{"type", "gaussian"}}), ValidationError);
    const auto p = temp_file("dist.json", R"({"type": "energy", "Delta": [[1, 0], [0, 1]]})");
    CHECK(std::get<consistency::EnergyBound>(load_disturbance(p)).Delta == Matrix::Identity(2, 2));
}

TEST_CASE("region json and presets")
{
    const auto disk = region_from_json(json{{"kind", "disk"}, {"params", {-1.0, 1.0}}});
    CHECK(disk.s() == 2);
    const json raw = region_to_json(disk);
    CHECK(keys(raw) == std::set<std::string>{"s", "alpha", "beta", "label"});
    const auto back = region_from_json(raw);
    CHECK(back.alpha() == disk.alpha());
    CHECK(back.beta() == disk.beta());
    CHECK(region_from_json(json{{"kind", "halfplane_left"}, {"params", {0.5}}, {"s", 1}}).s() == 1);
    CHECK_THROWS_AS(region_from_json(json{{"kind", "blob"}}), ValidationError);
    CHECK_THROWS_AS(region_from_json(json{{"s", 3}, {"alpha", raw["alpha"]}, {"beta", raw["beta"]}}), DimensionError);

    const Target w = parse_target("wedge:0.3,2,0.5512");
    CHECK(w.regions.size() == 3);
    REQUIRE(w.wedge);
    CHECK(w.wedge->theta == 0.5512);
    CHECK(w.wedge_cone == 2u);
    CHECK_FALSE(regions::rank_one_factor(w.regions[2]));

    const Target two = parse_target("hurwitz+disk:-1,1");
    CHECK(two.regions.size() == 2);
    CHECK(two.regions.contains({-0.5, 0.1}));
    CHECK_FALSE(two.regions.contains({-2.5, 0.0}));
    const Target both = parse_targets({"schur", "wedge:0.3,2,0.5"});
    CHECK(both.regions.size() == 4);
    CHECK(both.wedge_cone == 3u);
    CHECK_THROWS_AS(parse_target("disk:1"), ValidationError);
    CHECK_THROWS_AS(parse_target("disk:1,x"), ValidationError);
    CHECK_THROWS_AS(parse_target("donut:1,2"), ValidationError);
    CHECK_THROWS_AS(parse_targets({"wedge:0.3,2,0.5", "wedge:0.3,2,0.5"}), ValidationError);

    const auto file = temp_file("regions.json", R"({"regions": [{"kind": "wedge", "params": [0.3, 2, 0.5]},
        {"alpha": [[1]], "beta": [[1]], "label": "re<-0.5"}]})");
    const Target f = parse_target(file);
    CHECK(f.regions.size() == 4);
    CHECK(f.wedge_cone == 2u);
    CHECK(f.regions[3].label() == "re<-0.5");
    CHECK(f.regions.contains({-1.0, 0.0}));
}

TEST_CASE("region info")
{
    const auto disk = parse_target("disk:-1,1").regions[0];
    const json d = region_info(disk);
    REQUIRE(d["rank_one"].is_object());
    const Vector eta = Eigen::Map<const Vector>(d["rank_one"]["eta"].get<std::vector<double>>().data(), 2);
    const Vector gamma = Eigen::Map<const Vector>(d["rank_one"]["gamma"].get<std::vector<double>>().data(), 2);
    CHECK((eta * gamma.transpose() - disk.beta()).norm() <= 1e-12);
    CHECK(d["class"]["kind"] == "disk");
    CHECK(d["class"]["x0"].get<double>() == doctest::Approx(-1.0));

    const json c = region_info(parse_target("cone:0,0.785").regions[0]);
    CHECK(c["rank_one"].is_null());
    CHECK(c["class"] == "no rank-1 factor");
    CHECK(region_info(regions::make_region(regions::CatalogKind::HalfplaneLeft, {0.0}, 1))["class"] == "halfplane");
}

TEST_CASE("result record schema")
{
    synthesis::SynthesisResult r;
    r.method = synthesis::Method::Petersen;
    r.outcome.status = solve::Status::Feasible;
    r.P = Matrix::Identity(1, 1);
    r.Y = Matrix::Constant(1, 1, -2.0);
    r.K = r.Y;
    const regions::RegionIntersection hurwitz{regions::make_region(regions::CatalogKind::Hurwitz, {})};
    Matrix ab(1, 2);
    ab << 1.0, 1.0;
    const json j = result_to_json(r, ab, hurwitz);
    for (const char* k : {"method", "status", "K", "P", "eig_closed_loop", "margins", "min_margin", "solver", "warnings"})
        CHECK(j.contains(k));
    CHECK(j["method"] == "petersen");
    CHECK(j["status"] == "Feasible");
    CHECK(j["exit_code"] == 0);
    CHECK(j["eig_closed_loop"].dump() == "[[-1.0,0.0]]");
    CHECK(j["min_margin"].get<double>() == doctest::Approx(2.0));

    r.outcome.status = solve::Status::Infeasible;
    const json bad = result_to_json(r, ab, hurwitz);
    CHECK(bad["K"].is_null());
    CHECK(bad["eig_closed_loop"].is_null());
    CHECK(bad["exit_code"] == 2);
}

TEST_CASE("exit codes")
{
    CHECK(exit_code(solve::Status::Feasible) == 0);
    CHECK(exit_code(solve::Status::Infeasible) == 2);
    CHECK(exit_code(solve::Status::Marginal) == 3);
    CHECK(exit_code(solve::Status::NumericalFailure) == 5);
}
