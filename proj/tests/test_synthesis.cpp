#include "doctest.h"

#include "ddlmi/sim.hpp"
#include "ddlmi/synthesis.hpp"
#include "ddlmi/verify.hpp"

#include <numbers>
#include <random>

using namespace ddlmi;
using namespace ddlmi::synthesis;
using regions::CatalogKind;
using regions::make_region;
using regions::RegionIntersection;
using solve::Status;

namespace {

const RegionIntersection& wedge()
{
    static const RegionIntersection w = regions::wedge_regions(0.3, 2.0, std::numbers::pi / 5.7);
    return w;
}

bool places(const Matrix& a, const Matrix& b, const Matrix& k, const RegionIntersection& target)
{
    return verify::eig_region_margin(a + b * k, target).minCoeff() > 0.0;
}

// Random (A, B) that model-based design can place in the target.
consistency::ExperimentData noiseless_dt(const Matrix& a, const Matrix& b, int T, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    consistency::ExperimentData d;
    d.U0 = Matrix::NullaryExpr(b.cols(), T, [&] { return g(rng); });
    d.X0 = Matrix::NullaryExpr(a.rows(), T, [&] { return g(rng); });
    d.X1 = a * d.X0 + b * d.U0;
    return d;
}

}  // namespace

TEST_CASE("recover gain")
{
    Matrix p(2, 2);
    p << 2, 0.5, 0.5, 1;
    CHECK(recover_gain(p, Matrix::Zero(1, 2)).norm() == 0.0);
    Matrix y(1, 2);
    y << 0.3, -0.7;
    CHECK((recover_gain(Matrix::Identity(2, 2), y) - y).norm() <= 1e-15);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
        const Matrix m = Matrix::NullaryExpr(4, 4, [&] { return g(rng); });
        const Matrix pp = m * m.transpose() + 0.1 * Matrix::Identity(4, 4);
        const Matrix yy = Matrix::NullaryExpr(2, 4, [&] { return g(rng); });
        CHECK((recover_gain(pp, yy) * pp - yy).norm() <= 1e-10 * yy.norm());
    }
    CHECK_THROWS_AS(recover_gain(Matrix::Zero(2, 2), y), PreconditionError);
    CHECK_THROWS_AS(recover_gain(Matrix::Identity(3, 3), y), DimensionError);
}

TEST_CASE("method names")
{
    for (Method m : all_methods()) CHECK(parse_method(to_string(m)) == m);
    CHECK_FALSE(parse_method("lqr"));
}

TEST_CASE("model-based design")
{
    const RegionIntersection hurwitz{make_region(CatalogKind::Hurwitz, {})};
    auto r = model_based(-Matrix::Identity(2, 2), Matrix::Zero(2, 1), hurwitz);
    CHECK(r.outcome.status == Status::Feasible);
    CHECK(min_eig(r.P) > 0.0);

    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 1, 2;
    CHECK(model_based(a, Matrix::Zero(2, 1), hurwitz).outcome.status == Status::Infeasible);

    const auto sys = sim::tape_transport();
    CHECK_FALSE(places(sys.A, sys.B, Matrix::Zero(1, 5), wedge()));
    r = model_based(sys.A, sys.B, wedge());
    REQUIRE(r.feasible());
    CHECK(places(sys.A, sys.B, r.K, wedge()));
    CHECK((r.K * r.P - r.Y).norm() <= 1e-9 * r.Y.norm());
    for (const auto& reg : wedge().regions()) CHECK(max_eig(regions::characteristic_matrix(reg, sys.A + sys.B * r.K, r.P)) < 0.0);
}

TEST_CASE("block-diagonal uncertainty is not full uncertainty")
{
    const Matrix d = -Matrix::Identity(2, 2);
    Matrix e(2, 2), g(2, 2), f(2, 2);
    e << 1, 0, 1, 0;
    g << 0, 0, 1, 1;
    f << 0, 1, 0, 0;
    CHECK(max_eig(f.transpose() * f) <= 1.0);
    const Matrix full = d + e * f * g + g.transpose() * f.transpose() * e.transpose();
    Matrix expected(2, 2);
    expected << 1, 2, 2, 1;
    CHECK(full == expected);
    CHECK(max_eig(full) == doctest::Approx(3.0));
    // E (I ⊗ f) G = f E G and E G vanishes, so the structured family is D for every scalar f
    CHECK((e * g).norm() == 0.0);
    for (double s : {-1.0, -0.5, 0.0, 0.25, 1.0}) {
        const Matrix fs = s * Matrix::Identity(2, 2);
        const Matrix block = d + e * fs * g + g.transpose() * fs.transpose() * e.transpose();
        CHECK(block == d);
        CHECK(max_eig(block) < 0.0);
    }
}

TEST_CASE("rank-one program needs factors")
{
    const auto data = sim::run_experiment_dt(sim::laplacian_system(), 60, 1, 2, 1e-6);
    const auto cf = consistency::center_form(
        consistency::quadratic_form(data, consistency::relax_to_energy({1e-6}, 5, 60)));
    const RegionIntersection cone{make_region(CatalogKind::ConeLeft, {0.0, 0.785})};
    CHECK_THROWS_AS(synth_rank_one(cf, cone), PreconditionError);
    using Factors = std::vector<std::optional<regions::RankOneFactor>>;
    CHECK_THROWS_AS(synth_rank_one(cf, cone, Factors{std::nullopt}), PreconditionError);
    CHECK_THROWS_AS(synth_rank_one(cf, cone, Factors{}), DimensionError);
}

TEST_CASE("Hurwitz and Schur targets reduce to single-block programs")
{
    // for s = 1 with eta = gamma = 1 the two robust programs coincide
    const auto tt = sim::tape_transport();
    const auto ct = sim::run_experiment_ct(tt, 200, 0.1, 5, 6, 1e-6);
    const auto cfc = consistency::center_form(consistency::quadratic_form(ct, consistency::relax_to_energy({1e-6}, 5, 200)));
    const RegionIntersection hurwitz{make_region(CatalogKind::Hurwitz, {})};
    const auto p = synth_petersen(cfc, hurwitz);
    const auto r = synth_rank_one(cfc, hurwitz);
    REQUIRE(p.feasible());
    REQUIRE(r.feasible());
    const auto rep = verify::verify_robust(r, cfc, hurwitz, 100, 1);
    CHECK(rep.sound());
    CHECK(rep.certificate_ok());

    const auto lap = sim::laplacian_system();
    const auto dt = sim::run_experiment_dt(lap, 100, 7, 8, 1e-5);
    const auto cfd = consistency::center_form(consistency::quadratic_form(dt, consistency::relax_to_energy({1e-5}, 5, 100)));
    const RegionIntersection schur{make_region(CatalogKind::Schur, {})};
    const auto factor = regions::rank_one_factor(schur[0]);
    REQUIRE(factor);
    CHECK((factor->eta * factor->gamma.transpose() - schur[0].beta()).norm() <= 1e-14);
    const auto rs = synth_rank_one(cfd, schur);
    REQUIRE(rs.feasible());
    const auto reps = verify::verify_robust(rs, cfd, schur, 100, 2);
    CHECK(reps.sound());
    CHECK(reps.certificate_ok());
}

TEST_CASE("every data-driven method is sound on the discrete-time benchmark")
{
    const double eps = 1e-5;
    const int T = 200;
    const auto lap = sim::laplacian_system();
    const auto data = sim::run_experiment_dt(lap, T, 11, 12, eps);
    const RegionIntersection disk{regions::dt_disk_spec(0.47, 0.43)};
    const auto q = consistency::quadratic_form(data, consistency::relax_to_energy({eps}, 5, T));
    const auto cf = consistency::center_form(q);
    const auto pw = consistency::pointwise_forms(data, consistency::InstantaneousBound{eps});

    const auto pet = synth_petersen(cf, disk);
    const auto r1 = synth_rank_one(cf, disk);
    const auto se = synth_sproc_energy(q, disk);
    const auto si = synth_sproc_instant(pw, disk);
    for (const auto* r : {&pet, &r1, &se}) {
        CAPTURE(to_string(r->method));
        REQUIRE(r->feasible());
        CHECK(min_eig(r->P) >= r->outcome.margin / 2);
        const auto rep = verify::verify_robust(*r, cf, disk, 200, 3);
        CHECK(rep.sound());
        CHECK(rep.certificate_ok());
        CHECK(places(lap.A, lap.B, r->K, disk));
    }
    REQUIRE(si.feasible());
    REQUIRE(si.taus);
    CHECK(si.taus->size() == 1);
    CHECK((*si.taus)[0].size() == T);
    CHECK((*si.taus)[0].minCoeff() >= 0.0);
    const auto rep = verify::verify_robust(si, pw, disk, 200, 4);
    CHECK(rep.sound());
    CHECK(rep.certificate_ok());
    REQUIRE(se.taus);
    CHECK((*se.taus)[0](0) > 0.0);
}

TEST_CASE("noiseless data: robust verdicts follow the model-based one")
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    const RegionIntersection schur{make_region(CatalogKind::Schur, {})};
    const RegionIntersection disk{make_region(CatalogKind::Disk, {0.2, 0.5})};
    int agree = 0, total = 0;
    for (int k = 0; k < 6; ++k) {
        const int n = 2 + k % 3;
        const Matrix a = Matrix::NullaryExpr(n, n, [&] { return 0.7 * g(rng); });
        const Matrix b = Matrix::NullaryExpr(n, 1, [&] { return g(rng); });
        const auto data = noiseless_dt(a, b, 4 * (n + 1), rng);
        const auto cf = consistency::center_form(consistency::quadratic_form(data, consistency::EnergyBound{Matrix::Zero(n, n)}));
        for (const auto* target : {&schur, &disk}) {
            const auto mb = model_based(a, b, *target);
            const auto pet = synth_petersen(cf, *target);
            const auto r1 = synth_rank_one(cf, *target);
            ++total;
            agree += mb.feasible() == pet.feasible() && mb.feasible() == r1.feasible();
            if (pet.feasible()) CHECK(places(a, b, pet.K, *target));
            if (r1.feasible()) CHECK(places(a, b, r1.K, *target));
        }
    }
    CHECK(agree == total);
}

TEST_CASE("shrinking the bound keeps feasibility on a fixed realization")
{
    const auto lap = sim::laplacian_system();
    const auto data = sim::run_experiment_dt(lap, 200, 21, 22, 1e-6);
    const RegionIntersection disk{regions::dt_disk_spec(0.47, 0.43)};
    bool previous = true;
    for (double eps : {1e-6, 1e-5, 5e-5, 2.5e-4}) {
        const auto cf = consistency::center_form(consistency::quadratic_form(data, consistency::relax_to_energy({eps}, 5, 200)));
        const bool f = synth_rank_one(cf, disk).feasible();
        if (f) CHECK(previous);
        previous = f;
    }
    CHECK_FALSE(previous);
}

TEST_CASE("single noiseless sample of a scalar autonomous system")
{
    // x+ = a x with one exact sample: the pointwise set is the single point a
    consistency::ExperimentData d;
    d.X0 = Matrix::Ones(1, 1);
    d.U0 = Matrix::Zero(0, 1);
    const RegionIntersection schur{make_region(CatalogKind::Schur, {})};
    for (double a : {0.5, -0.9, 1.2}) {
        d.X1 = Matrix::Constant(1, 1, a);
        const auto pw = consistency::pointwise_forms(d, consistency::InstantaneousBound{0.0});
        const auto r = synth_sproc_instant(pw, schur);
        const auto mb = model_based(Matrix::Constant(1, 1, a), Matrix::Zero(1, 0), schur);
        CAPTURE(a);
        CHECK(r.feasible() == mb.feasible());
        CHECK(r.feasible() == (std::abs(a) < 1.0));
    }
}
