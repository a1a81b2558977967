#include "doctest.h"

#include "ddlmi/sim.hpp"
#include "ddlmi/verify.hpp"

#include <numbers>
#include <sstream>

using namespace ddlmi;
using namespace ddlmi::verify;
using regions::CatalogKind;
using regions::make_region;
using regions::RegionIntersection;

namespace {

synthesis::SynthesisResult fixed_gain(const Matrix& k)
{
    synthesis::SynthesisResult r;
    r.outcome.status = solve::Status::Feasible;
    r.K = k;
    r.P = Matrix::Identity(k.cols(), k.cols());
    return r;
}

}  // namespace

TEST_CASE("eigenvalue margins")
{
    const RegionIntersection hurwitz{make_region(CatalogKind::Hurwitz, {})};
    CHECK(eig_region_margin(-Matrix::Identity(1, 1), hurwitz)(0, 0) == doctest::Approx(2.0));
    CHECK(eig_region_margin(Matrix::Zero(1, 1), hurwitz)(0, 0) == doctest::Approx(0.0));
    CHECK(eig_region_margin(Matrix::Identity(1, 1), hurwitz)(0, 0) < 0.0);
    Matrix a(2, 2);
    a << -1, 0, 0, 3;
    const Matrix m = eig_region_margin(a, RegionIntersection{hurwitz[0], make_region(CatalogKind::Disk, {0.0, 2.0})});
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 2);
    CHECK(m.minCoeff() < 0.0);
}

TEST_CASE("upsilon sampling")
{
    std::mt19937_64 rng(1);
    for (int k = 0; k < 50; ++k) {
        const Matrix u = sample_upsilon(rng, 6, 5, k % 2 == 0);
        Eigen::JacobiSVD<Matrix> svd(u);
        CHECK(svd.singularValues().maxCoeff() <= 1.0 + 1e-12);
        if (k % 2 == 0) CHECK(svd.singularValues().minCoeff() == doctest::Approx(1.0));
    }
}

TEST_CASE("open loop of an unstable plant fails verification")
{
    const auto sys = sim::tape_transport();
    const auto data = sim::run_experiment_ct(sys, 200, 0.1, 1, 2, 2.5e-6);
    const auto cf = consistency::center_form(
        consistency::quadratic_form(data, consistency::relax_to_energy({2.5e-6}, 5, 200)));
    const auto wedge = regions::wedge_regions(0.3, 2.0, std::numbers::pi / 5.7);
    const auto rep = verify_robust(fixed_gain(Matrix::Zero(1, 5)), cf, wedge, 50, 7);
    CHECK(rep.samples == 50);
    CHECK(rep.boundary_samples == 25);
    CHECK(rep.fraction_stable < 1.0);
    CHECK_FALSE(rep.sound());

    synthesis::SynthesisResult infeasible;
    infeasible.outcome.status = solve::Status::Infeasible;
    CHECK_THROWS_AS(verify_robust(infeasible, cf, wedge, 10, 1), PreconditionError);
}

TEST_CASE("noiseless data: every sample is the true system")
{
    const auto lap = sim::laplacian_system();
    const auto data = sim::run_experiment_dt(lap, 50, 3, 4, 0.0);
    const auto cf = consistency::center_form(consistency::quadratic_form(data, consistency::EnergyBound{Matrix::Zero(5, 5)}));
    Matrix ab(5, 6);
    ab << lap.A, lap.B;
    for (const auto& s : sample_ellipsoid(cf, 10, 5)) CHECK((s - ab).norm() <= 1e-6);

    const RegionIntersection schur{make_region(CatalogKind::Schur, {})};
    const Matrix k = Matrix::Zero(1, 5);
    const auto rep = verify_robust(fixed_gain(k), cf, schur, 10, 5);
    const bool direct = eig_region_margin(lap.A, schur).minCoeff() > 0.0;
    CHECK((rep.stable == rep.samples) == direct);
}

TEST_CASE("reports are deterministic in the seed")
{
    const auto lap = sim::laplacian_system();
    const auto data = sim::run_experiment_dt(lap, 80, 3, 4, 1e-5);
    const auto cf = consistency::center_form(consistency::quadratic_form(data, consistency::relax_to_energy({1e-5}, 5, 80)));
    const RegionIntersection schur{make_region(CatalogKind::Schur, {})};
    const auto r = fixed_gain(Matrix::Zero(1, 5));
    const auto a = verify_robust(r, cf, schur, 20, 9);
    const auto b = verify_robust(r, cf, schur, 20, 9);
    CHECK(a.min_margin == b.min_margin);
    CHECK(a.worst_certificate == b.worst_certificate);
    CHECK(a.stable == b.stable);
}

TEST_CASE("pointwise sampling stays in the pointwise set")
{
    const double eps = 1e-4;
    const auto lap = sim::laplacian_system();
    const auto data = sim::run_experiment_dt(lap, 100, 5, 6, eps);
    const auto pw = consistency::pointwise_forms(data, consistency::InstantaneousBound{eps});
    const auto anchor = pointwise_anchor(pw);
    CHECK(anchor.worst < 1.0);
    const auto cf = consistency::center_form(consistency::aggregate(pw));

    const auto samples = sample_pointwise(pw, 40, 3);
    REQUIRE(samples.size() == 40);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const Matrix a = samples[k].leftCols(5), b = samples[k].rightCols(1);
        const auto c = consistency::contains(pw, a, b);
        CHECK(c.inside);
        CHECK(consistency::contains(cf, a, b).inside);
        // even samples sit on the boundary of the pointwise set or of the ellipsoid
        if (k % 2 == 0) {
            const auto ce = consistency::contains(cf, a, b, 1e-7);
            CHECK((std::abs(c.max_eig) <= 1e-6 * c.scale || std::abs(ce.max_eig) <= 1e-7 * ce.scale));
        }
    }
}

TEST_CASE("eigenvalue csv")
{
    std::ostringstream os;
    write_eigenvalue_csv({{"open_loop", {1.0, -2.0}}, {"boundary", {0.5, 0.0}}}, os);
    CHECK(os.str() == "series,re,im\nopen_loop,1,-2\nboundary,0.5,0\n");
}
