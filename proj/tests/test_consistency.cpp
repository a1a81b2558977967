#include "doctest.h"

#include "ddlmi/consistency.hpp"
#include "ddlmi/sim.hpp"

#include <random>

using namespace ddlmi;
using namespace ddlmi::consistency;

namespace {

Matrix random_orthogonal(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = g(rng);
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ();
}

Matrix random_upsilon(std::mt19937_64& rng, int rows, int cols, bool boundary)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Matrix v = random_orthogonal(rng, rows);
    const Matrix w = random_orthogonal(rng, cols);
    Matrix s = Matrix::Zero(rows, cols);
    for (int i = 0; i < std::min(rows, cols); ++i) s(i, i) = boundary ? 1.0 : u(rng);
    return v * s * w.transpose();
}

ExperimentData random_dt_data(std::mt19937_64& rng, const Matrix& a, const Matrix& b, int T, double dnorm)
{
    std::normal_distribution<double> g;
    const int n = static_cast<int>(a.rows()), m = static_cast<int>(b.cols());
    ExperimentData d;
    d.U0.resize(m, T);
    d.X0.resize(n, T);
    d.X1.resize(n, T);
    Vector x = Vector::Zero(n);
    for (int i = 0; i < T; ++i) {
        for (int j = 0; j < m; ++j) d.U0(j, i) = g(rng);
        d.X0.col(i) = x;
        x = a * x + b * d.U0.col(i) + sim::uniform_ball(rng, n, dnorm);
        d.X1.col(i) = x;
    }
    return d;
}

}  // namespace

TEST_CASE("rank check")
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    ExperimentData d;
    d.X0 = Matrix::NullaryExpr(3, 5, [&] { return g(rng); });
    d.U0 = Matrix::NullaryExpr(2, 5, [&] { return g(rng); });
    d.X1 = Matrix::Zero(3, 5);
    CHECK(check_rank(d).full_rank);

    Vector col = Vector::Random(5);
    d.X0 = col.head(3).replicate(1, 5);
    d.U0 = col.tail(2).replicate(1, 5);
    CHECK_FALSE(check_rank(d).full_rank);

    const auto vi = sim::run_experiment_ct(sim::tape_transport(), 200, 0.1, 1, 2, 2.5e-6);
    CHECK(check_rank(vi).full_rank);
}

TEST_CASE("noiseless data recovers the system")
{
    const auto sys = sim::tape_transport();
    const auto ct = sim::run_experiment_ct(sys, 200, 0.1, 4, 5, 0.0);
    const auto q = quadratic_form(ct, EnergyBound{Matrix::Zero(5, 5)});
    const auto cf = center_form(q);
    Matrix ab(5, 6);
    ab << sys.A, sys.B;
    CHECK((cf.center_system() - ab).norm() <= 1e-6);
    CHECK(spectral_norm(cf.Qc) <= 1e-8 * spectral_norm(cf.Ac));
    Matrix z(6, 5);
    z << sys.A.transpose(), sys.B.transpose();
    CHECK(spectral_norm(q.evaluate(z)) <= 1e-9 * spectral_norm(q.Cc));

    const auto lap = sim::laplacian_system();
    const auto dt = sim::run_experiment_dt(lap, 200, 4, 5, 0.0);
    const auto cfd = center_form(quadratic_form(dt, EnergyBound{Matrix::Zero(5, 5)}));
    ab << lap.A, lap.B;
    CHECK((cfd.center_system() - ab).norm() <= 1e-10);

    // any Upsilon returns the true system when the radius vanishes
    std::mt19937_64 rng(2);
    CHECK((sample_consistent(cfd, random_upsilon(rng, 6, 5, true)) - ab).norm() <= 1e-6);
}

TEST_CASE("quadratic energy bound reproduces the energy form")
{
    const auto data = sim::run_experiment_dt(sim::laplacian_system(), 30, 1, 2, 1e-3);
    const Matrix delta = std::sqrt(30 * 1e-3) * Matrix::Identity(5, 5);
    const auto q1 = quadratic_form(data, EnergyBound{delta});
    const auto q2 = quadratic_form(data, EnergyQuadraticBound{-delta * delta.transpose(), Matrix::Zero(30, 5),
                                                              Matrix::Identity(30, 30)});
    CHECK((q1.Cc - q2.Cc).norm() <= 1e-12 * q1.Cc.norm());
    CHECK((q1.Bc - q2.Bc).norm() <= 1e-12 * q1.Bc.norm());
    CHECK((q1.Ac - q2.Ac).norm() <= 1e-12 * q1.Ac.norm());
    CHECK_THROWS_AS(quadratic_form(data, EnergyQuadraticBound{Matrix::Zero(5, 5), Matrix::Zero(30, 5),
                                                              -Matrix::Identity(30, 30)}),
                    ValidationError);
    CHECK_THROWS_AS(quadratic_form(data, InstantaneousBound{1e-3}), ValidationError);
}

TEST_CASE("Qc is positive semidefinite for consistent data")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 100; ++k) {
        const int n = 2 + k % 3, m = 1 + k % 2;
        const Matrix a = Matrix::NullaryExpr(n, n, [&] { return 0.6 * g(rng); });
        const Matrix b = Matrix::NullaryExpr(n, m, [&] { return g(rng); });
        const int T = 3 * (n + m);
        const double eps = 1e-2;
        const auto data = random_dt_data(rng, a, b, T, std::sqrt(eps));
        const auto cf = center_form(quadratic_form(data, relax_to_energy(InstantaneousBound{eps}, n, T)));
        CHECK(min_eig(cf.Qc) >= -1e-9 * spectral_norm(cf.Qc));
        CHECK(min_eig(cf.Ac) > 0.0);
    }
}

TEST_CASE("inflating the bound grows Qc by the bound difference")
{
    const auto data = sim::run_experiment_dt(sim::laplacian_system(), 40, 7, 8, 1e-4);
    const Matrix d1 = 0.1 * Matrix::Identity(5, 5);
    Matrix d2 = d1;
    d2(0, 0) = 0.3;
    const auto c1 = center_form(quadratic_form(data, EnergyBound{d1}));
    const auto c2 = center_form(quadratic_form(data, EnergyBound{d2}));
    CHECK((c2.Qc - c1.Qc - (d2 * d2.transpose() - d1 * d1.transpose())).norm() <= 1e-10);
    CHECK(min_eig(c2.Qc - c1.Qc) >= -1e-12);
}

TEST_CASE("errors on bad data")
{
    ExperimentData d;
    d.X0 = Matrix::Ones(2, 3);
    d.U0 = Matrix::Ones(1, 3);
    d.X1 = Matrix::Ones(2, 3);
    CHECK_THROWS_AS(center_form(quadratic_form(d, EnergyBound{Matrix::Identity(2, 2)})), PreconditionError);

    const auto data = sim::run_experiment_dt(sim::laplacian_system(), 50, 1, 2, 1e-2);
    CHECK_THROWS_AS(center_form(quadratic_form(data, EnergyBound{1e-4 * Matrix::Identity(5, 5)})),
                    InconsistentDataError);

    d.X1 = Matrix::Ones(2, 4);
    CHECK_THROWS_AS(d.validate(), DimensionError);
}

TEST_CASE("sampling and containment")
{
    const int T = 60;
    const double eps = 1e-3;
    const auto data = sim::run_experiment_dt(sim::laplacian_system(), T, 11, 12, eps);
    const auto q = quadratic_form(data, relax_to_energy(InstantaneousBound{eps}, 5, T));
    const auto cf = center_form(q);
    const Matrix center = cf.center_system();
    const auto split = [](const Matrix& ab) { return std::pair<Matrix, Matrix>{ab.leftCols(5), ab.rightCols(1)}; };

    auto [ac, bc] = split(sample_consistent(cf, Matrix::Zero(6, 5)));
    CHECK((ac - center.leftCols(5)).norm() == doctest::Approx(0.0));
    const auto cc = contains(q, ac, bc);
    CHECK(cc.inside);

    std::mt19937_64 rng(4);
    for (int k = 0; k < 200; ++k) {
        const bool boundary = k % 2 == 0;
        const Matrix ups = random_upsilon(rng, 6, 5, boundary);
        auto [a, b] = split(sample_consistent(cf, ups));
        const auto c = contains(q, a, b);
        CHECK(c.inside);
        CHECK(c.max_eig >= cc.max_eig - 1e-9 * c.scale);
        if (boundary) {
            CHECK(std::abs(c.max_eig) <= 1e-7 * c.scale);
            const Matrix out = center + 1.01 * (sample_consistent(cf, ups) - center);
            CHECK_FALSE(contains(q, out.leftCols(5), out.rightCols(1)).inside);
        }
    }
    CHECK_THROWS_AS(sample_consistent(cf, 1.1 * random_upsilon(rng, 6, 5, true)), ValidationError);

    // the two forms agree on random candidates near the set
    std::normal_distribution<double> g;
    int agree = 0;
    for (int k = 0; k < 1000; ++k) {
        const Matrix pert = Matrix::NullaryExpr(5, 6, [&] { return g(rng); });
        const Matrix ab = center + 0.05 * pert;
        const auto c1 = contains(q, ab.leftCols(5), ab.rightCols(1));
        const auto c2 = contains(cf, ab.leftCols(5), ab.rightCols(1));
        CHECK(std::abs(c1.max_eig - c2.max_eig) <= 1e-7 * std::max(c1.scale, c2.scale));
        agree += c1.inside == c2.inside;
    }
    CHECK(agree == 1000);
}

TEST_CASE("pointwise forms")
{
    const int T = 40;
    const double eps = 1e-2;
    const auto sys = sim::laplacian_system();
    const auto data = sim::run_experiment_dt(sys, T, 21, 22, eps);
    const auto pw = pointwise_forms(data, InstantaneousBound{eps});
    REQUIRE(pw.size() == static_cast<std::size_t>(T));
    for (const auto& f : pw) {
        Eigen::JacobiSVD<Matrix> svd(f.a);
        CHECK(svd.singularValues()(1) <= 1e-12 * svd.singularValues()(0));
    }
    CHECK(contains(pw, sys.A, sys.B).inside);

    // intersection is inside the energy relaxation
    const auto q = quadratic_form(data, relax_to_energy(InstantaneousBound{eps}, 5, T));
    const auto agg = aggregate(pw);
    CHECK((agg.Cc - q.Cc).norm() <= 1e-10 * q.Cc.norm());
    const auto cf = center_form(q);
    std::mt19937_64 rng(5);
    int accepted = 0;
    for (int k = 0; k < 3000; ++k) {
        const Matrix ab = sample_consistent(cf, random_upsilon(rng, 6, 5, false));
        const Matrix a = ab.leftCols(5), b = ab.rightCols(1);
        if (!contains(pw, a, b).inside) continue;
        ++accepted;
        CHECK(contains(q, a, b).inside);
    }
    CHECK(accepted >= 0);

    // adding samples never enlarges the set
    ExperimentData shorter = data;
    shorter.U0 = data.U0.leftCols(T - 1);
    shorter.X0 = data.X0.leftCols(T - 1);
    shorter.X1 = data.X1.leftCols(T - 1);
    const auto pw_short = pointwise_forms(shorter, InstantaneousBound{eps});
    std::normal_distribution<double> g;
    for (int k = 0; k < 500; ++k) {
        Matrix ab(5, 6);
        ab << sys.A, sys.B;
        ab += 0.02 * Matrix::NullaryExpr(5, 6, [&] { return g(rng); });
        if (!contains(pw_short, ab.leftCols(5), ab.rightCols(1)).inside)
            CHECK_FALSE(contains(pw, ab.leftCols(5), ab.rightCols(1)).inside);
    }

    // single noiseless sample: the true system meets the bound with equality
    ExperimentData one;
    one.X0 = data.X0.col(5);
    one.U0 = data.U0.col(5);
    one.X1 = sys.A * one.X0 + sys.B * one.U0;
    const auto pw1 = pointwise_forms(one, InstantaneousBound{0.0});
    CHECK(std::abs(contains(pw1, sys.A, sys.B).max_eig) <= 1e-12);

    // quadratic instantaneous form with (r, s, q) = (-eps I, 0, 1) matches
    const auto pwq = pointwise_forms(data, InstantaneousQuadraticBound{-eps * Matrix::Identity(5, 5), Matrix::Zero(1, 5), 1.0});
    CHECK((pwq[3].c - pw[3].c).norm() <= 1e-14);
    CHECK((pwq[3].b - pw[3].b).norm() <= 1e-14);
    CHECK_THROWS_AS(pointwise_forms(data, EnergyBound{Matrix::Identity(5, 5)}), ValidationError);
}
