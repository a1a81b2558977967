#include "ddlmi/sim.hpp"

#include <cmath>
#include <ostream>

namespace ddlmi::sim {

void LinearSystem::validate() const
{
    require_square(A, "A");
    if (B.rows() != A.rows())
        throw DimensionError("B has " + std::to_string(B.rows()) + " rows, A has " + std::to_string(A.rows()));
}

LinearSystem tape_transport()
{
    Matrix a(5, 5);
    a << 0, 2, 0, 0, 0,
        -0.1, -0.35, 0.1, 0.1, 0.75,
        0, 0, 0, 2, 0,
        0.4, 0.4, -0.4, -1.4, 0,
        0, -0.03, 0, 0, -1;
    Matrix b = Matrix::Zero(5, 1);
    b(4, 0) = 1.0;
    return {a, b, TimeDomain::Continuous, "tape_transport"};
}

Matrix laplacian_matrix()
{
    Matrix l(5, 5);
    l << 1, 0, -1, 0, 0,
        -1, 1, 0, 0, 0,
        0, -1, 1, 0, 0,
        0, 0, 0, 1, -1,
        -1, 0, 0, -1, 2;
    return l;
}

LinearSystem laplacian_system()
{
    Matrix b = Matrix::Zero(5, 1);
    b(2, 0) = 1.0;
    return {Matrix::Identity(5, 5) - 0.5 * laplacian_matrix(), b, TimeDomain::Discrete, "laplacian"};
}

Vector uniform_ball(std::mt19937_64& rng, int n, double radius)
{
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector v(n);
    double norm = 0.0;
    while (norm == 0.0) {
        for (int i = 0; i < n; ++i) v(i) = g(rng);
        norm = v.norm();
    }
    return v / norm * radius * std::pow(u(rng), 1.0 / n);
}

Matrix disturbance_knots(int n, int count, std::uint64_t dist_seed, double eps)
{
    if (!(eps >= 0.0)) throw ValidationError("disturbance bound eps must be >= 0");
    std::mt19937_64 rng(dist_seed);
    Matrix d(n, count);
    // unit-ball draws scaled afterwards so that one seed gives nested realizations
    for (int i = 0; i < count; ++i) d.col(i) = uniform_ball(rng, n, 1.0);
    return std::sqrt(eps) * d;
}

namespace {

Matrix gaussian_inputs(int m, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix u(m, count);
    for (int i = 0; i < count; ++i)
        for (int j = 0; j < m; ++j) u(j, i) = g(rng);
    return u;
}

}  // namespace

Vector integrate_segment(const LinearSystem& sys, const Vector& x, const Vector& u0, const Vector& u1,
                         const Vector& d0, const Vector& d1, double h, int substeps)
{
    const double dt = h / substeps;
    auto f = [&](double s, const Vector& z) {
        const double w = s / h;
        return Vector(sys.A * z + sys.B * ((1.0 - w) * u0 + w * u1) + (1.0 - w) * d0 + w * d1);
    };
    Vector z = x;
    for (int k = 0; k < substeps; ++k) {
        const double s = k * dt;
        const Vector k1 = f(s, z);
        const Vector k2 = f(s + 0.5 * dt, z + 0.5 * dt * k1);
        const Vector k3 = f(s + 0.5 * dt, z + 0.5 * dt * k2);
        const Vector k4 = f(s + dt, z + dt * k3);
        z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

consistency::ExperimentData run_experiment_ct(const LinearSystem& sys, int T, double Ts, std::uint64_t input_seed,
                                              std::uint64_t dist_seed, double eps)
{
    sys.validate();
    if (sys.domain != TimeDomain::Continuous) throw ValidationError("run_experiment_ct needs a continuous-time system");
    if (T < 1) throw ValidationError("T must be >= 1");
    if (!(Ts > 0.0)) throw ValidationError("Ts must be > 0");
    const int n = sys.n();
    const Matrix u = gaussian_inputs(sys.m(), T, input_seed);
    const Matrix d = disturbance_knots(n, T, dist_seed, eps);

    consistency::ExperimentData data;
    data.domain = TimeDomain::Continuous;
    data.Ts = Ts;
    data.U0 = u;
    data.X0.resize(n, T);
    data.X1.resize(n, T);
    Vector x = Vector::Zero(n);
    for (int i = 0; i < T; ++i) {
        data.X0.col(i) = x;
        data.X1.col(i) = sys.A * x + sys.B * u.col(i) + d.col(i);
        if (i + 1 < T) x = integrate_segment(sys, x, u.col(i), u.col(i + 1), d.col(i), d.col(i + 1), Ts);
    }
    return data;
}

consistency::ExperimentData run_experiment_dt(const LinearSystem& sys, int T, std::uint64_t input_seed,
                                              std::uint64_t dist_seed, double eps)
{
    sys.validate();
    if (sys.domain != TimeDomain::Discrete) throw ValidationError("run_experiment_dt needs a discrete-time system");
    if (T < 1) throw ValidationError("T must be >= 1");
    const int n = sys.n();
    const Matrix u = gaussian_inputs(sys.m(), T, input_seed);
    const Matrix d = disturbance_knots(n, T, dist_seed, eps);

    consistency::ExperimentData data;
    data.domain = TimeDomain::Discrete;
    data.Ts = 1.0;
    data.U0 = u;
    data.X0.resize(n, T);
    data.X1.resize(n, T);
    Vector x = Vector::Zero(n);
    for (int i = 0; i < T; ++i) {
        data.X0.col(i) = x;
        x = sys.A * x + sys.B * u.col(i) + d.col(i);
        data.X1.col(i) = x;
    }
    return data;
}

Trajectory closed_loop_response(const LinearSystem& sys, const Matrix& k, const Vector& x0, double horizon, double dt)
{
    sys.validate();
    if (k.rows() != sys.m() || k.cols() != sys.n()) throw DimensionError("K must be m x n");
    if (x0.size() != sys.n()) throw DimensionError("x0 must have n entries");
    if (!(horizon >= 0.0)) throw ValidationError("horizon must be >= 0");
    const Matrix acl = sys.A + sys.B * k;

    int steps = 0;
    double h = 1.0;
    if (sys.domain == TimeDomain::Discrete) {
        steps = static_cast<int>(std::floor(horizon));
    } else {
        if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
        steps = static_cast<int>(std::ceil(horizon / dt - 1e-9));
        h = steps > 0 ? horizon / steps : dt;
    }

    Trajectory tr;
    tr.t.resize(steps + 1);
    tr.x.resize(sys.n(), steps + 1);
    tr.u.resize(sys.m(), steps + 1);
    Vector x = x0;
    for (int i = 0; i <= steps; ++i) {
        tr.t(i) = i * h;
        tr.x.col(i) = x;
        tr.u.col(i) = k * x;
        if (i == steps) break;
        if (sys.domain == TimeDomain::Discrete) {
            x = acl * x;
        } else {
            const Vector k1 = acl * x;
            const Vector k2 = acl * (x + 0.5 * h * k1);
            const Vector k3 = acl * (x + 0.5 * h * k2);
            const Vector k4 = acl * (x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return tr;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out)
{
    out << "t";
    for (Eigen::Index i = 0; i < traj.x.rows(); ++i) out << ",x" << i + 1;
    for (Eigen::Index i = 0; i < traj.u.rows(); ++i) out << ",u" << i + 1;
    out << '\n';
    out.precision(10);
    for (Eigen::Index k = 0; k < traj.t.size(); ++k) {
        out << traj.t(k);
        for (Eigen::Index i = 0; i < traj.x.rows(); ++i) out << ',' << traj.x(i, k);
        for (Eigen::Index i = 0; i < traj.u.rows(); ++i) out << ',' << traj.u(i, k);
        out << '\n';
    }
}

}  // namespace ddlmi::sim
