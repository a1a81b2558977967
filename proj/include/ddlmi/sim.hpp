#pragma once

#include "ddlmi/consistency.hpp"
#include "ddlmi/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>

namespace ddlmi::sim {

struct LinearSystem {
    Matrix A;
    Matrix B;
    TimeDomain domain = TimeDomain::Continuous;
    std::string label;

    int n() const { return static_cast<int>(A.rows()); }
    int m() const { return static_cast<int>(B.cols()); }
    void validate() const;
};

/// Five-state tape transport, continuous time.
LinearSystem tape_transport();

/// A = I - L/2 for a five-node digraph Laplacian L, B = e3, discrete time.
LinearSystem laplacian_system();
Matrix laplacian_matrix();

/// Uniform sample from the closed ball of the given radius in R^n.
Vector uniform_ball(std::mt19937_64& rng, int n, double radius);

/// State after one period of length h with inputs and disturbances linear
/// between their end values, via fixed-step RK4 with `substeps` steps.
Vector integrate_segment(const LinearSystem& sys, const Vector& x, const Vector& u0, const Vector& u1,
                         const Vector& d0, const Vector& d1, double h, int substeps = 20);

/// Continuous-time experiment from the origin. Inputs and disturbances are
/// piecewise linear through Gaussian and uniform-ball knots at the sampling
/// instants; X1 stores the exact state derivative at each instant.
consistency::ExperimentData run_experiment_ct(const LinearSystem& sys, int T, double Ts, std::uint64_t input_seed,
                                              std::uint64_t dist_seed, double eps);

/// Discrete-time experiment from the origin; X1 holds the successor states.
consistency::ExperimentData run_experiment_dt(const LinearSystem& sys, int T, std::uint64_t input_seed,
                                              std::uint64_t dist_seed, double eps);

/// Disturbance sequence used by the experiments (n x count, one knot per column).
Matrix disturbance_knots(int n, int count, std::uint64_t dist_seed, double eps);

struct Trajectory {
    Vector t;
    Matrix x;  // n x N
    Matrix u;  // m x N
};

/// Undisturbed closed loop u = K x from x0. Continuous time runs RK4 with step
/// dt up to time `horizon`; discrete time iterates `horizon` steps.
Trajectory closed_loop_response(const LinearSystem& sys, const Matrix& k, const Vector& x0, double horizon,
                                double dt = 0.01);

/// Columns t, x1..xn, u1..um.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace ddlmi::sim
