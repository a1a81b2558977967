#pragma once

#include "ddlmi/cone.hpp"
#include "ddlmi/lmi.hpp"

#include <functional>
#include <optional>
#include <string>

namespace ddlmi::solve {

enum class Status { Feasible, Infeasible, Marginal, NumericalFailure };

std::string to_string(Status s);

struct SolveOptions {
    /// Strictness margin; defaults to the problem's own margin.
    std::optional<double> margin;
    int max_iter = 200;
    double tol = 1e-8;
    /// Box |x_i| ≤ var_bound keeping the phase-I program bounded.
    double var_bound = 1e4;
    /// Stop at the first iterate meeting the margin instead of pushing to a
    /// near-central certificate.
    bool stop_at_first_feasible = false;
};

struct SolveOutcome {
    Status status = Status::NumericalFailure;
    Vector assignment;
    /// Largest eigenvalue over all constraint blocks at the assignment.
    double max_residual = 0.0;
    /// Phase-I value reached by the dual iterate and the primal bound on it.
    double t_value = 0.0;
    double upper_bound = 0.0;
    double margin = 0.0;
    int iterations = 0;
    /// Some variable sits on the box bound.
    bool box_active = false;
};

/// Decides strict feasibility of the scalarized LMI list.
SolveOutcome solve_feasibility(const lmi::SdpProblem& problem, const SolveOptions& options = {});

// ---------------------------------------------------------------- conic backend

struct IpmResult;

struct IpmOptions {
    int max_iter = 200;
    double tol = 1e-8;
    /// Called once per iteration with the current state; returning true stops.
    std::function<bool(const IpmResult&)> stop;
};

struct IpmResult {
    bool converged = false;
    bool stopped = false;
    int iterations = 0;
    Vector y;
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    double primal_infeas = 0.0;
    double dual_infeas = 0.0;
};

/// Infeasible-start primal-dual path-following method (HKM direction,
/// Mehrotra predictor-corrector) for block-diagonal semidefinite programs.
IpmResult solve_conic(const ConeProblem& problem, const IpmOptions& options = {});

}  // namespace ddlmi::solve
