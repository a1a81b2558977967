#pragma once

#include "ddlmi/linalg.hpp"

#include <string>
#include <variant>
#include <vector>

namespace ddlmi::consistency {

/// Input/state experiment. Columns are time steps; X1 holds the state
/// derivatives (continuous time) or successor states (discrete time).
struct ExperimentData {
    Matrix U0;
    Matrix X0;
    Matrix X1;
    double Ts = 1.0;
    TimeDomain domain = TimeDomain::Discrete;

    int n() const { return static_cast<int>(X0.rows()); }
    int m() const { return static_cast<int>(U0.rows()); }
    int T() const { return static_cast<int>(X0.cols()); }
    /// [X0; U0].
    Matrix regressor() const;
    /// Throws on inconsistent shapes or a nonpositive sampling period.
    void validate() const;
};

/// D D' ⪯ Delta Delta'.
struct EnergyBound {
    Matrix Delta;
};

/// [I D] [[R, S'], [S, Q]] [I; D'] ⪯ 0 with Q ≻ 0.
struct EnergyQuadraticBound {
    Matrix R;
    Matrix S;
    Matrix Q;
};

/// |d|^2 ≤ eps at every sample.
struct InstantaneousBound {
    double eps = 0.0;
};

/// [I d] [[r, s'], [s, q]] [I; d'] ⪯ 0 with q > 0 at every sample.
struct InstantaneousQuadraticBound {
    Matrix r;
    Matrix s;
    double q = 1.0;
};

using DisturbanceModel = std::variant<EnergyBound, EnergyQuadraticBound, InstantaneousBound, InstantaneousQuadraticBound>;

bool is_energy(const DisturbanceModel& model);
std::string model_name(const DisturbanceModel& model);

/// Checks the model's own invariants and its shapes against (n, T).
void validate_model(const DisturbanceModel& model, int n, int T);

/// Energy bound implied by an instantaneous bound over T samples: Delta = sqrt(T eps) I.
EnergyBound relax_to_energy(const InstantaneousBound& bound, int n, int T);

struct RankCheck {
    bool full_rank = false;
    double min_singular = 0.0;
    double max_singular = 0.0;
};

/// Full row rank of [X0; U0] with threshold rel_tol * largest singular value.
RankCheck check_rank(const ExperimentData& data, double rel_tol = 1e-8);

/// {Z : [I Z'] [[Cc, Bc'], [Bc, Ac]] [I; Z] ⪯ 0}.
struct QuadraticForm {
    Matrix Cc;
    Matrix Bc;
    Matrix Ac;

    /// [I Z'] [[Cc, Bc'], [Bc, Ac]] [I; Z].
    Matrix evaluate(const Matrix& z) const;
};

/// Energy-type models only.
QuadraticForm quadratic_form(const ExperimentData& data, const DisturbanceModel& model);

/// Ellipsoid {Z : (Z - Zc)' Ac (Z - Zc) ⪯ Qc}.
struct CenterForm {
    Matrix Zc;
    Matrix Ac;
    Matrix Qc;
    Matrix Ac_inv_sqrt;
    Matrix Qc_sqrt;

    int n() const { return static_cast<int>(Zc.cols()); }
    int nm() const { return static_cast<int>(Zc.rows()); }
    /// [A B] at the center.
    Matrix center_system() const { return Zc.transpose(); }
};

/// Throws PreconditionError if Ac is not positive definite and
/// InconsistentDataError if Qc has an eigenvalue below the tolerance.
CenterForm center_form(const QuadraticForm& q);

/// Tolerance used for the sign check on Qc.
double qc_tolerance(const QuadraticForm& q, const Matrix& qc);

/// (Zc + Ac^{-1/2} Upsilon Qc^{1/2})' = [A B].
Matrix sample_consistent(const CenterForm& cf, const Matrix& upsilon);

struct Containment {
    bool inside = false;
    /// Largest eigenvalue of the defining quadratic expression.
    double max_eig = 0.0;
    double scale = 1.0;
};

/// [A B] in the set, with tolerance rel_tol * scale.
Containment contains(const QuadraticForm& q, const Matrix& a, const Matrix& b, double rel_tol = 1e-9);
/// Same set tested through the ellipsoid form.
Containment contains(const CenterForm& cf, const Matrix& a, const Matrix& b, double rel_tol = 1e-9);

struct PointwiseForm {
    Matrix c;
    Matrix b;
    Matrix a;
};

using PointwiseForms = std::vector<PointwiseForm>;

/// Instantaneous-type models only.
PointwiseForms pointwise_forms(const ExperimentData& data, const DisturbanceModel& model);

/// Sum of the per-sample forms; its set contains the intersection.
QuadraticForm aggregate(const PointwiseForms& pw);

/// Worst per-sample slack; inside iff every sample passes.
Containment contains(const PointwiseForms& pw, const Matrix& a, const Matrix& b, double rel_tol = 1e-9);

}  // namespace ddlmi::consistency
