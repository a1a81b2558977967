#include "ddlmi/consistency.hpp"

#include <algorithm>
#include <cmath>

namespace ddlmi::consistency {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void shape(const Matrix& m, Eigen::Index r, Eigen::Index c, const std::string& what)
{
    if (m.rows() != r || m.cols() != c)
        throw DimensionError(what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                             ", expected " + std::to_string(r) + "x" + std::to_string(c));
}

void symmetric(const Matrix& m, const std::string& what)
{
    if ((m - m.transpose()).norm() > 1e-12 * std::max(1.0, m.norm())) throw ValidationError(what + " must be symmetric");
}

Matrix zstack(const Matrix& a, const Matrix& b)
{
    Matrix z(a.cols() + b.cols(), a.rows());
    z << a.transpose(), b.transpose();
    return z;
}

}  // namespace

// ---------------------------------------------------------------- data

Matrix ExperimentData::regressor() const
{
    Matrix w(X0.rows() + U0.rows(), X0.cols());
    w << X0, U0;
    return w;
}

void ExperimentData::validate() const
{
    if (X0.rows() < 1) throw ValidationError("experiment needs at least one state");
    if (X0.cols() < 1) throw ValidationError("experiment needs at least one sample");
    shape(X1, X0.rows(), X0.cols(), "X1");
    if (U0.cols() != X0.cols())
        throw DimensionError("U0 has " + std::to_string(U0.cols()) + " columns, X0 has " + std::to_string(X0.cols()));
    if (!(Ts > 0.0)) throw ValidationError("sampling period Ts must be > 0");
    if (!X0.allFinite() || !X1.allFinite() || !U0.allFinite()) throw ValidationError("experiment data must be finite");
}

// ---------------------------------------------------------------- models

bool is_energy(const DisturbanceModel& model)
{
    return std::holds_alternative<EnergyBound>(model) || std::holds_alternative<EnergyQuadraticBound>(model);
}

std::string model_name(const DisturbanceModel& model)
{
    return std::visit(overloaded{[](const EnergyBound&) { return std::string("energy"); },
                                 [](const EnergyQuadraticBound&) { return std::string("energy_quadratic"); },
                                 [](const InstantaneousBound&) { return std::string("instantaneous"); },
                                 [](const InstantaneousQuadraticBound&) {
                                     return std::string("instantaneous_quadratic");
                                 }},
                      model);
}

void validate_model(const DisturbanceModel& model, int n, int T)
{
    std::visit(overloaded{
                   [&](const EnergyBound& e) {
                       if (e.Delta.rows() != n)
                           throw DimensionError("Delta must have " + std::to_string(n) + " rows");
                   },
                   [&](const EnergyQuadraticBound& e) {
                       shape(e.R, n, n, "R");
                       shape(e.S, T, n, "S");
                       shape(e.Q, T, T, "Q");
                       symmetric(e.R, "R");
                       symmetric(e.Q, "Q");
                       if (!(min_eig(e.Q) > 0.0)) throw ValidationError("Q must be positive definite");
                   },
                   [&](const InstantaneousBound& e) {
                       if (!(e.eps >= 0.0) || !std::isfinite(e.eps)) throw ValidationError("eps must be >= 0");
                   },
                   [&](const InstantaneousQuadraticBound& e) {
                       shape(e.r, n, n, "r");
                       shape(e.s, 1, n, "s");
                       symmetric(e.r, "r");
                       if (!(e.q > 0.0)) throw ValidationError("q must be > 0");
                   },
               },
               model);
}

EnergyBound relax_to_energy(const InstantaneousBound& bound, int n, int T)
{
    if (!(bound.eps >= 0.0)) throw ValidationError("eps must be >= 0");
    return {std::sqrt(static_cast<double>(T) * bound.eps) * Matrix::Identity(n, n)};
}

RankCheck check_rank(const ExperimentData& data, double rel_tol)
{
    const Matrix w = data.regressor();
    Eigen::JacobiSVD<Matrix> svd(w);
    const Vector sv = svd.singularValues();
    RankCheck r;
    if (sv.size() == 0) return r;
    r.max_singular = sv(0);
    // fewer columns than rows leaves a zero singular value outside the thin SVD
    r.min_singular = w.cols() < w.rows() ? 0.0 : sv(sv.size() - 1);
    r.full_rank = r.max_singular > 0.0 && r.min_singular > rel_tol * r.max_singular;
    return r;
}

// ---------------------------------------------------------------- quadratic form

Matrix QuadraticForm::evaluate(const Matrix& z) const
{
    const Matrix bz = Bc.transpose() * z;
    return symmetrized(Cc + bz + bz.transpose() + z.transpose() * Ac * z);
}

QuadraticForm quadratic_form(const ExperimentData& data, const DisturbanceModel& model)
{
    data.validate();
    if (!is_energy(model))
        throw ValidationError("quadratic_form needs an energy-type model, got " + model_name(model));
    validate_model(model, data.n(), data.T());
    const Matrix w = data.regressor();
    QuadraticForm q;
    if (const auto* e = std::get_if<EnergyBound>(&model)) {
        q.Cc = -e->Delta * e->Delta.transpose() + data.X1 * data.X1.transpose();
        q.Bc = -w * data.X1.transpose();
        q.Ac = w * w.transpose();
    } else {
        const auto& eq = std::get<EnergyQuadraticBound>(model);
        const Matrix sx = data.X1 * eq.S;
        q.Cc = eq.R + sx + sx.transpose() + data.X1 * eq.Q * data.X1.transpose();
        q.Bc = -w * (eq.S + eq.Q * data.X1.transpose());
        q.Ac = w * eq.Q * w.transpose();
    }
    q.Cc = symmetrized(q.Cc);
    q.Ac = symmetrized(q.Ac);
    return q;
}

double qc_tolerance(const QuadraticForm& q, const Matrix& qc)
{
    // relative part for noisy data, absolute floor for the cancellation in
    // noiseless data where Qc is pure rounding error
    const Matrix quad = q.Bc.transpose() * q.Ac.ldlt().solve(q.Bc);
    return 1e-9 * spectral_norm(qc) + 1e-12 * (spectral_norm(q.Cc) + spectral_norm(quad));
}

CenterForm center_form(const QuadraticForm& q)
{
    require_square(q.Ac, "Ac");
    require_square(q.Cc, "Cc");
    if (q.Bc.rows() != q.Ac.rows() || q.Bc.cols() != q.Cc.rows())
        throw DimensionError("Bc must be (n+m)xn for the given Ac and Cc");
    Eigen::LLT<Matrix> llt(q.Ac);
    Eigen::SelfAdjointEigenSolver<Matrix> es_a(q.Ac);
    const Vector ea = es_a.eigenvalues();
    if (llt.info() != Eigen::Success || !(ea(0) > 1e-14 * std::max(1.0, ea(ea.size() - 1))))
        throw PreconditionError("Ac is not positive definite: [X0; U0] lacks full row rank");

    CenterForm cf;
    cf.Ac = q.Ac;
    cf.Zc = -llt.solve(q.Bc);
    cf.Qc = symmetrized(-(q.Cc + q.Bc.transpose() * cf.Zc));

    Eigen::SelfAdjointEigenSolver<Matrix> es_q(cf.Qc);
    const double tol = qc_tolerance(q, cf.Qc);
    if (es_q.eigenvalues()(0) < -tol)
        throw InconsistentDataError("Qc has eigenvalue " + std::to_string(es_q.eigenvalues()(0)) +
                                    ": data cannot be explained by the disturbance model");
    cf.Qc_sqrt = psd_sqrt(cf.Qc);
    cf.Ac_inv_sqrt = es_a.eigenvectors() * ea.cwiseInverse().cwiseSqrt().asDiagonal() * es_a.eigenvectors().transpose();
    return cf;
}

Matrix sample_consistent(const CenterForm& cf, const Matrix& upsilon)
{
    shape(upsilon, cf.nm(), cf.n(), "Upsilon");
    if (spectral_norm(upsilon) > 1.0 + 1e-12) throw ValidationError("Upsilon must satisfy Upsilon' Upsilon <= I");
    return (cf.Zc + cf.Ac_inv_sqrt * upsilon * cf.Qc_sqrt).transpose();
}

Containment contains(const QuadraticForm& q, const Matrix& a, const Matrix& b, double rel_tol)
{
    const Matrix z = zstack(a, b);
    shape(z, q.Ac.rows(), q.Cc.rows(), "[A B]'");
    Containment c;
    c.max_eig = max_eig(q.evaluate(z));
    const double zn = spectral_norm(z);
    c.scale = std::max(1e-300, spectral_norm(q.Cc) + 2.0 * spectral_norm(q.Bc) * zn + spectral_norm(q.Ac) * zn * zn);
    c.inside = c.max_eig <= rel_tol * c.scale;
    return c;
}

Containment contains(const CenterForm& cf, const Matrix& a, const Matrix& b, double rel_tol)
{
    const Matrix z = zstack(a, b);
    shape(z, cf.nm(), cf.n(), "[A B]'");
    const Matrix dz = z - cf.Zc;
    Containment c;
    c.max_eig = max_eig(dz.transpose() * cf.Ac * dz - cf.Qc);
    const double zn = spectral_norm(z) + spectral_norm(cf.Zc);
    c.scale = std::max(1e-300, spectral_norm(cf.Qc) + spectral_norm(cf.Ac) * zn * zn);
    c.inside = c.max_eig <= rel_tol * c.scale;
    return c;
}

// ---------------------------------------------------------------- pointwise

PointwiseForms pointwise_forms(const ExperimentData& data, const DisturbanceModel& model)
{
    data.validate();
    if (is_energy(model)) throw ValidationError("pointwise_forms needs an instantaneous-type model, got " + model_name(model));
    validate_model(model, data.n(), data.T());
    const int n = data.n();
    const Matrix w = data.regressor();
    PointwiseForms out;
    out.reserve(static_cast<std::size_t>(data.T()));
    for (int i = 0; i < data.T(); ++i) {
        const Vector xo = data.X1.col(i);
        const Vector wi = w.col(i);
        PointwiseForm f;
        if (const auto* e = std::get_if<InstantaneousBound>(&model)) {
            f.c = -e->eps * Matrix::Identity(n, n) + xo * xo.transpose();
            f.b = -wi * xo.transpose();
            f.a = wi * wi.transpose();
        } else {
            const auto& iq = std::get<InstantaneousQuadraticBound>(model);
            const Matrix xs = xo * iq.s;
            f.c = symmetrized(iq.r + xs + xs.transpose() + iq.q * xo * xo.transpose());
            f.b = -wi * (iq.s + iq.q * xo.transpose());
            f.a = iq.q * wi * wi.transpose();
        }
        out.push_back(std::move(f));
    }
    return out;
}

QuadraticForm aggregate(const PointwiseForms& pw)
{
    if (pw.empty()) throw ValidationError("aggregate needs at least one sample");
    QuadraticForm q{Matrix::Zero(pw[0].c.rows(), pw[0].c.cols()), Matrix::Zero(pw[0].b.rows(), pw[0].b.cols()),
                    Matrix::Zero(pw[0].a.rows(), pw[0].a.cols())};
    for (const auto& f : pw) {
        q.Cc += f.c;
        q.Bc += f.b;
        q.Ac += f.a;
    }
    return q;
}

Containment contains(const PointwiseForms& pw, const Matrix& a, const Matrix& b, double rel_tol)
{
    Containment worst;
    worst.inside = true;
    worst.max_eig = -std::numeric_limits<double>::infinity();
    for (const auto& f : pw) {
        const Containment c = contains(QuadraticForm{f.c, f.b, f.a}, a, b, rel_tol);
        if (c.max_eig / c.scale > worst.max_eig / worst.scale || worst.max_eig == -std::numeric_limits<double>::infinity()) {
            worst.max_eig = c.max_eig;
            worst.scale = c.scale;
        }
        worst.inside = worst.inside && c.inside;
    }
    return worst;
}

}  // namespace ddlmi::consistency
