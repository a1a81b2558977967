#include "ddlmi/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ddlmi::solve {

std::string to_string(Status s)
{
    switch (s) {
    case Status::Feasible: return "Feasible";
    case Status::Infeasible: return "Infeasible";
    case Status::Marginal: return "Marginal";
    case Status::NumericalFailure: return "NumericalFailure";
    }
    return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Iterate {
    std::vector<Matrix> X, Z;
    Vector x, z;  // scalar rows
    Vector y;
};

class Ipm {
public:
    explicit Ipm(const ConeProblem& p) : p_(p), m_(p.num_vars)
    {
        nbar_ = static_cast<double>(p.lp.size());
        for (const auto& blk : p.sdp) nbar_ += static_cast<double>(blk.c.rows());
        bnorm_ = p.b.norm();
        cnorm_ = 0.0;
        for (const auto& blk : p.sdp) cnorm_ += blk.c.squaredNorm();
        for (const auto& row : p.lp) cnorm_ += row.c * row.c;
        cnorm_ = std::sqrt(cnorm_);
    }

    IpmResult run(const IpmOptions& opt)
    {
        Iterate it = initial_point();
        IpmResult res;
        std::vector<Matrix> zinv(p_.sdp.size());

        for (int iter = 0; iter < opt.max_iter; ++iter) {
            res.iterations = iter;
            // residuals
            Vector rp = p_.b - a_op(it.X, it.x);
            std::vector<Matrix> Rd = dual_residual_sdp(it);
            Vector rd = dual_residual_lp(it);
            const double pobj = primal_objective(it);
            const double dobj = p_.b.dot(it.y);
            double dnorm = rd.squaredNorm();
            for (const auto& r : Rd) dnorm += r.squaredNorm();
            res.primal_infeas = rp.norm() / (1.0 + bnorm_);
            res.dual_infeas = std::sqrt(dnorm) / (1.0 + cnorm_);
            res.primal_obj = pobj;
            res.dual_obj = dobj;
            res.y = it.y;

            const double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
            if (gap < opt.tol && res.primal_infeas < opt.tol && res.dual_infeas < opt.tol) {
                res.converged = true;
                return res;
            }
            if (opt.stop && opt.stop(res)) {
                res.stopped = true;
                return res;
            }

            const double mu = complementarity(it) / nbar_;
            for (std::size_t k = 0; k < p_.sdp.size(); ++k) {
                Eigen::LLT<Matrix> llt(it.Z[k]);
                if (llt.info() != Eigen::Success) return res;
                zinv[k] = llt.solve(Matrix::Identity(it.Z[k].rows(), it.Z[k].cols()));
                zinv[k] = symmetrized(zinv[k]);
            }

            Matrix M = schur(it, zinv);
            Eigen::LDLT<Matrix> ldlt;
            if (!factor(M, ldlt)) return res;

            // predictor
            std::vector<Matrix> Rc(p_.sdp.size());
            for (std::size_t k = 0; k < p_.sdp.size(); ++k) Rc[k] = -it.X[k] * it.Z[k];
            Vector rc = -it.x.cwiseProduct(it.z);
            Direction aff = direction(it, zinv, ldlt, rp, Rd, rd, Rc, rc);

            const double ap = std::min(1.0, step_to_boundary(it.X, it.x, aff.dX, aff.dx));
            const double ad = std::min(1.0, step_to_boundary(it.Z, it.z, aff.dZ, aff.dz));
            double mu_aff = 0.0;
            for (std::size_t k = 0; k < p_.sdp.size(); ++k)
                mu_aff += ((it.X[k] + ap * aff.dX[k]).cwiseProduct(it.Z[k] + ad * aff.dZ[k])).sum();
            mu_aff += (it.x + ap * aff.dx).dot(it.z + ad * aff.dz);
            mu_aff /= nbar_;
            double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;
            sigma = std::clamp(sigma, 0.0, 1.0);

            // corrector
            for (std::size_t k = 0; k < p_.sdp.size(); ++k) {
                const Eigen::Index d = it.X[k].rows();
                Rc[k] = sigma * mu * Matrix::Identity(d, d) - it.X[k] * it.Z[k] - aff.dX[k] * aff.dZ[k];
            }
            rc = Vector::Constant(it.x.size(), sigma * mu) - it.x.cwiseProduct(it.z) - aff.dx.cwiseProduct(aff.dz);
            Direction dir = direction(it, zinv, ldlt, rp, Rd, rd, Rc, rc);

            const double gamma = 0.95;
            const double sp = std::min(1.0, gamma * step_to_boundary(it.X, it.x, dir.dX, dir.dx));
            const double sd = std::min(1.0, gamma * step_to_boundary(it.Z, it.z, dir.dZ, dir.dz));
            if (!(sp > 1e-12) && !(sd > 1e-12)) return res;  // stalled

            for (std::size_t k = 0; k < p_.sdp.size(); ++k) {
                it.X[k] = symmetrized(it.X[k] + sp * dir.dX[k]);
                it.Z[k] = symmetrized(it.Z[k] + sd * dir.dZ[k]);
            }
            it.x += sp * dir.dx;
            it.z += sd * dir.dz;
            it.y += sd * dir.dy;
        }
        res.iterations = opt.max_iter;
        return res;
    }

private:
    struct Direction {
        std::vector<Matrix> dX, dZ;
        Vector dx, dz, dy;
    };

    Iterate initial_point() const
    {
        Iterate it;
        it.y = Vector::Zero(m_);
        for (const auto& blk : p_.sdp) {
            const double d = static_cast<double>(blk.c.rows());
            double amax = 0.0;
            double xi = std::max(10.0, std::sqrt(d));
            for (const auto& [var, a] : blk.a) {
                const double an = a.norm();
                amax = std::max(amax, an);
                xi = std::max(xi, d * (1.0 + std::abs(p_.b(var))) / (1.0 + an));
            }
            const double eta = std::max({10.0, std::sqrt(d), blk.c.norm(), amax});
            it.X.push_back(xi * Matrix::Identity(blk.c.rows(), blk.c.rows()));
            it.Z.push_back(eta * Matrix::Identity(blk.c.rows(), blk.c.rows()));
        }
        const auto nl = static_cast<Eigen::Index>(p_.lp.size());
        it.x = Vector(nl);
        it.z = Vector(nl);
        for (Eigen::Index r = 0; r < nl; ++r) {
            const auto& row = p_.lp[static_cast<std::size_t>(r)];
            double amax = 0.0;
            double xi = 10.0;
            for (const auto& [var, a] : row.a) {
                amax = std::max(amax, std::abs(a));
                xi = std::max(xi, (1.0 + std::abs(p_.b(var))) / (1.0 + std::abs(a)));
            }
            it.x(r) = xi;
            it.z(r) = std::max({10.0, std::abs(row.c), amax});
        }
        return it;
    }

    Vector a_op(const std::vector<Matrix>& X, const Vector& x) const
    {
        Vector out = Vector::Zero(m_);
        for (std::size_t k = 0; k < p_.sdp.size(); ++k)
            for (const auto& [var, a] : p_.sdp[k].a) out(var) += a.cwiseProduct(X[k]).sum();
        for (std::size_t r = 0; r < p_.lp.size(); ++r)
            for (const auto& [var, a] : p_.lp[r].a) out(var) += a * x(static_cast<Eigen::Index>(r));
        return out;
    }

    Matrix at_op_sdp(std::size_t k, const Vector& y) const
    {
        Matrix out = Matrix::Zero(p_.sdp[k].c.rows(), p_.sdp[k].c.cols());
        for (const auto& [var, a] : p_.sdp[k].a) out += y(var) * a;
        return out;
    }

    Vector at_op_lp(const Vector& y) const
    {
        Vector out = Vector::Zero(static_cast<Eigen::Index>(p_.lp.size()));
        for (std::size_t r = 0; r < p_.lp.size(); ++r)
            for (const auto& [var, a] : p_.lp[r].a) out(static_cast<Eigen::Index>(r)) += a * y(var);
        return out;
    }

    std::vector<Matrix> dual_residual_sdp(const Iterate& it) const
    {
        std::vector<Matrix> out(p_.sdp.size());
        for (std::size_t k = 0; k < p_.sdp.size(); ++k) out[k] = p_.sdp[k].c - it.Z[k] - at_op_sdp(k, it.y);
        return out;
    }

    Vector dual_residual_lp(const Iterate& it) const
    {
        Vector c(static_cast<Eigen::Index>(p_.lp.size()));
        for (std::size_t r = 0; r < p_.lp.size(); ++r) c(static_cast<Eigen::Index>(r)) = p_.lp[r].c;
        return c - it.z - at_op_lp(it.y);
    }

    double primal_objective(const Iterate& it) const
    {
        double v = 0.0;
        for (std::size_t k = 0; k < p_.sdp.size(); ++k) v += p_.sdp[k].c.cwiseProduct(it.X[k]).sum();
        for (std::size_t r = 0; r < p_.lp.size(); ++r) v += p_.lp[r].c * it.x(static_cast<Eigen::Index>(r));
        return v;
    }

    double complementarity(const Iterate& it) const
    {
        double v = it.x.dot(it.z);
        for (std::size_t k = 0; k < p_.sdp.size(); ++k) v += it.X[k].cwiseProduct(it.Z[k]).sum();
        return v;
    }

    // M_ij = tr(A_i X A_j Z^-1) + sum_r a_ri a_rj x_r / z_r
    Matrix schur(const Iterate& it, const std::vector<Matrix>& zinv) const
    {
        Matrix M = Matrix::Zero(m_, m_);
        Matrix g;
        for (std::size_t k = 0; k < p_.sdp.size(); ++k) {
            const auto& coeffs = p_.sdp[k].a;
            const Matrix& X = it.X[k];
            for (std::size_t i = 0; i < coeffs.size(); ++i) {
                g.noalias() = X * coeffs[i].second;
                Matrix h = g * zinv[k];
                for (std::size_t j = i; j < coeffs.size(); ++j) {
                    const double v = coeffs[j].second.cwiseProduct(h).sum();
                    const int a = coeffs[i].first;
                    const int b = coeffs[j].first;
                    M(a, b) += v;
                    if (a != b) M(b, a) += v;
                }
            }
        }
        for (std::size_t r = 0; r < p_.lp.size(); ++r) {
            const auto ri = static_cast<Eigen::Index>(r);
            const double w = it.x(ri) / it.z(ri);
            const auto& row = p_.lp[r].a;
            for (std::size_t i = 0; i < row.size(); ++i) {
                for (std::size_t j = i; j < row.size(); ++j) {
                    const double v = row[i].second * row[j].second * w;
                    M(row[i].first, row[j].first) += v;
                    if (row[i].first != row[j].first) M(row[j].first, row[i].first) += v;
                }
            }
        }
        return M;
    }

    static bool factor(Matrix& M, Eigen::LDLT<Matrix>& ldlt)
    {
        const double scale = std::max(1e-300, M.diagonal().cwiseAbs().maxCoeff());
        for (double reg : {0.0, 1e-14, 1e-11, 1e-8}) {
            Matrix Mr = M;
            Mr.diagonal().array() += reg * scale;
            ldlt.compute(Mr);
            if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
                const Vector d = ldlt.vectorD();
                if (d.minCoeff() > 0.0) return true;
            }
        }
        return false;
    }

    Direction direction(const Iterate& it, const std::vector<Matrix>& zinv, const Eigen::LDLT<Matrix>& ldlt,
                        const Vector& rp, const std::vector<Matrix>& Rd, const Vector& rd,
                        const std::vector<Matrix>& Rc, const Vector& rc) const
    {
        const std::size_t nb = p_.sdp.size();
        std::vector<Matrix> t1(nb);
        for (std::size_t k = 0; k < nb; ++k) t1[k] = (Rc[k] - it.X[k] * Rd[k]) * zinv[k];
        Vector t1l = (rc - it.x.cwiseProduct(rd)).cwiseQuotient(it.z);
        Vector rhs = rp - a_op(t1, t1l);

        Direction d;
        d.dy = ldlt.solve(rhs);
        d.dX.resize(nb);
        d.dZ.resize(nb);
        for (std::size_t k = 0; k < nb; ++k) {
            d.dZ[k] = Rd[k] - at_op_sdp(k, d.dy);
            d.dX[k] = symmetrized((Rc[k] - it.X[k] * d.dZ[k]) * zinv[k]);
        }
        d.dz = rd - at_op_lp(d.dy);
        d.dx = (rc - it.x.cwiseProduct(d.dz)).cwiseQuotient(it.z);
        return d;
    }

    static double step_to_boundary(const std::vector<Matrix>& X, const Vector& x, const std::vector<Matrix>& dX,
                                   const Vector& dx)
    {
        double alpha = kInf;
        for (std::size_t k = 0; k < X.size(); ++k) {
            Eigen::LLT<Matrix> llt(X[k]);
            if (llt.info() != Eigen::Success) return 0.0;
            Matrix L = llt.matrixL();
            Matrix w = L.triangularView<Eigen::Lower>().solve(dX[k]);
            w = L.triangularView<Eigen::Lower>().solve(w.transpose().eval());
            const double lam = min_eig(w);
            if (lam < 0.0) alpha = std::min(alpha, -1.0 / lam);
        }
        for (Eigen::Index r = 0; r < x.size(); ++r)
            if (dx(r) < 0.0) alpha = std::min(alpha, -x(r) / dx(r));
        return alpha;
    }

    const ConeProblem& p_;
    int m_;
    double nbar_ = 0.0;
    double bnorm_ = 0.0;
    double cnorm_ = 0.0;
};

Vector clip_nonneg(const lmi::SdpProblem& problem, Vector x)
{
    for (int i : problem.nonneg) x(i) = std::max(0.0, x(i));
    return x;
}

}  // namespace

IpmResult solve_conic(const ConeProblem& problem, const IpmOptions& options)
{
    if (problem.b.size() != problem.num_vars) throw DimensionError("cone problem: objective size mismatch");
    Ipm ipm(problem);
    return ipm.run(options);
}

SolveOutcome solve_feasibility(const lmi::SdpProblem& problem, const SolveOptions& options)
{
    const double margin = options.margin.value_or(problem.margin);
    if (!(margin > 0.0)) throw ValidationError("solve_feasibility: margin must be positive");

    const ConeProblem cone = lmi::phase_one(problem, options.var_bound);
    const int n = problem.num_vars;

    auto residual_at = [&](const Vector& y) { return problem.max_eig_at(clip_nonneg(problem, y.head(n))); };

    IpmOptions ipm_opt;
    ipm_opt.max_iter = options.max_iter;
    ipm_opt.tol = options.tol;
    const double infeas_tol = options.tol * std::max(1.0, problem.scale);
    // A primal-feasible X bounds the phase-I value from above.
    auto certified_infeasible = [&](const IpmResult& s) {
        return s.primal_infeas < options.tol && s.primal_obj < -infeas_tol && s.dual_obj < -infeas_tol &&
               s.primal_obj - s.dual_obj <= 1e-3 * std::abs(s.primal_obj);
    };
    ipm_opt.stop = [&](const IpmResult& s) {
        if (certified_infeasible(s)) return true;
        if (residual_at(s.y) > -margin) return false;
        if (options.stop_at_first_feasible) return true;
        // near-central certificate: phase-I value within 1e-3 of its bound
        return s.primal_obj - s.dual_obj <= 1e-3 * std::max(std::abs(s.primal_obj), margin);
    };

    const IpmResult r = solve_conic(cone, ipm_opt);

    SolveOutcome out;
    out.margin = margin;
    out.iterations = r.iterations;
    out.assignment = clip_nonneg(problem, r.y.size() == n + 1 ? Vector(r.y.head(n)) : Vector::Zero(n));
    out.max_residual = problem.max_eig_at(out.assignment);
    out.t_value = r.y.size() == n + 1 ? r.y(n) : 0.0;
    out.upper_bound = r.primal_obj;

    if (out.max_residual <= -margin)
        out.status = Status::Feasible;
    else if ((r.converged && r.primal_obj < -infeas_tol && r.dual_obj < -infeas_tol) || certified_infeasible(r))
        out.status = Status::Infeasible;
    else if (r.converged)
        out.status = Status::Marginal;
    else
        out.status = Status::NumericalFailure;
    // the certificate only covers the box; an iterate pressed against it says
    // nothing about the unbounded program
    out.box_active = n > 0 && out.assignment.cwiseAbs().maxCoeff() >= 0.999 * options.var_bound;
    if (out.status == Status::Infeasible && out.box_active) out.status = Status::Marginal;
    return out;
}

}  // namespace ddlmi::solve
