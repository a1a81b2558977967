#include "ddlmi/synthesis.hpp"

#include <chrono>

namespace ddlmi::synthesis {

using lmi::AffineExpr;
using lmi::LmiConstraint;
using regions::LmiRegion;
using regions::RegionIntersection;

std::string to_string(Method m)
{
    switch (m) {
    case Method::ModelBased: return "model";
    case Method::Petersen: return "petersen";
    case Method::RankOne: return "rank1";
    case Method::SProcEnergy: return "sproc-energy";
    case Method::SProcInstant: return "sproc-instant";
    }
    return "unknown";
}

std::optional<Method> parse_method(const std::string& name)
{
    for (Method m : all_methods())
        if (to_string(m) == name) return m;
    return std::nullopt;
}

const std::vector<Method>& all_methods()
{
    static const std::vector<Method> methods{Method::ModelBased, Method::Petersen, Method::RankOne,
                                             Method::SProcEnergy, Method::SProcInstant};
    return methods;
}

Matrix recover_gain(const Matrix& P, const Matrix& Y)
{
    require_square(P, "P");
    if (Y.cols() != P.rows()) throw DimensionError("Y must have as many columns as P");
    Eigen::LLT<Matrix> llt(P);
    if (llt.info() != Eigen::Success || !(min_eig(P) > 1e-14 * std::max(1.0, spectral_norm(P))))
        throw PreconditionError("P is not positive definite");
    return llt.solve(Y.transpose()).transpose();
}

namespace {

struct Program {
    lmi::VariableSpace vars;
    lmi::SymVar p;
    lmi::MatVar y;
    AffineExpr P;
    AffineExpr PY;
    std::vector<LmiConstraint> cons;
    std::vector<std::vector<lmi::ScalarVar>> taus;
    /// Norm each multiplier block was divided by.
    std::vector<std::vector<double>> tau_scale;

    Program(int n, int m)
    {
        p = vars.add_symmetric("P", n);
        P = vars.expr(p);
        // no inputs: the gain is empty and [P; Y] is P
        y.rows = m;
        y.cols = n;
        if (m > 0) {
            y = vars.add_matrix("Y", m, n);
            PY = lmi::vstack(P, vars.expr(y));
        } else {
            PY = P;
        }
    }
};

void require_target(const RegionIntersection& target)
{
    if (target.size() == 0) throw ValidationError("target region list is empty");
}

SynthesisResult run(Method method, Program& prog, const solve::SolveOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    prog.cons.push_back({-prog.P, "P > 0", true});
    const auto problem = lmi::scalarize(prog.cons, prog.vars, options.margin);

    SynthesisResult r;
    r.method = method;
    r.outcome = solve::solve_feasibility(problem, options);
    const Vector& x = r.outcome.assignment;
    if (x.size() == prog.vars.size() && r.outcome.status != solve::Status::Infeasible &&
        r.outcome.status != solve::Status::NumericalFailure) {
        r.P = lmi::VariableSpace::value(prog.p, x);
        r.Y = prog.y.rows > 0 ? lmi::VariableSpace::value(prog.y, x) : Matrix::Zero(0, prog.y.cols);
        try {
            r.K = recover_gain(r.P, r.Y);
        } catch (const PreconditionError&) {
            r.warnings.push_back("P is not positive definite; no gain recovered");
        }
        if (!prog.taus.empty()) {
            std::vector<Vector> taus;
            for (const auto& group : prog.taus) {
                Vector t(static_cast<Eigen::Index>(group.size()));
                for (std::size_t i = 0; i < group.size(); ++i)
                    t(static_cast<Eigen::Index>(i)) = lmi::VariableSpace::value(group[i], x);
                taus.push_back(std::move(t));
            }
            for (std::size_t g = 0; g < taus.size(); ++g)
                for (Eigen::Index i = 0; i < taus[g].size(); ++i)
                    taus[g](i) /= prog.tau_scale[g][static_cast<std::size_t>(i)];
            r.taus = std::move(taus);
        }
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

// [[I_s ⊗ c, I_s ⊗ b'], [I_s ⊗ b, I_s ⊗ a]] scaled to unit Frobenius norm.
Matrix multiplier_block(int s, const Matrix& c, const Matrix& b, const Matrix& a, double& scale)
{
    const Matrix is = Matrix::Identity(s, s);
    const Eigen::Index n1 = s * c.rows(), n2 = s * a.rows();
    Matrix g(n1 + n2, n1 + n2);
    g.topLeftCorner(n1, n1) = kron(is, c);
    g.bottomLeftCorner(n2, n1) = kron(is, b);
    g.topRightCorner(n1, n2) = kron(is, b).transpose();
    g.bottomRightCorner(n2, n2) = kron(is, a);
    const double norm = g.norm();
    scale = norm > 0.0 ? norm : 1.0;
    return g / scale;
}

// Coordinates for the S-procedure programs.  The congruence
//   T = [[I, 0], [I_s ⊗ zc, I_s ⊗ w]]
// maps every multiplier block and the variable block without changing
// feasibility; centering at the least-squares estimate and whitening by
// Ac^-1/2 keeps the multipliers on the scale of P.
struct Frame {
    Matrix zc;  // (n+m) x n
    Matrix w;   // (n+m) x (n+m)
};

Frame make_frame(const Matrix& ac, const Matrix& bc)
{
    const Eigen::Index nm = ac.rows();
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(ac));
    const Vector ev = es.eigenvalues();
    const double top = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    if (ev(0) > 1e-12 * top) {
        const Matrix v = es.eigenvectors();
        return {-(v * ev.cwiseInverse().asDiagonal() * v.transpose()) * bc,
                v * ev.cwiseInverse().cwiseSqrt().asDiagonal() * v.transpose()};
    }
    return {Matrix::Zero(nm, bc.cols()), Matrix::Identity(nm, nm) / std::sqrt(top)};
}

// T' [[I_s ⊗ c, I_s ⊗ b'], [I_s ⊗ b, I_s ⊗ a]] T for the frame above.
Matrix framed_multiplier(int s, const Frame& f, const Matrix& c, const Matrix& b, const Matrix& a, double& scale)
{
    const Matrix bt = b + a * f.zc;
    const Matrix ct = symmetrized(c + b.transpose() * f.zc + f.zc.transpose() * bt);
    return multiplier_block(s, ct, f.w * bt, symmetrized(f.w * a * f.w), scale);
}

// T' [[alpha ⊗ P, (beta ⊗ [P; Y])'], [beta ⊗ [P; Y], 0]] T.
AffineExpr sproc_block(const LmiRegion& r, const Program& prog, const Frame& f)
{
    const int s = r.s();
    const int nm = prog.PY.rows();
    AffineExpr tl = lmi::kron_const_var(r.alpha(), prog.P) + lmi::sym_kron_pair(r.beta(), Matrix(f.zc.transpose()) * prog.PY);
    return lmi::block2x2(tl, lmi::kron_const_var(r.beta(), f.w * prog.PY), AffineExpr(Matrix::Zero(s * nm, s * nm)));
}

}  // namespace

SynthesisResult model_based(const Matrix& A, const Matrix& B, const RegionIntersection& target,
                            const solve::SolveOptions& options)
{
    require_square(A, "A");
    if (B.rows() != A.rows()) throw DimensionError("B must have as many rows as A");
    require_target(target);
    const int n = static_cast<int>(A.rows()), m = static_cast<int>(B.cols());
    Program prog(n, m);
    Matrix ab(n, n + m);
    ab << A, B;
    const AffineExpr l = ab * prog.PY;
    for (const auto& r : target.regions())
        prog.cons.push_back({lmi::kron_const_var(r.alpha(), prog.P) + lmi::sym_kron_pair(r.beta(), l), r.label()});
    return run(Method::ModelBased, prog, options);
}

SynthesisResult synth_petersen(const consistency::CenterForm& cf, const RegionIntersection& target,
                               const solve::SolveOptions& options)
{
    require_target(target);
    const int n = cf.n(), nm = cf.nm();
    Program prog(n, nm - n);
    const AffineExpr l = Matrix(cf.Zc.transpose()) * prog.PY;
    // congruence with diag(I, I_s ⊗ Ac^-1/2) turns the -I_s ⊗ Ac block into -I
    const AffineExpr w = cf.Ac_inv_sqrt * prog.PY;
    for (const auto& r : target.regions()) {
        const int s = r.s();
        AffineExpr tl(kron(r.beta() * r.beta().transpose(), cf.Qc));
        tl += lmi::kron_const_var(r.alpha(), prog.P) + lmi::sym_kron_pair(r.beta(), l);
        const AffineExpr bl = lmi::kron_const_var(Matrix::Identity(s, s), w);
        prog.cons.push_back({lmi::block2x2(tl, bl, AffineExpr(Matrix(-Matrix::Identity(s * nm, s * nm)))), r.label()});
    }
    return run(Method::Petersen, prog, options);
}

SynthesisResult synth_rank_one(const consistency::CenterForm& cf, const RegionIntersection& target,
                               const std::vector<std::optional<regions::RankOneFactor>>& factors,
                               const solve::SolveOptions& options)
{
    require_target(target);
    if (factors.size() != target.size()) throw DimensionError("one rank-one factor per target region is required");
    for (std::size_t i = 0; i < factors.size(); ++i)
        if (!factors[i])
            throw PreconditionError("region '" + target[i].label() +
                                    "' has no rank-one factor; inner-approximate it with "
                                    "halfplanes or disks first");

    const int n = cf.n(), nm = cf.nm();
    Program prog(n, nm - n);
    const Matrix in = Matrix::Identity(n, n);
    const AffineExpr w = cf.Ac_inv_sqrt * prog.PY;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        const LmiRegion& r = target[i];
        const Vector& eta = factors[i]->eta;
        const Vector& gamma = factors[i]->gamma;
        if (eta.size() != r.s() || gamma.size() != r.s()) throw DimensionError("rank-one factor size differs from s");
        const Matrix e = kron(eta, in);                                  // sn x n
        const AffineExpr g = lmi::kron_const_var(gamma.transpose(), prog.PY);  // (n+m) x sn
        AffineExpr tl(Matrix(e * cf.Qc * e.transpose()));
        tl += lmi::kron_const_var(r.alpha(), prog.P) + lmi::tr_sym(Matrix(e * cf.Zc.transpose()) * g);
        const AffineExpr bl = lmi::kron_const_var(gamma.transpose(), w);
        prog.cons.push_back({lmi::block2x2(tl, bl, AffineExpr(Matrix(-Matrix::Identity(nm, nm)))), r.label()});
    }
    return run(Method::RankOne, prog, options);
}

SynthesisResult synth_rank_one(const consistency::CenterForm& cf, const RegionIntersection& target,
                               const solve::SolveOptions& options)
{
    std::vector<std::optional<regions::RankOneFactor>> factors;
    for (const auto& r : target.regions()) factors.push_back(regions::rank_one_factor(r));
    return synth_rank_one(cf, target, factors, options);
}

SynthesisResult synth_sproc_energy(const consistency::QuadraticForm& q, const RegionIntersection& target,
                                   const solve::SolveOptions& options)
{
    require_target(target);
    require_square(q.Cc, "Cc");
    require_square(q.Ac, "Ac");
    if (q.Bc.rows() != q.Ac.rows() || q.Bc.cols() != q.Cc.rows())
        throw DimensionError("Bc must be (n+m)xn for the given Ac and Cc");
    const int n = static_cast<int>(q.Cc.rows()), nm = static_cast<int>(q.Ac.rows());
    Program prog(n, nm - n);
    const Frame frame = make_frame(q.Ac, q.Bc);
    std::vector<lmi::ScalarVar> taus;
    std::vector<double> scales;
    for (std::size_t i = 0; i < target.size(); ++i) {
        const LmiRegion& r = target[i];
        const auto tau = prog.vars.add_scalar("tau_" + std::to_string(i), true);
        taus.push_back(tau);
        AffineExpr block = sproc_block(r, prog, frame);
        double scale = 1.0;
        block.add_term(tau.offset, -framed_multiplier(r.s(), frame, q.Cc, q.Bc, q.Ac, scale));
        scales.push_back(scale);
        prog.cons.push_back({block, r.label()});
    }
    prog.taus.push_back(taus);
    prog.tau_scale.push_back(scales);
    auto res = run(Method::SProcEnergy, prog, options);
    if (res.taus) {
        std::vector<Vector> per_region;
        for (Eigen::Index i = 0; i < (*res.taus)[0].size(); ++i) per_region.push_back((*res.taus)[0].segment(i, 1));
        res.taus = std::move(per_region);
    }
    return res;
}

SynthesisResult synth_sproc_instant(const consistency::PointwiseForms& pw, const RegionIntersection& target,
                                    const solve::SolveOptions& options)
{
    require_target(target);
    if (pw.empty()) throw ValidationError("no data points");
    const int n = static_cast<int>(pw[0].c.rows()), nm = static_cast<int>(pw[0].a.rows());
    Program prog(n, nm - n);
    const auto total = consistency::aggregate(pw);
    const Frame frame = make_frame(total.Ac, total.Bc);
    const int count = static_cast<int>(pw.size() * target.size());
    for (std::size_t i = 0; i < target.size(); ++i) {
        const LmiRegion& r = target[i];
        AffineExpr block = sproc_block(r, prog, frame);
        std::vector<lmi::ScalarVar> taus;
        std::vector<double> scales(pw.size(), 1.0);
        for (std::size_t k = 0; k < pw.size(); ++k) {
            const auto tau = prog.vars.add_scalar("tau_" + std::to_string(i) + "_" + std::to_string(k), true);
            taus.push_back(tau);
            block.add_term(tau.offset, -framed_multiplier(r.s(), frame, pw[k].c, pw[k].b, pw[k].a, scales[k]));
        }
        prog.taus.push_back(std::move(taus));
        prog.tau_scale.push_back(std::move(scales));
        prog.cons.push_back({block, r.label()});
    }
    auto res = run(Method::SProcInstant, prog, options);
    if (count > kManyMultipliers)
        res.warnings.push_back(std::to_string(count) + " multipliers; expect a slow solve");
    return res;
}

}  // namespace ddlmi::synthesis
