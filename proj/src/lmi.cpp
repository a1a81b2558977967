#include "ddlmi/lmi.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <ostream>
#include <set>

namespace ddlmi::lmi {

// ---------------------------------------------------------------- VariableSpace

void VariableSpace::claim(const std::string& name)
{
    if (std::find(groups_.begin(), groups_.end(), name) != groups_.end())
        throw ValidationError("duplicate variable name '" + name + "'");
    groups_.push_back(name);
}

int VariableSpace::packed_index(int i, int j, int dim)
{
    if (i < j) std::swap(i, j);
    // column-major lower triangle: column j holds rows j..dim-1
    return j * dim - j * (j - 1) / 2 + (i - j);
}

SymVar VariableSpace::add_symmetric(const std::string& name, int dim)
{
    if (dim < 1) throw ValidationError("symmetric variable '" + name + "' needs dim >= 1");
    claim(name);
    SymVar v{name, size(), dim};
    for (int j = 0; j < dim; ++j)
        for (int i = j; i < dim; ++i)
            names_.push_back(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
    return v;
}

MatVar VariableSpace::add_matrix(const std::string& name, int rows, int cols)
{
    if (rows < 1 || cols < 1) throw ValidationError("matrix variable '" + name + "' needs positive dimensions");
    claim(name);
    MatVar v{name, size(), rows, cols};
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            names_.push_back(name + "[" + std::to_string(i) + "," + std::to_string(j) + "]");
    return v;
}

ScalarVar VariableSpace::add_scalar(const std::string& name, bool nonneg)
{
    claim(name);
    ScalarVar v{name, size(), nonneg};
    names_.push_back(name);
    if (nonneg) nonneg_.push_back(v.offset);
    return v;
}

AffineExpr VariableSpace::expr(const SymVar& v) const
{
    AffineExpr e(v.dim, v.dim);
    for (int j = 0; j < v.dim; ++j) {
        for (int i = j; i < v.dim; ++i) {
            Matrix c = Matrix::Zero(v.dim, v.dim);
            c(i, j) = 1.0;
            c(j, i) = 1.0;
            e.add_term(v.offset + packed_index(i, j, v.dim), c);
        }
    }
    return e;
}

AffineExpr VariableSpace::expr(const MatVar& v) const
{
    AffineExpr e(v.rows, v.cols);
    for (int j = 0; j < v.cols; ++j) {
        for (int i = 0; i < v.rows; ++i) {
            Matrix c = Matrix::Zero(v.rows, v.cols);
            c(i, j) = 1.0;
            e.add_term(v.offset + j * v.rows + i, c);
        }
    }
    return e;
}

AffineExpr VariableSpace::expr(const ScalarVar& v) const
{
    AffineExpr e(1, 1);
    e.add_term(v.offset, Matrix::Ones(1, 1));
    return e;
}

Matrix VariableSpace::value(const SymVar& v, const Vector& x)
{
    Matrix m(v.dim, v.dim);
    for (int j = 0; j < v.dim; ++j)
        for (int i = j; i < v.dim; ++i) m(i, j) = m(j, i) = x(v.offset + packed_index(i, j, v.dim));
    return m;
}

Matrix VariableSpace::value(const MatVar& v, const Vector& x)
{
    Matrix m(v.rows, v.cols);
    for (int j = 0; j < v.cols; ++j)
        for (int i = 0; i < v.rows; ++i) m(i, j) = x(v.offset + j * v.rows + i);
    return m;
}

// ---------------------------------------------------------------- AffineExpr

AffineExpr::AffineExpr(int rows, int cols) : constant_(Matrix::Zero(rows, cols)) {}

AffineExpr::AffineExpr(Matrix constant) : constant_(std::move(constant)) {}

void AffineExpr::add_term(int var, const Matrix& coeff)
{
    if (coeff.rows() != constant_.rows() || coeff.cols() != constant_.cols())
        throw DimensionError("coefficient shape does not match expression shape");
    auto it = terms_.find(var);
    if (it == terms_.end())
        terms_.emplace(var, coeff);
    else
        it->second += coeff;
}

Matrix AffineExpr::evaluate(const Vector& x) const
{
    Matrix out = constant_;
    for (const auto& [var, coeff] : terms_) out += x(var) * coeff;
    return out;
}

AffineExpr AffineExpr::transpose() const
{
    AffineExpr out(constant_.transpose());
    for (const auto& [var, coeff] : terms_) out.terms_.emplace(var, coeff.transpose());
    return out;
}

bool AffineExpr::is_symmetric(double rel_tol) const
{
    if (rows() != cols()) return false;
    auto sym_ok = [rel_tol](const Matrix& m) {
        return (m - m.transpose()).norm() <= rel_tol * std::max(1.0, m.norm());
    };
    if (!sym_ok(constant_)) return false;
    return std::all_of(terms_.begin(), terms_.end(), [&](const auto& kv) { return sym_ok(kv.second); });
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other)
{
    if (rows() != other.rows() || cols() != other.cols())
        throw DimensionError("adding expressions of different shapes");
    constant_ += other.constant_;
    for (const auto& [var, coeff] : other.terms_) add_term(var, coeff);
    return *this;
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other)
{
    if (rows() != other.rows() || cols() != other.cols())
        throw DimensionError("subtracting expressions of different shapes");
    constant_ -= other.constant_;
    for (const auto& [var, coeff] : other.terms_) add_term(var, -coeff);
    return *this;
}

AffineExpr& AffineExpr::operator*=(double s)
{
    constant_ *= s;
    for (auto& kv : terms_) kv.second *= s;
    return *this;
}

AffineExpr operator*(const Matrix& m, const AffineExpr& e)
{
    if (m.cols() != e.rows()) throw DimensionError("left product: inner dimensions differ");
    AffineExpr out(m * e.constant_);
    for (const auto& [var, coeff] : e.terms_) out.terms_.emplace(var, m * coeff);
    return out;
}

AffineExpr operator*(const AffineExpr& e, const Matrix& m)
{
    if (e.cols() != m.rows()) throw DimensionError("right product: inner dimensions differ");
    AffineExpr out(e.constant_ * m);
    for (const auto& [var, coeff] : e.terms_) out.terms_.emplace(var, coeff * m);
    return out;
}

// ---------------------------------------------------------------- builders

AffineExpr kron_const_var(const Matrix& m, const AffineExpr& e)
{
    AffineExpr out(kron(m, e.constant()));
    for (const auto& [var, coeff] : e.terms()) out.add_term(var, kron(m, coeff));
    return out;
}

AffineExpr tr_sym(const AffineExpr& e)
{
    if (e.rows() != e.cols()) throw DimensionError("Tr-symmetrization needs a square expression");
    return e + e.transpose();
}

AffineExpr sym_kron_pair(const Matrix& beta, const AffineExpr& l)
{
    require_square(beta, "beta");
    if (l.rows() != l.cols()) throw DimensionError("sym_kron_pair needs a square inner expression");
    return kron_const_var(beta, l) + kron_const_var(beta.transpose(), l.transpose());
}

AffineExpr block2x2(const AffineExpr& top_left, const AffineExpr& bottom_left, const AffineExpr& bottom_right)
{
    const int n1 = top_left.rows();
    const int n2 = bottom_right.rows();
    if (top_left.cols() != n1 || bottom_right.cols() != n2)
        throw DimensionError("block2x2 diagonal blocks must be square");
    if (bottom_left.rows() != n2 || bottom_left.cols() != n1)
        throw DimensionError("block2x2 off-diagonal block has shape " + std::to_string(bottom_left.rows()) + "x" +
                             std::to_string(bottom_left.cols()) + ", expected " + std::to_string(n2) + "x" +
                             std::to_string(n1));
    auto assemble = [n1, n2](const Matrix* tl, const Matrix* bl, const Matrix* br) {
        Matrix m = Matrix::Zero(n1 + n2, n1 + n2);
        if (tl) m.topLeftCorner(n1, n1) = *tl;
        if (bl) {
            m.bottomLeftCorner(n2, n1) = *bl;
            m.topRightCorner(n1, n2) = bl->transpose();
        }
        if (br) m.bottomRightCorner(n2, n2) = *br;
        return m;
    };
    AffineExpr out(assemble(&top_left.constant(), &bottom_left.constant(), &bottom_right.constant()));
    for (const auto& [var, c] : top_left.terms()) out.add_term(var, assemble(&c, nullptr, nullptr));
    for (const auto& [var, c] : bottom_left.terms()) out.add_term(var, assemble(nullptr, &c, nullptr));
    for (const auto& [var, c] : bottom_right.terms()) out.add_term(var, assemble(nullptr, nullptr, &c));
    return out;
}

AffineExpr vstack(const AffineExpr& top, const AffineExpr& bottom)
{
    if (top.cols() != bottom.cols()) throw DimensionError("vstack: column counts differ");
    const int r1 = top.rows();
    const int r2 = bottom.rows();
    const int c = top.cols();
    Matrix k(r1 + r2, c);
    k << top.constant(), bottom.constant();
    AffineExpr out(k);
    for (const auto& [var, m] : top.terms()) {
        Matrix z = Matrix::Zero(r1 + r2, c);
        z.topRows(r1) = m;
        out.add_term(var, z);
    }
    for (const auto& [var, m] : bottom.terms()) {
        Matrix z = Matrix::Zero(r1 + r2, c);
        z.bottomRows(r2) = m;
        out.add_term(var, z);
    }
    return out;
}

// ---------------------------------------------------------------- scalarization

Matrix SdpProblem::block_value(std::size_t k, const Vector& x) const
{
    const SdpBlock& b = blocks.at(k);
    Matrix m = b.constant;
    for (const auto& [var, c] : b.coeffs) m += x(var) * c;
    return m;
}

double SdpProblem::max_eig_at(const Vector& x) const
{
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < blocks.size(); ++k) worst = std::max(worst, max_eig(block_value(k, x)));
    return worst;
}

double default_margin(const std::vector<LmiConstraint>& constraints)
{
    double scale = 0.0;
    for (const auto& c : constraints) scale = std::max(scale, c.expr.constant().norm());
    return 1e-7 * (scale > 0.0 ? scale : 1.0);
}

SdpProblem scalarize(const std::vector<LmiConstraint>& constraints, const VariableSpace& vars,
                     std::optional<double> margin)
{
    if (constraints.empty()) throw ValidationError("scalarize: empty constraint list");
    SdpProblem p;
    p.num_vars = vars.size();
    for (int i = 0; i < p.num_vars; ++i) p.var_names.push_back(vars.name(i));
    p.nonneg = vars.nonneg();

    double scale = 0.0;
    bool homogeneous = true;
    bool has_positivity = false;
    for (const auto& c : constraints) {
        if (!c.expr.is_symmetric(1e-10))
            throw ValidationError("constraint '" + c.label + "' is not a symmetric square expression");
        SdpBlock b;
        b.label = c.label;
        b.dim = c.expr.rows();
        b.constant = symmetrized(c.expr.constant());
        b.positivity = c.positivity;
        for (const auto& [var, coeff] : c.expr.terms()) {
            if (var < 0 || var >= p.num_vars) throw ValidationError("constraint references unknown variable");
            if (coeff.lpNorm<Eigen::Infinity>() == 0.0) continue;
            b.coeffs.emplace_back(var, symmetrized(coeff));
        }
        scale = std::max(scale, b.constant.norm());
        if (b.constant.lpNorm<Eigen::Infinity>() != 0.0) homogeneous = false;
        has_positivity = has_positivity || c.positivity;
        p.blocks.push_back(std::move(b));
    }
    p.scale = scale > 0.0 ? scale : 1.0;
    p.homogeneous = homogeneous && has_positivity;
    p.margin = margin.value_or(1e-7 * p.scale);
    if (!(p.margin > 0.0)) throw ValidationError("scalarize: margin must be positive");
    return p;
}

ConeProblem phase_one(const SdpProblem& problem, double var_bound)
{
    ConeProblem cp;
    const int n = problem.num_vars;
    const int t = n;
    cp.num_vars = n + 1;
    cp.b = Vector::Zero(n + 1);
    cp.b(t) = 1.0;

    for (const auto& blk : problem.blocks) {
        SdpConeBlock cb;
        cb.c = -blk.constant;
        for (const auto& [var, coeff] : blk.coeffs) cb.a.emplace_back(var, coeff);
        if (problem.homogeneous && blk.positivity)
            cb.c -= Matrix::Identity(blk.dim, blk.dim);
        else
            cb.a.emplace_back(t, Matrix::Identity(blk.dim, blk.dim));
        cp.sdp.push_back(std::move(cb));
    }

    std::set<int> nonneg(problem.nonneg.begin(), problem.nonneg.end());
    for (int i = 0; i < n; ++i) {
        cp.lp.push_back(LpRow{var_bound, {{i, 1.0}}});  // x_i ≤ R
        if (nonneg.count(i))
            cp.lp.push_back(LpRow{0.0, {{i, -1.0}}});  // x_i ≥ 0
        else
            cp.lp.push_back(LpRow{var_bound, {{i, -1.0}}});  // x_i ≥ -R
    }
    return cp;
}

}  // namespace ddlmi::lmi

namespace ddlmi {

void write_sdpa(const ConeProblem& problem, std::ostream& out)
{
    out << "\"phase-I feasibility program\"\n";
    out << problem.num_vars << " = mDIM\n";
    const std::size_t nblocks = problem.sdp.size() + (problem.lp.empty() ? 0 : 1);
    out << nblocks << " = nBLOCK\n";
    for (const auto& blk : problem.sdp) out << blk.c.rows() << ' ';
    if (!problem.lp.empty()) out << -static_cast<long>(problem.lp.size());
    out << " = bLOCKsTRUCT\n";
    for (int i = 0; i < problem.num_vars; ++i) out << (i ? " " : "") << -problem.b(i);
    out << '\n';
    out.precision(17);
    // SDPA: sum F_i y_i - F_0 ⪰ 0 with F_0 = -C, F_i = -A_i.
    auto emit = [&out](int mat, std::size_t blk, const Matrix& m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i <= j; ++i)
                if (m(i, j) != 0.0) out << mat << ' ' << blk << ' ' << i + 1 << ' ' << j + 1 << ' ' << -m(i, j) << '\n';
    };
    for (std::size_t k = 0; k < problem.sdp.size(); ++k) {
        emit(0, k + 1, problem.sdp[k].c);
        for (const auto& [var, coeff] : problem.sdp[k].a) emit(var + 1, k + 1, coeff);
    }
    if (!problem.lp.empty()) {
        const std::size_t blk = problem.sdp.size() + 1;
        for (std::size_t r = 0; r < problem.lp.size(); ++r) {
            const auto& row = problem.lp[r];
            if (row.c != 0.0) out << 0 << ' ' << blk << ' ' << r + 1 << ' ' << r + 1 << ' ' << -row.c << '\n';
            for (const auto& [var, a] : row.a)
                out << var + 1 << ' ' << blk << ' ' << r + 1 << ' ' << r + 1 << ' ' << -a << '\n';
        }
    }
}

}  // namespace ddlmi
