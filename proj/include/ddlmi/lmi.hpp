#pragma once

#include "ddlmi/cone.hpp"
#include "ddlmi/linalg.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ddlmi::lmi {

struct SymVar {
    std::string name;
    int offset = 0;
    int dim = 0;
    int size() const { return dim * (dim + 1) / 2; }
};

struct MatVar {
    std::string name;
    int offset = 0;
    int rows = 0;
    int cols = 0;
    int size() const { return rows * cols; }
};

struct ScalarVar {
    std::string name;
    int offset = 0;
    bool nonneg = false;
};

class AffineExpr;

/// Scalar decision variables grouped into named matrix variables.
/// Symmetric variables use packed lower-triangle coordinates so that the
/// represented matrix is symmetric by construction.
class VariableSpace {
public:
    SymVar add_symmetric(const std::string& name, int dim);
    MatVar add_matrix(const std::string& name, int rows, int cols);
    ScalarVar add_scalar(const std::string& name, bool nonneg = false);

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<int>& nonneg() const { return nonneg_; }
    const std::string& name(int index) const { return names_.at(static_cast<std::size_t>(index)); }

    AffineExpr expr(const SymVar& v) const;
    AffineExpr expr(const MatVar& v) const;
    AffineExpr expr(const ScalarVar& v) const;

    static Matrix value(const SymVar& v, const Vector& x);
    static Matrix value(const MatVar& v, const Vector& x);
    static double value(const ScalarVar& v, const Vector& x) { return x(v.offset); }

    static int packed_index(int i, int j, int dim);

private:
    void claim(const std::string& name);

    std::vector<std::string> names_;
    std::vector<std::string> groups_;
    std::vector<int> nonneg_;
};

/// Matrix expression affine in the scalar decision variables:
///   E(x) = constant + sum_i x_i * coeff_i.
class AffineExpr {
public:
    AffineExpr() = default;
    AffineExpr(int rows, int cols);
    explicit AffineExpr(Matrix constant);

    int rows() const { return static_cast<int>(constant_.rows()); }
    int cols() const { return static_cast<int>(constant_.cols()); }
    const Matrix& constant() const { return constant_; }
    const std::map<int, Matrix>& terms() const { return terms_; }

    void add_term(int var, const Matrix& coeff);
    Matrix evaluate(const Vector& x) const;
    AffineExpr transpose() const;
    bool is_constant() const { return terms_.empty(); }
    bool is_symmetric(double rel_tol = 1e-12) const;

    AffineExpr& operator+=(const AffineExpr& other);
    AffineExpr& operator-=(const AffineExpr& other);
    AffineExpr& operator*=(double s);

    friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
    friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
    friend AffineExpr operator-(AffineExpr a) { return a *= -1.0; }
    friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }
    friend AffineExpr operator*(const Matrix& m, const AffineExpr& e);
    friend AffineExpr operator*(const AffineExpr& e, const Matrix& m);

private:
    Matrix constant_;
    std::map<int, Matrix> terms_;
};

/// m ⊗ e.
AffineExpr kron_const_var(const Matrix& m, const AffineExpr& e);

/// Tr-symmetrization beta ⊗ L + beta' ⊗ L'.
AffineExpr sym_kron_pair(const Matrix& beta, const AffineExpr& l);

/// e + e'.
AffineExpr tr_sym(const AffineExpr& e);

/// [[top_left, bottom_left'], [bottom_left, bottom_right]].
AffineExpr block2x2(const AffineExpr& top_left, const AffineExpr& bottom_left, const AffineExpr& bottom_right);

AffineExpr vstack(const AffineExpr& top, const AffineExpr& bottom);

/// Strict inequality  expr ≺ 0.  A positivity constraint is one of the form
/// -P ≺ 0 that may be replaced by P ⪰ I when the whole program is homogeneous.
struct LmiConstraint {
    AffineExpr expr;
    std::string label;
    bool positivity = false;
};

struct SdpBlock {
    std::string label;
    int dim = 0;
    Matrix constant;
    std::vector<std::pair<int, Matrix>> coeffs;
    bool positivity = false;
};

/// Scalarized strict-LMI feasibility problem: every block must satisfy
/// constant + sum x_i coeff_i ⪯ -margin I; nonneg variables must be ≥ 0.
struct SdpProblem {
    int num_vars = 0;
    std::vector<std::string> var_names;
    std::vector<SdpBlock> blocks;
    std::vector<int> nonneg;
    double margin = 0.0;
    double scale = 1.0;
    /// No constant terms anywhere, so feasible sets are cones.
    bool homogeneous = false;

    double max_eig_at(const Vector& x) const;
    Matrix block_value(std::size_t k, const Vector& x) const;
};

/// Default strictness margin: 1e-7 times the largest Frobenius norm of the
/// constraint constants (1 when all constants vanish).
double default_margin(const std::vector<LmiConstraint>& constraints);

SdpProblem scalarize(const std::vector<LmiConstraint>& constraints, const VariableSpace& vars,
                     std::optional<double> margin = std::nullopt);

/// Phase-I conic program.  Variables are (x, t) with t last; objective max t.
///  - strict blocks:   -(F_0 + sum x_i F_i) - t I ⪰ 0
///  - positivity blocks in homogeneous programs: -(F_0 + sum x_i F_i) - I ⪰ 0
///  - nonneg variables: x_i ⪰ 0
///  - box |x_i| ≤ var_bound.
ConeProblem phase_one(const SdpProblem& problem, double var_bound);

}  // namespace ddlmi::lmi
