#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace ddlmi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

enum class TimeDomain { Continuous, Discrete };

/// Base for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter or input violates a documented constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A mathematical precondition of an operation does not hold (e.g. rank
/// conditions on experiment data, missing rank-one structure).
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Data cannot have been produced by the assumed disturbance model.
class InconsistentDataError : public Error {
public:
    using Error::Error;
};

inline Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

inline double min_eig(const Matrix& sym)
{
    if (sym.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

inline double max_eig(const Matrix& sym)
{
    if (sym.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(es.eigenvalues().size() - 1);
}

inline double spectral_norm(const Matrix& m)
{
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

/// Symmetric PSD square root with negative eigenvalues clipped to zero.
inline Matrix psd_sqrt(const Matrix& sym)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

/// Inverse square root of a symmetric positive definite matrix.
inline Matrix spd_inv_sqrt(const Matrix& sym)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(sym));
    Vector d = es.eigenvalues().cwiseInverse().cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline CVector eigenvalues(const Matrix& a)
{
    if (a.size() == 0) return {};
    Eigen::EigenSolver<Matrix> es(a, false);
    return es.eigenvalues();
}

inline void require_square(const Matrix& m, const char* what)
{
    if (m.rows() != m.cols())
        throw DimensionError(std::string(what) + " must be square, got " + std::to_string(m.rows()) + "x" +
                             std::to_string(m.cols()));
}

}  // namespace ddlmi
