#include "ddlmi/verify.hpp"

#include <ostream>

namespace ddlmi::verify {

Matrix eig_region_margin(const Matrix& acl, const regions::RegionIntersection& target)
{
    require_square(acl, "A + B K");
    return regions::eigenvalue_margins(target, eigenvalues(acl));
}

namespace {

Matrix random_orthogonal(std::mt19937_64& rng, int n)
{
    std::normal_distribution<double> g;
    Matrix m(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = g(rng);
    Eigen::HouseholderQR<Matrix> qr(m);
    Matrix q = qr.householderQ();
    // sign fix makes the distribution Haar
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

void require_feasible(const synthesis::SynthesisResult& result)
{
    if (!result.feasible() || result.K.size() == 0)
        throw PreconditionError("verification needs a Feasible synthesis result with a gain");
}

void record(VerificationReport& rep, const synthesis::SynthesisResult& result, const regions::RegionIntersection& target,
            const Matrix& ab, bool boundary)
{
    const Eigen::Index n = ab.rows();
    const Matrix acl = ab.leftCols(n) + ab.rightCols(ab.cols() - n) * result.K;
    const CVector eigs = eigenvalues(acl);
    const Matrix margins = regions::eigenvalue_margins(target, eigs);
    const double worst = margins.size() ? margins.minCoeff() : std::numeric_limits<double>::infinity();
    rep.samples += 1;
    rep.boundary_samples += boundary ? 1 : 0;
    rep.stable += worst > 0.0 ? 1 : 0;
    rep.min_margin = std::min(rep.min_margin, worst);
    for (const auto& r : target.regions())
        rep.worst_certificate = std::max(rep.worst_certificate, max_eig(regions::characteristic_matrix(r, acl, result.P)));
    rep.eigenvalues.push_back(eigs);
}

void finish(VerificationReport& rep)
{
    rep.fraction_stable = rep.samples ? static_cast<double>(rep.stable) / rep.samples : 0.0;
}

// a = g g', b = -g h'; the form equals (Z'g - h)(Z'g - h)' - R with R = h h' - c.
struct Residual {
    Vector g;
    Vector h;
    Matrix metric;  // R^-1
};

Residual residual_of(const consistency::PointwiseForm& f)
{
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(f.a));
    const Eigen::Index last = f.a.rows() - 1;
    const double top = es.eigenvalues()(last);
    if (!(top > 0.0)) throw PreconditionError("pointwise sample with zero regressor");
    if (last > 0 && std::abs(es.eigenvalues()(last - 1)) > 1e-9 * top)
        throw ValidationError("pointwise form is not rank one in its regressor part");
    Residual r;
    r.g = std::sqrt(top) * es.eigenvectors().col(last);
    r.h = -f.b.transpose() * r.g / r.g.squaredNorm();
    const Matrix big_r = symmetrized(r.h * r.h.transpose() - f.c);
    Eigen::LLT<Matrix> llt(big_r);
    if (llt.info() != Eigen::Success) throw InconsistentDataError("pointwise sample has an empty or degenerate set");
    r.metric = llt.solve(Matrix::Identity(big_r.rows(), big_r.cols()));
    return r;
}

double normalized_residual(const Residual& r, const Matrix& z)
{
    const Vector e = z.transpose() * r.g - r.h;
    return e.dot(r.metric * e);
}

double worst_residual(const std::vector<Residual>& rs, const Matrix& z)
{
    double w = 0.0;
    for (const auto& r : rs) w = std::max(w, normalized_residual(r, z));
    return w;
}

}  // namespace

Matrix sample_upsilon(std::mt19937_64& rng, int rows, int cols, bool boundary)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Matrix v = random_orthogonal(rng, rows);
    const Matrix w = random_orthogonal(rng, cols);
    Matrix s = Matrix::Zero(rows, cols);
    for (int i = 0; i < std::min(rows, cols); ++i) s(i, i) = boundary ? 1.0 : u(rng);
    return v * s * w.transpose();
}

std::vector<Matrix> sample_ellipsoid(const consistency::CenterForm& cf, int count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Matrix> out;
    for (int k = 0; k < count; ++k)
        out.push_back(consistency::sample_consistent(cf, sample_upsilon(rng, cf.nm(), cf.n(), k % 2 == 0)));
    return out;
}

VerificationReport verify_robust(const synthesis::SynthesisResult& result, const consistency::CenterForm& cf,
                                 const regions::RegionIntersection& target, int n_samples, std::uint64_t seed)
{
    require_feasible(result);
    VerificationReport rep;
    const auto samples = sample_ellipsoid(cf, n_samples, seed);
    for (std::size_t k = 0; k < samples.size(); ++k) record(rep, result, target, samples[k], k % 2 == 0);
    finish(rep);
    return rep;
}

Anchor pointwise_anchor(const consistency::PointwiseForms& pw, int iterations)
{
    if (pw.empty()) throw ValidationError("no data points");
    std::vector<Residual> rs;
    rs.reserve(pw.size());
    for (const auto& f : pw) rs.push_back(residual_of(f));
    const int n = static_cast<int>(pw[0].c.rows());
    const int nm = static_cast<int>(pw[0].a.rows());
    const int dim = n * nm;

    // Lawson iteration for the minimax weighted least-squares fit
    Vector lambda = Vector::Constant(static_cast<Eigen::Index>(rs.size()), 1.0 / static_cast<double>(rs.size()));
    Anchor best;
    for (int it = 0; it < iterations; ++it) {
        Matrix h = Matrix::Zero(dim, dim);
        Vector rhs = Vector::Zero(dim);
        for (std::size_t i = 0; i < rs.size(); ++i) {
            const double l = lambda(static_cast<Eigen::Index>(i));
            if (l == 0.0) continue;
            h += l * kron(rs[i].g * rs[i].g.transpose(), rs[i].metric);
            rhs += l * kron(rs[i].g, rs[i].metric * rs[i].h);
        }
        const Vector v = h.ldlt().solve(rhs);
        // v = vec(Z'), Z' is n x (n+m)
        const Matrix z = Eigen::Map<const Matrix>(v.data(), n, nm).transpose();
        Vector phi(static_cast<Eigen::Index>(rs.size()));
        for (std::size_t i = 0; i < rs.size(); ++i) phi(static_cast<Eigen::Index>(i)) = normalized_residual(rs[i], z);
        const double worst = phi.maxCoeff();
        if (worst < best.worst) best = {z, worst};
        lambda = lambda.cwiseProduct(phi.cwiseSqrt());
        const double sum = lambda.sum();
        if (!(sum > 0.0)) break;
        lambda /= sum;
    }
    return best;
}

std::vector<Matrix> sample_pointwise(const consistency::PointwiseForms& pw, int count, std::uint64_t seed)
{
    const Anchor anchor = pointwise_anchor(pw);
    if (!(anchor.worst < 1.0))
        throw InconsistentDataError("no point strictly inside the pointwise set was found (worst residual " +
                                    std::to_string(anchor.worst) + ")");
    std::vector<Residual> rs;
    for (const auto& f : pw) rs.push_back(residual_of(f));
    const auto cf = consistency::center_form(consistency::aggregate(pw));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Matrix> out;
    for (int k = 0; k < count; ++k) {
        const Matrix proposal = consistency::sample_consistent(cf, sample_upsilon(rng, cf.nm(), cf.n(), true));
        const Matrix dir = proposal.transpose() - anchor.Z;
        double lo = 0.0, hi = 1.0;
        if (worst_residual(rs, anchor.Z + dir) <= 1.0) {
            lo = 1.0;
        } else {
            for (int b = 0; b < 60; ++b) {
                const double mid = 0.5 * (lo + hi);
                (worst_residual(rs, anchor.Z + mid * dir) <= 1.0 ? lo : hi) = mid;
            }
        }
        const double step = k % 2 == 0 ? lo : lo * u(rng);
        out.push_back((anchor.Z + step * dir).transpose());
    }
    return out;
}

VerificationReport verify_robust(const synthesis::SynthesisResult& result, const consistency::PointwiseForms& pw,
                                 const regions::RegionIntersection& target, int n_samples, std::uint64_t seed)
{
    require_feasible(result);
    VerificationReport rep;
    const auto samples = sample_pointwise(pw, n_samples, seed);
    for (std::size_t k = 0; k < samples.size(); ++k) record(rep, result, target, samples[k], k % 2 == 0);
    finish(rep);
    return rep;
}

void write_eigenvalue_csv(const std::vector<EigenPoint>& points, std::ostream& out)
{
    out << "series,re,im\n";
    out.precision(12);
    for (const auto& p : points) out << p.series << ',' << p.z.real() << ',' << p.z.imag() << '\n';
}

}  // namespace ddlmi::verify
