#pragma once

#include "ddlmi/consistency.hpp"
#include "ddlmi/regions.hpp"
#include "ddlmi/synthesis.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace ddlmi::verify {

struct VerificationReport {
    int samples = 0;
    int boundary_samples = 0;
    int stable = 0;
    double fraction_stable = 0.0;
    /// Smallest eigenvalue-to-boundary margin over samples, eigenvalues and regions.
    double min_margin = std::numeric_limits<double>::infinity();
    /// Largest eigenvalue of the characteristic matrix at (A + B K, P) over
    /// samples and regions; negative when P certifies every sample.
    double worst_certificate = -std::numeric_limits<double>::infinity();
    /// Closed-loop spectra of the samples, in sampling order.
    std::vector<CVector> eigenvalues;

    bool certificate_ok() const { return worst_certificate < 0.0; }
    bool sound() const { return samples > 0 && stable == samples && min_margin > 0.0; }
};

/// margins(k, i) for eigenvalue k of acl and region i.
Matrix eig_region_margin(const Matrix& acl, const regions::RegionIntersection& target);

/// V diag(sigma) W' with Haar-random orthogonal V, W; sigma = 1 on the
/// boundary, otherwise uniform in [0, 1].
Matrix sample_upsilon(std::mt19937_64& rng, int rows, int cols, bool boundary);

/// [A B] samples from the matrix ellipsoid; even indices lie on its boundary.
std::vector<Matrix> sample_ellipsoid(const consistency::CenterForm& cf, int count, std::uint64_t seed);

/// [A B] samples from the pointwise set.  The minimax anchor of the pointwise
/// residuals is joined by a segment to each proposal from the enclosing
/// energy ellipsoid; even indices are the last point of the segment inside
/// the set, odd indices are uniform on the inside part.
std::vector<Matrix> sample_pointwise(const consistency::PointwiseForms& pw, int count, std::uint64_t seed);

/// Closed loops of sample_ellipsoid draws.
VerificationReport verify_robust(const synthesis::SynthesisResult& result, const consistency::CenterForm& cf,
                                 const regions::RegionIntersection& target, int n_samples, std::uint64_t seed);

/// Closed loops of sample_pointwise draws.
VerificationReport verify_robust(const synthesis::SynthesisResult& result, const consistency::PointwiseForms& pw,
                                 const regions::RegionIntersection& target, int n_samples, std::uint64_t seed);

/// Point of the pointwise set with the smallest worst normalized residual,
/// as [A B]', and that residual (inside iff < 1).
struct Anchor {
    Matrix Z;
    double worst = std::numeric_limits<double>::infinity();
};
Anchor pointwise_anchor(const consistency::PointwiseForms& pw, int iterations = 400);

/// Rows of the eigenvalue scatter CSV: series,re,im.
struct EigenPoint {
    std::string series;
    Complex z;
};
void write_eigenvalue_csv(const std::vector<EigenPoint>& points, std::ostream& out);

}  // namespace ddlmi::verify
