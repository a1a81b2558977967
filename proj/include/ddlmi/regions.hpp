#pragma once

#include "ddlmi/linalg.hpp"
#include "ddlmi/solve.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ddlmi::regions {

/// Subset {z : alpha + z beta + conj(z) beta' < 0} of the complex plane.
class LmiRegion {
public:
    LmiRegion(Matrix alpha, Matrix beta, std::string label = {});

    int s() const { return static_cast<int>(alpha_.rows()); }
    const Matrix& alpha() const { return alpha_; }
    const Matrix& beta() const { return beta_; }
    const std::string& label() const { return label_; }

    /// alpha + z beta + conj(z) beta'.
    CMatrix value(Complex z) const;
    /// Negated largest eigenvalue of value(z); positive iff z is strictly inside.
    double margin(Complex z) const;
    bool contains(Complex z, double tol = 0.0) const { return margin(z) > tol; }

    /// beta = 0: the set is either empty or the whole plane.
    bool is_constant() const { return beta_.lpNorm<Eigen::Infinity>() == 0.0; }

    /// Same set with data (lambda alpha, lambda beta), lambda > 0.
    LmiRegion scaled(double lambda) const;

private:
    Matrix alpha_;
    Matrix beta_;
    std::string label_;
};

class RegionIntersection {
public:
    RegionIntersection() = default;
    explicit RegionIntersection(std::vector<LmiRegion> regions);
    RegionIntersection(std::initializer_list<LmiRegion> regions);

    const std::vector<LmiRegion>& regions() const { return regions_; }
    std::size_t size() const { return regions_.size(); }
    const LmiRegion& operator[](std::size_t i) const { return regions_.at(i); }

    double margin(Complex z) const;
    bool contains(Complex z, double tol = 0.0) const { return margin(z) > tol; }
    std::string label() const;

private:
    std::vector<LmiRegion> regions_;
};

enum class CatalogKind {
    HalfplaneLeft,
    HalfplaneRight,
    Disk,
    VerticalStrip,
    HorizontalStrip,
    Ellipse,
    ParabolaLeft,
    ParabolaRight,
    HyperbolaLeft,
    HyperbolaRight,
    ConeLeft,
    ConeRight,
    Hurwitz,
    Schur,
};

std::string kind_name(CatalogKind kind);
std::optional<CatalogKind> parse_kind(const std::string& name);
/// Number of parameters the kind expects.
int param_count(CatalogKind kind);

/// Catalog constructor.  Parameter order:
///   halfplane_left (l), halfplane_right (r), disk (x_d, r_d), vstrip (l, r),
///   hstrip (w), ellipse (x_e, mu1, mu2), parabola_left/right (x_p, c_p),
///   hyperbola_left/right (x_h, c_h), cone_left/right (x_c, theta),
///   hurwitz (), schur ().
/// Halfplanes accept s = 1 or s = 2; every other kind ignores s.
LmiRegion make_region(CatalogKind kind, const std::vector<double>& params, int s = 2);

/// alpha ⊗ P + beta ⊗ (A P) + beta' ⊗ (P A').
Matrix characteristic_matrix(const LmiRegion& region, const Matrix& a, const Matrix& p);

enum class StabilityMode { Eigenvalue, Certificate };

struct StabilityReport {
    bool stable = false;
    CVector eigenvalues;
    /// margins(k, i): margin of eigenvalue k in region i.
    Matrix margins;
    /// Certificate mode only.
    std::optional<Matrix> certificate;
    std::optional<solve::SolveOutcome> outcome;
};

/// Certificate mode reports solver failures through outcome->status; stable is
/// true only for a Feasible verdict.
StabilityReport s_stability_check(const RegionIntersection& target, const Matrix& a, StabilityMode mode,
                                  const solve::SolveOptions& options = {});

/// margins(k, i) as above.
Matrix eigenvalue_margins(const RegionIntersection& target, const CVector& eigs);

struct RankOneFactor {
    Vector eta;
    Vector gamma;
};

/// beta = eta gamma' when beta has numerical rank one.
std::optional<RankOneFactor> rank_one_factor(const LmiRegion& region);

struct RegionClass {
    enum class Kind { Empty, FullPlane, VerticalHalfplane, VerticalStrip, Disk, DiskHalfplaneIntersection };
    Kind kind = Kind::Empty;
    double x0 = 0.0;
    double sigma = 0.0;
    /// Real-part interval (lower, upper); infinite ends are unbounded.
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    /// Finite end of a halfplane; NaN otherwise.
    double halfplane_bound = std::numeric_limits<double>::quiet_NaN();

    bool contains(Complex z) const;
};

std::string to_string(RegionClass::Kind kind);

/// Point set of a two-dimensional rank-one region.
RegionClass classify_rank_one(const LmiRegion& region, const RankOneFactor& factor);

/// {Re z < -ell} ∩ {|z| < rho} ∩ cone of semiaperture theta at the origin.
RegionIntersection wedge_regions(double ell, double rho, double theta);

/// Area of {|z| < rho} ∩ {|z - x_t| < |x_t| sin theta}.
double tangent_disk_area(double x_t, double rho, double theta);

struct WedgeApproximation {
    RegionIntersection disks;
    double x_t = 0.0;
    double area = 0.0;
    /// x_t (1 - sin theta); must not exceed -ell.
    double right_end = 0.0;
    bool right_end_ok = false;
};

/// Two-disk inner approximation of the wedge maximizing the intersection area.
WedgeApproximation inner_approx_wedge(double ell, double rho, double theta);

/// Disk used as a discrete-time performance specification.
LmiRegion dt_disk_spec(double center_x, double radius);

/// Points on the boundary of the intersection within the box [-box, box]^2.
std::vector<Complex> boundary_points(const RegionIntersection& target, int count, double box = 10.0);

}  // namespace ddlmi::regions
