#include "ddlmi/regions.hpp"

#include "ddlmi/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ddlmi::regions {

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string join_params(const std::vector<double>& p)
{
    std::string out;
    for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + fmt(p[i]);
    return out;
}

void require(bool ok, const std::string& what)
{
    if (!ok) throw ValidationError(what);
}

Matrix m2(double a, double b, double c, double d)
{
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

// ---------------------------------------------------------------- LmiRegion

LmiRegion::LmiRegion(Matrix alpha, Matrix beta, std::string label)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), label_(std::move(label))
{
    require(alpha_.rows() >= 1, "region dimension s must be at least 1");
    require_square(alpha_, "alpha");
    require_square(beta_, "beta");
    if (beta_.rows() != alpha_.rows()) throw DimensionError("alpha and beta must have the same size");
    const double tol = 1e-12 * std::max(1.0, alpha_.norm());
    require((alpha_ - alpha_.transpose()).norm() <= tol, "alpha must be symmetric");
    alpha_ = symmetrized(alpha_);
}

CMatrix LmiRegion::value(Complex z) const
{
    return alpha_.cast<Complex>() + z * beta_.cast<Complex>() + std::conj(z) * beta_.transpose().cast<Complex>();
}

double LmiRegion::margin(Complex z) const
{
    if (s() == 1) return -(alpha_(0, 0) + 2.0 * z.real() * beta_(0, 0));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(value(z), Eigen::EigenvaluesOnly);
    return -es.eigenvalues().maxCoeff();
}

LmiRegion LmiRegion::scaled(double lambda) const
{
    require(lambda > 0.0, "region scaling factor must be positive");
    return {lambda * alpha_, lambda * beta_, label_};
}

// ---------------------------------------------------------------- RegionIntersection

RegionIntersection::RegionIntersection(std::vector<LmiRegion> regions) : regions_(std::move(regions))
{
    require(!regions_.empty(), "region intersection must contain at least one region");
}

RegionIntersection::RegionIntersection(std::initializer_list<LmiRegion> regions)
    : RegionIntersection(std::vector<LmiRegion>(regions))
{
}

double RegionIntersection::margin(Complex z) const
{
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : regions_) m = std::min(m, r.margin(z));
    return m;
}

std::string RegionIntersection::label() const
{
    std::string out;
    for (std::size_t i = 0; i < regions_.size(); ++i)
        out += (i ? " & " : "") + (regions_[i].label().empty() ? "region" : regions_[i].label());
    return out;
}

// ---------------------------------------------------------------- catalog

namespace {

struct KindInfo {
    CatalogKind kind;
    const char* name;
    int params;
};

constexpr KindInfo kKinds[] = {
    {CatalogKind::HalfplaneLeft, "halfplane_left", 1},
    {CatalogKind::HalfplaneRight, "halfplane_right", 1},
    {CatalogKind::Disk, "disk", 2},
    {CatalogKind::VerticalStrip, "vstrip", 2},
    {CatalogKind::HorizontalStrip, "hstrip", 1},
    {CatalogKind::Ellipse, "ellipse", 3},
    {CatalogKind::ParabolaLeft, "parabola_left", 2},
    {CatalogKind::ParabolaRight, "parabola_right", 2},
    {CatalogKind::HyperbolaLeft, "hyperbola_left", 2},
    {CatalogKind::HyperbolaRight, "hyperbola_right", 2},
    {CatalogKind::ConeLeft, "cone_left", 2},
    {CatalogKind::ConeRight, "cone_right", 2},
    {CatalogKind::Hurwitz, "hurwitz", 0},
    {CatalogKind::Schur, "schur", 0},
};

const KindInfo& info(CatalogKind kind)
{
    for (const auto& k : kKinds)
        if (k.kind == kind) return k;
    throw ValidationError("unknown region kind");
}

}  // namespace

std::string kind_name(CatalogKind kind) { return info(kind).name; }

int param_count(CatalogKind kind) { return info(kind).params; }

std::optional<CatalogKind> parse_kind(const std::string& name)
{
    for (const auto& k : kKinds)
        if (name == k.name) return k.kind;
    if (name == "cone") return CatalogKind::ConeLeft;
    if (name == "halfplane") return CatalogKind::HalfplaneLeft;
    if (name == "strip") return CatalogKind::VerticalStrip;
    return std::nullopt;
}

LmiRegion make_region(CatalogKind kind, const std::vector<double>& p, int s)
{
    const KindInfo& k = info(kind);
    if (static_cast<int>(p.size()) != k.params)
        throw ValidationError(std::string(k.name) + " expects " + std::to_string(k.params) + " parameter(s), got " +
                              std::to_string(p.size()));
    for (double v : p) require(std::isfinite(v), std::string(k.name) + ": parameters must be finite");
    const std::string label = std::string(k.name) + (p.empty() ? "" : "(" + join_params(p) + ")");
    const bool halfplane = kind == CatalogKind::HalfplaneLeft || kind == CatalogKind::HalfplaneRight;
    if (halfplane) require(s == 1 || s == 2, "halfplane regions support s = 1 or s = 2");

    switch (kind) {
    case CatalogKind::HalfplaneLeft:
        if (s == 1) return {Matrix::Constant(1, 1, -p[0]), Matrix::Constant(1, 1, 0.5), label};
        return {m2(-p[0], 0, 0, -1), m2(0.5, 0, 0, 0), label};
    case CatalogKind::HalfplaneRight:
        if (s == 1) return {Matrix::Constant(1, 1, p[0]), Matrix::Constant(1, 1, -0.5), label};
        return {m2(p[0], 0, 0, -1), m2(-0.5, 0, 0, 0), label};
    case CatalogKind::Disk:
        require(p[1] > 0.0, "disk: radius r_d must be > 0");
        return {m2(-p[1], p[0], p[0], -p[1]), m2(0, 0, -1, 0), label};
    case CatalogKind::VerticalStrip:
        require(p[0] < p[1], "vstrip: extremes must satisfy l < r");
        return {m2(-p[1], 0, 0, p[0]), m2(0.5, 0, 0, -0.5), label};
    case CatalogKind::HorizontalStrip:
        require(p[0] > 0.0, "hstrip: semiwidth w must be > 0");
        return {m2(-p[0], 0, 0, -p[0]), m2(0, 0.5, -0.5, 0), label};
    case CatalogKind::Ellipse: {
        const double xe = p[0], mu1 = p[1], mu2 = p[2];
        require(mu1 > 0.0, "ellipse: semiaxis mu1 must be > 0");
        require(mu2 > 0.0, "ellipse: semiaxis mu2 must be > 0");
        return {m2(-mu1 * mu1, xe * mu2, xe * mu2, -mu2 * mu2), 0.5 * m2(0, mu1 - mu2, -mu1 - mu2, 0), label};
    }
    case CatalogKind::ParabolaLeft: {
        require(p[1] > 0.0, "parabola_left: curvature c_p must be > 0");
        const double a = std::sqrt(p[1] / 2.0);
        return {m2(-1, 0, 0, -p[0]), 0.5 * m2(0, a, -a, 1), label};
    }
    case CatalogKind::ParabolaRight: {
        require(p[1] > 0.0, "parabola_right: curvature c_p must be > 0");
        const double a = std::sqrt(p[1] / 2.0);
        return {m2(-1, 0, 0, p[0]), 0.5 * m2(0, a, -a, -1), label};
    }
    case CatalogKind::HyperbolaLeft:
    case CatalogKind::HyperbolaRight: {
        const double xh = p[0], ch = p[1];
        require(xh > 0.0, std::string(k.name) + ": x_h must be > 0");
        require(ch > 0.0, std::string(k.name) + ": c_h must be > 0");
        const double sgn = kind == CatalogKind::HyperbolaLeft ? 1.0 : -1.0;
        return {m2(0, ch * xh, ch * xh, 0), 0.5 * m2(sgn * ch, 1, -1, sgn * ch), label};
    }
    case CatalogKind::ConeLeft:
    case CatalogKind::ConeRight: {
        const double xc = p[0], th = p[1];
        require(th > 0.0 && th < std::numbers::pi / 2.0, std::string(k.name) + ": theta must lie in (0, pi/2)");
        const double st = std::sin(th), ct = std::cos(th);
        if (kind == CatalogKind::ConeLeft)
            return {-st * xc * Matrix::Identity(2, 2), 0.5 * m2(st, ct, -ct, st), label};
        return {st * xc * Matrix::Identity(2, 2), 0.5 * m2(-st, ct, -ct, -st), label};
    }
    case CatalogKind::Hurwitz:
        return {Matrix::Zero(1, 1), Matrix::Ones(1, 1), label};
    case CatalogKind::Schur:
        return {-Matrix::Identity(2, 2), m2(0, 0, -1, 0), label};
    }
    throw ValidationError("unknown region kind");
}

// ---------------------------------------------------------------- S-stability

Matrix characteristic_matrix(const LmiRegion& region, const Matrix& a, const Matrix& p)
{
    require_square(a, "A");
    require_square(p, "P");
    if (a.rows() != p.rows()) throw DimensionError("A and P must have the same size");
    const Matrix ap = a * p;
    const Matrix m = kron(region.alpha(), p) + kron(region.beta(), ap) + kron(region.beta().transpose(), ap.transpose());
    return symmetrized(m);
}

Matrix eigenvalue_margins(const RegionIntersection& target, const CVector& eigs)
{
    Matrix m(eigs.size(), static_cast<Eigen::Index>(target.size()));
    for (Eigen::Index k = 0; k < eigs.size(); ++k)
        for (std::size_t i = 0; i < target.size(); ++i)
            m(k, static_cast<Eigen::Index>(i)) = target[i].margin(eigs(k));
    return m;
}

StabilityReport s_stability_check(const RegionIntersection& target, const Matrix& a, StabilityMode mode,
                                  const solve::SolveOptions& options)
{
    require_square(a, "A");
    StabilityReport rep;
    rep.eigenvalues = eigenvalues(a);
    rep.margins = eigenvalue_margins(target, rep.eigenvalues);
    if (mode == StabilityMode::Eigenvalue) {
        rep.stable = rep.margins.size() == 0 || rep.margins.minCoeff() > 0.0;
        return rep;
    }

    const int n = static_cast<int>(a.rows());
    lmi::VariableSpace vars;
    const lmi::SymVar p = vars.add_symmetric("P", n);
    const lmi::AffineExpr pe = vars.expr(p);
    std::vector<lmi::LmiConstraint> cons;
    for (const auto& r : target.regions())
        cons.push_back({lmi::kron_const_var(r.alpha(), pe) + lmi::sym_kron_pair(r.beta(), a * pe), r.label(), false});
    cons.push_back({-pe, "P > 0", true});
    const auto out = solve::solve_feasibility(lmi::scalarize(cons, vars, options.margin), options);
    rep.outcome = out;
    rep.stable = out.status == solve::Status::Feasible;
    if (rep.stable) rep.certificate = lmi::VariableSpace::value(p, out.assignment);
    return rep;
}

// ---------------------------------------------------------------- rank one

std::optional<RankOneFactor> rank_one_factor(const LmiRegion& region)
{
    if (region.is_constant()) return std::nullopt;
    Eigen::JacobiSVD<Matrix> svd(region.beta(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector sv = svd.singularValues();
    if (sv.size() > 1 && sv(1) > 1e-9 * sv(0)) return std::nullopt;
    Vector u = svd.matrixU().col(0);
    Vector v = svd.matrixV().col(0);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v(imax) < 0.0) {
        u = -u;
        v = -v;
    }
    return RankOneFactor{sv(0) * u, v};
}

std::string to_string(RegionClass::Kind kind)
{
    switch (kind) {
    case RegionClass::Kind::Empty: return "empty";
    case RegionClass::Kind::FullPlane: return "full_plane";
    case RegionClass::Kind::VerticalHalfplane: return "vertical_halfplane";
    case RegionClass::Kind::VerticalStrip: return "vertical_strip";
    case RegionClass::Kind::Disk: return "disk";
    case RegionClass::Kind::DiskHalfplaneIntersection: return "disk_halfplane_intersection";
    }
    return "unknown";
}

bool RegionClass::contains(Complex z) const
{
    const double x = z.real();
    const double y = z.imag();
    switch (kind) {
    case Kind::Empty: return false;
    case Kind::FullPlane: return true;
    case Kind::VerticalHalfplane:
    case Kind::VerticalStrip: return x > lower && x < upper;
    case Kind::Disk:
    case Kind::DiskHalfplaneIntersection: return x > lower && x < upper && (x - x0) * (x - x0) + y * y < sigma;
    }
    return false;
}

namespace {

// Intersects the real-part interval with {x : a + b x > 0}.
void cut(double a, double b, double scale, double& lower, double& upper, bool& empty)
{
    if (std::abs(b) <= 1e-14 * scale) {
        if (!(a > 0.0)) empty = true;
        return;
    }
    const double root = -a / b;
    if (b > 0.0)
        lower = std::max(lower, root);
    else
        upper = std::min(upper, root);
}

}  // namespace

RegionClass classify_rank_one(const LmiRegion& region, const RankOneFactor& f)
{
    if (region.s() != 2) throw ValidationError("classify_rank_one requires s = 2, got s = " + std::to_string(region.s()));
    if (f.eta.size() != 2 || f.gamma.size() != 2) throw DimensionError("rank-one factor must have length 2");
    const Matrix& al = region.alpha();
    const double a11 = al(0, 0), a12 = al(0, 1), a22 = al(1, 1);
    const double e1 = f.eta(0), e2 = f.eta(1), g1 = f.gamma(0), g2 = f.gamma(1);
    const double fscale = std::max(f.eta.norm() * f.gamma.norm(), 1e-300);
    const double scale = std::max({al.norm(), fscale, 1e-300});

    const double d = e1 * g2 - e2 * g1;
    const double nlin = a11 * e2 * g2 + a22 * e1 * g1 - a12 * (e1 * g2 + e2 * g1);
    const double det = a11 * a22 - a12 * a12;

    RegionClass c;
    bool empty = false;
    // alpha11 + 2 x eta1 gamma1 < 0
    cut(-a11, -2.0 * e1 * g1, scale, c.lower, c.upper, empty);

    if (std::abs(d) <= 1e-10 * fscale) {
        cut(det, 2.0 * nlin, scale * scale, c.lower, c.upper, empty);
        if (empty || c.lower >= c.upper) {
            c.kind = RegionClass::Kind::Empty;
        } else if (std::isinf(c.lower) && std::isinf(c.upper)) {
            c.kind = RegionClass::Kind::FullPlane;
        } else if (std::isinf(c.lower) || std::isinf(c.upper)) {
            c.kind = RegionClass::Kind::VerticalHalfplane;
            c.halfplane_bound = std::isinf(c.lower) ? c.upper : c.lower;
        } else {
            c.kind = RegionClass::Kind::VerticalStrip;
        }
        return c;
    }

    const double d2 = d * d;
    c.x0 = nlin / d2;
    c.sigma = c.x0 * c.x0 + det / d2;
    if (empty || !(c.sigma > 0.0)) {
        c.kind = RegionClass::Kind::Empty;
        return c;
    }
    const double r = std::sqrt(c.sigma);
    if (c.lower >= c.x0 + r || c.upper <= c.x0 - r) {
        c.kind = RegionClass::Kind::Empty;
    } else if (c.lower <= c.x0 - r && c.upper >= c.x0 + r) {
        c.kind = RegionClass::Kind::Disk;
        c.lower = -std::numeric_limits<double>::infinity();
        c.upper = std::numeric_limits<double>::infinity();
    } else {
        c.kind = RegionClass::Kind::DiskHalfplaneIntersection;
        c.halfplane_bound = std::isinf(c.lower) ? c.upper : c.lower;
    }
    return c;
}

// ---------------------------------------------------------------- wedge

RegionIntersection wedge_regions(double ell, double rho, double theta)
{
    require(ell > 0.0, "wedge: ell must be > 0");
    require(rho > 0.0, "wedge: rho must be > 0");
    require(theta > 0.0 && theta < std::numbers::pi / 2.0, "wedge: theta must lie in (0, pi/2)");
    return {make_region(CatalogKind::HalfplaneLeft, {-ell}, 1), make_region(CatalogKind::Disk, {0.0, rho}),
            make_region(CatalogKind::ConeLeft, {0.0, theta})};
}

double tangent_disk_area(double x_t, double rho, double theta)
{
    const double d = std::abs(x_t);
    const double r = d * std::sin(theta);
    const double pi = std::numbers::pi;
    if (d >= rho + r) return 0.0;
    if (d + r <= rho) return pi * r * r;
    if (d + rho <= r) return pi * rho * rho;
    const double c1 = std::clamp((d * d + rho * rho - r * r) / (2.0 * d * rho), -1.0, 1.0);
    const double c2 = std::clamp((d * d + r * r - rho * rho) / (2.0 * d * r), -1.0, 1.0);
    const double k = std::max(0.0, (-d + rho + r) * (d + rho - r) * (d - rho + r) * (d + rho + r));
    return rho * rho * std::acos(c1) + r * r * std::acos(c2) - 0.5 * std::sqrt(k);
}

WedgeApproximation inner_approx_wedge(double ell, double rho, double theta)
{
    require(ell > 0.0, "inner_approx_wedge: ell must be > 0");
    require(theta > 0.0 && theta < std::numbers::pi / 4.0, "inner_approx_wedge: theta must lie in (0, pi/4)");
    require(rho > ell * (3.0 + 2.0 * std::sqrt(2.0)), "inner_approx_wedge: rho must exceed ell (3 + 2 sqrt 2)");

    const double st = std::sin(theta);
    const double lo = -rho / std::cos(theta);
    const double hi = -rho / (1.0 + st);
    auto area = [&](double x) { return tangent_disk_area(x, rho, theta); };

    constexpr int grid = 1000;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i <= grid; ++i) {
        const double v = area(lo + (hi - lo) * i / grid);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = lo + (hi - lo) * std::max(0, best - 1) / grid;
    double b = lo + (hi - lo) * std::min(grid, best + 1) / grid;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = area(x1), f2 = area(x2);
    while (b - a > 1e-10) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = area(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = area(x1);
        }
    }

    WedgeApproximation w;
    w.x_t = 0.5 * (a + b);
    w.area = area(w.x_t);
    w.right_end = w.x_t * (1.0 - st);
    w.right_end_ok = w.right_end <= -ell;
    w.disks = RegionIntersection{make_region(CatalogKind::Disk, {0.0, rho}),
                                 make_region(CatalogKind::Disk, {w.x_t, std::abs(w.x_t) * st})};
    return w;
}

LmiRegion dt_disk_spec(double center_x, double radius)
{
    return make_region(CatalogKind::Disk, {center_x, radius});
}

// ---------------------------------------------------------------- boundary

std::vector<Complex> boundary_points(const RegionIntersection& target, int count, double box)
{
    require(count > 0, "boundary_points: count must be positive");
    require(box > 0.0, "boundary_points: box must be positive");

    // interior anchor: grid point with the largest margin
    constexpr int g = 200;
    Complex anchor;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= g; ++i) {
        for (int j = 0; j <= g / 2; ++j) {
            const Complex z(-box + 2.0 * box * i / g, 2.0 * box * j / g);
            const double m = target.margin(z);
            if (m > best) {
                best = m;
                anchor = z;
            }
        }
    }
    if (!(best > 0.0)) return {};
    // convex and symmetric about the real axis, so the projection stays inside
    anchor = Complex(anchor.real(), 0.0);
    if (!(target.margin(anchor) > 0.0)) return {};

    std::vector<Complex> out;
    const double reach = 4.0 * box;
    for (int k = 0; k < count; ++k) {
        const double ang = 2.0 * std::numbers::pi * k / count;
        const Complex dir(std::cos(ang), std::sin(ang));
        double lo = 0.0, hi = reach;
        if (target.margin(anchor + hi * dir) > 0.0) continue;
        for (int it = 0; it < 200 && hi - lo > 1e-13 * reach; ++it) {
            const double mid = 0.5 * (lo + hi);
            (target.margin(anchor + mid * dir) > 0.0 ? lo : hi) = mid;
        }
        const Complex z = anchor + 0.5 * (lo + hi) * dir;
        if (std::abs(z.real()) <= box && std::abs(z.imag()) <= box) out.push_back(z);
    }
    return out;
}

}  // namespace ddlmi::regions
