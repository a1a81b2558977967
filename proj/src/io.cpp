#include "ddlmi/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace ddlmi::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const json& field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const char* key, const std::string& where)
{
    const json& v = field(j, key, where);
    if (!v.is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
    return v.get<double>();
}

std::vector<double> split_numbers(const std::string& text, const std::string& where)
{
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ValidationError(where + ": '" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

bool looks_like_file(const std::string& arg)
{
    std::error_code ec;
    return std::filesystem::is_regular_file(arg, ec);
}

void append(std::vector<regions::LmiRegion>& out, const regions::RegionIntersection& r)
{
    out.insert(out.end(), r.regions().begin(), r.regions().end());
}

void merge(Target& into, const Target& t, std::vector<regions::LmiRegion>& regs)
{
    const std::size_t offset = regs.size();
    append(regs, t.regions);
    if (t.wedge) {
        if (into.wedge) throw ValidationError("at most one wedge preset per target");
        into.wedge = t.wedge;
        into.wedge_cone = offset + *t.wedge_cone;
    }
}

Target from_json_target(const json& j, const std::string& where)
{
    const json* list = &j;
    if (j.is_object() && j.contains("regions")) list = &j.at("regions");
    std::vector<json> items;
    if (list->is_array())
        items.assign(list->begin(), list->end());
    else
        items.push_back(*list);
    if (items.empty()) throw ValidationError(where + ": no regions");
    Target t;
    std::vector<regions::LmiRegion> regs;
    for (const auto& item : items) {
        if (item.is_object() && item.value("kind", "") == "wedge") {
            const auto p = field(item, "params", where).get<std::vector<double>>();
            if (p.size() != 3) throw ValidationError(where + ": wedge expects 3 parameters");
            Target w;
            w.wedge = WedgeParams{p[0], p[1], p[2]};
            w.regions = regions::wedge_regions(p[0], p[1], p[2]);
            w.wedge_cone = 2;
            merge(t, w, regs);
        } else {
            regs.push_back(region_from_json(item));
        }
    }
    t.regions = regions::RegionIntersection(std::move(regs));
    return t;
}

Target preset(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::vector<double> params =
        colon == std::string::npos ? std::vector<double>{} : split_numbers(text.substr(colon + 1), text);
    Target t;
    if (kind == "wedge") {
        if (params.size() != 3) throw ValidationError("wedge expects 3 parameters (ell, rho, theta)");
        t.wedge = WedgeParams{params[0], params[1], params[2]};
        t.regions = regions::wedge_regions(params[0], params[1], params[2]);
        t.wedge_cone = 2;
        return t;
    }
    const auto k = regions::parse_kind(kind);
    if (!k) throw ValidationError("unknown region kind '" + kind + "'");
    t.regions = regions::RegionIntersection{regions::make_region(*k, params)};
    return t;
}

}  // namespace

json matrix_to_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j) + 0.0);
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index rows, Eigen::Index cols)
{
    if (!j.is_array()) throw ValidationError(what + " must be an array of rows");
    if (j.empty()) return Matrix::Zero(rows, cols);
    const auto r = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array()) throw ValidationError(what + " must be an array of rows");
    const auto c = static_cast<Eigen::Index>(j[0].size());
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c)
            throw DimensionError(what + ": rows have different lengths");
        for (Eigen::Index k = 0; k < c; ++k) {
            const json& v = row[static_cast<std::size_t>(k)];
            if (!v.is_number()) throw ValidationError(what + ": entries must be numbers");
            m(i, k) = v.get<double>();
        }
    }
    return m;
}

json complex_list(const CVector& z)
{
    json out = json::array();
    for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back({z(i).real(), z(i).imag()});
    return out;
}

json experiment_to_json(const consistency::ExperimentData& data)
{
    return {{"domain", data.domain == TimeDomain::Continuous ? "ct" : "dt"},
            {"Ts", data.Ts},
            {"n", data.n()},
            {"m", data.m()},
            {"T", data.T()},
            {"U0", matrix_to_json(data.U0)},
            {"X0", matrix_to_json(data.X0)},
            {"X1", matrix_to_json(data.X1)}};
}

consistency::ExperimentData experiment_from_json(const json& j)
{
    const std::string where = "experiment";
    consistency::ExperimentData d;
    const std::string domain = field(j, "domain", where).get<std::string>();
    if (domain == "ct")
        d.domain = TimeDomain::Continuous;
    else if (domain == "dt")
        d.domain = TimeDomain::Discrete;
    else
        throw ValidationError("experiment: domain must be \"ct\" or \"dt\"");
    d.Ts = j.contains("Ts") ? number(j, "Ts", where) : 1.0;
    const auto T = static_cast<Eigen::Index>(number(j, "T", where));
    const auto n = static_cast<Eigen::Index>(number(j, "n", where));
    const auto m = static_cast<Eigen::Index>(number(j, "m", where));
    d.X0 = matrix_from_json(field(j, "X0", where), "X0", n, T);
    d.X1 = matrix_from_json(field(j, "X1", where), "X1", n, T);
    d.U0 = matrix_from_json(field(j, "U0", where), "U0", m, T);
    if (d.n() != n || d.m() != m || d.T() != T)
        throw DimensionError("experiment: matrix shapes disagree with n, m, T");
    d.validate();
    return d;
}

json system_to_json(const sim::LinearSystem& sys)
{
    return {{"label", sys.label},
            {"domain", sys.domain == TimeDomain::Continuous ? "ct" : "dt"},
            {"A", matrix_to_json(sys.A)},
            {"B", matrix_to_json(sys.B)}};
}

sim::LinearSystem system_from_json(const json& j)
{
    sim::LinearSystem s;
    s.A = matrix_from_json(field(j, "A", "system"), "A");
    s.B = matrix_from_json(field(j, "B", "system"), "B", s.A.rows(), 0);
    s.domain = j.value("domain", "ct") == "dt" ? TimeDomain::Discrete : TimeDomain::Continuous;
    s.label = j.value("label", "");
    s.validate();
    return s;
}

sim::LinearSystem load_system(const std::string& arg)
{
    if (arg == "tape" || arg == "ct") return sim::tape_transport();
    if (arg == "laplacian" || arg == "dt") return sim::laplacian_system();
    if (looks_like_file(arg)) return system_from_json(read_json_file(arg));
    throw ValidationError("unknown system '" + arg + "' (tape, laplacian or a JSON file)");
}

json disturbance_to_json(const consistency::DisturbanceModel& model)
{
    return std::visit(
        overloaded{
            [](const consistency::EnergyBound& e) {
                return json{{"type", "energy"}, {"Delta", matrix_to_json(e.Delta)}};
            },
            [](const consistency::EnergyQuadraticBound& e) {
                return json{{"type", "energy_quadratic"},
                            {"R", matrix_to_json(e.R)},
                            {"S", matrix_to_json(e.S)},
                            {"Q", matrix_to_json(e.Q)}};
            },
            [](const consistency::InstantaneousBound& e) { return json{{"type", "instantaneous"}, {"eps", e.eps}}; },
            [](const consistency::InstantaneousQuadraticBound& e) {
                return json{{"type", "instantaneous_quadratic"},
                            {"r", matrix_to_json(e.r)},
                            {"s", matrix_to_json(e.s)},
                            {"q", e.q}};
            },
        },
        model);
}

consistency::DisturbanceModel disturbance_from_json(const json& j)
{
    const std::string where = "disturbance";
    const std::string type = field(j, "type", where).get<std::string>();
    if (type == "energy") return consistency::EnergyBound{matrix_from_json(field(j, "Delta", where), "Delta")};
    if (type == "energy_quadratic")
        return consistency::EnergyQuadraticBound{matrix_from_json(field(j, "R", where), "R"),
                                                 matrix_from_json(field(j, "S", where), "S"),
                                                 matrix_from_json(field(j, "Q", where), "Q")};
    if (type == "instantaneous") return consistency::InstantaneousBound{number(j, "eps", where)};
    if (type == "instantaneous_quadratic")
        return consistency::InstantaneousQuadraticBound{matrix_from_json(field(j, "r", where), "r"),
                                                        matrix_from_json(field(j, "s", where), "s"),
                                                        number(j, "q", where)};
    throw ValidationError("unknown disturbance type '" + type + "'");
}

consistency::DisturbanceModel load_disturbance(const std::string& arg)
{
    if (looks_like_file(arg)) return disturbance_from_json(read_json_file(arg));
    const auto v = split_numbers(arg, "disturbance");
    if (v.size() != 1) throw ValidationError("disturbance: expected a file or a single eps");
    return consistency::InstantaneousBound{v[0]};
}

json region_to_json(const regions::LmiRegion& region)
{
    return {{"s", region.s()},
            {"alpha", matrix_to_json(region.alpha())},
            {"beta", matrix_to_json(region.beta())},
            {"label", region.label()}};
}

regions::LmiRegion region_from_json(const json& j)
{
    const std::string where = "region";
    if (j.is_object() && j.contains("kind")) {
        const std::string name = j.at("kind").get<std::string>();
        const auto kind = regions::parse_kind(name);
        if (!kind) throw ValidationError("unknown region kind '" + name + "'");
        const auto params = j.value("params", std::vector<double>{});
        return regions::make_region(*kind, params, j.value("s", 2));
    }
    Matrix alpha = matrix_from_json(field(j, "alpha", where), "alpha");
    Matrix beta = matrix_from_json(field(j, "beta", where), "beta");
    if (j.contains("s") && number(j, "s", where) != static_cast<double>(alpha.rows()))
        throw DimensionError("region: s disagrees with alpha");
    return regions::LmiRegion(std::move(alpha), std::move(beta), j.value("label", ""));
}

Target parse_target(const std::string& arg)
{
    if (looks_like_file(arg)) {
        Target t = from_json_target(read_json_file(arg), arg);
        t.spec = arg;
        return t;
    }
    Target t;
    std::vector<regions::LmiRegion> regs;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, '+')) merge(t, preset(item), regs);
    if (regs.empty()) throw ValidationError("empty region spec");
    t.regions = regions::RegionIntersection(std::move(regs));
    t.spec = arg;
    return t;
}

Target parse_targets(const std::vector<std::string>& args)
{
    if (args.empty()) throw ValidationError("no target region given");
    Target t;
    std::vector<regions::LmiRegion> regs;
    std::string spec;
    for (const auto& a : args) {
        merge(t, parse_target(a), regs);
        spec += (spec.empty() ? "" : "+") + a;
    }
    t.regions = regions::RegionIntersection(std::move(regs));
    t.spec = spec;
    return t;
}

json region_info(const regions::LmiRegion& region)
{
    json j = region_to_json(region);
    if (region.is_constant()) {
        j["rank_one"] = nullptr;
        j["class"] = "constant";
        return j;
    }
    const auto f = regions::rank_one_factor(region);
    if (!f) {
        j["rank_one"] = nullptr;
        j["class"] = "no rank-1 factor";
        return j;
    }
    j["rank_one"] = {{"eta", std::vector<double>(f->eta.data(), f->eta.data() + f->eta.size())},
                     {"gamma", std::vector<double>(f->gamma.data(), f->gamma.data() + f->gamma.size())}};
    if (region.s() == 2) {
        const auto c = regions::classify_rank_one(region, *f);
        json cls = {{"kind", regions::to_string(c.kind)}, {"x0", c.x0}, {"sigma", c.sigma}};
        cls["lower"] = std::isfinite(c.lower) ? json(c.lower) : json(nullptr);
        cls["upper"] = std::isfinite(c.upper) ? json(c.upper) : json(nullptr);
        if (!std::isnan(c.halfplane_bound)) cls["halfplane_bound"] = c.halfplane_bound;
        j["class"] = cls;
    } else if (region.s() == 1) {
        j["class"] = "halfplane";
    } else {
        j["class"] = "unclassified";
    }
    return j;
}

int exit_code(solve::Status status)
{
    switch (status) {
    case solve::Status::Feasible: return 0;
    case solve::Status::Infeasible: return 2;
    case solve::Status::Marginal: return 3;
    case solve::Status::NumericalFailure: return 5;
    }
    return 5;
}

json result_to_json(const synthesis::SynthesisResult& result, const Matrix& nominal,
                    const regions::RegionIntersection& target)
{
    json j;
    j["method"] = synthesis::to_string(result.method);
    j["status"] = solve::to_string(result.outcome.status);
    j["exit_code"] = exit_code(result.outcome.status);
    const bool gain = result.K.size() > 0 && result.feasible();
    j["K"] = gain ? matrix_to_json(result.K) : json(nullptr);
    j["P"] = result.P.size() ? matrix_to_json(result.P) : json(nullptr);
    j["Y"] = gain ? matrix_to_json(result.Y) : json(nullptr);
    if (gain && nominal.size()) {
        const Eigen::Index n = nominal.rows();
        const Matrix acl = nominal.leftCols(n) + nominal.rightCols(nominal.cols() - n) * result.K;
        const CVector eigs = eigenvalues(acl);
        const Matrix margins = regions::eigenvalue_margins(target, eigs);
        j["eig_closed_loop"] = complex_list(eigs);
        j["margins"] = matrix_to_json(margins);
        j["min_margin"] = margins.size() ? margins.minCoeff() : 0.0;
    } else {
        j["eig_closed_loop"] = nullptr;
        j["margins"] = nullptr;
        j["min_margin"] = nullptr;
    }
    if (result.taus) {
        json t = json::array();
        for (const auto& v : *result.taus) t.push_back(std::vector<double>(v.data(), v.data() + v.size()));
        j["taus"] = t;
    } else {
        j["taus"] = nullptr;
    }
    j["solver"] = {{"iterations", result.outcome.iterations},
                   {"max_residual", result.outcome.max_residual},
                   {"margin", result.outcome.margin},
                   {"box_active", result.outcome.box_active},
                   {"seconds", result.seconds}};
    j["warnings"] = result.warnings;
    return j;
}

json report_to_json(const verify::VerificationReport& report)
{
    return {{"samples", report.samples},
            {"boundary_samples", report.boundary_samples},
            {"stable", report.stable},
            {"fraction_stable", report.fraction_stable},
            {"min_margin", std::isfinite(report.min_margin) ? json(report.min_margin) : json(nullptr)},
            {"worst_certificate",
             std::isfinite(report.worst_certificate) ? json(report.worst_certificate) : json(nullptr)},
            {"certificate_ok", report.certificate_ok()},
            {"sound", report.sound()}};
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

}  // namespace ddlmi::io
