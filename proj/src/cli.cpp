#include "ddlmi/cli.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace ddlmi::cli {

using io::json;
using synthesis::Method;

// ---------------------------------------------------------------- benchmarks

Benchmark benchmark(const std::string& name)
{
    Benchmark b;
    b.name = name;
    if (name == "ct") {
        b.system = sim::tape_transport();
        b.T = 200;
        b.Ts = 0.1;
        b.target.spec = "wedge:0.3,2,pi/5.7";
        b.target.wedge_cone = 2;
        b.target.wedge = io::WedgeParams{0.3, 2.0, std::numbers::pi / 5.7};
        b.target.regions = regions::wedge_regions(0.3, 2.0, std::numbers::pi / 5.7);
        b.grid = {2.5e-4, 1e-4, 2.5e-5, 1e-5, 2.5e-6};
        b.default_eps = 2.5e-6;
    } else if (name == "dt") {
        b.system = sim::laplacian_system();
        b.T = 200;
        b.Ts = 1.0;
        b.target.regions = regions::RegionIntersection{regions::dt_disk_spec(0.47, 0.43)};
        b.target.spec = "disk:0.47,0.43";
        b.grid = {1e-3, 5e-4, 2.5e-4, 1e-4, 5e-5, 2.5e-5, 1e-5};
        b.default_eps = 1e-5;
    } else {
        throw ValidationError("unknown benchmark '" + name + "' (ct or dt)");
    }
    return b;
}

consistency::ExperimentData generate(const Benchmark& b, std::uint64_t seed, double eps)
{
    if (b.system.domain == TimeDomain::Continuous)
        return sim::run_experiment_ct(b.system, b.T, b.Ts, seed, 1000 + seed, eps);
    return sim::run_experiment_dt(b.system, b.T, seed, 1000 + seed, eps);
}

// ---------------------------------------------------------------- pipeline

Pipeline::Pipeline(Case c) : case_(std::move(c))
{
    const auto& d = case_.data;
    d.validate();
    consistency::validate_model(case_.model, d.n(), d.T());
    if (case_.system && (case_.system->n() != d.n() || case_.system->m() != d.m()))
        throw DimensionError("system dimensions disagree with the experiment");
    if (consistency::is_energy(case_.model)) {
        q_ = consistency::quadratic_form(d, case_.model);
    } else {
        pw_ = consistency::pointwise_forms(d, case_.model);
        if (const auto* e = std::get_if<consistency::InstantaneousBound>(&case_.model))
            q_ = consistency::quadratic_form(d, consistency::relax_to_energy(*e, d.n(), d.T()));
        else
            q_ = consistency::aggregate(*pw_);
    }
    const auto rank = consistency::check_rank(d);
    if (!rank.full_rank) {
        cf_error_ = "rank condition fails: [X0; U0] does not have full row rank";
    } else {
        try {
            cf_ = consistency::center_form(*q_);
            nominal_ = cf_->center_system();
        } catch (const PreconditionError& e) {
            cf_error_ = e.what();
        } catch (const InconsistentDataError& e) {
            cf_error_ = e.what();
        }
    }
    if (nominal_.size() == 0 && case_.system) {
        nominal_.resize(d.n(), d.n() + d.m());
        nominal_ << case_.system->A, case_.system->B;
    }
}

const consistency::CenterForm& Pipeline::require_center() const
{
    if (!cf_) throw PreconditionError(cf_error_);
    return *cf_;
}

regions::RegionIntersection Pipeline::rank_one_target() const
{
    const auto& target = case_.target;
    std::vector<regions::LmiRegion> out;
    for (std::size_t i = 0; i < target.regions.size(); ++i) {
        const auto& r = target.regions[i];
        if (regions::rank_one_factor(r)) {
            out.push_back(r);
            continue;
        }
        if (case_.inner_approx && target.wedge && target.wedge_cone == i) {
            const auto w = *target.wedge;
            const auto approx = regions::inner_approx_wedge(w.ell, w.rho, w.theta);
            if (!approx.right_end_ok)
                throw PreconditionError("two-disk inner approximation of the wedge leaves the halfplane Re z < -ell");
            out.insert(out.end(), approx.disks.regions().begin(), approx.disks.regions().end());
            continue;
        }
        const std::string name = r.label().empty() ? "region " + std::to_string(i) : r.label();
        std::string msg = "rank-1 factor missing for " + name;
        if (target.wedge && target.wedge_cone == i) msg += "; pass --inner-approx to use the two-disk approximation";
        throw PreconditionError(msg);
    }
    return regions::RegionIntersection(std::move(out));
}

namespace {

// Nominal check of a design: one sample, the system it was designed for.
verify::VerificationReport nominal_report(const synthesis::SynthesisResult& r, const Matrix& a, const Matrix& b,
                                          const regions::RegionIntersection& target)
{
    verify::VerificationReport rep;
    const Matrix acl = a + b * r.K;
    const CVector eigs = eigenvalues(acl);
    const Matrix margins = regions::eigenvalue_margins(target, eigs);
    rep.samples = 1;
    rep.min_margin = margins.minCoeff();
    rep.stable = rep.min_margin > 0.0 ? 1 : 0;
    rep.fraction_stable = rep.stable;
    for (const auto& reg : target.regions())
        rep.worst_certificate = std::max(rep.worst_certificate, max_eig(regions::characteristic_matrix(reg, acl, r.P)));
    rep.eigenvalues.push_back(eigs);
    return rep;
}

}  // namespace

Run Pipeline::run(Method method, int verify_samples, std::uint64_t seed) const
{
    Run out;
    out.method = method;
    out.program_target = case_.target.regions;
    const auto& opts = case_.options;
    Matrix design_a, design_b;
    try {
        switch (method) {
        case Method::ModelBased: {
            if (case_.system) {
                design_a = case_.system->A;
                design_b = case_.system->B;
            } else {
                const Matrix ab = require_center().center_system();
                design_a = ab.leftCols(case_.data.n());
                design_b = ab.rightCols(case_.data.m());
            }
            out.result = synthesis::model_based(design_a, design_b, out.program_target, opts);
            if (!case_.system) out.result->warnings.push_back("plant unknown; designed on the nominal center");
            break;
        }
        case Method::Petersen: out.result = synthesis::synth_petersen(require_center(), out.program_target, opts); break;
        case Method::RankOne:
            out.program_target = rank_one_target();
            out.result = synthesis::synth_rank_one(require_center(), out.program_target, opts);
            break;
        case Method::SProcEnergy:
            if (!cf_) throw PreconditionError(cf_error_);
            out.result = synthesis::synth_sproc_energy(*q_, out.program_target, opts);
            break;
        case Method::SProcInstant:
            if (!pw_) throw PreconditionError("sproc-instant needs an instantaneous disturbance model");
            if (!cf_) throw PreconditionError(cf_error_);
            out.result = synthesis::synth_sproc_instant(*pw_, out.program_target, opts);
            break;
        }
    } catch (const PreconditionError& e) {
        out.result.reset();
        out.code = 4;
        out.error = e.what();
        return out;
    } catch (const InconsistentDataError& e) {
        out.result.reset();
        out.code = 4;
        out.error = e.what();
        return out;
    }
    out.code = io::exit_code(out.result->outcome.status);
    if (verify_samples > 0 && out.result->feasible()) {
        try {
            if (method == Method::ModelBased)
                out.report = nominal_report(*out.result, design_a, design_b, out.program_target);
            else if (method == Method::SProcInstant)
                out.report = verify::verify_robust(*out.result, *pw_, out.program_target, verify_samples, seed);
            else
                out.report = verify::verify_robust(*out.result, *cf_, out.program_target, verify_samples, seed);
        } catch (const InconsistentDataError& e) {
            out.result->warnings.push_back(std::string("verification skipped: ") + e.what());
        }
    }
    return out;
}

json Pipeline::record(const Run& run) const
{
    if (!run.result) {
        return {{"method", synthesis::to_string(run.method)},
                {"status", "PreconditionError"},
                {"exit_code", run.code},
                {"error", run.error}};
    }
    json j = io::result_to_json(*run.result, nominal_, case_.target.regions);
    json t = json::array();
    for (const auto& r : run.program_target.regions()) t.push_back(io::region_to_json(r));
    j["target"] = t;
    j["verification"] = run.report ? io::report_to_json(*run.report) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------- sweep

namespace {

Case sweep_case(const SweepConfig& c, const consistency::ExperimentData& data, double eps)
{
    Case k;
    k.data = data;
    k.model = consistency::InstantaneousBound{eps};
    k.target = c.bench.target;
    k.system = c.bench.system;
    k.inner_approx = true;
    k.options = c.options;
    return k;
}

std::string format_eps(double eps)
{
    std::ostringstream os;
    os << eps;
    return os.str();
}

}  // namespace

SweepResult run_sweep(SweepConfig config)
{
    if (config.eps.empty()) config.eps = config.bench.grid;
    if (config.methods.empty()) config.methods = synthesis::all_methods();
    if (config.seeds < 1) throw ValidationError("--seeds must be >= 1");
    std::sort(config.eps.begin(), config.eps.end(), std::greater<>());
    const std::size_t ne = config.eps.size(), nm = config.methods.size();
    const auto ns = static_cast<std::size_t>(config.seeds);

    SweepResult result;
    result.config = config;
    result.cells.resize(ne * nm * ns);

    std::vector<consistency::ExperimentData> fixed(ns);
    if (config.mode == SweepMode::Fixed)
        for (std::size_t s = 0; s < ns; ++s) fixed[s] = generate(config.bench, config.seed + s, config.eps.back());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t task = next++; task < ne * ns; task = next++) {
            const std::size_t e = task / ns, s = task % ns;
            try {
                const double eps = config.eps[e];
                const auto data =
                    config.mode == SweepMode::Fixed ? fixed[s] : generate(config.bench, config.seed + s, eps);
                const Pipeline p(sweep_case(config, data, eps));
                for (std::size_t m = 0; m < nm; ++m) {
                    const Run run = p.run(config.methods[m], config.verify_samples, config.seed + s);
                    SweepCell& cell = result.cells[(e * nm + m) * ns + s];
                    cell.eps = eps;
                    cell.method = config.methods[m];
                    cell.seed_index = static_cast<int>(s);
                    cell.precondition_error = !run.result;
                    if (run.result) {
                        cell.status = run.result->outcome.status;
                        cell.seconds = run.result->seconds;
                        if (run.feasible()) {
                            cell.closed_loop =
                                eigenvalues(config.bench.system.A + config.bench.system.B * run.result->K);
                            cell.min_margin = regions::eigenvalue_margins(config.bench.target.regions, cell.closed_loop)
                                                  .minCoeff();
                        }
                    }
                    if (run.report) cell.sound = run.report->sound();
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(ne * ns)));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return result;
}

const SweepCell& SweepResult::cell(std::size_t eps_index, std::size_t method_index, int seed_index) const
{
    const std::size_t nm = config.methods.size(), ns = static_cast<std::size_t>(config.seeds);
    return cells.at((eps_index * nm + method_index) * ns + static_cast<std::size_t>(seed_index));
}

double SweepResult::eps_max(Method method, int seed_index) const
{
    const auto it = std::find(config.methods.begin(), config.methods.end(), method);
    if (it == config.methods.end()) throw ValidationError("method not in sweep");
    const auto m = static_cast<std::size_t>(it - config.methods.begin());
    double best = 0.0;
    for (std::size_t e = 0; e < config.eps.size(); ++e)
        if (cell(e, m, seed_index).status == solve::Status::Feasible && !cell(e, m, seed_index).precondition_error)
            best = std::max(best, config.eps[e]);
    return best;
}

std::vector<SweepSummary> SweepResult::summary() const
{
    std::vector<SweepSummary> out;
    for (std::size_t e = 0; e < config.eps.size(); ++e)
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
            SweepSummary s;
            s.eps = config.eps[e];
            s.method = config.methods[m];
            s.seeds = config.seeds;
            for (int k = 0; k < config.seeds; ++k) {
                const auto& c = cell(e, m, k);
                s.feasible += !c.precondition_error && c.status == solve::Status::Feasible;
                s.mean_seconds += c.seconds / config.seeds;
            }
            out.push_back(s);
        }
    return out;
}

void write_sweep_table(const SweepResult& r, std::ostream& out)
{
    const auto summary = r.summary();
    const std::size_t nm = r.config.methods.size();
    out << std::left << std::setw(10) << "eps";
    for (Method m : r.config.methods) out << std::setw(22) << synthesis::to_string(m);
    out << '\n';
    for (std::size_t e = 0; e < r.config.eps.size(); ++e) {
        out << std::setw(10) << format_eps(r.config.eps[e]);
        for (std::size_t m = 0; m < nm; ++m) {
            const auto& s = summary[e * nm + m];
            std::ostringstream cell;
            cell << (s.majority() ? "✓" : "x") << ' ' << s.feasible << '/' << s.seeds << ' ' << std::fixed
                 << std::setprecision(3) << s.mean_seconds << 's';
            // the check mark is one column wide but three bytes long
            out << std::setw(s.majority() ? 24 : 22) << cell.str();
        }
        out << '\n';
    }
}

void write_sweep_csv(const SweepResult& r, std::ostream& out)
{
    out << "eps,method,feasible,seeds,majority,mean_seconds\n";
    for (const auto& s : r.summary())
        out << format_eps(s.eps) << ',' << synthesis::to_string(s.method) << ',' << s.feasible << ',' << s.seeds << ','
            << (s.majority() ? 1 : 0) << ',' << s.mean_seconds << '\n';
}

// ---------------------------------------------------------------- commands

namespace {

struct SynthFlags {
    std::string data;
    std::string disturbance;
    std::vector<std::string> regions;
    std::string method = "all";
    bool inner_approx = false;
    std::string out;
    double margin = 0.0;
    std::uint64_t seed = kDefaultSeed;
    int samples = 200;
};

std::vector<Method> methods_from(const std::string& name)
{
    if (name == "all") return synthesis::all_methods();
    std::vector<Method> out;
    std::stringstream ss(name);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto m = synthesis::parse_method(item);
        if (!m) throw ValidationError("unknown method '" + item + "'");
        out.push_back(*m);
    }
    return out;
}

solve::SolveOptions solve_options(double margin)
{
    solve::SolveOptions o;
    if (margin > 0.0) o.margin = margin;
    return o;
}

int cmd_synth(const SynthFlags& f)
{
    const json data = io::read_json_file(f.data);
    Case c;
    c.data = io::experiment_from_json(data);
    if (data.contains("system")) c.system = io::system_from_json(data.at("system"));
    if (!f.disturbance.empty())
        c.model = io::load_disturbance(f.disturbance);
    else if (data.contains("disturbance"))
        c.model = io::disturbance_from_json(data.at("disturbance"));
    else
        throw ValidationError("--disturbance is required (the experiment file records none)");
    c.target = io::parse_targets(f.regions);
    c.inner_approx = f.inner_approx;
    c.options = solve_options(f.margin);
    const Pipeline p(std::move(c));
    const auto methods = methods_from(f.method);
    json records = json::array();
    int code = 0;
    for (Method m : methods) {
        const Run run = p.run(m, f.samples, f.seed);
        records.push_back(p.record(run));
        if (code == 0) code = run.code;
    }
    const json out = f.method == "all" || methods.size() > 1 ? records : records[0];
    io::write_text(f.out, out.dump(2) + "\n");
    return code;
}

struct SweepFlags {
    std::string system = "ct";
    std::vector<double> eps;
    std::string methods = "all";
    int seeds = 1;
    std::uint64_t seed = kDefaultSeed;
    std::string mode = "regenerate";
    int threads = 0;
    int verify = 0;
    std::vector<std::string> regions;
    std::string out;
    double margin = 0.0;
};

int cmd_sweep(const SweepFlags& f)
{
    SweepConfig c;
    c.bench = benchmark(f.system);
    if (!f.regions.empty()) c.bench.target = io::parse_targets(f.regions);
    c.eps = f.eps;
    c.methods = methods_from(f.methods);
    c.seeds = f.seeds;
    c.seed = f.seed;
    if (f.mode == "regenerate")
        c.mode = SweepMode::Regenerate;
    else if (f.mode == "fixed")
        c.mode = SweepMode::Fixed;
    else
        throw ValidationError("--mode must be regenerate or fixed");
    c.threads = f.threads;
    c.verify_samples = f.verify;
    c.options = solve_options(f.margin);
    const auto r = run_sweep(c);
    write_sweep_table(r, std::cout);
    if (!f.out.empty()) {
        std::ostringstream os;
        write_sweep_csv(r, os);
        io::write_text(f.out, os.str());
    }
    return 0;
}

struct DemoFlags {
    std::string which = "ct";
    std::string out_dir = "demo_out";
    std::optional<double> eps;
    std::uint64_t seed = kDefaultSeed;
    int samples = 200;
    double horizon = 30.0;
};

int cmd_demo(const DemoFlags& f)
{
    const Benchmark b = benchmark(f.which);
    const double eps = f.eps.value_or(b.default_eps);
    namespace fs = std::filesystem;
    fs::create_directories(f.out_dir);
    const auto path = [&](const std::string& name) { return (fs::path(f.out_dir) / name).string(); };

    Case c;
    c.data = generate(b, f.seed, eps);
    c.model = consistency::InstantaneousBound{eps};
    c.target = b.target;
    c.system = b.system;
    c.inner_approx = true;
    json experiment = io::experiment_to_json(c.data);
    experiment["system"] = io::system_to_json(b.system);
    experiment["disturbance"] = io::disturbance_to_json(c.model);
    experiment["seed"] = f.seed;
    io::write_text(path("experiment.json"), experiment.dump(2) + "\n");

    const Pipeline p(c);
    std::vector<verify::EigenPoint> points;
    const CVector open = eigenvalues(b.system.A);
    for (Eigen::Index i = 0; i < open.size(); ++i) points.push_back({"open_loop", open(i)});
    for (const auto& z : regions::boundary_points(b.target.regions, 400, 3.0)) points.push_back({"boundary", z});
    if (b.target.wedge) {
        const auto w = *b.target.wedge;
        for (const auto& z : regions::boundary_points(regions::inner_approx_wedge(w.ell, w.rho, w.theta).disks, 400, 3.0))
            points.push_back({"boundary_inner", z});
    }

    json records = json::array();
    int code = 0;
    const Vector x0 = Vector::Ones(b.system.n());
    for (Method m : synthesis::all_methods()) {
        const Run run = p.run(m, f.samples, f.seed);
        records.push_back(p.record(run));
        if (code == 0) code = run.code;
        std::cerr << synthesis::to_string(m) << ": "
                  << (run.result ? solve::to_string(run.result->outcome.status) : "PreconditionError") << '\n';
        if (!run.feasible()) continue;
        const std::string name = synthesis::to_string(m);
        const CVector cl = eigenvalues(b.system.A + b.system.B * run.result->K);
        for (Eigen::Index i = 0; i < cl.size(); ++i) points.push_back({"closed_loop_" + name, cl(i)});
        if (run.report)
            for (const auto& s : run.report->eigenvalues)
                for (Eigen::Index i = 0; i < s.size(); ++i) points.push_back({"sampled_" + name, s(i)});
        if (m == Method::ModelBased || m == Method::Petersen || m == Method::SProcInstant) {
            const auto traj = sim::closed_loop_response(b.system, run.result->K, x0, f.horizon);
            std::ostringstream os;
            sim::write_trajectory_csv(traj, os);
            io::write_text(path("trajectory_" + name + ".csv"), os.str());
        }
    }
    io::write_text(path("results.json"), records.dump(2) + "\n");
    std::ostringstream os;
    verify::write_eigenvalue_csv(points, os);
    io::write_text(path("eigenvalues.csv"), os.str());
    return code;
}

int cmd_region_info(const std::vector<std::string>& specs, const std::string& path)
{
    const io::Target t = io::parse_targets(specs);
    json regs = json::array();
    for (const auto& r : t.regions.regions()) regs.push_back(io::region_info(r));
    json out = {{"spec", t.spec}, {"regions", regs}};
    if (t.wedge) {
        const auto w = *t.wedge;
        const auto a = regions::inner_approx_wedge(w.ell, w.rho, w.theta);
        json disks = json::array();
        for (const auto& r : a.disks.regions()) disks.push_back(io::region_to_json(r));
        out["inner_approx"] = {
            {"x_t", a.x_t}, {"area", a.area}, {"right_end", a.right_end}, {"right_end_ok", a.right_end_ok}, {"disks", disks}};
    }
    io::write_text(path, out.dump(2) + "\n");
    return 0;
}

int cmd_region_boundary(const std::vector<std::string>& specs, int count, double box, const std::string& path)
{
    const io::Target t = io::parse_targets(specs);
    std::ostringstream os;
    os << "re,im,margin\n";
    os.precision(12);
    for (const auto& z : regions::boundary_points(t.regions, count, box))
        os << z.real() << ',' << z.imag() << ',' << t.regions.margin(z) << '\n';
    io::write_text(path, os.str());
    return 0;
}

struct SimFlags {
    std::string system = "tape";
    int T = 200;
    double Ts = 0.1;
    double eps = 0.0;
    std::uint64_t seed = kDefaultSeed;
    std::string out;
    std::string result;
    std::string method;
    std::vector<double> x0;
    double horizon = 30.0;
    double dt = 0.01;
};

int cmd_simulate_experiment(const SimFlags& f)
{
    const auto sys = io::load_system(f.system);
    const auto data = sys.domain == TimeDomain::Continuous
                          ? sim::run_experiment_ct(sys, f.T, f.Ts, f.seed, 1000 + f.seed, f.eps)
                          : sim::run_experiment_dt(sys, f.T, f.seed, 1000 + f.seed, f.eps);
    json j = io::experiment_to_json(data);
    j["system"] = io::system_to_json(sys);
    j["disturbance"] = io::disturbance_to_json(consistency::InstantaneousBound{f.eps});
    j["seed"] = f.seed;
    io::write_text(f.out, j.dump(2) + "\n");
    return 0;
}

int cmd_simulate_response(const SimFlags& f)
{
    const auto sys = io::load_system(f.system);
    json r = io::read_json_file(f.result);
    if (r.is_array()) {
        const auto it = std::find_if(r.begin(), r.end(), [&](const json& x) {
            return f.method.empty() ? x.value("K", json()).is_array() : x.value("method", "") == f.method;
        });
        if (it == r.end()) throw ValidationError("no matching record in " + f.result);
        r = *it;
    }
    if (!r.contains("K") || !r.at("K").is_array()) throw PreconditionError("record has no gain (status not Feasible)");
    const Matrix k = io::matrix_from_json(r.at("K"), "K");
    Vector x0 = Vector::Ones(sys.n());
    if (!f.x0.empty()) {
        if (static_cast<int>(f.x0.size()) != sys.n()) throw DimensionError("--x0 needs " + std::to_string(sys.n()) + " entries");
        x0 = Eigen::Map<const Vector>(f.x0.data(), sys.n());
    }
    const auto traj = sim::closed_loop_response(sys, k, x0, f.horizon, f.dt);
    std::ostringstream os;
    sim::write_trajectory_csv(traj, os);
    io::write_text(f.out, os.str());
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args)
{
    CLI::App app{"Data-driven state-feedback synthesis with LMI-region eigenvalue placement", "ddlmi"};
    app.require_subcommand(1);

    SynthFlags sf;
    auto* synth = app.add_subcommand("synth", "Synthesize a gain from experiment data");
    synth->add_option("--data", sf.data, "Experiment JSON")->required();
    synth->add_option("--disturbance", sf.disturbance, "Disturbance JSON or an instantaneous bound eps");
    synth->add_option("--region", sf.regions, "Region preset kind:p1,p2,... or JSON file (repeatable)")->required();
    synth->add_option("--method", sf.method, "model|petersen|rank1|sproc-energy|sproc-instant|all (comma list ok)");
    synth->add_flag("--inner-approx", sf.inner_approx, "Replace a wedge's cone by two disks for rank1");
    synth->add_option("--out", sf.out, "Output JSON (default stdout)");
    synth->add_option("--margin", sf.margin, "Strictness margin of the LMIs");
    synth->add_option("--seed", sf.seed, "Verification seed")->capture_default_str();
    synth->add_option("--samples", sf.samples, "Verification samples per method (0 disables)")->capture_default_str();

    SweepFlags wf;
    auto* sweep = app.add_subcommand("sweep", "Feasibility table over a grid of disturbance bounds");
    sweep->add_option("--system", wf.system, "ct or dt benchmark")->capture_default_str();
    sweep->add_option("--eps", wf.eps, "Bounds (default: the benchmark grid)")->delimiter(',');
    sweep->add_option("--methods", wf.methods, "Comma list or all")->capture_default_str();
    sweep->add_option("--seeds", wf.seeds, "Realizations per bound")->capture_default_str();
    sweep->add_option("--seed", wf.seed, "First seed")->capture_default_str();
    sweep->add_option("--mode", wf.mode, "regenerate or fixed")->capture_default_str();
    sweep->add_option("--threads", wf.threads, "Worker threads (0 = hardware)");
    sweep->add_option("--verify", wf.verify, "Verification samples per feasible cell");
    sweep->add_option("--region", wf.regions, "Override the benchmark target");
    sweep->add_option("--out", wf.out, "CSV output");
    sweep->add_option("--margin", wf.margin, "Strictness margin of the LMIs");

    DemoFlags df;
    auto* demo = app.add_subcommand("demo", "Full pipeline on a benchmark");
    demo->add_option("which", df.which, "ct or dt")->required();
    demo->add_option("--out-dir", df.out_dir, "Output directory")->capture_default_str();
    demo->add_option("--eps", df.eps, "Disturbance bound (default: the benchmark's)");
    demo->add_option("--seed", df.seed, "Seed")->capture_default_str();
    demo->add_option("--samples", df.samples, "Verification samples")->capture_default_str();
    demo->add_option("--horizon", df.horizon, "Response horizon (time units or steps)")->capture_default_str();

    std::vector<std::string> info_specs, boundary_specs;
    int count = 400;
    double box = 10.0;
    std::string boundary_out, info_out;
    auto* region = app.add_subcommand("region", "Region inspection");
    region->require_subcommand(1);
    auto* info = region->add_subcommand("info", "Data, rank-1 factor and class as JSON");
    info->add_option("spec", info_specs, "Region presets or JSON files")->required();
    info->add_option("--out", info_out, "JSON output (default stdout)");
    auto* boundary = region->add_subcommand("boundary", "Boundary points as CSV");
    boundary->add_option("spec", boundary_specs, "Region presets or JSON files")->required();
    boundary->add_option("--count", count, "Number of points")->capture_default_str();
    boundary->add_option("--box", box, "Half-width of the plotting box")->capture_default_str();
    boundary->add_option("--out", boundary_out, "CSV output (default stdout)");

    SimFlags mf;
    auto* simulate = app.add_subcommand("simulate", "Experiments and closed-loop responses");
    simulate->require_subcommand(1);
    auto* experiment = simulate->add_subcommand("experiment", "Simulate an experiment and write its JSON");
    experiment->add_option("--system", mf.system, "tape, laplacian or a system JSON")->capture_default_str();
    experiment->add_option("--T", mf.T, "Samples")->capture_default_str();
    experiment->add_option("--Ts", mf.Ts, "Sampling period (continuous time)")->capture_default_str();
    experiment->add_option("--eps", mf.eps, "Instantaneous disturbance bound")->capture_default_str();
    experiment->add_option("--seed", mf.seed, "Seed")->capture_default_str();
    experiment->add_option("--out", mf.out, "Output JSON (default stdout)");
    auto* response = simulate->add_subcommand("response", "Undisturbed closed-loop response as CSV");
    response->add_option("--system", mf.system, "tape, laplacian or a system JSON")->capture_default_str();
    response->add_option("--result", mf.result, "Synthesis record JSON")->required();
    response->add_option("--method", mf.method, "Record to use when the file holds several");
    response->add_option("--x0", mf.x0, "Initial state (default all ones)")->delimiter(',');
    response->add_option("--horizon", mf.horizon, "Time units or steps")->capture_default_str();
    response->add_option("--dt", mf.dt, "Integration step (continuous time)")->capture_default_str();
    response->add_option("--out", mf.out, "CSV output (default stdout)");

    std::vector<char*> argv;
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*synth) return cmd_synth(sf);
        if (*sweep) return cmd_sweep(wf);
        if (*demo) return cmd_demo(df);
        if (*info) return cmd_region_info(info_specs, info_out);
        if (*boundary) return cmd_region_boundary(boundary_specs, count, box, boundary_out);
        if (*experiment) return cmd_simulate_experiment(mf);
        if (*response) return cmd_simulate_response(mf);
    } catch (const PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << '\n';
        return 4;
    } catch (const InconsistentDataError& e) {
        std::cerr << "precondition error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace ddlmi::cli
