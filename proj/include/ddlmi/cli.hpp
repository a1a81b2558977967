#pragma once

#include "ddlmi/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ddlmi::cli {

inline constexpr std::uint64_t kDefaultSeed = 1;

/// Benchmark setup used by sweep and demo.
struct Benchmark {
    std::string name;
    sim::LinearSystem system;
    int T = 200;
    double Ts = 0.1;
    io::Target target;
    std::vector<double> grid;
    double default_eps = 0.0;
};

/// "ct": tape transport, wedge(0.3, 2, pi/5.7).  "dt": Laplacian system,
/// disk(0.47, 0.43).
Benchmark benchmark(const std::string& name);

/// Experiment with input seed `seed` and disturbance seed 1000 + `seed`.
consistency::ExperimentData generate(const Benchmark& b, std::uint64_t seed, double eps);

struct Case {
    consistency::ExperimentData data;
    consistency::DisturbanceModel model;
    io::Target target;
    /// True plant, when known; model-based design falls back to the nominal
    /// center otherwise.
    std::optional<sim::LinearSystem> system;
    bool inner_approx = false;
    solve::SolveOptions options;
};

struct Run {
    synthesis::Method method = synthesis::Method::ModelBased;
    std::optional<synthesis::SynthesisResult> result;
    /// Exit code of this record: status code, or 4 for a precondition error.
    int code = 0;
    std::string error;
    regions::RegionIntersection program_target;
    std::optional<verify::VerificationReport> report;

    bool feasible() const { return result && result->feasible(); }
};

/// Forms built once per case and shared by every method.
class Pipeline {
public:
    explicit Pipeline(Case c);

    /// verify_samples = 0 skips verification.
    Run run(synthesis::Method method, int verify_samples = 0, std::uint64_t seed = kDefaultSeed) const;
    io::json record(const Run& run) const;

    const Case& problem() const { return case_; }
    /// [A B] at the center of the consistency ellipsoid; empty if unavailable.
    const Matrix& nominal() const { return nominal_; }
    const std::optional<consistency::CenterForm>& center() const { return cf_; }
    const std::optional<consistency::PointwiseForms>& pointwise() const { return pw_; }

private:
    regions::RegionIntersection rank_one_target() const;
    const consistency::CenterForm& require_center() const;

    Case case_;
    std::optional<consistency::QuadraticForm> q_;
    std::optional<consistency::CenterForm> cf_;
    std::optional<consistency::PointwiseForms> pw_;
    std::string cf_error_;
    Matrix nominal_;
};

enum class SweepMode { Regenerate, Fixed };

struct SweepConfig {
    Benchmark bench;
    std::vector<double> eps;
    std::vector<synthesis::Method> methods;
    int seeds = 1;
    std::uint64_t seed = kDefaultSeed;
    /// Regenerate: fresh data per eps.  Fixed: one realization per seed at the
    /// smallest eps, reused with every bound.
    SweepMode mode = SweepMode::Regenerate;
    int threads = 0;
    int verify_samples = 0;
    solve::SolveOptions options;
};

struct SweepCell {
    double eps = 0.0;
    synthesis::Method method = synthesis::Method::ModelBased;
    int seed_index = 0;
    solve::Status status = solve::Status::NumericalFailure;
    bool precondition_error = false;
    double seconds = 0.0;
    std::optional<bool> sound;
    double min_margin = 0.0;
    /// Closed loop on the true plant, when feasible.
    CVector closed_loop;
};

struct SweepSummary {
    double eps = 0.0;
    synthesis::Method method = synthesis::Method::ModelBased;
    int feasible = 0;
    int seeds = 0;
    double mean_seconds = 0.0;
    bool majority() const { return 2 * feasible > seeds; }
};

struct SweepResult {
    SweepConfig config;
    /// Ordered by eps (descending), method, seed.
    std::vector<SweepCell> cells;

    std::vector<SweepSummary> summary() const;
    const SweepCell& cell(std::size_t eps_index, std::size_t method_index, int seed_index) const;
    /// Largest feasible eps of the grid for one seed and method; 0 if none.
    double eps_max(synthesis::Method method, int seed_index) const;
};

SweepResult run_sweep(SweepConfig config);

/// Check / cross table with feasible counts and mean solve times.
void write_sweep_table(const SweepResult& r, std::ostream& out);
/// eps,method,feasible,seeds,majority,mean_seconds.
void write_sweep_csv(const SweepResult& r, std::ostream& out);

/// Entry point; args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace ddlmi::cli
