#pragma once

#include "ddlmi/consistency.hpp"
#include "ddlmi/regions.hpp"
#include "ddlmi/sim.hpp"
#include "ddlmi/synthesis.hpp"
#include "ddlmi/verify.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddlmi::io {

using nlohmann::json;

/// Row-major nested arrays; a 0 x c matrix is written as [] and loses c.
json matrix_to_json(const Matrix& m);
/// `rows`/`cols` fill in the shape of an empty array.
Matrix matrix_from_json(const json& j, const std::string& what, Eigen::Index rows = 0, Eigen::Index cols = 0);

json complex_list(const CVector& z);

/// {domain: "ct"|"dt", Ts, n, m, T, U0, X0, X1}.
json experiment_to_json(const consistency::ExperimentData& data);
consistency::ExperimentData experiment_from_json(const json& j);

/// {label, domain, A, B}.
json system_to_json(const sim::LinearSystem& sys);
sim::LinearSystem system_from_json(const json& j);
/// "tape" / "ct", "laplacian" / "dt", or a JSON file.
sim::LinearSystem load_system(const std::string& arg);

/// {type: "energy", Delta} | {type: "energy_quadratic", R, S, Q} |
/// {type: "instantaneous", eps} | {type: "instantaneous_quadratic", r, s, q}.
json disturbance_to_json(const consistency::DisturbanceModel& model);
consistency::DisturbanceModel disturbance_from_json(const json& j);
/// A JSON file or a bare number read as an instantaneous bound eps.
consistency::DisturbanceModel load_disturbance(const std::string& arg);

/// Wedge parameters (ell, rho, theta) of a wedge preset.
struct WedgeParams {
    double ell = 0.0;
    double rho = 0.0;
    double theta = 0.0;
};

/// Target requested on the command line.  A wedge preset expands to its
/// three regions and keeps its parameters for the two-disk approximation.
struct Target {
    regions::RegionIntersection regions;
    std::optional<WedgeParams> wedge;
    /// Index of the wedge's cone in `regions`.
    std::optional<std::size_t> wedge_cone;
    std::string spec;
};

/// {s, alpha, beta, label}.
json region_to_json(const regions::LmiRegion& region);
/// {kind, params[, s]} or {alpha, beta[, label]}; {kind: "wedge"} expands to
/// three regions and is rejected here.
regions::LmiRegion region_from_json(const json& j);

/// `kind:p1,p2,...` (parameters in make_region order, `kind` alone for hurwitz and
/// schur), `wedge:ell,rho,theta`, several presets joined by '+', or a JSON
/// file holding one region object, an array of them or {regions: [...]}.
Target parse_target(const std::string& arg);
/// Intersection of every argument.
Target parse_targets(const std::vector<std::string>& args);

/// Region info: data, rank-one factor and class.
json region_info(const regions::LmiRegion& region);

int exit_code(solve::Status status);

/// Synthesis record.  `nominal` is the [A B] used for eig_closed_loop and
/// margins; margins are measured against `target`.
json result_to_json(const synthesis::SynthesisResult& result, const Matrix& nominal,
                    const regions::RegionIntersection& target);

json report_to_json(const verify::VerificationReport& report);

json read_json_file(const std::string& path);
/// Writes the text to `path`, or to stdout when path is empty or "-".
void write_text(const std::string& path, const std::string& text);

}  // namespace ddlmi::io
