#pragma once

#include "ddlmi/consistency.hpp"
#include "ddlmi/regions.hpp"
#include "ddlmi/solve.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ddlmi::synthesis {

enum class Method { ModelBased, Petersen, RankOne, SProcEnergy, SProcInstant };

/// CLI spelling: model, petersen, rank1, sproc-energy, sproc-instant.
std::string to_string(Method m);
std::optional<Method> parse_method(const std::string& name);
const std::vector<Method>& all_methods();

struct SynthesisResult {
    Method method = Method::ModelBased;
    solve::SolveOutcome outcome;
    Matrix P;
    Matrix Y;
    Matrix K;
    /// S-procedure multipliers, one vector per target region.
    std::optional<std::vector<Vector>> taus;
    std::vector<std::string> warnings;
    double seconds = 0.0;

    bool feasible() const { return outcome.status == solve::Status::Feasible; }
};

/// K = Y P^-1 through a Cholesky solve.
Matrix recover_gain(const Matrix& P, const Matrix& Y);

/// Known (A, B): alpha_i ⊗ P + Tr{beta_i ⊗ (A P + B Y)} < 0 for every region.
SynthesisResult model_based(const Matrix& A, const Matrix& B, const regions::RegionIntersection& target,
                            const solve::SolveOptions& options = {});

/// Robust program over the matrix ellipsoid, one block per region; sufficient.
SynthesisResult synth_petersen(const consistency::CenterForm& cf, const regions::RegionIntersection& target,
                               const solve::SolveOptions& options = {});

/// Rank-one program; necessary and sufficient.  factors[i] belongs to
/// target[i]; a missing factor raises PreconditionError.
SynthesisResult synth_rank_one(const consistency::CenterForm& cf, const regions::RegionIntersection& target,
                               const std::vector<std::optional<regions::RankOneFactor>>& factors,
                               const solve::SolveOptions& options = {});

/// Factors computed from the region data.
SynthesisResult synth_rank_one(const consistency::CenterForm& cf, const regions::RegionIntersection& target,
                               const solve::SolveOptions& options = {});

/// S-procedure with one multiplier per region.
SynthesisResult synth_sproc_energy(const consistency::QuadraticForm& q, const regions::RegionIntersection& target,
                                   const solve::SolveOptions& options = {});

/// S-procedure with one multiplier per sample and region.
SynthesisResult synth_sproc_instant(const consistency::PointwiseForms& pw, const regions::RegionIntersection& target,
                                    const solve::SolveOptions& options = {});

/// Multiplier count above which synth_sproc_instant adds a cost warning.
inline constexpr int kManyMultipliers = 2000;

}  // namespace ddlmi::synthesis
