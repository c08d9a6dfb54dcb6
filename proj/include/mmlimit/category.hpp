#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mmlimit/space.hpp"

namespace mmlimit {

/// Finite prefix of a direct or inverse system. For a direct system bonds[i]
/// maps spaces[i] -> spaces[i+1]; for an inverse system bonds[i] maps
/// spaces[i+1] -> spaces[i]. Composites are generated on demand.
struct SystemOfSpaces {
    enum class Kind { Direct, Inverse };
    Kind kind = Kind::Direct;
    std::vector<PointedSpace> spaces;
    std::vector<PointMap> bonds;

    std::size_t stages() const { return spaces.size(); }
};

/// Composite bond between stages i <= j (identity when i == j): stage i to
/// stage j for direct systems, stage j to stage i for inverse ones.
PointMap composed_bond(const SystemOfSpaces& sys, std::size_t i, std::size_t j);

/// Morphism check: basepoint preserved, 1-Lipschitz on the support (exact
/// comparison), pushforward dominated atomwise with absolute slack 1e-12.
/// Requires the source basepoint to carry mass (throws "not an object of the
/// category" otherwise).
Verdict verify_morphism(const PointMap& f, const PointedSpace& X, const PointedSpace& Y);

/// Checks shapes, that every stage is an object (basepoint in support), and
/// that every bond and every generated composite passes verify_morphism.
Verdict verify_system(const SystemOfSpaces& sys);

struct DirectLimitReport {
    std::vector<double> radii;
    std::vector<std::vector<double>> mass_columns;  // [radius][stage]
    bool mass_nondecreasing = true;
    /// min over support pairs of d_{N-2}(x,y) - d_{N-1}(bond x, bond y);
    /// nonnegative for a valid system.
    double min_pair_decrement = 0.0;
    std::string existence;  // "pass (prefix evidence)" | "fail (prefix evidence)" | "inconclusive"
};

struct DirectLimitResult {
    PointedSpace limit;
    std::vector<PointMap> into_limit;  // one per stage, into the emitted limit
    DirectLimitReport report;
};

/// Stage-N shadow of the direct limit: support atoms of stage N-1 (reached by
/// all forward orbits), deduplicated at distance <= tol, with stage-(N-1)
/// distances and class-summed weights. Existence verdicts are prefix
/// evidence; only unbounded growth is flagged as failure.
DirectLimitResult direct_limit_stage(const SystemOfSpaces& sys, std::size_t N, double tol);

using Thread = std::vector<std::size_t>;  // one index per stage, bond-compatible

/// All bond-compatible support threads up to stage N; each stage-(N-1)
/// support atom determines its whole thread by applying the bonds downward.
/// Threads whose lower coordinates fall out of the stage supports are
/// skipped (counted in *skipped when given).
std::vector<Thread> threads(const SystemOfSpaces& sys, std::size_t N, std::size_t* skipped = nullptr);

struct InverseLimitReport {
    std::vector<double> radii;
    std::vector<std::vector<double>> basepoint_mass_columns;  // [radius][stage]
    bool mass_nonincreasing = true;
    bool sup_is_last_stage = true;  // thread distance monotonicity spot-check
    std::size_t checked_pairs = 0;
    std::size_t skipped_threads = 0;
    std::string verdict;  // "pass (prefix evidence)" | "fail (certified at prefix)" | "inconclusive"
    std::string reason;
};

struct InverseLimitResult {
    PointedSpace limit;
    std::vector<PointMap> projections;  // limit -> stage i
    InverseLimitReport report;
};

/// Stage-N shadow of the inverse limit: carrier = threads, thread distance =
/// stage-(N-1) distance (the sup over stages, by monotonicity), thread weight
/// = stage-(N-1) atom weight (the conservative lower envelope of the
/// non-increasing stage masses; the report carries the whole column). The
/// existence verdict certifies failure when some basepoint mass column is
/// monotonically non-increasing and ends at or below tol.
InverseLimitResult inverse_limit_stage(const SystemOfSpaces& sys, std::size_t N, double tol,
                                       const std::vector<double>& r_grid);

}  // namespace mmlimit
