#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mmlimit/space.hpp"

namespace mmlimit {

/// A map psi together with the good set X-tilde and the parameters (R, eps)
/// of a weak approximation. `good` is a subset of the open R-ball around the
/// source basepoint and contains it; 0 < eps < R.
struct WeakApprox {
    PointMap map;
    IndexSet good;
    double R = 0.0;
    double eps = 0.0;
};

/// max over pairs of `subset` of |d_X(x,y) - d_Y(f x, f y)|; 0 for singletons.
double distortion(const PointedSpace& X, const PointedSpace& Y, const PointMap& f,
                  const IndexSet& subset);

/// Checks that f is an (R,eps)-approximation: basepoint preserved, distortion
/// on the open R-ball at most eps, and every point of B(p_Y, R-eps) within
/// open distance eps of the image of B(p_X, R). Ball comparisons exact.
Verdict verify_approximation(const PointedSpace& X, const PointedSpace& Y, const PointMap& f,
                             double R, double eps);

/// Constructs the quasi-inverse phi of a verified (R,eps)-approximation with
/// 4 eps < R. For y in B(p_Y, R-eps)\{p_Y}, phi(y) is the first source point
/// of B(p_X, R) (in `order`, default input order) whose image lies within
/// eps of y; the basepoint maps to the basepoint; everything else goes to the
/// first point outside B(p_X, R-eps), or p_X when that set is empty.
///
/// Postconditions asserted before returning: phi verifies at (R-eps, 3eps),
/// d_X(x, phi(psi x)) < 3 eps on B(p_X, R-4eps) and d_Y(y, psi(phi y)) < 3 eps
/// on B(p_Y, R-eps).
PointMap quasi_inverse(const PointedSpace& X, const PointedSpace& Y, const PointMap& f, double R,
                       double eps, const std::vector<std::size_t>& order = {});

/// For every y in B(p_Y, r'): B(y, r-3eps) must lie in the open 3eps
/// neighborhood of psi(B(phi(y), r)), and the full psi-preimage of
/// B(y, r-3eps) must lie in B(phi(y), r+4eps). Requires r + r' < R - 3eps and
/// r > 3eps.
Verdict verify_ball_inclusions(const PointedSpace& X, const PointedSpace& Y, const PointMap& psi,
                               const PointMap& phi, double R, double r, double rp, double eps);

/// Weak approximation check: invariants of WeakApprox, basepoint condition,
/// two-sided distortion bound on the good set, and the two mass residuals
/// m_X(B(p_X,R) \ good) <= eps and m_Y(B(p_Y,R-eps) \ psi(good)^eps) <= eps.
Verdict verify_weak_approximation(const PointedSpace& X, const PointedSpace& Y, const WeakApprox& w);

/// Rough inverse of a verified weak approximation with 4 eps < R. Good set of
/// the result is psi(good)^eps intersected with B(p_Y, R-eps); first-index
/// selection scans `order` restricted to the good set; points outside map to
/// the first point outside B(p_X, R) (p_X when none). Asserted to verify at
/// (R-eps, 3eps) with the displacement bounds of the construction.
WeakApprox rough_inverse_weak(const PointedSpace& X, const PointedSpace& Y, const WeakApprox& w,
                              const std::vector<std::size_t>& order = {});

struct SearchTraceEntry {
    double grid_eps = 0.0;
    std::size_t swap_a = 0, swap_b = 0;
    double score_before = 0.0, score_after = 0.0;
};

struct SearchOptions {
    double R = 0.0;
    std::uint64_t seed = 0;
    int budget = 10000;
    double grid_start = 0.0;  // 0 -> max(diam X, diam Y)/2
    double grid_floor = 1e-6;
    double grid_ratio = 0.9;
    bool keep_trace = false;
};

struct SearchResult {
    WeakApprox witness;
    double achieved_eps = std::numeric_limits<double>::infinity();
    bool passed = false;
    /// max of the three violation magnitudes (distortion excess and the two
    /// mass-residual excesses) of the best witness; <= 0 when passed.
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<SearchTraceEntry> trace;
};

/// Searches for a weak (R,eps)-approximation X -> Y over a descending
/// geometric eps grid. Each candidate eps builds a maximal eps/6-separated
/// net of B(p_Y,R) cap supp(Y) by farthest-point traversal from p_Y, lifts
/// the net to source representatives by greedy distance-profile assignment
/// plus pairwise-swap local search, and paints each source point to the net
/// point of the first eps/3-ball containing it (the net-scale/candidate
/// ratio is the 6x of the rough-inverse construction, so the painted map can
/// verify at the candidate eps itself). Deterministic given the seed.
SearchResult search_weak_approximation(const PointedSpace& X, const PointedSpace& Y,
                                       const SearchOptions& opts);

struct GlueResult {
    PointedSpace space;
    PointMap embed_x;
    PointMap embed_y;
};

/// Disjoint union of X and Y glued along a verified weak approximation:
/// within-part distances unchanged, cross distance
///   d(x, y) = min over good xt of d_X(xt, x) + d_Y(psi xt, y) + eps.
/// Both parts keep their weights; the basepoint is X's. The embeddings are
/// isometric and d(xt, psi xt) <= eps for xt in the good set.
GlueResult glue(const PointedSpace& X, const PointedSpace& Y, const WeakApprox& w);

}  // namespace mmlimit
