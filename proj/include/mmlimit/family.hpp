#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mmlimit/space.hpp"

namespace mmlimit {

/// Ordered finite family of bounded-Lipschitz test functions on a fixed host
/// space, stored as value vectors with sup-norm exactly 1. The enumeration is
/// deterministic in (host, depth); delta_metric truncates the weighted series
/// metrizing weak convergence at the family length.
struct TestFamily {
    std::size_t host_n = 0;
    int depth = 0;
    std::vector<std::vector<double>> fns;
    std::vector<double> lip;

    std::size_t size() const { return fns.size(); }

    /// Upper bound on the tail dropped by truncating the series: 2^-size.
    double truncation_bound() const;
};

/// Enumerates normalized functions +/- max{alpha - (beta/diam) d(.,y), gamma}
/// and max-combinations of up to min(depth,3) of them. The dyadic parameter
/// grid {k/2^depth : |k| <= 2^(2 depth)} cap [-2,2] is walked coarse-to-fine
/// (integers, then halves, quarters, ...), centers y vary fastest, signs
/// + then -; constant-zero functions and exact duplicates are dropped; the
/// list is capped at 64*depth entries.
TestFamily build_test_family(const PointedSpace& s, int depth);

/// Finite integral: sum of f[i] * mu.w[i] in index order.
double integrate(const std::vector<double>& f, const Measure& mu);

/// Truncated series sum_n 2^-(n+1) |integral of f_n d(mu - nu)|. A
/// pseudometric for any depth; families of depth >= 2 separate measures
/// atomwise on small hosts, depth-1 families may not.
double delta_metric(const Measure& mu, const Measure& nu, const TestFamily& fam);

/// First index of the tail window used by all sequence statistics: the last
/// half of the sequence, and the whole of short sequences.
std::size_t tail_start(std::size_t len);

struct CauchyReport {
    bool pass = true;
    std::vector<std::size_t> tail_index;  // witness N_k per schedule entry
    double failed_eps = 0.0;
    std::size_t viol_i = 0, viol_j = 0;
    double viol_delta = 0.0;
};

/// Eventual proxy for the asymptotically-Cauchy property: for each eps_k of
/// the descending schedule, finds the least N_k <= len-2 with
/// delta(mu_i, mu_j) <= eps_k for all i,j >= N_k. Fails at the first
/// unachievable eps_k with the worst offending tail pair.
CauchyReport is_asymptotically_cauchy(const std::vector<Measure>& seq, const TestFamily& fam,
                                      const std::vector<double>& eps_schedule);

struct BallSemicontinuityRow {
    double radius = 0.0;
    double limit_open = 0.0, limit_closed = 0.0;
    double tail_liminf_open = 0.0, tail_limsup_closed = 0.0;
    bool open_ok = true, closed_ok = true;
};

struct WeakLimitReport {
    bool converged = false;
    std::size_t worst_atom = 0;
    double worst_oscillation = 0.0;
    /// limsup = liminf gap over the family, evaluated between the candidate
    /// limit and the tail (diagnostic only).
    double family_tail_gap = 0.0;
    std::vector<BallSemicontinuityRow> balls;
};

/// Atomwise tail limit: accepts when every atom's oscillation over the tail
/// window is at most tol, returning the final weights as the limit together
/// with lower/upper semicontinuity rows for all basepoint-centered balls.
std::optional<Measure> weak_limit(const PointedSpace& host, const std::vector<Measure>& seq,
                                  const TestFamily& fam, double tol, WeakLimitReport* report = nullptr);

struct TightnessResult {
    IndexSet T;                          // atoms of the selected eps-balls
    std::vector<std::size_t> centers;    // greedy pick order
    bool pass = false;
    double residual_tail_limsup = 0.0;
    std::size_t cover_size = 0;          // |T|: a trivial eps-cover by its own points
};

/// Greedy Prokhorov-tightness diagnostic: grows T by open eps-balls, each
/// step adding the center whose ball captures the largest tail-limsup of new
/// mass, until the tail-limsup of the residual drops to eps or no ball makes
/// progress.
TightnessResult prokhorov_tightness(const PointedSpace& host, const std::vector<Measure>& seq,
                                    double eps);

struct LiftStage {
    const PointedSpace* space = nullptr;  // X_i
    PointMap psi;                         // X_i -> limit host
    double R = 0.0, eps = 0.0;
};

struct LiftReport {
    std::vector<double> c;                          // stage normalizers
    std::vector<std::vector<std::size_t>> J;        // included target-atom ranks per stage
    /// For each prefix length k: first stage from which ranks {0..k-1} stay
    /// inside J_i for all later stages; -1 when the prefix never stabilizes.
    std::vector<std::ptrdiff_t> prefix_stable_from;
    bool c_tail_nondecreasing = true;
};

/// Measure lifting along verified (R_i, eps_i)-approximations: for each
/// stage, target atom j is represented by the first source point of
/// B(p_i, R_i) whose image lies within eps_i of x_j (lowest rank wins when a
/// source point is near several atoms), and the lifted measure is the
/// normalized sum of the represented-lambda deltas.
std::vector<Measure> lift_measure(const std::vector<LiftStage>& stages, const PointedSpace& limit,
                                  const std::vector<std::pair<std::size_t, double>>& target_atoms,
                                  LiftReport* report = nullptr);

}  // namespace mmlimit
