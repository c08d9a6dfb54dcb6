#include "mmlimit/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmlimit {

std::vector<UbfRow> uniform_bounded_finiteness(const SpaceSequence& seq,
                                               const std::vector<double>& R_grid) {
    if (seq.empty()) throw std::invalid_argument("uniform_bounded_finiteness: empty sequence");
    for (double R : R_grid)
        if (!(R > 0.0)) throw std::invalid_argument("uniform_bounded_finiteness: radii must be positive");
    std::vector<UbfRow> rows;
    const std::size_t t0 = tail_start(seq.size());
    for (double R : R_grid) {
        UbfRow row;
        row.R = R;
        for (const PointedSpace& s : seq)
            row.per_space.push_back(ball_mass(s, s.base(), R, BallKind::Open));
        row.sup = *std::max_element(row.per_space.begin(), row.per_space.end());
        row.tail_limsup = *std::max_element(row.per_space.begin() + static_cast<std::ptrdiff_t>(t0),
                                            row.per_space.end());
        rows.push_back(std::move(row));
    }
    return rows;
}

CoverReport greedy_cover(const PointedSpace& s, double R, double r, double target_eps,
                         std::size_t max_M) {
    if (!(R > 0.0 && r > 0.0)) throw std::invalid_argument("greedy_cover: R and r must be positive");
    const std::size_t n = s.size();
    const IndexSet target = ball(s, s.base(), R, BallKind::Closed);
    std::vector<bool> in_target(n, false);
    for (std::size_t i : target) in_target[i] = true;

    CoverReport rep;
    rep.target_ball_mass = mass_on(s, target);
    std::vector<bool> covered(n, false);

    auto residual = [&] {
        double m = 0.0;
        for (std::size_t i : target)
            if (!covered[i]) m += s.weight(i);
        return m;
    };

    with_distance(s, [&](auto d) {
        for (std::size_t c = 0; c < n; ++c) {
            double m = 0.0;
            for (std::size_t i : target)
                if (d(c, i) < r) m += s.weight(i);
            rep.max_ball_mass = std::max(rep.max_ball_mass, m);
        }

        rep.residual_mass = residual();
        while (rep.residual_mass > target_eps && rep.pick_order.size() < max_M) {
            std::size_t best_c = n;
            double best_gain = 0.0;
            for (std::size_t c = 0; c < n; ++c) {
                double gain = 0.0;
                for (std::size_t i : target)
                    if (!covered[i] && d(c, i) < r) gain += s.weight(i);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_c = c;
                }
            }
            if (best_c == n) break;  // no progress
            rep.pick_order.push_back(best_c);
            for (std::size_t i : target)
                if (d(best_c, i) < r) covered[i] = true;
            rep.residual_mass = residual();
            rep.residual_history.push_back(rep.residual_mass);
        }
    });
    rep.centers = IndexSet::from_unsorted(rep.pick_order);
    rep.M = rep.pick_order.size();
    rep.reached_target = rep.residual_mass <= target_eps;
    return rep;
}

bool cover_failure_certificate(const PointedSpace& s, double R, double r, std::size_t M, double eps) {
    if (!(R > 0.0 && r > 0.0))
        throw std::invalid_argument("cover_failure_certificate: R and r must be positive");
    const IndexSet target = ball(s, s.base(), R, BallKind::Closed);
    const double total = mass_on(s, target);
    double max_ball = 0.0;
    with_distance(s, [&](auto d) {
        for (std::size_t c = 0; c < s.size(); ++c) {
            double m = 0.0;
            for (std::size_t i : target)
                if (d(c, i) < r) m += s.weight(i);
            max_ball = std::max(max_ball, m);
        }
    });
    return static_cast<double>(M) * max_ball < total - eps;
}

std::vector<BmttbTripleReport> bmttb_check(const SpaceSequence& seq,
                                           const std::vector<BmttbTriple>& params) {
    if (seq.empty()) throw std::invalid_argument("bmttb_check: empty sequence");
    for (const BmttbTriple& t : params)
        if (!(t.R > 0.0 && t.r > 0.0 && t.eps >= 0.0))
            throw std::invalid_argument("bmttb_check: triples must be positive (eps >= 0)");

    std::vector<BmttbTripleReport> out;
    const std::size_t len = seq.size();
    const std::size_t window = (len + 1) / 2;
    const std::size_t t0 = tail_start(len);

    for (const BmttbTriple& t : params) {
        BmttbTripleReport rep;
        rep.triple = t;
        for (const PointedSpace& s : seq) rep.per_space.push_back(greedy_cover(s, t.R, t.r, t.eps));

        std::size_t common_M = 0;
        for (std::size_t i = 0; i < window; ++i) common_M = std::max(common_M, rep.per_space[i].M);
        rep.common_M = common_M;

        for (std::size_t i = 0; i < len; ++i) {
            const CoverReport& cr = rep.per_space[i];
            double res;
            if (cr.M <= common_M) {
                res = cr.residual_mass;
            } else if (common_M == 0) {
                res = cr.target_ball_mass;
            } else {
                res = cr.residual_history[common_M - 1];
            }
            rep.residual_at_common_M.push_back(res);
        }
        rep.sup_pass = true;
        for (std::size_t i = 0; i < len; ++i)
            if (rep.residual_at_common_M[i] > t.eps) rep.sup_pass = false;
        rep.asymptotic_pass = true;
        for (std::size_t i = t0; i < len; ++i)
            if (rep.residual_at_common_M[i] > t.eps) rep.asymptotic_pass = false;

        if (rep.sup_pass) {
            rep.verdict = "pass";
        } else {
            rep.verdict = "greedy-fail (inconclusive)";
            for (std::size_t i = 0; i < len; ++i) {
                if (rep.residual_at_common_M[i] > t.eps &&
                    cover_failure_certificate(seq[i], t.R, t.r, common_M, t.eps)) {
                    rep.verdict = "fail (certified)";
                    rep.certificate_space = static_cast<std::ptrdiff_t>(i);
                    break;
                }
            }
        }
        out.push_back(std::move(rep));
    }
    return out;
}

namespace {

double delta_restricted_to_ball(const Measure& mu, const Measure& nu, const TestFamily& fam,
                                const PointedSpace& host, double R) {
    const IndexSet inside = ball(host, host.base(), R, BallKind::Open);
    std::vector<bool> ok(host.size(), false);
    for (std::size_t i : inside) ok[i] = true;
    double total = 0.0;
    for (std::size_t k = 0; k < fam.size(); ++k) {
        bool supported = true;
        for (std::size_t i = 0; i < host.size() && supported; ++i)
            if (fam.fns[k][i] != 0.0 && !ok[i]) supported = false;
        if (!supported) continue;
        const double gap = std::fabs(integrate(fam.fns[k], mu) - integrate(fam.fns[k], nu));
        total += std::ldexp(gap, -static_cast<int>(k) - 1);
    }
    return total;
}

}  // namespace

WpmghReport wpmgh_sequence_check(const SpaceSequence& seq, const PointedSpace& limit,
                                 const std::vector<std::pair<double, double>>& schedule,
                                 int fam_depth, double tol, std::uint64_t seed, int budget) {
    if (seq.size() != schedule.size())
        throw std::invalid_argument("wpmgh_sequence_check: schedule length mismatch");
    for (std::size_t i = 1; i < schedule.size(); ++i) {
        if (schedule[i].first < schedule[i - 1].first || schedule[i].second > schedule[i - 1].second)
            throw std::invalid_argument("wpmgh_sequence_check: schedule must have R up, eps down");
    }
    const TestFamily fam = build_test_family(limit, fam_depth);
    const Measure limit_measure{limit.weights()};

    WpmghReport rep;
    rep.pass = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        WpmghStageRow row;
        row.R = schedule[i].first;
        row.eps = schedule[i].second;
        SearchOptions opts;
        opts.R = row.R;
        opts.seed = seed + i;
        opts.budget = budget;
        const SearchResult sr = search_weak_approximation(seq[i], limit, opts);
        row.achieved_eps = sr.achieved_eps;
        row.stage_pass = sr.passed && sr.achieved_eps <= row.eps;
        if (sr.passed) {
            const Measure push =
                pushforward(Measure{seq[i].weights()}, sr.witness.map, limit.size());
            row.delta_restricted = delta_restricted_to_ball(push, limit_measure, fam, limit, row.R);
        } else {
            row.delta_restricted = std::numeric_limits<double>::infinity();
        }
        if (!row.stage_pass) rep.pass = false;
        rep.stages.push_back(row);
    }
    if (!rep.stages.empty() && !(rep.stages.back().delta_restricted <= tol)) rep.pass = false;
    return rep;
}

double wpmgh_discrepancy(const PointedSpace& X, const PointedSpace& Y, double R, int budget,
                         std::uint64_t seed, int fam_depth) {
    // both directions use the same seed, so swapping the arguments swaps the
    // two searches and the score is symmetric bit for bit
    SearchOptions opts;
    opts.R = R;
    opts.seed = seed;
    opts.budget = budget;
    const SearchResult sxy = search_weak_approximation(X, Y, opts);
    const SearchResult syx = search_weak_approximation(Y, X, opts);
    if (!sxy.passed || !syx.passed) return std::numeric_limits<double>::infinity();

    const TestFamily fam_y = build_test_family(Y, fam_depth);
    const TestFamily fam_x = build_test_family(X, fam_depth);
    const double dxy =
        delta_metric(pushforward(Measure{X.weights()}, sxy.witness.map, Y.size()), Measure{Y.weights()}, fam_y);
    const double dyx =
        delta_metric(pushforward(Measure{Y.weights()}, syx.witness.map, X.size()), Measure{X.weights()}, fam_x);
    return std::max({sxy.achieved_eps, syx.achieved_eps, dxy, dyx});
}

DoublingProfile pointwise_doubling_profile(const PointedSpace& s, std::size_t point,
                                           const std::vector<double>& scales) {
    if (point >= s.size()) throw std::invalid_argument("pointwise_doubling_profile: point out of range");
    for (std::size_t k = 0; k < scales.size(); ++k) {
        if (!(scales[k] > 0.0))
            throw std::invalid_argument("pointwise_doubling_profile: scales must be positive");
        if (k > 0 && scales[k] > scales[k - 1])
            throw std::invalid_argument("pointwise_doubling_profile: scales must be descending");
    }
    DoublingProfile out;
    out.scales = scales;
    for (double r : scales) {
        const double denom = ball_mass(s, point, r, BallKind::Open);
        const double numer = ball_mass(s, point, 2.0 * r, BallKind::Open);
        if (denom > 0.0) {
            out.ratios.push_back(numer / denom);
        } else {
            out.ratios.push_back(std::numeric_limits<double>::infinity());
            out.has_infinite = true;
        }
    }
    const std::size_t q = std::max<std::size_t>(1, scales.size() / 4);
    for (std::size_t k = scales.size() - std::min(q, scales.size()); k < scales.size(); ++k)
        out.smallest_quartile_max = std::max(out.smallest_quartile_max, out.ratios[k]);
    return out;
}

TangentResult tangent_sequence(const PointedSpace& s, std::size_t point,
                               const std::vector<double>& scales,
                               const std::vector<BmttbTriple>& params) {
    if (scales.empty()) throw std::invalid_argument("tangent_sequence: no scales");
    const PointedSpace at_point = s.rebased(point);
    TangentResult out;
    for (double r : scales) out.spaces.push_back(normalize_at_basepoint(at_point, r));
    out.bmttb = bmttb_check(out.spaces, params);
    out.doubling = pointwise_doubling_profile(s, point, scales);
    return out;
}

}  // namespace mmlimit
