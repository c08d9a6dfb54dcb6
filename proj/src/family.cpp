#include "mmlimit/family.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "mmlimit/approx.hpp"

namespace mmlimit {

namespace {

/// Dyadic grid {k/2^depth} cap [-2,2], walked coarse to fine: integers
/// first, then odd halves, odd quarters, ... (positive before negative).
std::vector<double> dyadic_values(int depth) {
    std::vector<double> out{0.0, 1.0, -1.0, 2.0, -2.0};
    for (int lev = 1; lev <= depth; ++lev) {
        const double denom = std::ldexp(1.0, lev);
        for (long num = 1; static_cast<double>(num) / denom <= 2.0; num += 2) {
            out.push_back(static_cast<double>(num) / denom);
            out.push_back(-static_cast<double>(num) / denom);
        }
    }
    return out;
}

std::string vec_key(const std::vector<double>& v) {
    std::string key(v.size() * sizeof(double), '\0');
    std::memcpy(key.data(), v.data(), key.size());
    return key;
}

struct RawGen {
    std::vector<double> values;
    double lip = 0.0;
};

}  // namespace

double TestFamily::truncation_bound() const {
    return std::ldexp(1.0, -static_cast<int>(std::min<std::size_t>(fns.size(), 1000)));
}

TestFamily build_test_family(const PointedSpace& s, int depth) {
    if (depth < 1) throw std::invalid_argument("build_test_family: depth must be >= 1");
    const std::size_t n = s.size();
    const double diam = s.max_dist();
    const std::size_t cap = 64 * static_cast<std::size_t>(depth);
    const auto grid = dyadic_values(depth);

    TestFamily fam;
    fam.host_n = n;
    fam.depth = depth;

    std::unordered_set<std::string> emitted;
    auto emit = [&](const std::vector<double>& raw, double raw_lip) {
        if (fam.size() >= cap) return;
        double sup = 0.0;
        for (double v : raw) sup = std::max(sup, std::fabs(v));
        if (sup == 0.0) return;  // constant-zero
        std::vector<double> f(n);
        for (std::size_t i = 0; i < n; ++i) f[i] = raw[i] / sup;
        for (int sign = 0; sign < 2 && fam.size() < cap; ++sign) {
            if (sign == 1)
                for (double& x : f) x = -x;
            if (emitted.insert(vec_key(f)).second) {
                fam.fns.push_back(f);
                fam.lip.push_back(raw_lip / sup);
            }
        }
    };

    // Singles, collecting the distinct raw generators for max-combinations.
    std::vector<RawGen> gens;
    std::unordered_set<std::string> raw_seen;
    with_distance(s, [&](auto d) {
        for (double alpha : grid) {
            for (double beta : grid) {
                const double slope = diam > 0.0 ? beta / diam : 0.0;
                for (double gamma : grid) {
                    for (std::size_t y = 0; y < n; ++y) {
                        RawGen g;
                        g.values.resize(n);
                        for (std::size_t x = 0; x < n; ++x)
                            g.values[x] = std::max(alpha - slope * d(y, x), gamma);
                        g.lip = std::fabs(slope);
                        if (!raw_seen.insert(vec_key(g.values)).second) continue;
                        emit(g.values, g.lip);
                        gens.push_back(std::move(g));
                    }
                    if (fam.size() >= cap && gens.size() >= 2) return;
                }
            }
        }
    });

    const int max_k = std::min(depth, 3);
    std::vector<double> scratch(n);
    for (std::size_t i1 = 0; max_k >= 2 && fam.size() < cap && i1 < gens.size(); ++i1) {
        for (std::size_t i2 = i1 + 1; fam.size() < cap && i2 < gens.size(); ++i2) {
            for (std::size_t x = 0; x < n; ++x)
                scratch[x] = std::max(gens[i1].values[x], gens[i2].values[x]);
            emit(scratch, std::max(gens[i1].lip, gens[i2].lip));
            for (std::size_t i3 = i2 + 1; max_k >= 3 && fam.size() < cap && i3 < gens.size(); ++i3) {
                std::vector<double> triple(n);
                for (std::size_t x = 0; x < n; ++x) triple[x] = std::max(scratch[x], gens[i3].values[x]);
                emit(triple, std::max({gens[i1].lip, gens[i2].lip, gens[i3].lip}));
            }
        }
    }
    return fam;
}

double integrate(const std::vector<double>& f, const Measure& mu) {
    if (f.size() != mu.size()) throw std::invalid_argument("integrate: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * mu.w[i];
    return s;
}

double delta_metric(const Measure& mu, const Measure& nu, const TestFamily& fam) {
    if (mu.size() != fam.host_n || nu.size() != fam.host_n)
        throw std::invalid_argument("delta_metric: measures do not live on the family host");
    double total = 0.0;
    for (std::size_t k = 0; k < fam.size(); ++k) {
        const double gap = std::fabs(integrate(fam.fns[k], mu) - integrate(fam.fns[k], nu));
        total += std::ldexp(gap, -static_cast<int>(k) - 1);
    }
    return total;
}

std::size_t tail_start(std::size_t len) { return len <= 4 ? 0 : len / 2; }

CauchyReport is_asymptotically_cauchy(const std::vector<Measure>& seq, const TestFamily& fam,
                                      const std::vector<double>& eps_schedule) {
    if (seq.size() < 2) throw std::invalid_argument("is_asymptotically_cauchy: need length >= 2");
    for (std::size_t k = 1; k < eps_schedule.size(); ++k)
        if (eps_schedule[k] > eps_schedule[k - 1])
            throw std::invalid_argument("is_asymptotically_cauchy: schedule must be descending");

    const std::size_t len = seq.size();
    std::vector<std::vector<double>> ints(len, std::vector<double>(fam.size()));
    for (std::size_t i = 0; i < len; ++i)
        for (std::size_t k = 0; k < fam.size(); ++k) ints[i][k] = integrate(fam.fns[k], seq[i]);
    auto pair_delta = [&](std::size_t i, std::size_t j) {
        double total = 0.0;
        for (std::size_t k = 0; k < fam.size(); ++k)
            total += std::ldexp(std::fabs(ints[i][k] - ints[j][k]), -static_cast<int>(k) - 1);
        return total;
    };

    // suffix_max[N] = max delta over pairs i<j with i >= N.
    std::vector<double> suffix_max(len - 1, 0.0);
    std::vector<std::pair<std::size_t, std::size_t>> suffix_arg(len - 1, {0, 1});
    for (std::size_t N = len - 1; N-- > 0;) {
        double best = N + 1 < len - 1 ? suffix_max[N + 1] : 0.0;
        auto arg = N + 1 < len - 1 ? suffix_arg[N + 1] : std::make_pair(N, N + 1);
        for (std::size_t j = N + 1; j < len; ++j) {
            const double d = pair_delta(N, j);
            if (d > best) {
                best = d;
                arg = {N, j};
            }
        }
        suffix_max[N] = best;
        suffix_arg[N] = arg;
    }

    CauchyReport rep;
    for (double eps : eps_schedule) {
        std::size_t N = len - 1;
        for (std::size_t cand = 0; cand + 1 < len; ++cand) {
            if (suffix_max[cand] <= eps) {
                N = cand;
                break;
            }
        }
        if (N == len - 1) {
            rep.pass = false;
            rep.failed_eps = eps;
            rep.viol_i = suffix_arg[len - 2].first;
            rep.viol_j = suffix_arg[len - 2].second;
            rep.viol_delta = suffix_max[len - 2];
            return rep;
        }
        rep.tail_index.push_back(N);
    }
    return rep;
}

std::optional<Measure> weak_limit(const PointedSpace& host, const std::vector<Measure>& seq,
                                  const TestFamily& fam, double tol, WeakLimitReport* report) {
    if (seq.empty()) throw std::invalid_argument("weak_limit: empty sequence");
    for (const Measure& m : seq)
        if (m.size() != host.size()) throw std::invalid_argument("weak_limit: measure/host size mismatch");

    const std::size_t len = seq.size(), n = host.size();
    const std::size_t t0 = tail_start(len);
    WeakLimitReport local;
    WeakLimitReport& rep = report ? *report : local;
    rep = WeakLimitReport{};

    double worst = -1.0;
    for (std::size_t a = 0; a < n; ++a) {
        double lo = seq[t0].w[a], hi = lo;
        for (std::size_t i = t0; i < len; ++i) {
            lo = std::min(lo, seq[i].w[a]);
            hi = std::max(hi, seq[i].w[a]);
        }
        if (hi - lo > worst) {
            worst = hi - lo;
            rep.worst_atom = a;
        }
    }
    rep.worst_oscillation = std::max(worst, 0.0);
    rep.converged = rep.worst_oscillation <= tol;

    for (std::size_t k = 0; k < fam.size(); ++k) {
        double lo = integrate(fam.fns[k], seq[t0]), hi = lo;
        for (std::size_t i = t0 + 1; i < len; ++i) {
            const double v = integrate(fam.fns[k], seq[i]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        rep.family_tail_gap = std::max(rep.family_tail_gap, hi - lo);
    }

    if (!rep.converged) return std::nullopt;
    Measure limit = seq.back();

    std::vector<double> radii;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = host.dist(host.base(), i);
        if (d > 0.0) radii.push_back(d);
    }
    radii.push_back(host.max_dist() + 1.0);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    for (double r : radii) {
        BallSemicontinuityRow row;
        row.radius = r;
        const IndexSet open = ball(host, host.base(), r, BallKind::Open);
        const IndexSet closed = ball(host, host.base(), r, BallKind::Closed);
        row.limit_open = mass_on(limit, open);
        row.limit_closed = mass_on(limit, closed);
        double inf_open = mass_on(seq[t0], open), sup_closed = mass_on(seq[t0], closed);
        for (std::size_t i = t0 + 1; i < len; ++i) {
            inf_open = std::min(inf_open, mass_on(seq[i], open));
            sup_closed = std::max(sup_closed, mass_on(seq[i], closed));
        }
        row.tail_liminf_open = inf_open;
        row.tail_limsup_closed = sup_closed;
        row.open_ok = row.limit_open <= inf_open + tol;
        row.closed_ok = row.limit_closed >= sup_closed - tol;
        rep.balls.push_back(row);
    }
    return limit;
}

TightnessResult prokhorov_tightness(const PointedSpace& host, const std::vector<Measure>& seq,
                                    double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("prokhorov_tightness: eps must be positive");
    if (seq.empty()) throw std::invalid_argument("prokhorov_tightness: empty sequence");
    for (const Measure& m : seq)
        if (m.size() != host.size())
            throw std::invalid_argument("prokhorov_tightness: measure/host size mismatch");

    const std::size_t n = host.size(), len = seq.size(), t0 = tail_start(len);
    std::vector<IndexSet> balls_of(n);
    for (std::size_t c = 0; c < n; ++c) balls_of[c] = ball(host, c, eps, BallKind::Open);

    std::vector<bool> covered(n, false);
    TightnessResult out;
    auto residual_limsup = [&] {
        double best = 0.0;
        for (std::size_t i = t0; i < len; ++i) {
            double r = 0.0;
            for (std::size_t a = 0; a < n; ++a)
                if (!covered[a]) r += seq[i].w[a];
            best = std::max(best, r);
        }
        return best;
    };

    out.residual_tail_limsup = residual_limsup();
    while (out.residual_tail_limsup > eps) {
        std::size_t best_c = n;
        double best_gain = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            double gain = 0.0;
            for (std::size_t i = t0; i < len; ++i) {
                double g = 0.0;
                for (std::size_t a : balls_of[c])
                    if (!covered[a]) g += seq[i].w[a];
                gain = std::max(gain, g);
            }
            if (gain > best_gain) {
                best_gain = gain;
                best_c = c;
            }
        }
        if (best_c == n) break;  // no ball captures new mass
        out.centers.push_back(best_c);
        for (std::size_t a : balls_of[best_c]) covered[a] = true;
        out.residual_tail_limsup = residual_limsup();
    }

    std::vector<std::size_t> atoms;
    for (std::size_t a = 0; a < n; ++a)
        if (covered[a]) atoms.push_back(a);
    out.T = IndexSet(std::move(atoms));
    out.cover_size = out.T.size();
    out.pass = out.residual_tail_limsup <= eps;
    return out;
}

std::vector<Measure> lift_measure(const std::vector<LiftStage>& stages, const PointedSpace& limit,
                                  const std::vector<std::pair<std::size_t, double>>& target_atoms,
                                  LiftReport* report) {
    if (stages.empty()) throw std::invalid_argument("lift_measure: no stages");
    if (target_atoms.empty()) throw std::invalid_argument("lift_measure: no target atoms");
    for (const auto& [idx, lambda] : target_atoms) {
        if (idx >= limit.size()) throw std::invalid_argument("lift_measure: atom index out of range");
        if (!(lambda >= 0.0)) throw std::invalid_argument("lift_measure: negative atom mass");
    }
    for (const LiftStage& st : stages) {
        Verdict v = verify_approximation(*st.space, limit, st.psi, st.R, st.eps);
        if (!v) throw std::invalid_argument("lift_measure: stage approximation not verified: " + v.reason);
    }

    const std::size_t nstages = stages.size(), natoms = target_atoms.size();
    LiftReport local;
    LiftReport& rep = report ? *report : local;
    rep = LiftReport{};
    std::vector<Measure> lifted;
    std::vector<std::vector<bool>> in_J(nstages, std::vector<bool>(natoms, false));

    for (std::size_t si = 0; si < nstages; ++si) {
        const LiftStage& st = stages[si];
        const PointedSpace& Xi = *st.space;
        std::vector<std::ptrdiff_t> rep_of(natoms, -1);
        for (std::size_t x = 0; x < Xi.size(); ++x) {
            if (!(Xi.dist(Xi.base(), x) < st.R)) continue;
            for (std::size_t j = 0; j < natoms; ++j) {
                if (limit.dist(st.psi.img[x], target_atoms[j].first) < st.eps) {
                    if (rep_of[j] < 0) rep_of[j] = static_cast<std::ptrdiff_t>(x);
                    break;  // j(i,x) is the smallest such rank
                }
            }
        }
        double c = 0.0;
        std::vector<std::size_t> J;
        for (std::size_t j = 0; j < natoms; ++j) {
            if (rep_of[j] >= 0) {
                J.push_back(j);
                in_J[si][j] = true;
                c += target_atoms[j].second;
            }
        }
        if (!(c > 0.0))
            throw std::runtime_error("lift_measure: no representable atoms at stage " + std::to_string(si));
        Measure m;
        m.w.assign(Xi.size(), 0.0);
        for (std::size_t j : J) m.w[static_cast<std::size_t>(rep_of[j])] += target_atoms[j].second / c;
        lifted.push_back(std::move(m));
        rep.c.push_back(c);
        rep.J.push_back(std::move(J));
    }

    rep.prefix_stable_from.assign(natoms, -1);
    for (std::size_t k = 1; k <= natoms; ++k) {
        std::ptrdiff_t from = -1;
        for (std::size_t si = nstages; si-- > 0;) {
            bool all = true;
            for (std::size_t j = 0; j < k && all; ++j) all = in_J[si][j];
            if (!all) break;
            from = static_cast<std::ptrdiff_t>(si);
        }
        rep.prefix_stable_from[k - 1] = from;
    }
    for (std::size_t si = tail_start(nstages); si + 1 < nstages; ++si)
        if (rep.c[si + 1] < rep.c[si] - 1e-12) rep.c_tail_nondecreasing = false;
    return lifted;
}

}  // namespace mmlimit
