#include "mmlimit/category.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmlimit {

namespace {

constexpr double kPushforwardSlack = 1e-12;

void check_system_shape(const SystemOfSpaces& sys) {
    if (sys.spaces.empty()) throw std::invalid_argument("system: no spaces");
    if (sys.bonds.size() + 1 != sys.spaces.size())
        throw std::invalid_argument("system: need exactly one bond per adjacent pair");
    for (std::size_t i = 0; i < sys.bonds.size(); ++i) {
        const PointedSpace& src = sys.kind == SystemOfSpaces::Kind::Direct ? sys.spaces[i] : sys.spaces[i + 1];
        const PointedSpace& dst = sys.kind == SystemOfSpaces::Kind::Direct ? sys.spaces[i + 1] : sys.spaces[i];
        if (sys.bonds[i].img.size() != src.size())
            throw std::invalid_argument("system: bond " + std::to_string(i) + " length mismatch");
        for (std::size_t x : sys.bonds[i].img)
            if (x >= dst.size())
                throw std::invalid_argument("system: bond " + std::to_string(i) + " image out of range");
    }
}

SystemOfSpaces prefix(const SystemOfSpaces& sys, std::size_t N) {
    SystemOfSpaces out;
    out.kind = sys.kind;
    out.spaces.assign(sys.spaces.begin(), sys.spaces.begin() + static_cast<std::ptrdiff_t>(N));
    out.bonds.assign(sys.bonds.begin(), sys.bonds.begin() + static_cast<std::ptrdiff_t>(N - 1));
    return out;
}

}  // namespace

PointMap composed_bond(const SystemOfSpaces& sys, std::size_t i, std::size_t j) {
    if (i > j || j >= sys.stages()) throw std::invalid_argument("composed_bond: bad stage pair");
    if (sys.kind == SystemOfSpaces::Kind::Direct) {
        PointMap f = PointMap::identity(sys.spaces[i].size());
        for (std::size_t k = i; k < j; ++k) f = compose(f, sys.bonds[k]);
        return f;
    }
    PointMap f = PointMap::identity(sys.spaces[j].size());
    for (std::size_t k = j; k-- > i;) f = compose(f, sys.bonds[k]);
    return f;
}

namespace {

/// Conditions (ii) 1-Lipschitz on the support and (iii) pushforward
/// domination; the basepoint clause (i) is checked by the caller, because
/// inverse systems legitimately carry drifting basepoints (the basepoint
/// thread is a diagnostic of the limit, not a bond axiom).
Verdict morphism_mass_metric_core(const PointMap& f, const PointedSpace& X, const PointedSpace& Y);

}  // namespace

Verdict verify_morphism(const PointMap& f, const PointedSpace& X, const PointedSpace& Y) {
    if (f.img.size() != X.size()) throw std::invalid_argument("verify_morphism: map length mismatch");
    for (std::size_t i : f.img)
        if (i >= Y.size()) throw std::invalid_argument("verify_morphism: image index out of range");
    if (!(X.weight(X.base()) > 0.0))
        throw std::invalid_argument("verify_morphism: not an object of the category (basepoint has no mass)");

    if (f.img[X.base()] != Y.base()) return Verdict::fail("basepoint not preserved");
    return morphism_mass_metric_core(f, X, Y);
}

namespace {

Verdict morphism_mass_metric_core(const PointMap& f, const PointedSpace& X, const PointedSpace& Y) {

    const IndexSet spt = support(X);
    const std::size_t m = spt.size();
    struct ChunkHit {
        bool bad = false;
        std::size_t a = 0, b = 0;
        double excess = 0.0;
    };
    const std::size_t rows_per_chunk = 64;
    std::vector<ChunkHit> hits((m + rows_per_chunk - 1) / std::max<std::size_t>(rows_per_chunk, 1));
    with_distance(X, [&](auto dx) {
        with_distance(Y, [&](auto dy) {
            parallel_chunks(m, rows_per_chunk, [&](std::size_t chunk, std::size_t lo, std::size_t hi) {
                for (std::size_t a = lo; a < hi; ++a) {
                    const std::size_t ia = spt[a];
                    const std::size_t fa = f.img[ia];
                    for (std::size_t b = a + 1; b < m; ++b) {
                        const std::size_t ib = spt[b];
                        const double lhs = dy(fa, f.img[ib]);
                        const double rhs = dx(ia, ib);
                        if (lhs > rhs) {
                            if (!hits[chunk].bad) hits[chunk] = {true, ia, ib, lhs - rhs};
                            return;
                        }
                    }
                }
            });
        });
    });
    for (const ChunkHit& h : hits) {
        if (h.bad) {
            std::ostringstream os;
            os << "not 1-Lipschitz on support pair (" << h.a << "," << h.b << "), excess " << h.excess;
            return Verdict::fail(os.str());
        }
    }

    const Measure push = pushforward(Measure{X.weights()}, f, Y.size());
    for (std::size_t j = 0; j < Y.size(); ++j) {
        if (push.w[j] > Y.weight(j) + kPushforwardSlack) {
            std::ostringstream os;
            os << "pushforward exceeds target at atom " << j << ": " << push.w[j] << " > " << Y.weight(j);
            return Verdict::fail(os.str());
        }
    }
    return Verdict::ok();
}

}  // namespace

Verdict verify_system(const SystemOfSpaces& sys) {
    check_system_shape(sys);
    for (std::size_t i = 0; i < sys.stages(); ++i) {
        if (!(sys.spaces[i].weight(sys.spaces[i].base()) > 0.0))
            throw std::invalid_argument("verify_system: stage " + std::to_string(i) +
                                        " is not an object of the category (basepoint has no mass)");
    }
    const bool direct = sys.kind == SystemOfSpaces::Kind::Direct;
    std::string basepoint_note;
    for (std::size_t i = 0; i + 1 < sys.stages(); ++i) {
        const PointedSpace& src = direct ? sys.spaces[i] : sys.spaces[i + 1];
        const PointedSpace& dst = direct ? sys.spaces[i + 1] : sys.spaces[i];
        Verdict v = morphism_mass_metric_core(sys.bonds[i], src, dst);
        if (!v) return Verdict::fail("bond " + std::to_string(i) + ": " + v.reason);
        if (basepoint_note.empty() && sys.bonds[i].img[src.base()] != dst.base())
            basepoint_note = "bond " + std::to_string(i) + " does not carry basepoint to basepoint";
    }
    // Generated composites; incremental composition reuses the previous map.
    if (direct) {
        for (std::size_t i = 0; i + 2 < sys.stages(); ++i) {
            PointMap f = sys.bonds[i];
            for (std::size_t j = i + 2; j < sys.stages(); ++j) {
                f = compose(f, sys.bonds[j - 1]);
                Verdict v = morphism_mass_metric_core(f, sys.spaces[i], sys.spaces[j]);
                if (!v)
                    return Verdict::fail("composite " + std::to_string(i) + "->" + std::to_string(j) +
                                         ": " + v.reason);
            }
        }
    } else {
        for (std::size_t j = 2; j < sys.stages(); ++j) {
            PointMap f = sys.bonds[j - 1];
            for (std::size_t i = j - 1; i-- > 0;) {
                f = compose(f, sys.bonds[i]);
                Verdict v = morphism_mass_metric_core(f, sys.spaces[j], sys.spaces[i]);
                if (!v)
                    return Verdict::fail("composite " + std::to_string(j) + "->" + std::to_string(i) +
                                         ": " + v.reason);
            }
        }
    }
    // A pass with drifting basepoints is legitimate (the basepoint thread of
    // an inverse limit may be absent); the note keeps it visible.
    return Verdict{true, basepoint_note};
}

namespace {

std::vector<double> default_radii(const SystemOfSpaces& sys, std::size_t N) {
    double dmax = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const PointedSpace& s = sys.spaces[i];
        for (std::size_t x = 0; x < s.size(); ++x) dmax = std::max(dmax, s.dist(s.base(), x));
    }
    if (dmax == 0.0) return {1.0};
    return {0.25 * dmax, 0.5 * dmax, 0.75 * dmax, dmax, 1.25 * dmax};
}

}  // namespace

DirectLimitResult direct_limit_stage(const SystemOfSpaces& sys, std::size_t N, double tol) {
    if (sys.kind != SystemOfSpaces::Kind::Direct)
        throw std::invalid_argument("direct_limit_stage: not a direct system");
    if (N < 1 || N > sys.stages()) throw std::invalid_argument("direct_limit_stage: bad stage count");
    if (tol < 0.0) throw std::invalid_argument("direct_limit_stage: tol must be >= 0");
    const SystemOfSpaces pre = prefix(sys, N);
    {
        Verdict v = verify_system(pre);
        if (!v) throw std::invalid_argument("direct_limit_stage: system invalid: " + v.reason);
    }
    const PointedSpace& last = pre.spaces[N - 1];
    const IndexSet carrier = support(last);

    // Quotient by distance <= tol (tol 0: classes are single atoms).
    std::vector<std::size_t> class_of(carrier.size());
    std::vector<std::size_t> reps;
    for (std::size_t a = 0; a < carrier.size(); ++a) {
        std::size_t cls = reps.size();
        for (std::size_t rpos = 0; rpos < reps.size(); ++rpos) {
            if (last.dist(carrier[a], carrier[reps[rpos]]) <= tol) {
                cls = rpos;
                break;
            }
        }
        if (cls == reps.size()) reps.push_back(a);
        class_of[a] = cls;
    }

    std::vector<std::size_t> rep_atoms(reps.size());
    for (std::size_t rpos = 0; rpos < reps.size(); ++rpos) rep_atoms[rpos] = carrier[reps[rpos]];
    std::size_t base_class = 0;
    {
        bool found = false;
        for (std::size_t a = 0; a < carrier.size() && !found; ++a) {
            if (carrier[a] == last.base()) {
                base_class = class_of[a];
                found = true;
            }
        }
        if (!found)
            throw std::invalid_argument("direct_limit_stage: last-stage basepoint not in support");
    }

    PointedSpace::DenseDist dd;
    dd.n = reps.size();
    dd.d.resize(dd.n * dd.n);
    for (std::size_t p = 0; p < dd.n; ++p)
        for (std::size_t q = 0; q < dd.n; ++q) dd.d[p * dd.n + q] = last.dist(rep_atoms[p], rep_atoms[q]);
    std::vector<double> weight(dd.n, 0.0);
    for (std::size_t a = 0; a < carrier.size(); ++a) weight[class_of[a]] += last.weight(carrier[a]);

    DirectLimitResult out{PointedSpace(std::move(dd), std::move(weight), base_class), {}, {}};

    std::vector<std::size_t> class_of_atom(last.size(), base_class);  // off-carrier goes to base
    for (std::size_t a = 0; a < carrier.size(); ++a) class_of_atom[carrier[a]] = class_of[a];
    for (std::size_t i = 0; i < N; ++i) {
        const PointMap fwd = composed_bond(pre, i, N - 1);
        PointMap into;
        into.img.resize(pre.spaces[i].size());
        for (std::size_t x = 0; x < pre.spaces[i].size(); ++x) into.img[x] = class_of_atom[fwd.img[x]];
        out.into_limit.push_back(std::move(into));
    }

    DirectLimitReport& rep = out.report;
    rep.radii = default_radii(pre, N);
    for (double R : rep.radii) {
        std::vector<double> col;
        for (std::size_t i = 0; i < N; ++i)
            col.push_back(ball_mass(pre.spaces[i], pre.spaces[i].base(), R, BallKind::Open));
        for (std::size_t i = 0; i + 1 < N; ++i)
            if (col[i + 1] < col[i] - 1e-12 * (1.0 + std::fabs(col[i]))) rep.mass_nondecreasing = false;
        rep.mass_columns.push_back(std::move(col));
    }

    if (N >= 2) {
        const PointedSpace& prev = pre.spaces[N - 2];
        const PointMap& bond = pre.bonds[N - 2];
        const IndexSet sp = support(prev);
        double min_dec = 0.0;
        for (std::size_t a = 0; a < sp.size(); ++a)
            for (std::size_t b = a + 1; b < sp.size(); ++b)
                min_dec = std::min(min_dec, prev.dist(sp[a], sp[b]) -
                                                last.dist(bond.img[sp[a]], bond.img[sp[b]]));
        rep.min_pair_decrement = min_dec;
        const double ulp_bound = 10.0 * std::ldexp(std::max(prev.max_dist(), 1.0), -52);
        if (min_dec < -ulp_bound)
            throw std::runtime_error("direct_limit_stage: not a valid direct system at numeric precision");
    }

    bool growing = false, stabilized = true;
    const std::size_t mid = (N - 1) / 2;
    for (const auto& col : rep.mass_columns) {
        if (col[mid] > 0.0 && col[N - 1] >= 2.0 * col[mid]) growing = true;
        if (std::fabs(col[N - 1] - col[mid]) > 1e-9 * (1.0 + std::fabs(col[N - 1]))) stabilized = false;
    }
    rep.existence = growing ? "fail (prefix evidence)"
                            : (stabilized ? "pass (prefix evidence)" : "inconclusive");
    return out;
}

std::vector<Thread> threads(const SystemOfSpaces& sys, std::size_t N, std::size_t* skipped) {
    if (sys.kind != SystemOfSpaces::Kind::Inverse)
        throw std::invalid_argument("threads: not an inverse system");
    if (N < 1 || N > sys.stages()) throw std::invalid_argument("threads: bad stage count");
    check_system_shape(sys);
    if (skipped) *skipped = 0;
    std::vector<Thread> out;
    const PointedSpace& top = sys.spaces[N - 1];
    for (std::size_t x : support(top)) {
        Thread t(N);
        t[N - 1] = x;
        bool ok = true;
        for (std::size_t i = N - 1; i-- > 0;) {
            t[i] = sys.bonds[i].img[t[i + 1]];
            if (!(sys.spaces[i].weight(t[i]) > 0.0)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(std::move(t));
        } else if (skipped) {
            ++*skipped;
        }
    }
    return out;
}

InverseLimitResult inverse_limit_stage(const SystemOfSpaces& sys, std::size_t N, double tol,
                                       const std::vector<double>& r_grid) {
    if (sys.kind != SystemOfSpaces::Kind::Inverse)
        throw std::invalid_argument("inverse_limit_stage: not an inverse system");
    if (N < 2 || N > sys.stages()) throw std::invalid_argument("inverse_limit_stage: need 2 <= N <= stages");
    if (r_grid.empty()) throw std::invalid_argument("inverse_limit_stage: empty radius grid");
    for (double r : r_grid)
        if (!(r > 0.0)) throw std::invalid_argument("inverse_limit_stage: radii must be positive");
    const SystemOfSpaces pre = prefix(sys, N);
    {
        Verdict v = verify_system(pre);
        if (!v) throw std::invalid_argument("inverse_limit_stage: system invalid: " + v.reason);
    }

    InverseLimitResult out{pre.spaces[N - 1], {}, {}};
    InverseLimitReport& rep = out.report;
    const std::vector<Thread> th = threads(pre, N, &rep.skipped_threads);
    if (th.empty()) throw std::runtime_error("inverse_limit_stage: no threads at this stage");
    const PointedSpace& top = pre.spaces[N - 1];

    bool base_compatible = true;
    for (std::size_t i = 0; i + 1 < N; ++i)
        if (pre.bonds[i].img[pre.spaces[i + 1].base()] != pre.spaces[i].base()) base_compatible = false;

    // Carrier: thread top atoms with stage-(N-1) distances. When every top
    // atom threads through, reuse the top stage wholesale (shared backend).
    std::vector<std::size_t> tops(th.size());
    for (std::size_t k = 0; k < th.size(); ++k) tops[k] = th[k][N - 1];
    bool base_present = false;
    for (std::size_t t : tops) base_present = base_present || t == top.base();
    if (tops.size() == top.size()) {
        out.limit = top;  // every atom threads through; shares the top backend
    } else {
        out.limit = restrict(top, IndexSet(std::vector<std::size_t>(tops)),
                             base_present ? top.base() : tops[0]);
    }

    for (std::size_t i = 0; i < N; ++i) {
        PointMap proj;
        proj.img.resize(th.size());
        for (std::size_t k = 0; k < th.size(); ++k) proj.img[k] = th[k][i];
        out.projections.push_back(std::move(proj));
    }

    // Spot-check that stage distances along threads are non-decreasing, so
    // the sup distance equals the stage-(N-1) value (full exhaustive proof is
    // the bond Lipschitz scan already run by verify_system).
    {
        const std::size_t T = th.size();
        const unsigned long long total_pairs =
            static_cast<unsigned long long>(T) * (T - 1) / 2ULL;
        const unsigned long long budget = 2'000'000ULL;
        if (total_pairs <= budget) {
            for (std::size_t a = 0; a < T && rep.sup_is_last_stage; ++a) {
                for (std::size_t b = a + 1; b < T; ++b) {
                    const double dn = top.dist(th[a][N - 1], th[b][N - 1]);
                    for (std::size_t i = 0; i + 1 < N; ++i) {
                        if (pre.spaces[i].dist(th[a][i], th[b][i]) > dn) {
                            rep.sup_is_last_stage = false;
                            break;
                        }
                    }
                    ++rep.checked_pairs;
                }
            }
        } else {
            Rng rng(0x6d6d6c696d6974ULL);
            for (unsigned long long k = 0; k < budget && rep.sup_is_last_stage; ++k) {
                const std::size_t a = rng.below(T);
                std::size_t b = rng.below(T);
                if (a == b) continue;
                const double dn = top.dist(th[a][N - 1], th[b][N - 1]);
                for (std::size_t i = 0; i + 1 < N; ++i) {
                    if (pre.spaces[i].dist(th[a][i], th[b][i]) > dn) {
                        rep.sup_is_last_stage = false;
                        break;
                    }
                }
                ++rep.checked_pairs;
            }
        }
    }

    rep.radii = r_grid;
    for (double r : r_grid) {
        std::vector<double> col;
        for (std::size_t i = 0; i < N; ++i)
            col.push_back(ball_mass(pre.spaces[i], pre.spaces[i].base(), r, BallKind::Open));
        for (std::size_t i = 0; i + 1 < N; ++i)
            if (col[i + 1] > col[i] + 1e-12 * (1.0 + std::fabs(col[i]))) rep.mass_nonincreasing = false;
        rep.basepoint_mass_columns.push_back(std::move(col));
    }

    bool certified_fail = false, all_bounded = true, stabilized = true;
    for (const auto& col : rep.basepoint_mass_columns) {
        bool mono = true;
        for (std::size_t i = 0; i + 1 < N; ++i)
            if (col[i + 1] > col[i] + 1e-12 * (1.0 + std::fabs(col[i]))) mono = false;
        if (mono && col[N - 1] <= tol) certified_fail = true;
        if (!(col[N - 1] > tol)) all_bounded = false;
        if (std::fabs(col[N - 1] - col[N - 2]) > 1e-9 * (1.0 + std::fabs(col[N - 1]))) stabilized = false;
    }
    if (certified_fail) {
        rep.verdict = "fail (certified at prefix)";
        rep.reason = "basepoint ball mass column decays to tol";
    } else if (!base_compatible || !base_present) {
        rep.verdict = "fail (certified at prefix)";
        rep.reason = "basepoint thread absent";
    } else if (all_bounded && stabilized) {
        rep.verdict = "pass (prefix evidence)";
    } else {
        rep.verdict = "inconclusive";
    }
    return out;
}

}  // namespace mmlimit
