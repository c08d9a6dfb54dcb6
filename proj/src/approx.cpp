#include "mmlimit/approx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mmlimit {

namespace {

void check_map_shape(const PointedSpace& X, const PointedSpace& Y, const PointMap& f,
                     const char* who) {
    if (f.img.size() != X.size())
        throw std::invalid_argument(std::string(who) + ": map length does not match source");
    for (std::size_t i : f.img)
        if (i >= Y.size()) throw std::invalid_argument(std::string(who) + ": image index out of range");
}

std::vector<std::size_t> default_order(std::size_t n, const std::vector<std::size_t>& order,
                                       const char* who) {
    if (order.empty()) {
        std::vector<std::size_t> id(n);
        for (std::size_t i = 0; i < n; ++i) id[i] = i;
        return id;
    }
    if (order.size() != n) throw std::invalid_argument(std::string(who) + ": order length mismatch");
    std::vector<bool> seen(n, false);
    for (std::size_t i : order) {
        if (i >= n || seen[i]) throw std::invalid_argument(std::string(who) + ": order is not a permutation");
        seen[i] = true;
    }
    return order;
}

std::string pair_str(std::size_t a, std::size_t b) {
    std::ostringstream os;
    os << "(" << a << "," << b << ")";
    return os.str();
}

}  // namespace

double distortion(const PointedSpace& X, const PointedSpace& Y, const PointMap& f,
                  const IndexSet& subset) {
    check_map_shape(X, Y, f, "distortion");
    if (subset.empty()) throw std::invalid_argument("distortion: empty subset");
    double worst = 0.0;
    with_distance(X, [&](auto dx) {
        with_distance(Y, [&](auto dy) {
            for (std::size_t a = 0; a < subset.size(); ++a) {
                for (std::size_t b = a + 1; b < subset.size(); ++b) {
                    const std::size_t i = subset[a], j = subset[b];
                    worst = std::max(worst, std::fabs(dx(i, j) - dy(f.img[i], f.img[j])));
                }
            }
        });
    });
    return worst;
}

Verdict verify_approximation(const PointedSpace& X, const PointedSpace& Y, const PointMap& f,
                             double R, double eps) {
    check_map_shape(X, Y, f, "verify_approximation");
    if (!(eps > 0.0 && eps < R))
        throw std::invalid_argument("verify_approximation: need 0 < eps < R");
    if (f.img[X.base()] != Y.base())
        return Verdict::fail("basepoint not preserved: psi(p_X) != p_Y");

    const IndexSet bx = ball(X, X.base(), R, BallKind::Open);
    {
        const double d = distortion(X, Y, f, bx);
        if (d > eps) {
            std::ostringstream os;
            os << "distortion " << d << " > " << eps << " on B(p_X,R)";
            return Verdict::fail(os.str());
        }
    }
    const IndexSet target = ball(Y, Y.base(), R - eps, BallKind::Open);
    Verdict out = Verdict::ok();
    with_distance(Y, [&](auto dy) {
        for (std::size_t y : target) {
            bool covered = false;
            for (std::size_t x : bx) {
                if (dy(f.img[x], y) < eps) {
                    covered = true;
                    break;
                }
            }
            if (!covered) {
                std::ostringstream os;
                os << "coverage fails: y=" << y << " in B(p_Y,R-eps) not within eps of psi(B(p_X,R))";
                out = Verdict::fail(os.str());
                return;
            }
        }
    });
    return out;
}

PointMap quasi_inverse(const PointedSpace& X, const PointedSpace& Y, const PointMap& f, double R,
                       double eps, const std::vector<std::size_t>& order_in) {
    if (!(eps > 0.0 && 4.0 * eps < R))
        throw std::invalid_argument("quasi_inverse: need 0 < 4 eps < R");
    {
        Verdict v = verify_approximation(X, Y, f, R, eps);
        if (!v) throw std::invalid_argument("quasi_inverse: input is not a verified approximation: " + v.reason);
    }
    const auto order = default_order(X.size(), order_in, "quasi_inverse");

    std::vector<std::size_t> scan;  // points of B(p_X, R), in scan order
    scan.reserve(X.size());
    std::size_t sentinel = X.base();
    bool have_sentinel = false;
    for (std::size_t x : order) {
        const double d = X.dist(X.base(), x);
        if (d < R) scan.push_back(x);
        if (!have_sentinel && d >= R - eps) {
            sentinel = x;
            have_sentinel = true;
        }
    }

    PointMap phi;
    phi.img.assign(Y.size(), sentinel);
    phi.img[Y.base()] = X.base();
    with_distance(Y, [&](auto dy) {
        for (std::size_t y = 0; y < Y.size(); ++y) {
            if (y == Y.base()) continue;
            if (!(dy(Y.base(), y) < R - eps)) continue;
            bool found = false;
            for (std::size_t x : scan) {
                if (dy(f.img[x], y) < eps) {
                    phi.img[y] = x;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw std::logic_error("quasi_inverse: no source within eps of a covered target point");
        }
    });

    // Guaranteed by the construction for verified inputs; check anyway.
    {
        Verdict v = verify_approximation(Y, X, phi, R - eps, 3.0 * eps);
        if (!v) throw std::logic_error("quasi_inverse: postcondition failed: " + v.reason);
    }
    for (std::size_t x : ball(X, X.base(), R - 4.0 * eps, BallKind::Open)) {
        if (!(X.dist(x, phi.img[f.img[x]]) < 3.0 * eps))
            throw std::logic_error("quasi_inverse: displacement bound failed on source side at " +
                                   std::to_string(x));
    }
    for (std::size_t y : ball(Y, Y.base(), R - eps, BallKind::Open)) {
        if (!(Y.dist(y, f.img[phi.img[y]]) < 3.0 * eps))
            throw std::logic_error("quasi_inverse: displacement bound failed on target side at " +
                                   std::to_string(y));
    }
    return phi;
}

Verdict verify_ball_inclusions(const PointedSpace& X, const PointedSpace& Y, const PointMap& psi,
                               const PointMap& phi, double R, double r, double rp, double eps) {
    check_map_shape(X, Y, psi, "verify_ball_inclusions");
    check_map_shape(Y, X, phi, "verify_ball_inclusions");
    if (!(eps > 0.0 && r > 3.0 * eps && rp > 0.0 && r + rp < R - 3.0 * eps))
        throw std::invalid_argument("verify_ball_inclusions: need r > 3 eps and r + r' < R - 3 eps");

    const double r3 = r - 3.0 * eps;
    for (std::size_t y : ball(Y, Y.base(), rp, BallKind::Open)) {
        const IndexSet around_phi = ball(X, phi.img[y], r, BallKind::Open);
        std::vector<std::size_t> image;
        image.reserve(around_phi.size());
        for (std::size_t x : around_phi) image.push_back(psi.img[x]);

        for (std::size_t z : ball(Y, y, r3, BallKind::Open)) {
            bool near = false;
            for (std::size_t w : image) {
                if (Y.dist(z, w) < 3.0 * eps) {
                    near = true;
                    break;
                }
            }
            if (!near)
                return Verdict::fail("forward inclusion fails at y=" + std::to_string(y) +
                                     ", z=" + std::to_string(z));
        }
        for (std::size_t x = 0; x < X.size(); ++x) {
            if (Y.dist(psi.img[x], y) < r3 && !(X.dist(x, phi.img[y]) < r + 4.0 * eps))
                return Verdict::fail("preimage inclusion fails at y=" + std::to_string(y) +
                                     ", x=" + std::to_string(x));
        }
    }
    return Verdict::ok();
}

Verdict verify_weak_approximation(const PointedSpace& X, const PointedSpace& Y, const WeakApprox& w) {
    check_map_shape(X, Y, w.map, "verify_weak_approximation");
    if (!(w.eps > 0.0 && w.eps < w.R)) return Verdict::fail("invalid parameters: need 0 < eps < R");
    if (!w.good.contains(X.base())) return Verdict::fail("good set does not contain the basepoint");
    for (std::size_t i : w.good) {
        if (i >= X.size()) return Verdict::fail("good set index out of range");
        if (!(X.dist(X.base(), i) < w.R))
            return Verdict::fail("good set leaves B(p_X,R) at index " + std::to_string(i));
    }
    if (w.map.img[X.base()] != Y.base()) return Verdict::fail("basepoint not preserved");

    double worst = 0.0;
    std::size_t wa = 0, wb = 0;
    with_distance(X, [&](auto dx) {
        with_distance(Y, [&](auto dy) {
            for (std::size_t a = 0; a < w.good.size(); ++a) {
                for (std::size_t b = a + 1; b < w.good.size(); ++b) {
                    const std::size_t i = w.good[a], j = w.good[b];
                    const double v = std::fabs(dx(i, j) - dy(w.map.img[i], w.map.img[j]));
                    if (v > worst) {
                        worst = v;
                        wa = i;
                        wb = j;
                    }
                }
            }
        });
    });
    if (worst > w.eps) {
        std::ostringstream os;
        os << "distortion " << worst << " > " << w.eps << " on good pair " << pair_str(wa, wb);
        return Verdict::fail(os.str());
    }

    const IndexSet bx = ball(X, X.base(), w.R, BallKind::Open);
    const double src_residual = mass_on(X, bx.set_difference(w.good));
    if (src_residual > w.eps) {
        std::ostringstream os;
        os << "source residual mass " << src_residual << " > " << w.eps;
        return Verdict::fail(os.str());
    }

    std::vector<std::size_t> img;
    img.reserve(w.good.size());
    for (std::size_t i : w.good) img.push_back(w.map.img[i]);
    const IndexSet image = IndexSet::from_unsorted(std::move(img));
    const IndexSet covered = neighborhood(Y, image, w.eps);
    const IndexSet by = ball(Y, Y.base(), w.R - w.eps, BallKind::Open);
    const double tgt_residual = mass_on(Y, by.set_difference(covered));
    if (tgt_residual > w.eps) {
        std::ostringstream os;
        os << "target residual mass " << tgt_residual << " > " << w.eps;
        return Verdict::fail(os.str());
    }
    return Verdict::ok();
}

WeakApprox rough_inverse_weak(const PointedSpace& X, const PointedSpace& Y, const WeakApprox& w,
                              const std::vector<std::size_t>& order_in) {
    if (!(4.0 * w.eps < w.R)) throw std::invalid_argument("rough_inverse_weak: need 4 eps < R");
    {
        Verdict v = verify_weak_approximation(X, Y, w);
        if (!v) throw std::invalid_argument("rough_inverse_weak: input not verified: " + v.reason);
    }
    const auto order = default_order(X.size(), order_in, "rough_inverse_weak");
    const double R = w.R, eps = w.eps;

    std::vector<std::size_t> good_scan;  // good set in scan order
    good_scan.reserve(w.good.size());
    std::size_t sentinel = X.base();
    bool have_sentinel = false;
    for (std::size_t x : order) {
        if (w.good.contains(x)) good_scan.push_back(x);
        if (!have_sentinel && X.dist(X.base(), x) >= R) {
            sentinel = x;
            have_sentinel = true;
        }
    }

    std::vector<std::size_t> img;
    img.reserve(w.good.size());
    for (std::size_t i : w.good) img.push_back(w.map.img[i]);
    const IndexSet y_tilde =
        neighborhood(Y, IndexSet::from_unsorted(std::move(img)), eps)
            .set_intersection(ball(Y, Y.base(), R - eps, BallKind::Open));

    PointMap phi;
    phi.img.assign(Y.size(), sentinel);
    phi.img[Y.base()] = X.base();
    for (std::size_t y : y_tilde) {
        if (y == Y.base()) continue;
        for (std::size_t x : good_scan) {
            if (Y.dist(w.map.img[x], y) < eps) {
                phi.img[y] = x;
                break;
            }
        }
    }

    WeakApprox out{std::move(phi), y_tilde, R - eps, 3.0 * eps};
    {
        Verdict v = verify_weak_approximation(Y, X, out);
        if (!v) throw std::logic_error("rough_inverse_weak: postcondition failed: " + v.reason);
    }
    for (std::size_t x : ball(X, X.base(), R - 4.0 * eps, BallKind::Open)) {
        if (!w.good.contains(x)) continue;
        if (!(X.dist(x, out.map.img[w.map.img[x]]) < 3.0 * eps))
            throw std::logic_error("rough_inverse_weak: source displacement bound failed");
    }
    for (std::size_t y : y_tilde) {
        if (!(Y.dist(y, w.map.img[out.map.img[y]]) < 3.0 * eps))
            throw std::logic_error("rough_inverse_weak: target displacement bound failed");
    }
    return out;
}

namespace {

/// One grid candidate of the weak-approximation search: the painted witness
/// and its violation magnitudes against the candidate eps.
struct Candidate {
    WeakApprox witness;
    double score = std::numeric_limits<double>::infinity();
};

struct SearchContext {
    const PointedSpace& X;
    const PointedSpace& Y;
    double R;
    std::vector<std::size_t> src_ball;   // B(p_X, R) in index order
    IndexSet src_ball_set;
    std::size_t far_sentinel_y;          // first y with d(p_Y, y) >= R, else p_Y
};

Candidate paint(const SearchContext& c, const std::vector<std::size_t>& net,
                const std::vector<std::size_t>& reps, double eps) {
    const double rad = eps / 3.0;
    const PointedSpace& X = c.X;
    const PointedSpace& Y = c.Y;

    PointMap psi;
    psi.img.assign(X.size(), c.far_sentinel_y);
    std::vector<std::size_t> good_idx;
    with_distance(X, [&](auto dx) {
        for (std::size_t i = 0; i < X.size(); ++i) {
            for (std::size_t j = 0; j < reps.size(); ++j) {
                if (dx(i, reps[j]) < rad) {
                    psi.img[i] = net[j];
                    if (dx(X.base(), i) < c.R) good_idx.push_back(i);
                    break;
                }
            }
        }
    });
    Candidate cand;
    cand.witness = WeakApprox{std::move(psi), IndexSet::from_unsorted(std::move(good_idx)), c.R, eps};

    const WeakApprox& w = cand.witness;
    double dist_v = -eps;
    if (w.good.size() >= 1) dist_v = distortion(X, Y, w.map, w.good) - eps;
    const double src_v = mass_on(X, c.src_ball_set.set_difference(w.good)) - eps;
    std::vector<std::size_t> img;
    img.reserve(w.good.size());
    for (std::size_t i : w.good) img.push_back(w.map.img[i]);
    const IndexSet covered =
        img.empty() ? IndexSet{} : neighborhood(Y, IndexSet::from_unsorted(std::move(img)), eps);
    const double tgt_v =
        mass_on(Y, ball(Y, Y.base(), c.R - eps, BallKind::Open).set_difference(covered)) - eps;
    cand.score = std::max(dist_v, std::max(src_v, tgt_v));
    return cand;
}

}  // namespace

SearchResult search_weak_approximation(const PointedSpace& X, const PointedSpace& Y,
                                       const SearchOptions& opts) {
    if (!(opts.R > 0.0)) throw std::invalid_argument("search_weak_approximation: need R > 0");
    if (!(opts.grid_ratio > 0.0 && opts.grid_ratio < 1.0))
        throw std::invalid_argument("search_weak_approximation: grid ratio must be in (0,1)");
    if (!(opts.grid_floor > 0.0))
        throw std::invalid_argument("search_weak_approximation: grid floor must be positive");

    const double diam = std::max(X.max_dist(), Y.max_dist());
    double start = opts.grid_start > 0.0 ? opts.grid_start : diam / 2.0;
    if (!(start > opts.grid_floor)) start = opts.grid_floor;
    std::vector<double> grid;
    for (double v = start; v > opts.grid_floor; v *= opts.grid_ratio) {
        if (v < opts.R) grid.push_back(v);
    }
    if (opts.grid_floor < opts.R) grid.push_back(opts.grid_floor);
    SearchResult result;
    if (grid.empty()) return result;

    SearchContext ctx{X, Y, opts.R, {}, {}, Y.base()};
    for (std::size_t x = 0; x < X.size(); ++x)
        if (X.dist(X.base(), x) < opts.R) ctx.src_ball.push_back(x);
    ctx.src_ball_set = IndexSet(std::vector<std::size_t>(ctx.src_ball));
    for (std::size_t y = 0; y < Y.size(); ++y) {
        if (Y.dist(Y.base(), y) >= opts.R) {
            ctx.far_sentinel_y = y;
            break;
        }
    }

    // Net candidates: support atoms in B(p_Y, R); the basepoint anchors the
    // net whether or not it carries mass.
    std::vector<std::size_t> net_cand;
    for (std::size_t y = 0; y < Y.size(); ++y) {
        if (y == Y.base()) continue;
        if (Y.weight(y) > 0.0 && Y.dist(Y.base(), y) < opts.R) net_cand.push_back(y);
    }

    Rng rng(opts.seed);
    const int per_grid_budget =
        std::max<int>(64, opts.budget / static_cast<int>(std::max<std::size_t>(1, grid.size())));

    bool have_best = false;
    double best_passing_eps = std::numeric_limits<double>::infinity();
    WeakApprox best_passing_witness;
    double best_passing_score = std::numeric_limits<double>::infinity();

    for (double eps : grid) {
        const double sep = eps / 6.0;

        // Farthest-point traversal seeded at the basepoint; add while the
        // farthest remaining candidate is strictly more than sep away.
        std::vector<std::size_t> net{Y.base()};
        std::vector<double> min_d(net_cand.size());
        for (std::size_t k = 0; k < net_cand.size(); ++k) min_d[k] = Y.dist(Y.base(), net_cand[k]);
        std::vector<bool> taken(net_cand.size(), false);
        for (;;) {
            std::size_t arg = net_cand.size();
            double best = sep;
            for (std::size_t k = 0; k < net_cand.size(); ++k) {
                if (taken[k]) continue;
                if (min_d[k] > best) {
                    best = min_d[k];
                    arg = k;
                }
            }
            if (arg == net_cand.size()) break;
            taken[arg] = true;
            net.push_back(net_cand[arg]);
            for (std::size_t k = 0; k < net_cand.size(); ++k)
                if (!taken[k]) min_d[k] = std::min(min_d[k], Y.dist(net_cand[arg], net_cand[k]));
        }

        // Greedy distance-profile assignment, anchored at the basepoints.
        std::vector<std::size_t> reps(net.size(), X.base());
        with_distance(X, [&](auto dx) {
            with_distance(Y, [&](auto dy) {
                for (std::size_t j = 1; j < net.size(); ++j) {
                    double best_cost = std::numeric_limits<double>::infinity();
                    std::size_t best_x = X.base();
                    for (std::size_t x : ctx.src_ball) {
                        double cost = 0.0;
                        for (std::size_t m = 0; m < j; ++m)
                            cost = std::max(cost, std::fabs(dx(x, reps[m]) - dy(net[j], net[m])));
                        if (cost < best_cost) {
                            best_cost = cost;
                            best_x = x;
                        }
                    }
                    reps[j] = best_x;
                }
            });
        });

        Candidate cur = paint(ctx, net, reps, eps);
        if (cur.score > 0.0 && net.size() >= 3) {
            for (int t = 0; t < per_grid_budget; ++t) {
                const std::size_t a = 1 + rng.below(net.size() - 1);
                std::size_t b = 1 + rng.below(net.size() - 1);
                if (a == b) continue;
                std::swap(reps[a], reps[b]);
                Candidate trial = paint(ctx, net, reps, eps);
                if (trial.score < cur.score) {
                    if (opts.keep_trace)
                        result.trace.push_back({eps, a, b, cur.score, trial.score});
                    cur = std::move(trial);
                    if (cur.score <= 0.0) break;
                } else {
                    std::swap(reps[a], reps[b]);
                }
            }
        }

        if (cur.score <= 0.0 && verify_weak_approximation(X, Y, cur.witness)) {
            best_passing_eps = eps;  // grid is descending: the last pass is the smallest
            best_passing_witness = cur.witness;
            best_passing_score = cur.score;
        }
        if (!have_best || cur.score < result.best_score) {
            have_best = true;
            result.best_score = cur.score;
            result.witness = cur.witness;
        }
    }

    if (best_passing_eps < std::numeric_limits<double>::infinity()) {
        result.passed = true;
        result.achieved_eps = best_passing_eps;
        result.witness = std::move(best_passing_witness);
        result.best_score = best_passing_score;
    }
    return result;
}

GlueResult glue(const PointedSpace& X, const PointedSpace& Y, const WeakApprox& w) {
    {
        Verdict v = verify_weak_approximation(X, Y, w);
        if (!v) throw std::invalid_argument("glue: weak approximation not verified: " + v.reason);
    }
    const std::size_t nx = X.size(), ny = Y.size(), n = nx + ny;
    PointedSpace::DenseDist dd;
    dd.n = n;
    dd.d.assign(n * n, 0.0);
    with_distance(X, [&](auto dx) {
        with_distance(Y, [&](auto dy) {
            for (std::size_t i = 0; i < nx; ++i)
                for (std::size_t j = 0; j < nx; ++j) dd.d[i * n + j] = dx(i, j);
            for (std::size_t i = 0; i < ny; ++i)
                for (std::size_t j = 0; j < ny; ++j) dd.d[(nx + i) * n + (nx + j)] = dy(i, j);
            for (std::size_t i = 0; i < nx; ++i) {
                for (std::size_t j = 0; j < ny; ++j) {
                    double cross = std::numeric_limits<double>::infinity();
                    for (std::size_t xt : w.good)
                        cross = std::min(cross, dx(xt, i) + dy(w.map.img[xt], j) + w.eps);
                    dd.d[i * n + (nx + j)] = cross;
                    dd.d[(nx + j) * n + i] = cross;
                }
            }
        });
    });
    std::vector<double> weight;
    weight.reserve(n);
    weight.insert(weight.end(), X.weights().begin(), X.weights().end());
    weight.insert(weight.end(), Y.weights().begin(), Y.weights().end());

    GlueResult out{PointedSpace(std::move(dd), std::move(weight), X.base()),
                   PointMap{}, PointMap{}};
    out.embed_x.img.resize(nx);
    for (std::size_t i = 0; i < nx; ++i) out.embed_x.img[i] = i;
    out.embed_y.img.resize(ny);
    for (std::size_t j = 0; j < ny; ++j) out.embed_y.img[j] = nx + j;
    return out;
}

}  // namespace mmlimit
