#include <cmath>

#include "doctest.h"
#include "mmlimit/approx.hpp"
#include "mmlimit/gallery.hpp"
#include "support.hpp"

using namespace mmlimit;

namespace {

PointedSpace pair_space(double d) {
    DenseDist dd;
    dd.n = 2;
    dd.d = {0.0, d, d, 0.0};
    return PointedSpace(std::move(dd), {0.5, 0.5}, 0);
}

PointedSpace one_point(double mass) {
    DenseDist dd;
    dd.n = 1;
    dd.d = {0.0};
    return PointedSpace(std::move(dd), {mass}, 0);
}

}  // namespace

TEST_CASE("distortion over subsets") {
    Rng rng(3);
    const PointedSpace s = mmtest::random_space(rng, 9);
    CHECK(distortion(s, s, PointMap::identity(s.size()), IndexSet::full(s.size())) == 0.0);
    CHECK(distortion(s, s, PointMap::identity(s.size()), IndexSet({4})) == 0.0);

    const PointedSpace a = pair_space(1.0), b = pair_space(1.2);
    CHECK(distortion(a, b, PointMap::identity(2), IndexSet::full(2)) ==
          doctest::Approx(0.2).epsilon(1e-12));

    const PointedSpace simplex = gen_uniform_simplex(4);
    const PointedSpace pt = one_point(1.0);
    CHECK(distortion(simplex, pt, PointMap{{0, 0, 0, 0}}, IndexSet::full(4)) == 1.0);
}

TEST_CASE("verify_approximation checks basepoint, distortion, coverage") {
    const PointedSpace a = pair_space(1.0), b = pair_space(1.2);
    CHECK(verify_approximation(a, a, PointMap::identity(2), 3.0, 0.1).pass);
    CHECK(verify_approximation(a, b, PointMap::identity(2), 2.0, 0.2).pass);

    const Verdict v = verify_approximation(a, b, PointMap::identity(2), 2.0, 0.1);
    CHECK(!v.pass);
    CHECK(v.reason.find("distortion") != std::string::npos);

    // basepoint not preserved
    CHECK(!verify_approximation(a, b, PointMap{{1, 0}}, 2.0, 0.2).pass);
    CHECK_THROWS_AS(verify_approximation(a, b, PointMap::identity(2), 0.1, 0.2),
                    std::invalid_argument);
}

TEST_CASE("quasi_inverse on the worked pair and small identity case") {
    const PointedSpace a = pair_space(1.0), b = pair_space(1.2);
    const PointMap phi = quasi_inverse(a, b, PointMap::identity(2), 2.0, 0.2);
    CHECK(phi.img == std::vector<std::size_t>{0, 1});

    // identity on a small-diameter space: phi finds a point within eps
    Rng rng(17);
    const PointedSpace s = mmtest::random_space(rng, 6);
    const double eps = s.max_dist() / 8.0;
    const PointMap inv = quasi_inverse(s, s, PointMap::identity(s.size()), 4.0 * s.max_dist(), eps);
    for (std::size_t y = 0; y < s.size(); ++y) CHECK(s.dist(y, inv.img[y]) < eps);

    CHECK_THROWS_AS(quasi_inverse(a, b, PointMap::identity(2), 2.0, 0.6), std::invalid_argument);
}

TEST_CASE("quasi_inverse contract over seeded random instances") {
    Rng rng(101);
    for (int t = 0; t < 25; ++t) {
        const mmtest::ApproxInstance inst = mmtest::random_approx_instance(rng, 16);
        REQUIRE(verify_approximation(inst.X, inst.Y, inst.psi, inst.R, inst.eps).pass);
        // construction asserts the (R-eps, 3eps) contract and both strict
        // displacement bounds internally
        CHECK_NOTHROW(quasi_inverse(inst.X, inst.Y, inst.psi, inst.R, inst.eps));
    }
}

TEST_CASE("ball inclusion lemma holds for quasi-inverse pairs and fails when corrupted") {
    Rng rng(202);
    int checked = 0;
    while (checked < 12) {
        const mmtest::ApproxInstance inst = mmtest::random_approx_instance(rng, 14);
        if (!(inst.R > 6.6 * inst.eps)) continue;
        const PointMap phi = quasi_inverse(inst.X, inst.Y, inst.psi, inst.R, inst.eps);
        const double r = 3.25 * inst.eps;
        const double rp = 0.5 * (inst.R - 3.0 * inst.eps - r);
        REQUIRE(rp > 0.0);
        CHECK(verify_ball_inclusions(inst.X, inst.Y, inst.psi, phi, inst.R, r, rp, inst.eps).pass);
        ++checked;
    }

    // corrupt one phi entry: map a near-basepoint target to the farthest source
    Rng rng2(303);
    for (int t = 0; t < 20; ++t) {
        const mmtest::ApproxInstance inst = mmtest::random_approx_instance(rng2, 12);
        if (!(inst.R > 6.6 * inst.eps)) continue;
        PointMap phi = quasi_inverse(inst.X, inst.Y, inst.psi, inst.R, inst.eps);
        const double r = 3.25 * inst.eps;
        const double rp = 0.5 * (inst.R - 3.0 * inst.eps - r);
        const IndexSet near = ball(inst.Y, inst.Y.base(), rp, BallKind::Open);
        std::size_t far_x = 0;
        double far_d = -1.0;
        for (std::size_t x = 0; x < inst.X.size(); ++x) {
            double lo = 1e300;
            for (std::size_t y : near) lo = std::min(lo, inst.X.dist(x, phi.img[y]));
            if (lo > far_d) {
                far_d = lo;
                far_x = x;
            }
        }
        if (far_d <= r + 4.0 * inst.eps) continue;  // no corruption possible this round
        std::size_t victim = near[near.size() - 1];
        if (victim == inst.Y.base() && near.size() > 1) victim = near[0];
        if (victim == inst.Y.base()) continue;
        phi.img[victim] = far_x;
        CHECK(!verify_ball_inclusions(inst.X, inst.Y, inst.psi, phi, inst.R, r, rp, inst.eps).pass);
        break;
    }
}

TEST_CASE("weak verification: strict implies weak, residuals counted") {
    Rng rng(404);
    for (int t = 0; t < 10; ++t) {
        const mmtest::ApproxInstance inst = mmtest::random_approx_instance(rng, 12);
        WeakApprox w{inst.psi, ball(inst.X, inst.X.base(), inst.R, BallKind::Open), inst.R, inst.eps};
        CHECK(verify_weak_approximation(inst.X, inst.Y, w).pass);
    }

    // simplex to a single point: everything rides on the source residual
    const PointedSpace simplex = gen_uniform_simplex(10);
    const PointedSpace pt = one_point(1.0);
    WeakApprox collapse{PointMap{std::vector<std::size_t>(10, 0)}, IndexSet({0}), 2.0, 0.5};
    const Verdict bad = verify_weak_approximation(simplex, pt, collapse);
    CHECK(!bad.pass);
    CHECK(bad.reason.find("source residual") != std::string::npos);
    collapse.eps = 0.9;
    CHECK(verify_weak_approximation(simplex, pt, collapse).pass);

    // identity with full good set passes at tiny eps
    WeakApprox idw{PointMap::identity(10), IndexSet::full(10), 2.0, 1e-9};
    CHECK(verify_weak_approximation(simplex, simplex, idw).pass);
}

TEST_CASE("rough inverse of weak approximations") {
    const PointedSpace simplex = gen_uniform_simplex(8);
    WeakApprox idw{PointMap::identity(8), IndexSet::full(8), 3.0, 0.25};
    const WeakApprox back = rough_inverse_weak(simplex, simplex, idw);
    CHECK(back.R == 2.75);
    CHECK(back.eps == 0.75);
    for (std::size_t y : back.good) CHECK(simplex.dist(y, back.map.img[y]) < 0.25);

    Rng rng(505);
    for (int t = 0; t < 25; ++t) {
        const mmtest::ApproxInstance inst = mmtest::random_approx_instance(rng, 14);
        WeakApprox w{inst.psi, ball(inst.X, inst.X.base(), inst.R, BallKind::Open), inst.R, inst.eps};
        CHECK_NOTHROW(rough_inverse_weak(inst.X, inst.Y, w));  // asserts its own contract
    }

    // degenerate: the effective good set of the inverse is just the
    // basepoint; accepted because the residual masses stay within 3 eps
    const PointedSpace s3 = gen_uniform_simplex(3);
    WeakApprox tiny{PointMap::identity(3), IndexSet({0}), 4.0, 0.9};
    REQUIRE(verify_weak_approximation(s3, s3, tiny).pass);
    const WeakApprox deg = rough_inverse_weak(s3, s3, tiny);
    CHECK(deg.good == IndexSet({0}));
    CHECK(verify_weak_approximation(s3, s3, deg).pass);
}

TEST_CASE("search finds self-approximations down to the grid floor") {
    Rng rng(606);
    const PointedSpace s = mmtest::random_space(rng, 9, true);
    SearchOptions opts;
    opts.R = 2.0 * s.max_dist() + 1.0;
    opts.seed = 42;
    const SearchResult res = search_weak_approximation(s, s, opts);
    CHECK(res.passed);
    CHECK(res.achieved_eps <= opts.grid_floor);
    for (std::size_t x : support(s)) CHECK(res.witness.map.img[x] == x);
}

TEST_CASE("search on simplex vs point is hopeless below the mass bound") {
    const PointedSpace simplex = gen_uniform_simplex(50);
    const PointedSpace pt = one_point(1.0);
    SearchOptions opts;
    opts.R = 2.0;
    const SearchResult res = search_weak_approximation(simplex, pt, opts);
    CHECK(!res.passed);
    CHECK(std::isinf(res.achieved_eps));
    // best witness: good = {p}, residual 49/50 against the largest grid eps 0.5
    CHECK(res.best_score == doctest::Approx(49.0 / 50.0 - 0.5).epsilon(1e-9));
}

TEST_CASE("search matches a coarse grid against a fine one at the hand bound") {
    const PointedSpace fine = mmtest::uniform_line_grid(33, 1.0);
    const PointedSpace coarse = mmtest::uniform_line_grid(5, 1.0);
    SearchOptions opts;
    opts.R = 2.0;
    opts.seed = 7;
    const SearchResult res = search_weak_approximation(fine, coarse, opts);
    CHECK(res.passed);
    CHECK(res.achieved_eps <= 0.3);
}

TEST_CASE("search is deterministic given the seed") {
    const PointedSpace fine = mmtest::uniform_line_grid(17, 1.0);
    const PointedSpace coarse = mmtest::uniform_line_grid(5, 1.0);
    SearchOptions opts;
    opts.R = 2.0;
    opts.seed = 99;
    const SearchResult a = search_weak_approximation(fine, coarse, opts);
    const SearchResult b = search_weak_approximation(fine, coarse, opts);
    CHECK(a.achieved_eps == b.achieved_eps);
    CHECK(a.witness.map.img == b.witness.map.img);
    CHECK(a.witness.good == b.witness.good);
    CHECK(a.best_score == b.best_score);
}

TEST_CASE("glue produces a valid common space with isometric parts") {
    const PointedSpace s = gen_uniform_simplex(5);
    WeakApprox idw{PointMap::identity(5), IndexSet::full(5), 3.0, 0.25};
    const GlueResult gr = glue(s, s, idw);
    CHECK(gr.space.size() == 10);
    CHECK(validate_space(gr.space).empty());
    for (std::size_t x = 0; x < 5; ++x)
        CHECK(gr.space.dist(gr.embed_x.img[x], gr.embed_y.img[x]) == 0.25);
    for (std::size_t x = 0; x < 5; ++x)
        for (std::size_t y = 0; y < 5; ++y)
            if (x != y)
                CHECK(gr.space.dist(gr.embed_x.img[x], gr.embed_y.img[y]) == s.dist(x, y) + 0.25);

    const PointedSpace a = pair_space(1.0), b = pair_space(1.2);
    WeakApprox w{PointMap::identity(2), IndexSet::full(2), 2.0, 0.2};
    const GlueResult two = glue(a, b, w);
    CHECK(validate_space(two.space).empty());
    CHECK(distortion(a, two.space, two.embed_x, IndexSet::full(2)) == 0.0);
    CHECK(distortion(b, two.space, two.embed_y, IndexSet::full(2)) == 0.0);

    Rng rng(707);
    for (int t = 0; t < 20; ++t) {
        const mmtest::ApproxInstance inst = mmtest::random_approx_instance(rng, 10);
        WeakApprox ww{inst.psi, ball(inst.X, inst.X.base(), inst.R, BallKind::Open), inst.R, inst.eps};
        const GlueResult g = glue(inst.X, inst.Y, ww);
        CHECK(validate_space(g.space).empty());
        CHECK(distortion(inst.X, g.space, g.embed_x, IndexSet::full(inst.X.size())) == 0.0);
        CHECK(distortion(inst.Y, g.space, g.embed_y, IndexSet::full(inst.Y.size())) == 0.0);
        for (std::size_t xt : ww.good)
            CHECK(g.space.dist(g.embed_x.img[xt], g.embed_y.img[ww.map.img[xt]]) <= ww.eps);
    }
}
