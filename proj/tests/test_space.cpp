#include <cmath>

#include "doctest.h"
#include "mmlimit/gallery.hpp"
#include "mmlimit/space.hpp"
#include "support.hpp"

using namespace mmlimit;

namespace {

PointedSpace two_point(double d, double w0 = 1.0, double w1 = 1.0) {
    DenseDist dd;
    dd.n = 2;
    dd.d = {0.0, d, d, 0.0};
    return PointedSpace(std::move(dd), {w0, w1}, 0);
}

PointedSpace three_point_line(double d01, double d12, double d02) {
    DenseDist dd;
    dd.n = 3;
    dd.d = {0.0, d01, d02, d01, 0.0, d12, d02, d12, 0.0};
    return PointedSpace(std::move(dd), {1.0, 1.0, 1.0}, 0);
}

}  // namespace

TEST_CASE("validate_space accepts axioms and reports violations with indices") {
    CHECK(validate_space(two_point(1.0)).empty());

    const ValidationReport zero = validate_space(two_point(0.0));
    REQUIRE(!zero.empty());
    CHECK(zero.violations[0].code == "positivity");
    CHECK(zero.violations[0].i == 0);
    CHECK(zero.violations[0].j == 1);

    const ValidationReport tri = validate_space(three_point_line(1.0, 1.0, 3.0));
    bool found = false;
    for (const Violation& v : tri.violations)
        if (v.code == "triangle" && v.i == 0 && v.j == 2) found = true;
    CHECK(found);

    DenseDist asym;
    asym.n = 2;
    asym.d = {0.0, 1.0, 2.0, 0.0};
    const ValidationReport rep = validate_space(PointedSpace(std::move(asym), {1.0, 1.0}, 0));
    bool sym = false;
    for (const Violation& v : rep.violations) sym = sym || v.code == "symmetry";
    CHECK(sym);

    CHECK(!validate_space(two_point(1.0, -0.5)).empty());
}

TEST_CASE("support collects the positive atoms") {
    DenseDist dd;
    dd.n = 3;
    dd.d = {0, 1, 1, 1, 0, 1, 1, 1, 0};
    const PointedSpace s(std::move(dd), {0.0, 0.3, 0.7}, 0);
    CHECK(support(s) == IndexSet({1, 2}));

    DenseDist z;
    z.n = 2;
    z.d = {0, 1, 1, 0};
    CHECK(support(PointedSpace(std::move(z), {0.0, 0.0}, 0)).empty());

    CHECK(support(gen_uniform_simplex(5)) == IndexSet::full(5));
}

TEST_CASE("balls use exact boundary comparisons") {
    const PointedSpace s = gen_uniform_simplex(4);
    CHECK(ball(s, 2, 1.0, BallKind::Open) == IndexSet({2}));
    CHECK(ball(s, 2, 1.5, BallKind::Open) == IndexSet::full(4));
    CHECK(ball(s, 2, 1.0, BallKind::Closed) == IndexSet::full(4));
    CHECK(ball(s, 1, 0.0001, BallKind::Closed) == IndexSet({1}));
    CHECK_THROWS_AS(ball(s, 0, 0.0, BallKind::Open), std::invalid_argument);
}

TEST_CASE("neighborhood agrees with ball unions") {
    Rng rng(11);
    const PointedSpace s = mmtest::random_space(rng, 12);
    CHECK(neighborhood(s, IndexSet({3}), 0.5) == ball(s, 3, 0.5, BallKind::Open));
    CHECK(neighborhood(s, IndexSet::full(s.size()), 0.25) == IndexSet::full(s.size()));
    CHECK(neighborhood(s, IndexSet{}, 1.0).empty());

    const IndexSet a({1, 4, 7});
    IndexSet expect;
    for (std::size_t c : a) expect = expect.set_union(ball(s, c, 0.4, BallKind::Open));
    CHECK(neighborhood(s, a, 0.4) == expect);
}

TEST_CASE("ball_mass sums the selected atoms") {
    const PointedSpace s = gen_uniform_simplex(4);
    CHECK(ball_mass(s, 1, 1.0, BallKind::Open) == 0.25);
    CHECK(ball_mass(s, 1, 50.0, BallKind::Closed) == s.total_mass());

    DenseDist z;
    z.n = 2;
    z.d = {0, 1, 1, 0};
    CHECK(ball_mass(PointedSpace(std::move(z), {0.0, 0.0}, 0), 0, 5.0, BallKind::Open) == 0.0);
}

TEST_CASE("rescale divides distances and composes up to one rounding") {
    const PointedSpace g = gen_doubling_grid(9, 1.0);
    const PointedSpace same = rescale(g, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < g.size(); ++j) CHECK(same.dist(i, j) == g.dist(i, j));

    const PointedSpace doubled = rescale(g, 0.5);
    CHECK(doubled.dist(0, 8) == 2.0);
    CHECK(ball(doubled, 4, 2.0, BallKind::Open) == ball(g, 4, 1.0, BallKind::Open));

    const PointedSpace halved = rescale(g, 2.0);
    CHECK(halved.dist(0, 8) == 0.5);

    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const PointedSpace s = mmtest::random_space(rng, 8);
        const double a = 0.3 + rng.unit(), b = 0.3 + rng.unit();
        const PointedSpace two_step = rescale(rescale(s, a), b);
        const PointedSpace one_step = rescale(s, a * b);
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j = 0; j < s.size(); ++j) {
                const double u = two_step.dist(i, j), v = one_step.dist(i, j);
                if (v != 0.0) CHECK(std::fabs(u - v) / v <= 1e-15);
            }
        }
    }
    CHECK_THROWS_AS(rescale(g, 0.0), std::invalid_argument);
}

TEST_CASE("normalize_at_basepoint divides by the basepoint ball mass") {
    const PointedSpace s = gen_uniform_simplex(4);
    const PointedSpace t = normalize_at_basepoint(s, 0.5);
    for (std::size_t i = 0; i < 4; ++i) CHECK(t.weight(i) == 1.0);
    CHECK(t.dist(0, 1) == 2.0);

    const PointedSpace whole = normalize_at_basepoint(s, 10.0);  // ball is everything, mass 1
    CHECK(whole.weight(0) == s.weight(0) / s.total_mass());

    DenseDist dd;
    dd.n = 2;
    dd.d = {0, 1, 1, 0};
    const PointedSpace zero_base(std::move(dd), {0.0, 1.0}, 0);
    CHECK_THROWS_AS(normalize_at_basepoint(zero_base, 0.5), std::invalid_argument);
}

TEST_CASE("restrict keeps the induced structure") {
    Rng rng(7);
    const PointedSpace s = mmtest::random_space(rng, 10, true);
    const PointedSpace full = restrict(s, IndexSet::full(s.size()), s.base());
    CHECK(full.size() == s.size());
    CHECK(full.dist(2, 7) == s.dist(2, 7));
    CHECK(full.base() == s.base());

    const PointedSpace single = restrict(s, IndexSet({3}), 3);
    CHECK(single.size() == 1);
    CHECK(single.weight(0) == s.weight(3));

    const IndexSet spt = support(s);
    const PointedSpace on_spt = restrict(s, spt, s.base() < s.size() && s.weight(s.base()) > 0
                                                     ? s.base()
                                                     : spt[0]);
    CHECK(support(on_spt) == IndexSet::full(on_spt.size()));

    CHECK_THROWS_AS(restrict(s, IndexSet({1, 2}), 5), std::invalid_argument);
}

TEST_CASE("pushforward sums preimage masses and preserves dyadic totals") {
    const Measure m{{0.2, 0.3, 0.5}};
    const Measure id = pushforward(m, PointMap::identity(3), 3);
    CHECK(id.w == m.w);

    const Measure collapsed = pushforward(m, PointMap{{0, 0, 0}}, 1);
    CHECK(collapsed.w[0] == 1.0);

    Rng rng(23);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + rng.below(12);
        Measure mu{mmtest::random_dyadic_weights(rng, n, true)};
        PointMap f;
        f.img.resize(n);
        const std::size_t k = 1 + rng.below(n);
        for (std::size_t i = 0; i < n; ++i) f.img[i] = rng.below(k);
        CHECK(pushforward(mu, f, k).total() == mu.total());
    }
}

TEST_CASE("space_hash is stable across regeneration and sensitive to content") {
    const PointedSpace a = gen_uniform_simplex(6);
    const PointedSpace b = gen_uniform_simplex(6);
    CHECK(space_hash(a) == space_hash(b));
    CHECK(space_hash(a) != space_hash(gen_uniform_simplex(7)));
    CHECK(space_hash(a) != space_hash(a.rebased(1)));
}
