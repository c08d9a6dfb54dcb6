#include <cmath>

#include "doctest.h"
#include "mmlimit/family.hpp"
#include "mmlimit/gallery.hpp"
#include "support.hpp"

using namespace mmlimit;

namespace {

PointedSpace unit_pair() {
    DenseDist dd;
    dd.n = 2;
    dd.d = {0.0, 1.0, 1.0, 0.0};
    return PointedSpace(std::move(dd), {0.5, 0.5}, 0);
}

Measure delta_at(std::size_t i, std::size_t n) {
    Measure m;
    m.w.assign(n, 0.0);
    m.w[i] = 1.0;
    return m;
}

}  // namespace

TEST_CASE("family on a one-point space holds only the two constants") {
    DenseDist dd;
    dd.n = 1;
    dd.d = {0.0};
    const PointedSpace s(std::move(dd), {1.0}, 0);
    const TestFamily fam = build_test_family(s, 1);
    REQUIRE(fam.size() == 2);
    CHECK(fam.fns[0] == std::vector<double>{1.0});
    CHECK(fam.fns[1] == std::vector<double>{-1.0});
}

TEST_CASE("depth-2 family on the unit pair contains the (1,-1) witness") {
    const TestFamily fam = build_test_family(unit_pair(), 2);
    CHECK(fam.size() == 128);
    bool found = false;
    for (const auto& f : fam.fns) found = found || (f[0] == 1.0 && f[1] == -1.0);
    CHECK(found);
}

TEST_CASE("every emitted function respects its recorded Lipschitz constant and unit sup norm") {
    Rng rng(9);
    for (int depth : {1, 2, 3}) {
        const PointedSpace s = mmtest::random_space(rng, 10);
        const TestFamily fam = build_test_family(s, depth);
        CHECK(fam.size() <= 64 * static_cast<std::size_t>(depth));
        for (std::size_t k = 0; k < fam.size(); ++k) {
            double sup = 0.0;
            for (double v : fam.fns[k]) sup = std::max(sup, std::fabs(v));
            CHECK(sup == 1.0);
            for (std::size_t i = 0; i < s.size(); ++i)
                for (std::size_t j = i + 1; j < s.size(); ++j)
                    CHECK(std::fabs(fam.fns[k][i] - fam.fns[k][j]) <=
                          fam.lip[k] * s.dist(i, j) + 1e-12);
        }
    }
}

TEST_CASE("family enumeration is deterministic in (host, depth)") {
    const TestFamily a = build_test_family(gen_uniform_simplex(6), 2);
    const TestFamily b = build_test_family(gen_uniform_simplex(6), 2);
    CHECK(a.fns == b.fns);
    CHECK(a.lip == b.lip);
}

TEST_CASE("integrate is the finite sum") {
    CHECK(integrate({1.0, 1.0, 1.0}, Measure{{0.2, 0.2, 0.3}}) == doctest::Approx(0.7));
    CHECK(integrate({0.0, 0.0}, Measure{{0.5, 0.5}}) == 0.0);
    CHECK(integrate({1.0, -1.0}, Measure{{0.25, 0.75}}) == -0.5);
    CHECK_THROWS_AS(integrate({1.0}, Measure{{0.5, 0.5}}), std::invalid_argument);
}

TEST_CASE("delta metric: pseudometric laws hold exactly") {
    const PointedSpace host = unit_pair();
    const TestFamily fam = build_test_family(host, 2);
    const Measure dx = delta_at(0, 2), dy = delta_at(1, 2);

    CHECK(delta_metric(dx, dx, fam) == 0.0);

    // brute-force oracle over the enumerated family
    double expect = 0.0;
    for (std::size_t k = 0; k < fam.size(); ++k)
        expect += std::ldexp(std::fabs(fam.fns[k][0] - fam.fns[k][1]), -static_cast<int>(k) - 1);
    CHECK(delta_metric(dx, dy, fam) == expect);
    CHECK(expect > 0.1);  // the family separates the two atoms decisively

    CHECK(delta_metric(dx, dy, fam) == delta_metric(dy, dx, fam));

    const Measure dx2{{2.0, 0.0}}, dy2{{0.0, 2.0}};
    CHECK(delta_metric(dx2, dy2, fam) == 2.0 * delta_metric(dx, dy, fam));

    // triangle holds per term on the computed integrals; aggregation rounding
    // can shave equality cases by a couple of ulps, nothing more
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        const Measure a{mmtest::random_dyadic_weights(rng, 2, true)};
        const Measure b{mmtest::random_dyadic_weights(rng, 2, true)};
        const Measure c{mmtest::random_dyadic_weights(rng, 2, true)};
        CHECK(delta_metric(a, c, fam) <=
              (delta_metric(a, b, fam) + delta_metric(b, c, fam)) * (1.0 + 1e-13));
        CHECK(delta_metric(a, b, fam) == delta_metric(b, a, fam));
    }
}

TEST_CASE("delta separates measures on small gallery hosts at depth 2") {
    Rng rng(77);
    const PointedSpace hosts[] = {gen_uniform_simplex(4), gen_uniform_simplex(12),
                                  gen_doubling_grid(9, 1.0), gen_prokhorov_sharp(3, 3).host};
    for (const PointedSpace& host : hosts) {
        const TestFamily fam = build_test_family(host, 2);
        for (int t = 0; t < 60; ++t) {
            Measure a{mmtest::random_dyadic_weights(rng, host.size(), true)};
            Measure b{mmtest::random_dyadic_weights(rng, host.size(), true)};
            double diff = 0.0;
            for (std::size_t i = 0; i < host.size(); ++i)
                diff = std::max(diff, std::fabs(a.w[i] - b.w[i]));
            if (diff > 1e-9) CHECK(delta_metric(a, b, fam) > 1e-12);
        }
    }
}

TEST_CASE("asymptotically Cauchy proxy over finite prefixes") {
    const PointedSpace host = unit_pair();
    const TestFamily fam = build_test_family(host, 2);

    std::vector<Measure> constant(6, delta_at(0, 2));
    const CauchyReport always = is_asymptotically_cauchy(constant, fam, {0.5, 0.1, 1e-6});
    CHECK(always.pass);
    for (std::size_t n : always.tail_index) CHECK(n == 0);

    std::vector<Measure> drifting;
    for (int i = 1; i <= 40; ++i) {
        Measure m;
        m.w = {1.0 / i, 1.0 - 1.0 / i};
        drifting.push_back(std::move(m));
    }
    // delta gaps shrink like C/i: everything above the last-gap scale passes
    CHECK(is_asymptotically_cauchy(drifting, fam, {0.5, 0.1, 0.02}).pass);

    std::vector<Measure> alternating;
    for (int i = 0; i < 10; ++i) alternating.push_back(delta_at(i % 2, 2));
    const double gap = delta_metric(delta_at(0, 2), delta_at(1, 2), fam);
    const CauchyReport alt = is_asymptotically_cauchy(alternating, fam, {2.0 * gap, 0.5 * gap});
    CHECK(!alt.pass);
    CHECK(alt.failed_eps == 0.5 * gap);
    CHECK(alt.viol_delta == gap);
}

TEST_CASE("weak limit with portmanteau report") {
    const PointedSpace host = gen_uniform_simplex(3);
    const TestFamily fam = build_test_family(host, 2);

    std::vector<Measure> constant(5, Measure{{0.2, 0.3, 0.5}});
    WeakLimitReport rep;
    const auto lim = weak_limit(host, constant, fam, 1e-9, &rep);
    REQUIRE(lim.has_value());
    CHECK(lim->w == constant[0].w);
    for (const BallSemicontinuityRow& row : rep.balls) {
        CHECK(row.open_ok);
        CHECK(row.closed_ok);
    }

    // interpolate toward a target and hold it over the tail window
    std::vector<Measure> drifting;
    const std::vector<double> target{0.1, 0.6, 0.3};
    for (int i = 0; i < 50; ++i) {
        const double t = std::min(1.0, i / 20.0);
        Measure m;
        m.w = {0.5 + t * (target[0] - 0.5), 0.5 + t * (target[1] - 0.5), t * target[2]};
        drifting.push_back(std::move(m));
    }
    const auto lim2 = weak_limit(host, drifting, fam, 1e-9, &rep);
    REQUIRE(lim2.has_value());
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(lim2->w[i] - target[i]) <= 1e-9);

    std::vector<Measure> alternating;
    for (int i = 0; i < 8; ++i)
        alternating.push_back(Measure{{i % 2 ? 1.0 : 0.0, i % 2 ? 0.0 : 1.0, 0.0}});
    const auto none = weak_limit(host, alternating, fam, 1e-3, &rep);
    CHECK(!none.has_value());
    CHECK(rep.worst_oscillation == 1.0);
}

TEST_CASE("prokhorov tightness greedy certificate") {
    const PointedSpace simplex = gen_uniform_simplex(50);
    const std::vector<Measure> single{Measure{simplex.weights()}};

    const TightnessResult spt = prokhorov_tightness(simplex, single, 1.0001);
    CHECK(spt.pass);

    const TightnessResult half = prokhorov_tightness(simplex, single, 0.5);
    CHECK(half.pass);
    CHECK(half.centers.size() >= 25);  // the i/2 lower bound
    CHECK(half.cover_size == half.T.size());

    // a sequence escaping along levels: the n=2 subfamily of the sharpness
    // gallery needs one ball per basis column it retains
    const ProkhorovSharpFixture fx = gen_prokhorov_sharp(64, 3);
    std::vector<Measure> sub;
    for (std::size_t k = 1; k <= fx.J; ++k) sub.push_back(fx.measures[1 * fx.J + (k - 1)]);  // n = 2
    const TightnessResult tr = prokhorov_tightness(fx.host, sub, 0.5);
    CHECK(tr.pass);
    CHECK(tr.centers.size() == 32);
}

TEST_CASE("measure lifting along verified approximations") {
    // identity stages: lifted measure equals the target, c = 1
    const PointedSpace s = gen_uniform_simplex(4);
    std::vector<LiftStage> stages;
    for (int i = 0; i < 3; ++i) stages.push_back({&s, PointMap::identity(4), 3.0, 0.5});
    std::vector<std::pair<std::size_t, double>> atoms{{0, 0.25}, {1, 0.25}, {2, 0.25}, {3, 0.25}};
    LiftReport rep;
    const std::vector<Measure> lifted = lift_measure(stages, s, atoms, &rep);
    for (const Measure& m : lifted)
        for (std::size_t i = 0; i < 4; ++i) CHECK(m.w[i] == 0.25);
    for (double c : rep.c) CHECK(c == 1.0);
    CHECK(rep.c_tail_nondecreasing);
}

TEST_CASE("measure lifting from refining grids hits the endpoint atoms") {
    const PointedSpace host = mmtest::uniform_line_grid(65, 1.0);
    std::vector<PointedSpace> grids;
    for (int i = 2; i <= 6; ++i) grids.push_back(mmtest::uniform_line_grid((1u << i) + 1, 1.0));
    std::vector<LiftStage> stages;
    for (int i = 2; i <= 6; ++i) {
        const std::size_t stride = std::size_t{1} << (6 - i);
        PointMap incl;
        incl.img.resize(grids[static_cast<std::size_t>(i - 2)].size());
        for (std::size_t j = 0; j < incl.img.size(); ++j) incl.img[j] = j * stride;
        stages.push_back(
            {&grids[static_cast<std::size_t>(i - 2)], incl, 2.0, 1.0 / static_cast<double>(i)});
    }
    std::vector<std::pair<std::size_t, double>> two{{0, 0.5}, {64, 0.5}};
    LiftReport rep;
    const std::vector<Measure> lifted = lift_measure(stages, host, two, &rep);
    REQUIRE(lifted.size() == 5);
    for (const auto& J : rep.J) CHECK(J.size() == 2);
    for (double c : rep.c) CHECK(c == 1.0);
    CHECK(rep.prefix_stable_from[1] == 0);

    // envelope: |c_i . f(push) - f(target)| is controlled by the tracked
    // prefix terms plus twice the dropped-atom mass (sup|f| = 1), for every
    // prefix length; here also the Lipschitz form since everything is covered
    const TestFamily fam = build_test_family(host, 2);
    const Measure target{[&] {
        std::vector<double> w(65, 0.0);
        w[0] = 0.5;
        w[64] = 0.5;
        return w;
    }()};
    for (std::size_t si = 0; si < stages.size(); ++si) {
        const Measure push = pushforward(lifted[si], stages[si].psi, host.size());
        std::vector<std::size_t> rep_img(two.size());  // psi(x^i_j) per rank
        for (std::size_t j = 0; j < two.size(); ++j) {
            for (std::size_t x = 0; x < lifted[si].size(); ++x)
                if (lifted[si].w[x] > 0.0 &&
                    host.dist(stages[si].psi.img[x], two[j].first) < stages[si].eps)
                    rep_img[j] = stages[si].psi.img[x];
        }
        for (std::size_t k = 0; k < fam.size(); ++k) {
            const double got = integrate(fam.fns[k], push);
            const double want = integrate(fam.fns[k], target);
            CHECK(std::fabs(got - want) <= fam.lip[k] * stages[si].eps + 1e-12);
            for (std::size_t prefix = 1; prefix <= two.size(); ++prefix) {
                double tracked = 0.0, dropped = 0.0;
                for (std::size_t j = 0; j < two.size(); ++j) {
                    const double term =
                        two[j].second * (fam.fns[k][rep_img[j]] - fam.fns[k][two[j].first]);
                    if (j < prefix) {
                        tracked += term;
                    } else {
                        dropped += two[j].second;
                    }
                }
                CHECK(std::fabs(rep.c[si] * got - want) <=
                      std::fabs(tracked) + 2.0 * dropped + 1e-12);
            }
        }
    }
}

TEST_CASE("measure lifting flags atoms outside every image neighborhood") {
    // atoms at 0, 1/2, 1; everything based at the left end so the coarse map
    // below preserves basepoints
    const PointedSpace host = mmtest::uniform_line_grid(3, 1.0).rebased(0);
    std::vector<PointedSpace> grids;
    for (int t = 0; t < 4; ++t) grids.push_back(mmtest::uniform_line_grid(17, 1.0).rebased(0));
    std::vector<LiftStage> stages;
    for (int t = 0; t < 4; ++t) {
        PointMap psi;
        psi.img.resize(17);
        for (std::size_t j = 0; j < 17; ++j) psi.img[j] = (j / 16.0) < 0.5 ? 0 : 2;
        stages.push_back({&grids[static_cast<std::size_t>(t)], psi, 2.0, 1.0});
    }
    // the middle atom (rank 2 in this order) is shadowed by ranks 0 and 1
    std::vector<std::pair<std::size_t, double>> target{{0, 0.5}, {2, 0.25}, {1, 0.25}};
    LiftReport rep;
    lift_measure(stages, host, target, &rep);
    CHECK(rep.prefix_stable_from[1] == 0);
    CHECK(rep.prefix_stable_from[2] == -1);
    for (double c : rep.c) CHECK(c == 0.75);
}
