#include "mmlimit/gallery.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mmlimit/convergence.hpp"

namespace mmlimit {

namespace {

std::string ejk_label(std::size_t j, std::size_t k) {
    std::ostringstream os;
    os << "e" << j << "/" << k;
    return os.str();
}

}  // namespace

PointedSpace gen_uniform_simplex(std::size_t i) {
    if (i < 1) throw std::invalid_argument("gen_uniform_simplex: need i >= 1");
    PointedSpace::DenseDist dd;
    dd.n = i;
    dd.d.assign(i * i, 1.0);
    for (std::size_t k = 0; k < i; ++k) dd.d[k * i + k] = 0.0;
    std::vector<double> w(i, 1.0 / static_cast<double>(i));
    return PointedSpace(std::move(dd), std::move(w), 0);
}

std::vector<GalleryFact> simplex_facts(std::size_t i) {
    const PointedSpace s = gen_uniform_simplex(i);
    std::vector<GalleryFact> facts;
    if (i >= 2) {
        facts.push_back({"open unit ball at any point is a singleton",
                         ball(s, 0, 1.0, BallKind::Open) == IndexSet({0})});
        facts.push_back({"open 1.5-ball is everything",
                         ball(s, 0, 1.5, BallKind::Open) == IndexSet::full(i)});
        facts.push_back({"open unit ball mass equals one atom",
                         ball_mass(s, 0, 1.0, BallKind::Open) == s.weight(0)});
        const std::size_t m_fail = (i + 1) / 2 - 1;  // largest M < i/2
        facts.push_back({"mass-count certificate fires below i/2 centers at (2,1,1/2)",
                         m_fail == 0 || cover_failure_certificate(s, 2.0, 1.0, m_fail, 0.5)});
    } else {
        facts.push_back({"single point carries the whole mass", s.weight(0) == 1.0});
    }
    return facts;
}

SystemOfSpaces gen_inverse_example(std::size_t i_max, std::size_t K) {
    if (!(2 <= i_max && i_max <= K))
        throw std::invalid_argument("gen_inverse_example: need 2 <= i_max <= K");
    SystemOfSpaces sys;
    sys.kind = SystemOfSpaces::Kind::Inverse;
    for (std::size_t stage = 1; stage <= i_max; ++stage) {
        const std::size_t width = std::size_t{1} << stage;  // 2^stage values of j
        const std::size_t n = width * K;
        PointedSpace::LinfBasisDist dist;
        dist.group.resize(n);
        dist.radial.resize(n);
        std::vector<double> w(n);
        std::vector<std::string> labels(n);
        for (std::size_t k = 1; k <= K; ++k) {
            for (std::size_t j = 1; j <= width; ++j) {
                const std::size_t a = (k - 1) * width + (j - 1);
                dist.group[a] = static_cast<std::uint32_t>(j);
                dist.radial[a] = 1.0 / static_cast<double>(k);
                w[a] = std::ldexp(1.0, -static_cast<int>(k + stage));
                labels[a] = ejk_label(j, k);
            }
        }
        const std::size_t base = (stage - 1) * width;  // e_1/stage
        sys.spaces.emplace_back(std::move(dist), std::move(w), base, std::move(labels));
    }
    for (std::size_t stage = 1; stage < i_max; ++stage) {
        const std::size_t w_src = std::size_t{1} << (stage + 1);
        const std::size_t w_dst = std::size_t{1} << stage;
        PointMap bond;
        bond.img.resize(w_src * K);
        for (std::size_t k = 1; k <= K; ++k)
            for (std::size_t j = 1; j <= w_src; ++j)
                bond.img[(k - 1) * w_src + (j - 1)] = (k - 1) * w_dst + ((j + 1) / 2 - 1);
        sys.bonds.push_back(std::move(bond));
    }
    return sys;
}

std::vector<GalleryFact> inverse_example_facts(const SystemOfSpaces& sys, std::size_t K) {
    std::vector<GalleryFact> facts;
    const double expected_total = 1.0 - std::ldexp(1.0, -static_cast<int>(K));
    for (std::size_t i = 0; i < sys.stages(); ++i) {
        bool exact = sys.spaces[i].total_mass() == expected_total;
        facts.push_back({"stage " + std::to_string(i + 1) + " total mass is 1 - 2^-K exactly", exact});
    }
    for (std::size_t b = 0; b < sys.bonds.size(); ++b) {
        const Measure push =
            pushforward(Measure{sys.spaces[b + 1].weights()}, sys.bonds[b], sys.spaces[b].size());
        bool exact = push.w == sys.spaces[b].weights();
        facts.push_back({"bond " + std::to_string(b) + " pushforward equals the coarser measure exactly",
                         exact});
    }
    for (double r : {0.5, 1.0 / 3.0, 0.25}) {
        bool ok = true;
        const double bound = std::pow(2.0, 2.0 - 1.0 / r);
        for (const PointedSpace& s : sys.spaces)
            ok = ok && ball_mass(s, s.base(), r, BallKind::Open) <= bound;
        std::ostringstream os;
        os << "basepoint ball mass at r=" << r << " within 2^(2-1/r)";
        facts.push_back({os.str(), ok});
    }
    return facts;
}

ProkhorovSharpFixture gen_prokhorov_sharp(std::size_t J, std::size_t N) {
    if (J < 1 || N < 1) throw std::invalid_argument("gen_prokhorov_sharp: need J, N >= 1");
    const std::size_t n = 1 + J * N;
    PointedSpace::LinfBasisDist dist;
    dist.group.resize(n);
    dist.radial.resize(n);
    std::vector<std::string> labels(n);
    dist.group[0] = 0;
    dist.radial[0] = 0.0;
    labels[0] = "0";
    for (std::size_t lvl = 1; lvl <= N; ++lvl) {
        for (std::size_t j = 1; j <= J; ++j) {
            const std::size_t a = 1 + (lvl - 1) * J + (j - 1);
            dist.group[a] = static_cast<std::uint32_t>(j);
            dist.radial[a] = 1.0 / static_cast<double>(lvl);
            labels[a] = ejk_label(j, lvl);
        }
    }
    std::vector<double> host_w(n, 0.0);
    host_w[0] = 1.0;  // the weak limit delta_0

    std::vector<Measure> measures;
    for (std::size_t lvl = 1; lvl <= N; ++lvl) {
        for (std::size_t k = 1; k <= J; ++k) {
            Measure m;
            m.w.assign(n, 0.0);
            for (std::size_t j = 1; j <= k; ++j)
                m.w[1 + (lvl - 1) * J + (j - 1)] = 1.0 / static_cast<double>(k);
            measures.push_back(std::move(m));
        }
    }
    return ProkhorovSharpFixture{PointedSpace(std::move(dist), std::move(host_w), 0, std::move(labels)),
                                 std::move(measures), J, N};
}

std::vector<GalleryFact> prokhorov_facts(const ProkhorovSharpFixture& fx) {
    std::vector<GalleryFact> facts;
    const std::size_t n = fx.host.size();
    // Tent max{1 - 2 d(.,0), 0}; sup-norm one already (value 1 at the origin).
    std::vector<double> tent(n);
    for (std::size_t a = 0; a < n; ++a) tent[a] = std::max(1.0 - 2.0 * fx.host.dist(0, a), 0.0);
    bool gaps_ok = true;
    for (std::size_t lvl = 2; lvl <= fx.N; ++lvl) {
        const double expected = 2.0 * (1.0 / static_cast<double>(lvl));
        for (std::size_t k = 1; k <= fx.J; ++k) {
            const Measure& m = fx.measures[(lvl - 1) * fx.J + (k - 1)];
            const double gap = tent[0] - integrate(tent, m);
            if (std::fabs(gap - expected) > 1e-12) gaps_ok = false;
        }
    }
    facts.push_back({"tent integral gap to f(0) is 2/n for every k, n >= 2", gaps_ok});
    return facts;
}

PointedSpace gen_doubling_grid(std::size_t points, double extent) {
    if (points < 3 || points % 2 == 0)
        throw std::invalid_argument("gen_doubling_grid: points must be odd and >= 3");
    if (!(extent > 0.0)) throw std::invalid_argument("gen_doubling_grid: extent must be positive");
    PointedSpace::LineDist dist;
    dist.coord.resize(points);
    const double h = extent / static_cast<double>(points - 1);
    for (std::size_t j = 0; j < points; ++j) dist.coord[j] = static_cast<double>(j) * h;
    std::vector<double> w(points, 1.0);  // counting measure
    return PointedSpace(std::move(dist), std::move(w), (points - 1) / 2);
}

std::vector<GalleryFact> doubling_grid_facts(std::size_t points, double extent) {
    const PointedSpace s = gen_doubling_grid(points, extent);
    std::vector<GalleryFact> facts;
    facts.push_back({"grid spans [0, extent]", s.max_dist() == extent});
    if (points == 3)
        facts.push_back({"3-point grid distances are extent/2 and extent",
                         s.dist(0, 1) == extent / 2.0 && s.dist(0, 2) == extent});
    {
        const double R = extent / 2.0, r = extent / 8.0;
        const CoverReport a = greedy_cover(rescale(s, 0.5), R, r, 0.0);
        const CoverReport b = greedy_cover(s, 0.5 * R, 0.5 * r, 0.0);
        facts.push_back({"greedy cover commutes with dyadic rescaling (exact center indices)",
                         a.pick_order == b.pick_order});
    }
    return facts;
}

}  // namespace mmlimit
