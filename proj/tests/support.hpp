#pragma once

// Seeded instance generators and small oracles shared by the unit and
// acceptance suites. Coordinates and weights are dyadic so that l-infinity
// distances, jitter bounds, and pushforward sums are exact in doubles.

#include <algorithm>
#include <array>
#include <set>
#include <vector>

#include "mmlimit/approx.hpp"
#include "mmlimit/category.hpp"
#include "mmlimit/gallery.hpp"
#include "mmlimit/space.hpp"
#include "mmlimit/util.hpp"

namespace mmtest {

using namespace mmlimit;

using Coord = std::array<long, 3>;

inline double linf(const Coord& a, const Coord& b, double step) {
    long m = 0;
    for (int c = 0; c < 3; ++c) m = std::max(m, std::labs(a[c] - b[c]));
    return static_cast<double>(m) * step;
}

inline PointedSpace space_from_coords(const std::vector<Coord>& pts, double step,
                                      std::vector<double> weight, std::size_t base) {
    const std::size_t n = pts.size();
    DenseDist dd;
    dd.n = n;
    dd.d.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) dd.d[i * n + j] = linf(pts[i], pts[j], step);
    return PointedSpace(std::move(dd), std::move(weight), base);
}

inline std::vector<Coord> random_distinct_coords(Rng& rng, std::size_t n, long range) {
    std::set<Coord> seen;
    std::vector<Coord> pts;
    while (pts.size() < n) {
        Coord c{static_cast<long>(rng.below(range)), static_cast<long>(rng.below(range)),
                static_cast<long>(rng.below(range))};
        if (seen.insert(c).second) pts.push_back(c);
    }
    return pts;
}

inline std::vector<double> random_dyadic_weights(Rng& rng, std::size_t n, bool allow_zero) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t k = rng.below(4096);
        w[i] = (allow_zero && rng.below(5) == 0) ? 0.0 : static_cast<double>(k + 1) / 4096.0;
    }
    return w;
}

/// Random pointed space on dyadic integer coordinates with l-infinity
/// distances (exact, triangle holds exactly).
inline PointedSpace random_space(Rng& rng, std::size_t n, bool base_in_support = false) {
    const auto pts = random_distinct_coords(rng, n, 64);
    auto w = random_dyadic_weights(rng, n, true);
    const std::size_t base = rng.below(n);
    if (base_in_support && w[base] == 0.0) w[base] = 0.5;
    return space_from_coords(pts, 1.0 / 16.0, std::move(w), base);
}

/// A verified strict (R,eps)-approximation: Y is a coordinate-jittered,
/// relabeled copy of X, psi the relabeling. Jitter is at most eps/4 per
/// coordinate, so the distortion is at most eps/2 < eps strictly.
struct ApproxInstance {
    PointedSpace X;
    PointedSpace Y;
    PointMap psi;
    double R = 0.0;
    double eps = 0.0;
};

inline ApproxInstance random_approx_instance(Rng& rng, std::size_t max_n) {
    const std::size_t n = 2 + rng.below(max_n - 1);
    const double step = 1.0 / 16.0;
    const auto px = random_distinct_coords(rng, n, 64);
    auto wx = random_dyadic_weights(rng, n, true);
    const std::size_t base = rng.below(n);

    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) diam = std::max(diam, linf(px[i], px[j], step));

    const int e = 2 + static_cast<int>(rng.below(3));  // eps = diam / 2^e, e in {2,3,4}
    const double eps = std::ldexp(diam, -e);
    const double R = rng.below(2) == 0 ? 2.0 * diam : diam + eps;

    // Jitter at dyadic resolution 2^-10, capped by eps/4 (distortion bound)
    // and by half the minimal distance (no collisions in Y).
    double min_dist = diam;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) min_dist = std::min(min_dist, linf(px[i], px[j], step));
    const double fine = std::ldexp(1.0, -10);
    const long jmax = static_cast<long>(std::floor(std::min(eps / 4.0, 0.49 * min_dist) / fine));
    std::vector<std::array<double, 3>> py(n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[rng.below(i + 1)]);

    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            const long d = jmax > 0 ? static_cast<long>(rng.below(2 * jmax + 1)) - jmax : 0;
            py[perm[i]][c] =
                static_cast<double>(px[i][c]) * step + static_cast<double>(d) * fine;
        }
    }
    DenseDist dy;
    dy.n = n;
    dy.d.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double m = 0.0;
            for (int c = 0; c < 3; ++c) m = std::max(m, std::fabs(py[i][c] - py[j][c]));
            dy.d[i * n + j] = m;
        }
    }
    PointMap psi;
    psi.img = perm;

    ApproxInstance inst{space_from_coords(px, step, std::move(wx), base),
                        PointedSpace(std::move(dy), random_dyadic_weights(rng, n, true), perm[base]),
                        std::move(psi), R, eps};
    return inst;
}

/// Random valid direct system: integer coordinates halved (floor) between
/// stages, which is 1-Lipschitz for l-infinity; stage weights are the
/// pushforwards plus occasional extra mass, so bonds are morphisms.
inline SystemOfSpaces random_direct_system(Rng& rng, std::size_t stages, std::size_t n0) {
    SystemOfSpaces sys;
    sys.kind = SystemOfSpaces::Kind::Direct;
    const double step = 1.0 / 16.0;
    std::vector<Coord> pts = random_distinct_coords(rng, n0, 64);
    std::vector<double> w = random_dyadic_weights(rng, n0, true);
    std::size_t base = rng.below(n0);
    if (w[base] == 0.0) w[base] = 0.5;
    sys.spaces.push_back(space_from_coords(pts, step, w, base));

    for (std::size_t t = 1; t < stages; ++t) {
        std::vector<Coord> next_pts;
        std::vector<std::size_t> img(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Coord h{pts[i][0] >> 1, pts[i][1] >> 1, pts[i][2] >> 1};
            std::size_t at = next_pts.size();
            for (std::size_t k = 0; k < next_pts.size(); ++k)
                if (next_pts[k] == h) at = k;
            if (at == next_pts.size()) next_pts.push_back(h);
            img[i] = at;
        }
        std::vector<double> next_w(next_pts.size(), 0.0);
        for (std::size_t i = 0; i < pts.size(); ++i) next_w[img[i]] += w[i];
        for (std::size_t k = 0; k < next_w.size(); ++k)
            if (rng.below(4) == 0) next_w[k] += static_cast<double>(rng.below(8)) / 64.0;
        const std::size_t next_base = img[base];
        sys.bonds.push_back(PointMap{img});
        sys.spaces.push_back(space_from_coords(next_pts, step, next_w, next_base));
        pts = std::move(next_pts);
        w = sys.spaces.back().weights();
        base = next_base;
    }
    return sys;
}

/// Random valid inverse system: atoms split into coordinate-doubled children
/// (distances grow, bonds contract back), pushforwards exactly mass
/// preserving; the last bond is the identity so basepoint mass columns
/// stabilize when they stay positive.
inline SystemOfSpaces random_inverse_system(Rng& rng, std::size_t stages, std::size_t n0) {
    SystemOfSpaces sys;
    sys.kind = SystemOfSpaces::Kind::Inverse;
    const double step = 1.0 / 16.0;
    std::vector<Coord> pts = random_distinct_coords(rng, n0, 16);
    std::vector<double> w = random_dyadic_weights(rng, n0, false);
    std::size_t base = rng.below(n0);
    sys.spaces.push_back(space_from_coords(pts, step, w, base));

    for (std::size_t t = 1; t < stages; ++t) {
        const bool identity_stage = t + 1 == stages;
        if (identity_stage) {
            sys.bonds.push_back(PointMap::identity(pts.size()));
            sys.spaces.push_back(sys.spaces.back());
            continue;
        }
        std::vector<Coord> child_pts;
        std::vector<double> child_w;
        std::vector<std::size_t> img;  // child -> parent
        std::size_t child_base = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Coord doubled{2 * pts[i][0], 2 * pts[i][1], 2 * pts[i][2]};
            const bool split = rng.below(2) == 0;
            if (i == base) child_base = child_pts.size();
            if (split) {
                Coord sib = doubled;
                sib[rng.below(3)] += 1;
                child_pts.push_back(doubled);
                child_w.push_back(w[i] / 2.0);
                img.push_back(i);
                child_pts.push_back(sib);
                child_w.push_back(w[i] / 2.0);
                img.push_back(i);
            } else {
                child_pts.push_back(doubled);
                child_w.push_back(w[i]);
                img.push_back(i);
            }
        }
        sys.bonds.push_back(PointMap{img});
        sys.spaces.push_back(space_from_coords(child_pts, step, child_w, child_base));
        pts = std::move(child_pts);
        w = sys.spaces.back().weights();
        base = child_base;
    }
    return sys;
}

/// Merging chain of line grids with constant spacing: stage t has
/// 2^(k0-t)+1 points, the bond halves indices (1-Lipschitz), weights are the
/// exact pushforwards of the uniform finest measure.
inline SystemOfSpaces merging_chain(std::size_t stages, std::size_t k0) {
    SystemOfSpaces sys;
    sys.kind = SystemOfSpaces::Kind::Direct;
    const double h = std::ldexp(1.0, -static_cast<int>(k0));
    std::size_t n = (std::size_t{1} << k0) + 1;
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    for (std::size_t t = 0; t < stages; ++t) {
        LineDist ld;
        ld.coord.resize(n);
        for (std::size_t j = 0; j < n; ++j) ld.coord[j] = static_cast<double>(j) * h;
        sys.spaces.emplace_back(std::move(ld), w, 0);
        if (t + 1 == stages) break;
        const std::size_t m = (n - 1) / 2 + 1;
        PointMap bond;
        bond.img.resize(n);
        for (std::size_t j = 0; j < n; ++j) bond.img[j] = j / 2;
        std::vector<double> wm(m, 0.0);
        for (std::size_t j = 0; j < n; ++j) wm[j / 2] += w[j];
        sys.bonds.push_back(std::move(bond));
        n = m;
        w = std::move(wm);
    }
    return sys;
}

/// Line grid with total mass one, based at the middle point.
inline PointedSpace uniform_line_grid(std::size_t points, double extent) {
    LineDist ld;
    ld.coord.resize(points);
    const double h = extent / static_cast<double>(points - 1);
    for (std::size_t j = 0; j < points; ++j) ld.coord[j] = static_cast<double>(j) * h;
    std::vector<double> w(points, 1.0 / static_cast<double>(points));
    return PointedSpace(std::move(ld), std::move(w), (points - 1) / 2);
}

}  // namespace mmtest
