#pragma once

#include <string>
#include <vector>

#include "mmlimit/category.hpp"
#include "mmlimit/space.hpp"

namespace mmlimit {

/// Executable claim attached to a generated fixture; regenerating and
/// re-checking these is part of the test suite.
struct GalleryFact {
    std::string description;
    bool pass = false;
};

/// i points, all pairwise distances 1, uniform weights 1/i, basepoint the
/// first point.
PointedSpace gen_uniform_simplex(std::size_t i);
std::vector<GalleryFact> simplex_facts(std::size_t i);

/// Truncated inverse system of scaled l-infinity bases: stage s holds atoms
/// e_j/k for j <= 2^s, k <= K, with weight 2^-k 2^-s, basepoint e_1/s, and
/// pair-merging bonds e_{2j-1}/k, e_{2j}/k -> e_j/k. Requires
/// 2 <= i_max <= K.
SystemOfSpaces gen_inverse_example(std::size_t i_max, std::size_t K);
std::vector<GalleryFact> inverse_example_facts(const SystemOfSpaces& sys, std::size_t K);

struct ProkhorovSharpFixture {
    PointedSpace host;                  // {0} cup {e_j/n : j <= J, n <= N}, delta_0 weights
    std::vector<Measure> measures;      // (1/k) sum_{j<=k} delta_{e_j/n}, (n,k) lexicographic
    std::size_t J = 0, N = 0;
};

ProkhorovSharpFixture gen_prokhorov_sharp(std::size_t J, std::size_t N);
std::vector<GalleryFact> prokhorov_facts(const ProkhorovSharpFixture& fx);

/// Evenly spaced line grid on [0, extent] with counting measure, based at
/// the middle point. `points` must be odd and >= 3.
PointedSpace gen_doubling_grid(std::size_t points, double extent);
std::vector<GalleryFact> doubling_grid_facts(std::size_t points, double extent);

}  // namespace mmlimit
