#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmlimit/util.hpp"

namespace mmlimit {

/// Distance backends. Besides the dense matrix there are two symbolic forms
/// whose entries are computed in O(1):
///   - LinfBasisDist: points are scaled basis vectors r_i * e_{g_i} of
///     l-infinity; d(i,j) = |r_i - r_j| when g_i == g_j, max(r_i, r_j)
///     otherwise.
///   - LineDist: points on a line, d(i,j) = |c_i - c_j|.
struct DenseDist {
    std::size_t n = 0;
    std::vector<double> d;  // row-major n*n

    double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    std::size_t size() const { return n; }
};

struct LinfBasisDist {
    std::vector<std::uint32_t> group;
    std::vector<double> radial;

    double at(std::size_t i, std::size_t j) const {
        if (group[i] == group[j]) return std::fabs(radial[i] - radial[j]);
        return std::max(radial[i], radial[j]);
    }
    std::size_t size() const { return group.size(); }
};

struct LineDist {
    std::vector<double> coord;

    double at(std::size_t i, std::size_t j) const { return std::fabs(coord[i] - coord[j]); }
    std::size_t size() const { return coord.size(); }
};

using DistBackend = std::variant<DenseDist, LinfBasisDist, LineDist>;

/// A finite pointed metric measure space: n points, an n-by-n distance, a
/// vector of nonnegative atomic masses, and a distinguished basepoint.
///
/// Distances are held in an immutable backend shared between derived spaces;
/// rescaled / renormalized copies multiply by a scale factor instead of
/// materializing a new matrix.
class PointedSpace {
public:
    using DenseDist = mmlimit::DenseDist;
    using LinfBasisDist = mmlimit::LinfBasisDist;
    using LineDist = mmlimit::LineDist;
    using Backend = DistBackend;

    PointedSpace(Backend backend, std::vector<double> weight, std::size_t base,
                 std::vector<std::string> labels = {});

    std::size_t size() const { return n_; }
    std::size_t base() const { return base_; }
    double scale() const { return scale_; }
    const std::vector<double>& weights() const { return weight_; }
    double weight(std::size_t i) const { return weight_[i]; }
    const std::vector<std::string>& labels() const { return labels_; }
    const Backend& backend() const { return core_->backend; }
    bool shares_backend_with(const PointedSpace& o) const { return core_ == o.core_; }

    double dist(std::size_t i, std::size_t j) const {
        return scale_ * std::visit([&](const auto& b) { return b.at(i, j); }, core_->backend);
    }

    /// Largest pairwise distance (computed once per backend, then cached).
    double max_dist() const;

    double total_mass() const;

    /// Same metric, distances divided by r (shares the backend). r > 0.
    PointedSpace rescaled(double r) const;

    /// Same space with a different basepoint.
    PointedSpace rebased(std::size_t new_base) const;

    /// Same space with the given weight vector.
    PointedSpace reweighted(std::vector<double> weight) const;

private:
    struct Core {
        explicit Core(Backend b) : backend(std::move(b)) {}
        Backend backend;
        mutable std::once_flag once;
        mutable double raw_max = 0.0;
    };

    PointedSpace(std::shared_ptr<const Core> core, double scale, std::vector<double> weight,
                 std::size_t base, std::vector<std::string> labels);

    std::shared_ptr<const Core> core_;
    double scale_ = 1.0;
    std::size_t n_ = 0;
    std::vector<double> weight_;
    std::size_t base_ = 0;
    std::vector<std::string> labels_;
};

/// Calls fn with a callable `d(i,j)` bound to the concrete backend, so hot
/// loops get a fully inlined distance evaluation instead of a visit per call.
template <class F>
decltype(auto) with_distance(const PointedSpace& s, F&& fn) {
    const double scale = s.scale();
    return std::visit(
        [&](const auto& b) -> decltype(auto) {
            return fn([&b, scale](std::size_t i, std::size_t j) { return scale * b.at(i, j); });
        },
        s.backend());
}

/// Atomic measure on the point set of some PointedSpace; `w.size()` must
/// match the host size wherever the two meet.
struct Measure {
    std::vector<double> w;

    std::size_t size() const { return w.size(); }
    double total() const;
};

enum class BallKind { Open, Closed };

struct Violation {
    std::string code;  // "diagonal", "symmetry", "positivity", "triangle", "weight", "base"
    std::size_t i = 0, j = 0, k = 0;
    double detail = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool empty() const { return violations.empty(); }
};

/// Checks all PointedSpace invariants. Triangle inequality is verified over
/// every triple with relative slack 1e-9 * max(dist); everything else is
/// exact. O(n^3).
ValidationReport validate_space(const PointedSpace& s);

/// Positive-weight atoms.
IndexSet support(const PointedSpace& s);
IndexSet support(const Measure& m);

/// Open or closed metric ball; comparisons against r are exact. r > 0.
IndexSet ball(const PointedSpace& s, std::size_t center, double r, BallKind kind);

/// Open r-neighborhood of an index set (strict <); empty set maps to empty.
IndexSet neighborhood(const PointedSpace& s, const IndexSet& a, double r);

/// Mass of the ball, summed in index order.
double ball_mass(const PointedSpace& s, std::size_t center, double r, BallKind kind);
double mass_on(const PointedSpace& s, const IndexSet& a);
double mass_on(const Measure& m, const IndexSet& a);

/// Distances divided by r, weights unchanged. r > 0.
PointedSpace rescale(const PointedSpace& s, double r);

/// Distances divided by r, weights divided by the mass of the open r-ball at
/// the basepoint. Errors when that mass is zero.
PointedSpace normalize_at_basepoint(const PointedSpace& s, double r);

/// Induced subspace on `a` (materializes a dense matrix); new_base must be a
/// member of `a` (given as an index of the original space).
PointedSpace restrict(const PointedSpace& s, const IndexSet& a, std::size_t new_base);

/// Total map between point sets, img[source index] = target index.
struct PointMap {
    std::vector<std::size_t> img;

    std::size_t size() const { return img.size(); }
    std::size_t operator()(std::size_t i) const { return img[i]; }
    static PointMap identity(std::size_t n);
};

/// Image measure: target mass at j is the sum of source masses over the
/// preimage of j, accumulated in source index order.
Measure pushforward(const Measure& m, const PointMap& f, std::size_t n_dst);

PointMap compose(const PointMap& first, const PointMap& then);

/// Hash of the full space content (sizes, distances, weights, base, labels);
/// used for fixture golden values and the CLI's family cache key.
std::uint64_t space_hash(const PointedSpace& s);

}  // namespace mmlimit
