#include "mmlimit/space.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mmlimit {

namespace {

std::size_t backend_size(const PointedSpace::Backend& b) {
    return std::visit([](const auto& x) { return x.size(); }, b);
}

}  // namespace

PointedSpace::PointedSpace(Backend backend, std::vector<double> weight, std::size_t base,
                           std::vector<std::string> labels)
    : PointedSpace(std::make_shared<const Core>(std::move(backend)), 1.0, std::move(weight), base,
                   std::move(labels)) {}

PointedSpace::PointedSpace(std::shared_ptr<const Core> core, double scale, std::vector<double> weight,
                           std::size_t base, std::vector<std::string> labels)
    : core_(std::move(core)),
      scale_(scale),
      n_(backend_size(core_->backend)),
      weight_(std::move(weight)),
      base_(base),
      labels_(std::move(labels)) {
    if (n_ == 0) throw std::invalid_argument("PointedSpace: empty point set");
    if (weight_.size() != n_) throw std::invalid_argument("PointedSpace: weight length mismatch");
    if (base_ >= n_) throw std::invalid_argument("PointedSpace: base out of range");
    if (!labels_.empty() && labels_.size() != n_)
        throw std::invalid_argument("PointedSpace: label count mismatch");
    if (!(scale_ > 0.0) || !std::isfinite(scale_))
        throw std::invalid_argument("PointedSpace: scale must be positive and finite");
}

double PointedSpace::max_dist() const {
    std::call_once(core_->once, [this] {
        double m = 0.0;
        std::visit(
            [&](const auto& b) {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, LineDist>) {
                    double lo = b.coord[0], hi = b.coord[0];
                    for (double c : b.coord) {
                        lo = std::min(lo, c);
                        hi = std::max(hi, c);
                    }
                    m = hi - lo;
                } else if constexpr (std::is_same_v<T, LinfBasisDist>) {
                    // Two groups present: max is the largest radial value;
                    // single group: spread of the radial values.
                    const std::size_t n = b.size();
                    bool mixed = false;
                    for (std::size_t i = 1; i < n && !mixed; ++i) mixed = b.group[i] != b.group[0];
                    double lo = b.radial[0], hi = b.radial[0];
                    for (double r : b.radial) {
                        lo = std::min(lo, r);
                        hi = std::max(hi, r);
                    }
                    m = mixed ? hi : hi - lo;
                } else {
                    for (double v : b.d) m = std::max(m, v);
                }
            },
            core_->backend);
        core_->raw_max = m;
    });
    return scale_ * core_->raw_max;
}

double PointedSpace::total_mass() const {
    double s = 0.0;
    for (double w : weight_) s += w;
    return s;
}

PointedSpace PointedSpace::rescaled(double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("rescale: r must be positive");
    return PointedSpace(core_, scale_ / r, weight_, base_, labels_);
}

PointedSpace PointedSpace::rebased(std::size_t new_base) const {
    if (new_base >= n_) throw std::invalid_argument("rebased: index out of range");
    return PointedSpace(core_, scale_, weight_, new_base, labels_);
}

PointedSpace PointedSpace::reweighted(std::vector<double> weight) const {
    if (weight.size() != n_) throw std::invalid_argument("reweighted: length mismatch");
    return PointedSpace(core_, scale_, std::move(weight), base_, labels_);
}

double Measure::total() const {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
}

ValidationReport validate_space(const PointedSpace& s) {
    ValidationReport rep;
    const std::size_t n = s.size();
    const double tau = 1e-9 * s.max_dist();
    with_distance(s, [&](auto d) {
        for (std::size_t i = 0; i < n; ++i) {
            if (d(i, i) != 0.0) rep.violations.push_back({"diagonal", i, i, 0, d(i, i)});
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dij = d(i, j);
                if (dij != d(j, i)) rep.violations.push_back({"symmetry", i, j, 0, dij - d(j, i)});
                if (!(dij > 0.0)) rep.violations.push_back({"positivity", i, j, 0, dij});
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double dij = d(i, j);
                for (std::size_t k = 0; k < n; ++k) {
                    const double slack = d(i, k) - (dij + d(j, k));
                    if (slack > tau) rep.violations.push_back({"triangle", i, k, j, slack});
                }
            }
        }
    });
    for (std::size_t i = 0; i < n; ++i) {
        if (!(s.weight(i) >= 0.0)) rep.violations.push_back({"weight", i, i, 0, s.weight(i)});
    }
    return rep;
}

IndexSet support(const PointedSpace& s) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.weight(i) > 0.0) v.push_back(i);
    return IndexSet(std::move(v));
}

IndexSet support(const Measure& m) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.w[i] > 0.0) v.push_back(i);
    return IndexSet(std::move(v));
}

IndexSet ball(const PointedSpace& s, std::size_t center, double r, BallKind kind) {
    if (!(r > 0.0)) throw std::invalid_argument("ball: radius must be positive");
    if (center >= s.size()) throw std::invalid_argument("ball: center out of range");
    std::vector<std::size_t> v;
    with_distance(s, [&](auto d) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double di = d(center, i);
            if (kind == BallKind::Open ? di < r : di <= r) v.push_back(i);
        }
    });
    return IndexSet(std::move(v));
}

IndexSet neighborhood(const PointedSpace& s, const IndexSet& a, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("neighborhood: radius must be positive");
    if (a.empty()) return IndexSet{};
    std::vector<std::size_t> v;
    with_distance(s, [&](auto d) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            for (std::size_t j : a) {
                if (d(i, j) < r) {
                    v.push_back(i);
                    break;
                }
            }
        }
    });
    return IndexSet(std::move(v));
}

double ball_mass(const PointedSpace& s, std::size_t center, double r, BallKind kind) {
    if (!(r > 0.0)) throw std::invalid_argument("ball_mass: radius must be positive");
    double m = 0.0;
    with_distance(s, [&](auto d) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double di = d(center, i);
            if (kind == BallKind::Open ? di < r : di <= r) m += s.weight(i);
        }
    });
    return m;
}

double mass_on(const PointedSpace& s, const IndexSet& a) {
    double m = 0.0;
    for (std::size_t i : a) m += s.weight(i);
    return m;
}

double mass_on(const Measure& m, const IndexSet& a) {
    double t = 0.0;
    for (std::size_t i : a) t += m.w[i];
    return t;
}

PointedSpace rescale(const PointedSpace& s, double r) { return s.rescaled(r); }

PointedSpace normalize_at_basepoint(const PointedSpace& s, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("normalize_at_basepoint: r must be positive");
    const double m = ball_mass(s, s.base(), r, BallKind::Open);
    if (!(m > 0.0))
        throw std::invalid_argument("normalize_at_basepoint: basepoint not in support at scale r");
    std::vector<double> w(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) w[i] = s.weight(i) / m;
    return s.reweighted(std::move(w)).rescaled(r);
}

PointedSpace restrict(const PointedSpace& s, const IndexSet& a, std::size_t new_base) {
    if (a.empty()) throw std::invalid_argument("restrict: empty index set");
    std::size_t base_pos = a.size();
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] >= s.size()) throw std::invalid_argument("restrict: index out of range");
        if (a[k] == new_base) base_pos = k;
    }
    if (base_pos == a.size()) throw std::invalid_argument("restrict: base not in index set");
    const std::size_t m = a.size();
    PointedSpace::DenseDist dd;
    dd.n = m;
    dd.d.resize(m * m);
    with_distance(s, [&](auto d) {
        for (std::size_t p = 0; p < m; ++p)
            for (std::size_t q = 0; q < m; ++q) dd.d[p * m + q] = d(a[p], a[q]);
    });
    std::vector<double> w(m);
    for (std::size_t p = 0; p < m; ++p) w[p] = s.weight(a[p]);
    std::vector<std::string> labels;
    if (!s.labels().empty()) {
        labels.resize(m);
        for (std::size_t p = 0; p < m; ++p) labels[p] = s.labels()[a[p]];
    }
    return PointedSpace(std::move(dd), std::move(w), base_pos, std::move(labels));
}

PointMap PointMap::identity(std::size_t n) {
    PointMap f;
    f.img.resize(n);
    for (std::size_t i = 0; i < n; ++i) f.img[i] = i;
    return f;
}

Measure pushforward(const Measure& m, const PointMap& f, std::size_t n_dst) {
    if (f.img.size() != m.size()) throw std::invalid_argument("pushforward: map/measure size mismatch");
    Measure out;
    out.w.assign(n_dst, 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (f.img[i] >= n_dst) throw std::invalid_argument("pushforward: image index out of range");
        out.w[f.img[i]] += m.w[i];
    }
    return out;
}

PointMap compose(const PointMap& first, const PointMap& then) {
    PointMap out;
    out.img.resize(first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        if (first.img[i] >= then.size()) throw std::invalid_argument("compose: index out of range");
        out.img[i] = then.img[first.img[i]];
    }
    return out;
}

std::uint64_t space_hash(const PointedSpace& s) {
    std::uint64_t h = fnv1a_u64(s.size(), 0xcbf29ce484222325ULL);
    h = fnv1a_u64(s.base(), h);
    with_distance(s, [&](auto d) {
        for (std::size_t i = 0; i < s.size(); ++i)
            for (std::size_t j = i + 1; j < s.size(); ++j) h = fnv1a_double(d(i, j), h);
    });
    for (double w : s.weights()) h = fnv1a_double(w, h);
    for (const auto& l : s.labels()) h = fnv1a(l.data(), l.size(), h);
    return h;
}

}  // namespace mmlimit
