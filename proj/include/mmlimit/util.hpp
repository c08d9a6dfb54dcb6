#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mmlimit {

/// Sorted set of point indices into a PointedSpace. Invariant: strictly
/// increasing, all entries valid for the host they are used with.
class IndexSet {
public:
    IndexSet() = default;
    explicit IndexSet(std::vector<std::size_t> sorted_unique) : idx_(std::move(sorted_unique)) {
        for (std::size_t k = 1; k < idx_.size(); ++k) {
            if (idx_[k - 1] >= idx_[k]) throw std::invalid_argument("IndexSet: indices must be strictly increasing");
        }
    }

    static IndexSet from_unsorted(std::vector<std::size_t> v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
        IndexSet s;
        s.idx_ = std::move(v);
        return s;
    }

    static IndexSet full(std::size_t n) {
        IndexSet s;
        s.idx_.resize(n);
        for (std::size_t i = 0; i < n; ++i) s.idx_[i] = i;
        return s;
    }

    bool contains(std::size_t i) const { return std::binary_search(idx_.begin(), idx_.end(), i); }
    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }
    std::size_t operator[](std::size_t k) const { return idx_[k]; }
    const std::vector<std::size_t>& items() const { return idx_; }

    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

    bool operator==(const IndexSet& o) const { return idx_ == o.idx_; }

    IndexSet set_union(const IndexSet& o) const {
        std::vector<std::size_t> out;
        out.reserve(idx_.size() + o.idx_.size());
        std::set_union(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(), std::back_inserter(out));
        IndexSet s;
        s.idx_ = std::move(out);
        return s;
    }

    IndexSet set_intersection(const IndexSet& o) const {
        std::vector<std::size_t> out;
        std::set_intersection(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(), std::back_inserter(out));
        IndexSet s;
        s.idx_ = std::move(out);
        return s;
    }

    IndexSet set_difference(const IndexSet& o) const {
        std::vector<std::size_t> out;
        std::set_difference(idx_.begin(), idx_.end(), o.idx_.begin(), o.idx_.end(), std::back_inserter(out));
        IndexSet s;
        s.idx_ = std::move(out);
        return s;
    }

private:
    std::vector<std::size_t> idx_;
};

/// Outcome of a verification routine. `pass` with empty reason, or a failure
/// with a human-readable witness description.
struct Verdict {
    bool pass = true;
    std::string reason;

    static Verdict ok() { return {true, {}}; }
    static Verdict fail(std::string why) { return {false, std::move(why)}; }
    explicit operator bool() const { return pass; }
};

/// SplitMix64: tiny, fully specified, platform-independent. All randomized
/// routines in the library draw from this so that seeded runs are
/// bit-reproducible (std:: distributions are not pinned by the standard).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

/// FNV-1a over raw bytes; used for input hashing and golden fixture hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t v, std::uint64_t h) { return fnv1a(&v, sizeof v, h); }

inline std::uint64_t fnv1a_double(double d, std::uint64_t h) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof d);
    __builtin_memcpy(&bits, &d, sizeof bits);
    return fnv1a_u64(bits, h);
}

/// Number of worker threads: MMLIMIT_THREADS if set, else hardware count.
std::size_t worker_count();

/// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
/// The chunking is independent of the thread count, so per-chunk results can
/// be reduced in chunk order to give bit-identical answers on any machine.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace mmlimit
