// model.hpp
#pragma once
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"

namespace adasense {

// Entry indices are 0-based in memory and 1-based in every external format.
using Index = std::uint32_t;

// Sorted, duplicate-free list of indices.
using IndexSet = std::vector<Index>;

inline IndexSet make_index_set(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline bool contains(const IndexSet& set, Index i) {
    return std::binary_search(set.begin(), set.end(), i);
}

// Constant-amplitude sparse vector: x_i = amplitude on the support, 0 elsewhere.
class SparseSignal {
public:
    SparseSignal(std::size_t n, IndexSet support, double amplitude)
        : n_(n), support_(make_index_set(std::move(support))), amplitude_(amplitude), mask_(n, 0) {
        if (n == 0) throw InvalidDimension("signal dimension must be positive");
        if (!(amplitude >= 0.0)) throw ValidationError("signal amplitude must be non-negative");
        if (amplitude == 0.0 && !support_.empty())
            throw ValidationError("zero amplitude is only allowed for the null signal");
        for (Index i : support_) {
            if (i >= n) throw InvalidAction("support index " + std::to_string(i + 1) + " outside {1.." + std::to_string(n) + "}");
            mask_[i] = 1;
        }
    }

    static SparseSignal null(std::size_t n) { return SparseSignal(n, {}, 0.0); }

    std::size_t dimension() const { return n_; }
    const IndexSet& support() const { return support_; }
    std::size_t sparsity() const { return support_.size(); }
    double amplitude() const { return amplitude_; }
    bool in_support(Index i) const { return mask_[i] != 0; }
    double value(Index i) const { return mask_[i] ? amplitude_ : 0.0; }

private:
    std::size_t n_;
    IndexSet support_;
    double amplitude_;
    std::vector<std::uint8_t> mask_;
};

// Family of candidate supports, all of cardinality s. The implicit class of
// every s-subset of {1..n} is never enumerated.
class SupportClass {
public:
    static SupportClass all_subsets(std::size_t n, std::size_t s) {
        if (n == 0) throw InvalidDimension("class dimension must be positive");
        if (s == 0 || s > n) throw InvalidSparsity("class cardinality must lie in [1, n]");
        SupportClass c;
        c.n_ = n;
        c.s_ = s;
        return c;
    }

    static SupportClass explicit_members(std::size_t n, std::vector<IndexSet> members) {
        if (n == 0) throw InvalidDimension("class dimension must be positive");
        if (members.empty()) throw ValidationError("explicit class needs at least one member");
        SupportClass c;
        c.n_ = n;
        for (auto& m : members) {
            m = make_index_set(std::move(m));
            if (m.empty()) throw InvalidSparsity("class members must be non-empty");
            if (m.back() >= n) throw InvalidAction("class member index outside {1..n}");
        }
        c.s_ = members.front().size();
        for (const auto& m : members)
            if (m.size() != c.s_) throw InvalidSparsity("class members must share one cardinality");
        c.members_ = std::move(members);
        return c;
    }

    // Length-s windows {i, i+1, ..., i+s-1} mod n for i = 0..n-1.
    static SupportClass cyclic_intervals(std::size_t n, std::size_t s) {
        if (s == 0 || s > n) throw InvalidSparsity("interval length must lie in [1, n]");
        std::vector<IndexSet> members;
        for (std::size_t i = 0; i < n; ++i) {
            IndexSet m;
            for (std::size_t j = 0; j < s; ++j) m.push_back(static_cast<Index>((i + j) % n));
            members.push_back(make_index_set(std::move(m)));
        }
        // s == n collapses every window onto {0..n-1}
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        return explicit_members(n, std::move(members));
    }

    std::size_t dimension() const { return n_; }
    std::size_t cardinality() const { return s_; }
    bool is_implicit() const { return !members_.has_value(); }
    const std::vector<IndexSet>& members() const { return *members_; }

    // Number of members, when it fits in 64 bits.
    std::optional<std::uint64_t> size() const {
        if (members_) return members_->size();
        // C(n, s) with overflow detection
        unsigned __int128 c = 1;
        for (std::size_t k = 1; k <= s_; ++k) {
            c = c * (n_ - s_ + k) / k;
            if (c > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
        }
        return static_cast<std::uint64_t>(c);
    }

    // Xi: union of all members.
    IndexSet xi() const {
        if (!members_) {
            IndexSet all(n_);
            std::iota(all.begin(), all.end(), Index{0});
            return all;
        }
        std::vector<std::uint8_t> seen(n_, 0);
        for (const auto& m : *members_)
            for (Index i : m) seen[i] = 1;
        IndexSet out;
        for (std::size_t i = 0; i < n_; ++i)
            if (seen[i]) out.push_back(static_cast<Index>(i));
        return out;
    }

    std::size_t xi_size() const { return members_ ? xi().size() : n_; }

    // Per-entry membership counts |{S : i in S}|; explicit classes only.
    std::vector<std::uint64_t> membership_counts() const {
        std::vector<std::uint64_t> counts(n_, 0);
        for (const auto& m : members())
            for (Index i : m) ++counts[i];
        return counts;
    }

private:
    SupportClass() = default;
    std::size_t n_ = 0;
    std::size_t s_ = 0;
    std::optional<std::vector<IndexSet>> members_;
};

// Every i in Xi lies in exactly the fraction s/|Xi| of members. Compared as
// integers: count_i * |Xi| == s * |C|.
inline bool class_is_symmetric(const SupportClass& c) {
    if (c.is_implicit()) return true;
    const auto counts = c.membership_counts();
    const auto xi = c.xi();
    const auto total = static_cast<unsigned __int128>(c.members().size());
    const auto lhs_scale = static_cast<unsigned __int128>(xi.size());
    const auto rhs = static_cast<unsigned __int128>(c.cardinality()) * total;
    return std::all_of(xi.begin(), xi.end(),
                       [&](Index i) { return static_cast<unsigned __int128>(counts[i]) * lhs_scale == rhs; });
}

inline bool class_is_full_range(const SupportClass& c) { return c.xi_size() == c.dimension(); }

// Uniform member of the class.
inline IndexSet draw_support(const SupportClass& c, Rng& rng) {
    if (c.is_implicit()) return sample_without_replacement(c.dimension(), c.cardinality(), rng);
    return c.members()[static_cast<std::size_t>(rng.below(c.members().size()))];
}

} // namespace adasense
