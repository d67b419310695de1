#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "umom/compensated.hpp"
#include "umom/errors.hpp"

namespace umom {

// C(n, k), saturating at uint64 max instead of overflowing.
inline std::uint64_t binomial_saturated(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    __uint128_t result = 1;
    constexpr __uint128_t kMax = std::numeric_limits<std::uint64_t>::max();
    for (std::int64_t i = 1; i <= k; ++i) {
        result = result * static_cast<__uint128_t>(n - k + i);
        result /= static_cast<__uint128_t>(i);
        if (result > kMax) return std::numeric_limits<std::uint64_t>::max();
    }
    return static_cast<std::uint64_t>(result);
}

inline double binomial_double(std::int64_t n, std::int64_t k) {
    const std::uint64_t exact = binomial_saturated(n, k);
    if (exact != std::numeric_limits<std::uint64_t>::max()) return static_cast<double>(exact);
    return std::exp(std::lgamma(static_cast<double>(n) + 1.0) -
                    std::lgamma(static_cast<double>(k) + 1.0) -
                    std::lgamma(static_cast<double>(n - k) + 1.0));
}

// Lexicographic cursor over the k-subsets of {0, ..., n-1}.
class CombinationCursor {
public:
    CombinationCursor(std::size_t n, std::size_t k) : n_(n), indices_(k) {
        if (k > n) throw InvalidArgument("combination cursor: k > n");
        for (std::size_t i = 0; i < k; ++i) indices_[i] = i;
    }

    std::span<const std::size_t> indices() const noexcept { return indices_; }

    // Advance to the next subset; returns false (and leaves the cursor past
    // the end) after the last one. Also reports the leftmost changed slot so
    // callers can refresh incremental state from there.
    bool next(std::size_t* first_changed = nullptr) noexcept {
        const std::size_t k = indices_.size();
        if (k == 0) return false;
        std::size_t i = k;
        while (i-- > 0) {
            if (indices_[i] != n_ - k + i) {
                ++indices_[i];
                for (std::size_t j = i + 1; j < k; ++j) indices_[j] = indices_[j - 1] + 1;
                if (first_changed) *first_changed = i;
                return true;
            }
        }
        return false;
    }

private:
    std::size_t n_;
    std::vector<std::size_t> indices_;
};

// Visit the element sum of every m-subset of `values` in lexicographic
// order. Prefix sums are kept per slot, so each step costs one add per
// changed slot (amortized one add + one subtract).
template <typename Visitor>
void for_each_subset_sum(std::span<const double> values, std::size_t m, Visitor&& visit) {
    const std::size_t n = values.size();
    if (m == 0 || m > n) throw InvalidArgument("subset sum enumeration: need 1 <= m <= n");
    std::vector<std::size_t> idx(m);
    std::vector<double> prefix(m);
    for (std::size_t i = 0; i < m; ++i) {
        idx[i] = i;
        prefix[i] = (i == 0 ? 0.0 : prefix[i - 1]) + values[i];
    }
    for (;;) {
        visit(prefix[m - 1]);
        std::size_t i = m;
        bool advanced = false;
        while (i-- > 0) {
            if (idx[i] != n - m + i) {
                advanced = true;
                break;
            }
        }
        if (!advanced) return;
        ++idx[i];
        prefix[i] = (i == 0 ? 0.0 : prefix[i - 1]) + values[idx[i]];
        for (std::size_t j = i + 1; j < m; ++j) {
            idx[j] = idx[j - 1] + 1;
            prefix[j] = prefix[j - 1] + values[idx[j]];
        }
    }
}

// Compositions of j over `bins` slots with per-slot ceilings; visits each
// count vector once.
template <typename Visitor>
void for_each_bounded_composition(int total, std::span<const std::int64_t> ceilings,
                                  Visitor&& visit) {
    std::vector<int> counts(ceilings.size(), 0);
    auto recurse = [&](auto&& self, std::size_t slot, int remaining) -> void {
        if (slot + 1 == counts.size()) {
            if (remaining <= ceilings[slot]) {
                counts[slot] = remaining;
                visit(std::span<const int>(counts));
            }
            return;
        }
        const int cap = static_cast<int>(std::min<std::int64_t>(remaining, ceilings[slot]));
        for (int c = 0; c <= cap; ++c) {
            counts[slot] = c;
            self(self, slot + 1, remaining - c);
        }
    };
    if (!counts.empty()) recurse(recurse, 0, total);
}

}  // namespace umom
