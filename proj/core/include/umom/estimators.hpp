#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "umom/flatconfig.hpp"
#include "umom/rng.hpp"

namespace umom {

struct SampleMeanSpec {};

struct MomSpec {
    int blocks = 2;  // k disjoint blocks of floor(N/k) points each
};

struct ExactUmomSpec {
    int subset_size = 2;  // m
};

// Same statistic as ExactUmom; kept as its own tag because the m=2 case is
// the classical Hodges-Lehmann location estimator.
struct HodgesLehmannSpec {
    int subset_size = 2;
};

struct IncompleteUmomSpec {
    int subset_size = 2;        // m
    std::int64_t subsets = 1;   // M random subsets
    bool with_replacement = true;
};

class EstimatorSpec {
public:
    using Variant =
        std::variant<SampleMeanSpec, MomSpec, ExactUmomSpec, HodgesLehmannSpec, IncompleteUmomSpec>;

    static EstimatorSpec sample_mean();
    static EstimatorSpec mom(int blocks);
    static EstimatorSpec exact_umom(int subset_size);
    static EstimatorSpec hodges_lehmann(int subset_size);
    static EstimatorSpec incomplete_umom(int subset_size, std::int64_t subsets,
                                         bool with_replacement = true);

    const Variant& variant() const noexcept { return variant_; }
    std::string name() const;
    bool uses_randomness() const noexcept;

    void to_config(FlatConfig& out) const;
    static EstimatorSpec from_config(const FlatConfig& config);
    static std::vector<std::string> config_keys();

    bool operator==(const EstimatorSpec& other) const;

private:
    explicit EstimatorSpec(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

// Median with the midpoint convention for even counts. `median` copies its
// input; `median_inplace` partitions the buffer with nth_element.
double median(std::span<const double> values);
double median_inplace(std::span<double> values);

// Median of k disjoint block means of floor(N/k) points each; trailing
// remainder indices are discarded. With an rng, indices are shuffled before
// blocking, otherwise natural order is used.
double mom_estimate(std::span<const double> sample, int blocks, Engine* shuffle_rng = nullptr);

inline constexpr std::uint64_t kSubsetEnumerationCap = 50'000'000;

// Median of the means over all C(N,m) subsets of size m. Subset means are
// materialized once (8 bytes each, so up to ~400 MB at the default cap) and
// the median is found by selection.
double exact_umom(std::span<const double> sample, int subset_size,
                  std::uint64_t cap = kSubsetEnumerationCap);

// Median over M subsets of size m drawn uniformly at random, by default with
// replacement at the subset level. Subset i is generated from
// derive_seed(seed, i), so the draw is independent of evaluation order.
// The without-replacement variant deduplicates by redrawing and is sequential.
double incomplete_umom(std::span<const double> sample, int subset_size, std::int64_t subsets,
                       std::uint64_t seed, bool with_replacement = true);

// Largest asymptotic corruption fraction tolerated by the m-subset median:
// 1 - (1/2)^{1/m}.
double breakdown_fraction(int subset_size);

// Asymptotic variance m * sigma^2 * arctan(1/sqrt(m^2-1)) of
// sqrt(N) * (estimate - mean) for normal data, m >= 2.
double hl_asymptotic_variance(int subset_size, double sigma);

// Copy of `sample` with `count` uniformly chosen distinct positions replaced
// by `value`.
std::vector<double> contaminate(std::span<const double> sample, std::size_t count, double value,
                                Engine& rng);

// Evaluate any estimator; `seed` feeds estimator-internal randomness (only
// the incomplete variant consumes it).
double evaluate_estimator(const EstimatorSpec& spec, std::span<const double> sample,
                          std::uint64_t seed = 0);

}  // namespace umom
