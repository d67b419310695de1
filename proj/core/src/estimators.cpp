#include "umom/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "umom/combinatorics.hpp"
#include "umom/compensated.hpp"
#include "umom/errors.hpp"

namespace umom {

namespace {

double block_mean(std::span<const double> sample, std::size_t begin, std::size_t count) {
    CompensatedSum acc;
    for (std::size_t i = 0; i < count; ++i) acc.add(sample[begin + i]);
    return acc.value() / static_cast<double>(count);
}

}  // namespace

double median_inplace(std::span<double> values) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidArgument("median: empty input");
    auto begin = values.begin();
    const std::size_t upper = n / 2;
    std::nth_element(begin, begin + upper, values.end());
    const double hi = values[upper];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(begin, begin + upper);
    return 0.5 * (lo + hi);
}

double median(std::span<const double> values) {
    std::vector<double> scratch(values.begin(), values.end());
    return median_inplace(scratch);
}

double mom_estimate(std::span<const double> sample, int blocks, Engine* shuffle_rng) {
    const std::size_t n = sample.size();
    if (n == 0) throw InvalidArgument("mom_estimate: empty sample");
    if (blocks < 1 || (blocks != 1 && static_cast<std::size_t>(blocks) * 2 > n)) {
        throw InvalidArgument("mom_estimate: need 1 <= k <= N/2 (or k = 1), got k = " +
                              std::to_string(blocks) + " with N = " + std::to_string(n));
    }
    const auto k = static_cast<std::size_t>(blocks);
    const std::size_t width = n / k;
    std::vector<double> means(k);
    if (shuffle_rng == nullptr) {
        for (std::size_t j = 0; j < k; ++j) means[j] = block_mean(sample, j * width, width);
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t r = shuffle_rng->below(i + 1);
            std::swap(order[i], order[r]);
        }
        for (std::size_t j = 0; j < k; ++j) {
            CompensatedSum acc;
            for (std::size_t i = 0; i < width; ++i) acc.add(sample[order[j * width + i]]);
            means[j] = acc.value() / static_cast<double>(width);
        }
    }
    return median_inplace(means);
}

double exact_umom(std::span<const double> sample, int subset_size, std::uint64_t cap) {
    const std::size_t n = sample.size();
    if (subset_size < 1 || static_cast<std::size_t>(subset_size) > n) {
        throw InvalidArgument("exact_umom: need 1 <= m <= N");
    }
    const std::uint64_t count = binomial_saturated(static_cast<std::int64_t>(n), subset_size);
    if (count > cap) {
        throw CapExceeded("exact_umom: C(N,m) = " + std::to_string(count) + " exceeds cap " +
                              std::to_string(cap),
                          count);
    }
    std::vector<double> means;
    means.reserve(count);
    const double inv_m = 1.0 / static_cast<double>(subset_size);
    for_each_subset_sum(sample, static_cast<std::size_t>(subset_size),
                        [&](double sum) { means.push_back(sum * inv_m); });
    return median_inplace(means);
}

double incomplete_umom(std::span<const double> sample, int subset_size, std::int64_t subsets,
                       std::uint64_t seed, bool with_replacement) {
    const std::size_t n = sample.size();
    if (subset_size < 1 || static_cast<std::size_t>(subset_size) > n) {
        throw InvalidArgument("incomplete_umom: need 1 <= m <= N");
    }
    if (subsets < 1) throw InvalidArgument("incomplete_umom: need M >= 1");
    const auto m = static_cast<std::size_t>(subset_size);
    if (!with_replacement) {
        const std::uint64_t total = binomial_saturated(static_cast<std::int64_t>(n), subset_size);
        if (static_cast<std::uint64_t>(subsets) > total) {
            throw InvalidArgument("incomplete_umom: M exceeds C(N,m) without replacement");
        }
    }

    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<std::size_t> swaps(m);
    std::set<std::vector<std::size_t>> seen;
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(subsets));
    const double inv_m = 1.0 / static_cast<double>(m);

    for (std::int64_t s = 0; s < subsets; ++s) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            // Each subset comes from its own counter-derived stream, so the
            // draw is independent of evaluation order.
            Engine rng(derive_seed(seed, static_cast<std::uint64_t>(s) +
                                             attempt * static_cast<std::uint64_t>(subsets)));
            double sum = 0.0;
            for (std::size_t t = 0; t < m; ++t) {
                const std::size_t r = t + static_cast<std::size_t>(rng.below(n - t));
                std::swap(pool[t], pool[r]);
                swaps[t] = r;
                sum += sample[pool[t]];
            }
            bool fresh = true;
            if (!with_replacement) {
                std::vector<std::size_t> key(pool.begin(), pool.begin() + m);
                std::sort(key.begin(), key.end());
                fresh = seen.insert(std::move(key)).second;
            }
            for (std::size_t t = m; t-- > 0;) std::swap(pool[t], pool[swaps[t]]);
            if (fresh) {
                means.push_back(sum * inv_m);
                break;
            }
        }
    }
    return median_inplace(means);
}

double breakdown_fraction(int subset_size) {
    if (subset_size < 1) throw InvalidArgument("breakdown_fraction: m must be at least 1");
    return 1.0 - std::pow(0.5, 1.0 / static_cast<double>(subset_size));
}

double hl_asymptotic_variance(int subset_size, double sigma) {
    if (subset_size < 2) throw InvalidArgument("hl_asymptotic_variance: m must be at least 2");
    if (!(sigma > 0.0)) throw InvalidArgument("hl_asymptotic_variance: sigma must be positive");
    const double m = subset_size;
    return m * sigma * sigma * std::atan(1.0 / std::sqrt(m * m - 1.0));
}

std::vector<double> contaminate(std::span<const double> sample, std::size_t count, double value,
                                Engine& rng) {
    const std::size_t n = sample.size();
    if (count > n) throw InvalidArgument("contaminate: count exceeds sample size");
    std::vector<double> out(sample.begin(), sample.end());
    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    for (std::size_t t = 0; t < count; ++t) {
        const std::size_t r = t + static_cast<std::size_t>(rng.below(n - t));
        std::swap(positions[t], positions[r]);
        out[positions[t]] = value;
    }
    return out;
}

EstimatorSpec EstimatorSpec::sample_mean() { return EstimatorSpec(Variant{SampleMeanSpec{}}); }

EstimatorSpec EstimatorSpec::mom(int blocks) {
    if (blocks < 1) throw InvalidArgument("mom: k must be at least 1");
    return EstimatorSpec(Variant{MomSpec{blocks}});
}

EstimatorSpec EstimatorSpec::exact_umom(int subset_size) {
    if (subset_size < 1) throw InvalidArgument("exact_umom: m must be at least 1");
    return EstimatorSpec(Variant{ExactUmomSpec{subset_size}});
}

EstimatorSpec EstimatorSpec::hodges_lehmann(int subset_size) {
    if (subset_size < 1) throw InvalidArgument("hodges_lehmann: m must be at least 1");
    return EstimatorSpec(Variant{HodgesLehmannSpec{subset_size}});
}

EstimatorSpec EstimatorSpec::incomplete_umom(int subset_size, std::int64_t subsets,
                                             bool with_replacement) {
    if (subset_size < 1) throw InvalidArgument("incomplete_umom: m must be at least 1");
    if (subsets < 1) throw InvalidArgument("incomplete_umom: M must be at least 1");
    return EstimatorSpec(Variant{IncompleteUmomSpec{subset_size, subsets, with_replacement}});
}

std::string EstimatorSpec::name() const {
    return std::visit(
        [](const auto& spec) -> std::string {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, SampleMeanSpec>) return "sample_mean";
            if constexpr (std::is_same_v<T, MomSpec>) return "mom";
            if constexpr (std::is_same_v<T, ExactUmomSpec>) return "exact_umom";
            if constexpr (std::is_same_v<T, HodgesLehmannSpec>) return "hodges_lehmann";
            if constexpr (std::is_same_v<T, IncompleteUmomSpec>) return "incomplete_umom";
        },
        variant_);
}

bool EstimatorSpec::uses_randomness() const noexcept {
    return std::holds_alternative<IncompleteUmomSpec>(variant_);
}

void EstimatorSpec::to_config(FlatConfig& out) const {
    out.set("estimator", name());
    std::visit(
        [&](const auto& spec) {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, MomSpec>) {
                out.set("k", std::to_string(spec.blocks));
            } else if constexpr (std::is_same_v<T, ExactUmomSpec> ||
                                 std::is_same_v<T, HodgesLehmannSpec>) {
                out.set("m", std::to_string(spec.subset_size));
            } else if constexpr (std::is_same_v<T, IncompleteUmomSpec>) {
                out.set("m", std::to_string(spec.subset_size));
                out.set("subsets", std::to_string(spec.subsets));
                out.set("with_replacement", spec.with_replacement ? "true" : "false");
            }
        },
        variant_);
}

EstimatorSpec EstimatorSpec::from_config(const FlatConfig& config) {
    const std::string kind = config.get_string("estimator");
    if (kind == "sample_mean") return sample_mean();
    if (kind == "mom") return mom(static_cast<int>(config.get_int("k")));
    if (kind == "exact_umom") return exact_umom(static_cast<int>(config.get_int("m")));
    if (kind == "hodges_lehmann") return hodges_lehmann(static_cast<int>(config.get_int("m")));
    if (kind == "incomplete_umom") {
        return incomplete_umom(static_cast<int>(config.get_int("m")), config.get_int("subsets"),
                               config.get_bool_or("with_replacement", true));
    }
    throw ConfigError("key 'estimator': unknown estimator '" + kind + "'", "estimator");
}

std::vector<std::string> EstimatorSpec::config_keys() {
    return {"estimator", "k", "m", "subsets", "with_replacement"};
}

bool EstimatorSpec::operator==(const EstimatorSpec& other) const {
    FlatConfig a;
    FlatConfig b;
    to_config(a);
    other.to_config(b);
    return a.serialize() == b.serialize();
}

double evaluate_estimator(const EstimatorSpec& spec, std::span<const double> sample,
                          std::uint64_t seed) {
    return std::visit(
        [&](const auto& e) -> double {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, SampleMeanSpec>) {
                if (sample.empty()) throw InvalidArgument("sample_mean: empty sample");
                return compensated_mean(sample);
            } else if constexpr (std::is_same_v<T, MomSpec>) {
                return mom_estimate(sample, e.blocks);
            } else if constexpr (std::is_same_v<T, ExactUmomSpec>) {
                return exact_umom(sample, e.subset_size);
            } else if constexpr (std::is_same_v<T, HodgesLehmannSpec>) {
                return exact_umom(sample, e.subset_size);
            } else {
                return incomplete_umom(sample, e.subset_size, e.subsets, seed,
                                       e.with_replacement);
            }
        },
        spec.variant());
}

}  // namespace umom
