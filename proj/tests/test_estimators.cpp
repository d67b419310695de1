#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"
#include "umom/combinatorics.hpp"
#include "umom/distributions.hpp"
#include "umom/errors.hpp"
#include "umom/estimators.hpp"

using namespace umom;

namespace {

// Independent subset-mean enumeration: plain recursion, no shared code with
// the library's cursor.
void collect_subset_means(std::span<const double> sample, std::size_t m, std::size_t start,
                          double sum, std::size_t chosen, std::vector<double>& out) {
    if (chosen == m) {
        out.push_back(sum / static_cast<double>(m));
        return;
    }
    for (std::size_t i = start; i + (m - chosen) <= sample.size(); ++i) {
        collect_subset_means(sample, m, i + 1, sum + sample[i], chosen + 1, out);
    }
}

std::vector<double> random_sample(std::size_t n, std::uint64_t seed) {
    const auto spec = DistributionSpec::student_t(4.0);
    Engine rng(seed);
    return sample(spec, n, rng);
}

}  // namespace

TEST_CASE("median follows the midpoint convention") {
    CHECK(median(std::vector<double>{1, 2, 3}) == 2.0);
    CHECK(median(std::vector<double>{1, 2, 3, 4}) == 2.5);
    CHECK(median(std::vector<double>{5, 5, 5}) == 5.0);
    CHECK(median(std::vector<double>{9, 1}) == 5.0);
    CHECK_THROWS_AS(median(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("mom estimate on hand-checkable inputs") {
    const std::vector<double> constant(10, 3.25);
    for (int k : {1, 2, 5}) CHECK(mom_estimate(constant, k) == 3.25);

    const std::vector<double> sample{0, 0, 3, 3, 12, 12};
    CHECK(mom_estimate(sample, 3) == 3.0);

    // k = 1 degenerates to the sample mean
    CHECK(mom_estimate(sample, 1) == doctest::Approx(5.0).epsilon(1e-15));

    CHECK_THROWS_AS(mom_estimate(sample, 0), InvalidArgument);
    CHECK_THROWS_AS(mom_estimate(sample, 4), InvalidArgument);  // k > N/2

    // shuffled blocking stays within bounds and is seed-deterministic
    Engine rng_a(5);
    Engine rng_b(5);
    const auto x = random_sample(101, 8);
    CHECK(mom_estimate(x, 7, &rng_a) == mom_estimate(x, 7, &rng_b));
}

TEST_CASE("exact umom on hand-enumerable inputs") {
    const std::vector<double> x{0.4, -1.0, 2.5, 7.0};
    CHECK(exact_umom(x, 4) == doctest::Approx(test_util::mean_of(x)).epsilon(1e-15));
    CHECK(exact_umom(x, 1) == median(x));

    const std::vector<double> y{0, 1, 2, 9};
    CHECK(exact_umom(y, 2) == 3.0);  // subset means {0.5, 1, 1.5, 4.5, 5, 5.5}

    const std::vector<double> big(40, 0.0);
    CHECK_THROWS_AS(exact_umom(big, 20), CapExceeded);
    try {
        exact_umom(big, 20);
    } catch (const CapExceeded& e) {
        CHECK(e.required() == binomial_saturated(40, 20));
    }
}

TEST_CASE("exact umom equals the median of an independent enumeration") {
    const auto x = random_sample(12, 21);
    for (int m : {2, 3, 5}) {
        std::vector<double> means;
        collect_subset_means(x, static_cast<std::size_t>(m), 0, 0.0, 0, means);
        std::sort(means.begin(), means.end());
        const std::size_t n = means.size();
        const double expected = n % 2 == 1
                                    ? means[n / 2]
                                    : 0.5 * (means[n / 2 - 1] + means[n / 2]);
        CHECK(exact_umom(x, m) == doctest::Approx(expected).epsilon(1e-15));
    }
}

TEST_CASE("exact umom and the u-statistic engine enumerate the same subsets") {
    // Both walk the lexicographic cursor over C(N,m); the estimator must
    // equal the median over the subset means the engine visits.
    const auto x = random_sample(14, 63);
    for (int m : {2, 4}) {
        CombinationCursor cursor(x.size(), static_cast<std::size_t>(m));
        std::vector<double> means;
        do {
            double sum = 0.0;
            for (std::size_t i : cursor.indices()) sum += x[i];
            means.push_back(sum / m);
        } while (cursor.next());
        CHECK(means.size() == binomial_saturated(static_cast<std::int64_t>(x.size()), m));
        CHECK(exact_umom(x, m) == doctest::Approx(median(means)).epsilon(1e-14));
    }
}

TEST_CASE("incomplete umom: determinism and concentration") {
    const std::vector<double> constant(30, -2.5);
    CHECK(incomplete_umom(constant, 4, 100, 9) == -2.5);

    const auto x = random_sample(50, 33);
    CHECK(incomplete_umom(x, 5, 1000, 77) == incomplete_umom(x, 5, 1000, 77));
    CHECK(incomplete_umom(x, 5, 1000, 77) != incomplete_umom(x, 5, 1000, 78));

    // With M = C(N,m) and no replacement the estimator IS the exact one.
    const std::vector<double> y{0.3, 1.9, -0.7, 4.2, 2.2};
    CHECK(incomplete_umom(y, 2, 10, 123, false) == exact_umom(y, 2));

    // The subset means of [0,1,2,9] at m=2 live on {0.5,1,1.5,4.5,5,5.5}
    // with exactly half the mass at or below 1.5, so the sampled median
    // lands in the central gap [1.5, 4.5].
    const std::vector<double> z{0, 1, 2, 9};
    const double est = incomplete_umom(z, 2, 100000, 2024);
    CHECK(est >= 1.5);
    CHECK(est <= 4.5);

    CHECK_THROWS_AS(incomplete_umom(z, 0, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(incomplete_umom(z, 2, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(incomplete_umom(z, 2, 7, 1, false), InvalidArgument);  // M > C(4,2)
}

TEST_CASE("breakdown fraction closed form") {
    CHECK(breakdown_fraction(1) == 0.5);
    CHECK(breakdown_fraction(2) == doctest::Approx(0.2928932188134524).epsilon(1e-12));
    CHECK(std::abs(breakdown_fraction(100) - std::log(2.0) / 100.0) < 1e-4);
    CHECK_THROWS_AS(breakdown_fraction(0), InvalidArgument);
}

TEST_CASE("generalized Hodges-Lehmann asymptotic variance") {
    CHECK(hl_asymptotic_variance(2, 1.0) ==
          doctest::Approx(std::numbers::pi / 3.0).epsilon(1e-14));
    CHECK(hl_asymptotic_variance(3, 1.0) == doctest::Approx(1.0195107).epsilon(1e-6));
    const double large = hl_asymptotic_variance(1000, 1.0);
    CHECK(large > 1.0);
    CHECK(large < 1.001);
    CHECK(hl_asymptotic_variance(2, 3.0) ==
          doctest::Approx(9.0 * std::numbers::pi / 3.0).epsilon(1e-14));
    CHECK_THROWS_AS(hl_asymptotic_variance(1, 1.0), InvalidArgument);
}

TEST_CASE("contaminate replaces exactly the requested positions") {
    const std::vector<double> x{0, 0, 0, 0};
    Engine rng(4);
    CHECK(contaminate(x, 0, 9.0, rng) == x);
    const auto all = contaminate(x, 4, 7.0, rng);
    CHECK(all == std::vector<double>(4, 7.0));
    const auto one = contaminate(x, 1, 1e9, rng);
    CHECK(std::count(one.begin(), one.end(), 1e9) == 1);
    CHECK_THROWS_AS(contaminate(x, 5, 1.0, rng), InvalidArgument);
}

TEST_CASE("translation and scale equivariance") {
    const auto x = random_sample(24, 55);
    const std::vector<EstimatorSpec> specs{
        EstimatorSpec::sample_mean(),          EstimatorSpec::mom(5),
        EstimatorSpec::exact_umom(3),          EstimatorSpec::hodges_lehmann(2),
        EstimatorSpec::incomplete_umom(4, 64),
    };
    const double shift = 13.75;
    const double scale = -2.5;
    for (const auto& spec : specs) {
        const double base = evaluate_estimator(spec, x, 7);
        std::vector<double> shifted(x.size());
        std::vector<double> scaled(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            shifted[i] = x[i] + shift;
            scaled[i] = x[i] * scale;
        }
        CHECK(evaluate_estimator(spec, shifted, 7) ==
              doctest::Approx(base + shift).epsilon(1e-9));
        CHECK(evaluate_estimator(spec, scaled, 7) ==
              doctest::Approx(base * scale).epsilon(1e-9));
    }
}

TEST_CASE("exact umom is permutation invariant, bit for bit") {
    std::vector<double> x{0.3, 1.7, -2.2, 9.4};
    const double reference = exact_umom(x, 2);
    std::sort(x.begin(), x.end());
    do {
        CHECK(exact_umom(x, 2) == reference);
    } while (std::next_permutation(x.begin(), x.end()));
}

TEST_CASE("all estimators stay within the sample range") {
    const auto x = random_sample(40, 91);
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    const std::vector<EstimatorSpec> specs{
        EstimatorSpec::sample_mean(),           EstimatorSpec::mom(7),
        EstimatorSpec::exact_umom(4),           EstimatorSpec::hodges_lehmann(2),
        EstimatorSpec::incomplete_umom(6, 200),
    };
    for (const auto& spec : specs) {
        const double est = evaluate_estimator(spec, x, 3);
        CHECK(est >= lo);
        CHECK(est <= hi);
    }
}

TEST_CASE("finite-sample breakdown of the subset median") {
    const std::size_t n = 12;
    const double outlier = 1e12;
    const auto clean = random_sample(n, 1234);
    const double lo = *std::min_element(clean.begin(), clean.end());
    const double hi = *std::max_element(clean.begin(), clean.end());

    for (int m : {2, 3}) {
        const std::uint64_t half = binomial_saturated(n, m) / 2;
        bool exploded = false;
        for (std::size_t c = 0; c <= n; ++c) {
            Engine rng(derive_seed(500, c));
            const auto corrupted = contaminate(clean, c, outlier, rng);
            const double est = exact_umom(corrupted, m);
            if (binomial_saturated(n - c, m) > half) {
                CHECK(est >= lo);
                CHECK(est <= hi);
            } else {
                CHECK(est > 1e6);
                exploded = true;
                break;
            }
        }
        CHECK(exploded);
    }
}

TEST_CASE("estimator specs round-trip through the flat config dialect") {
    const std::vector<EstimatorSpec> specs{
        EstimatorSpec::sample_mean(),
        EstimatorSpec::mom(100),
        EstimatorSpec::exact_umom(2),
        EstimatorSpec::hodges_lehmann(3),
        EstimatorSpec::incomplete_umom(40, 10000),
        EstimatorSpec::incomplete_umom(5, 64, false),
    };
    for (const auto& spec : specs) {
        FlatConfig kv;
        spec.to_config(kv);
        CHECK(EstimatorSpec::from_config(kv) == spec);
    }
}
