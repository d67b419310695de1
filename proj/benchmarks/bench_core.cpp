#include <benchmark/benchmark.h>

#include <vector>

#include "umom/distributions.hpp"
#include "umom/estimators.hpp"
#include "umom/rng.hpp"
#include "umom/ustat.hpp"

using namespace umom;

namespace {

std::vector<double> student_sample(std::size_t n, std::uint64_t seed) {
    Engine rng(seed);
    return sample(DistributionSpec::student_t(5.0), n, rng);
}

void BM_SampleStudentT(benchmark::State& state) {
    const auto spec = DistributionSpec::student_t(5.0);
    Engine rng(1);
    std::vector<double> buffer(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        sample_into(spec, buffer, rng);
        benchmark::DoNotOptimize(buffer.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleStudentT)->Arg(1 << 12)->Arg(1 << 16);

void BM_SampleGaussian(benchmark::State& state) {
    const auto spec = DistributionSpec::gaussian(0.0, 1.0);
    Engine rng(1);
    std::vector<double> buffer(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        sample_into(spec, buffer, rng);
        benchmark::DoNotOptimize(buffer.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleGaussian)->Arg(1 << 16);

void BM_MomEstimate(benchmark::State& state) {
    const auto x = student_sample(20000, 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mom_estimate(x, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_MomEstimate)->Arg(20)->Arg(200);

void BM_ExactUmomPairs(benchmark::State& state) {
    const auto x = student_sample(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_umom(x, 2));
    }
}
BENCHMARK(BM_ExactUmomPairs)->Arg(500)->Arg(2000);

void BM_IncompleteUmom(benchmark::State& state) {
    const auto x = student_sample(2000, 4);
    const auto subsets = state.range(0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(incomplete_umom(x, 40, subsets, ++seed));
    }
    state.SetItemsProcessed(state.iterations() * subsets * 40);
}
BENCHMARK(BM_IncompleteUmom)->Arg(1000)->Arg(10000);

void BM_DecompositionReport(benchmark::State& state) {
    const DiscreteFinite law({{-2.0, 0.2}, {-0.5, 0.3}, {1.0, 0.35}, {3.0, 0.15}});
    const Kernel kernel = Kernel::product(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(decomposition_report(kernel, law, 12));
    }
}
BENCHMARK(BM_DecompositionReport)->Arg(2)->Arg(4);

void BM_RealizeDegenerateComponent(benchmark::State& state) {
    const DiscreteFinite law({{0.0, 0.3}, {2.0, 0.7}});
    const Kernel kernel = Kernel::centered_product(2, law.mean());
    Engine rng(5);
    const auto xs = sample(DistributionSpec::discrete(law),
                           static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(realize_degenerate_component(xs, kernel, law, 2));
    }
}
BENCHMARK(BM_RealizeDegenerateComponent)->Arg(200)->Arg(800);

}  // namespace

BENCHMARK_MAIN();
