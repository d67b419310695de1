#include "umom/ustat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "umom/combinatorics.hpp"
#include "umom/compensated.hpp"
#include "umom/errors.hpp"
#include "umom/flatconfig.hpp"

namespace umom {

namespace {

// Exact conditional-expectation tables of a kernel over a finite-support
// law: level d maps an index tuple (i_1..i_d) into the support to
// E[h(v_{i_1}, ..., v_{i_d}, Y_{d+1}, ..., Y_m)]. Level m is the raw kernel
// on support tuples; level d is the probability contraction of level d+1.
class SupportTable {
public:
    SupportTable(const Kernel& kernel, const DiscreteFinite& law, std::uint64_t cap)
        : law_(law), order_(kernel.order()), support_(law.support_size()) {
        double needed = 1.0;
        for (int d = 0; d < order_; ++d) needed *= static_cast<double>(support_);
        if (needed > static_cast<double>(cap)) {
            throw CapExceeded("support table: |support|^m exceeds cap", saturate(needed));
        }
        levels_.resize(order_ + 1);
        std::size_t size = 1;
        std::vector<std::size_t> sizes(order_ + 1);
        for (int d = 0; d <= order_; ++d) {
            sizes[d] = size;
            size *= support_;
        }
        // level m: kernel on every support tuple, via an odometer
        levels_[order_].resize(sizes[order_]);
        std::vector<std::size_t> idx(order_, 0);
        std::vector<double> args(order_, law.value(0));
        for (std::size_t flat = 0; flat < levels_[order_].size(); ++flat) {
            levels_[order_][flat] = kernel(args);
            std::size_t pos = 0;
            while (pos < static_cast<std::size_t>(order_)) {
                if (++idx[pos] < support_) {
                    args[pos] = law.value(idx[pos]);
                    break;
                }
                idx[pos] = 0;
                args[pos] = law.value(0);
                ++pos;
            }
        }
        // contract one argument at a time
        for (int d = order_ - 1; d >= 0; --d) {
            levels_[d].resize(sizes[d]);
            const std::size_t stride = sizes[d];
            for (std::size_t flat = 0; flat < sizes[d]; ++flat) {
                CompensatedSum acc;
                for (std::size_t s = 0; s < support_; ++s) {
                    acc.add(law.prob(s) * levels_[d + 1][flat + s * stride]);
                }
                levels_[d][flat] = acc.value();
            }
        }
    }

    int order() const noexcept { return order_; }
    std::size_t support() const noexcept { return support_; }
    double grand_mean() const noexcept { return levels_[0][0]; }

    double conditional(std::span<const std::size_t> idx) const {
        return levels_[idx.size()][pack(idx)];
    }

    double kernel_at(std::span<const std::size_t> idx) const {
        return levels_[order_][pack(idx)];
    }

    // (pi_j h)(v_{i_1}, ..., v_{i_j}) by inclusion-exclusion over the 2^j
    // subsets of the fixed arguments.
    double projection(std::span<const std::size_t> idx) const {
        const std::size_t j = idx.size();
        CompensatedSum acc;
        std::vector<std::size_t> chosen;
        chosen.reserve(j);
        const std::size_t masks = std::size_t{1} << j;
        for (std::size_t mask = 0; mask < masks; ++mask) {
            chosen.clear();
            for (std::size_t b = 0; b < j; ++b) {
                if (mask & (std::size_t{1} << b)) chosen.push_back(idx[b]);
            }
            const double term = levels_[chosen.size()][pack(chosen)];
            const bool negate = ((j - chosen.size()) % 2) != 0;
            acc.add(negate ? -term : term);
        }
        return acc.value();
    }

private:
    static std::uint64_t saturate(double v) {
        return v > 1e18 ? std::numeric_limits<std::uint64_t>::max()
                        : static_cast<std::uint64_t>(v);
    }

    std::size_t pack(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (std::size_t i : idx) {
            flat += i * stride;
            stride *= support_;
        }
        return flat;
    }

    const DiscreteFinite& law_;
    int order_;
    std::size_t support_;
    std::vector<std::vector<double>> levels_;
};

// Exact E over P^d of a function given by index tuples.
template <typename F>
double support_expectation(const DiscreteFinite& law, std::size_t d, F&& f) {
    std::vector<std::size_t> idx(d, 0);
    CompensatedSum acc;
    for (;;) {
        double weight = 1.0;
        for (std::size_t i : idx) weight *= law.prob(i);
        acc.add(weight * f(std::span<const std::size_t>(idx)));
        std::size_t pos = 0;
        while (pos < d) {
            if (++idx[pos] < law.support_size()) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == d) break;
    }
    return acc.value();
}

std::vector<std::size_t> support_indices(std::span<const double> sample,
                                         const DiscreteFinite& law) {
    std::vector<std::size_t> idx(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) idx[i] = law.index_of(sample[i]);
    return idx;
}

std::vector<std::int64_t> support_counts(std::span<const std::size_t> indices,
                                         std::size_t support) {
    std::vector<std::int64_t> counts(support, 0);
    for (std::size_t i : indices) ++counts[i];
    return counts;
}

}  // namespace

Kernel::Kernel(int order, Eval eval, std::optional<double> sup_norm, std::string name)
    : order_(order), eval_(std::move(eval)), sup_norm_(sup_norm), name_(std::move(name)) {
    if (order_ < 1) throw InvalidArgument("kernel: order must be at least 1");
    if (!eval_) throw InvalidArgument("kernel: missing evaluation function");
}

namespace {

// Built-in kernels reduce their arguments in sorted order, which makes the
// evaluations exactly invariant under argument permutation (floating-point
// sums and products are commutative but not associative).
template <typename Reduce>
Kernel::Eval sorted_reduction(Reduce reduce) {
    return [reduce](std::span<const double> args) {
        std::array<double, 16> small;
        std::vector<double> large;
        std::span<double> sorted;
        if (args.size() <= small.size()) {
            std::copy(args.begin(), args.end(), small.begin());
            sorted = std::span<double>(small.data(), args.size());
        } else {
            large.assign(args.begin(), args.end());
            sorted = large;
        }
        std::sort(sorted.begin(), sorted.end());
        return reduce(std::span<const double>(sorted));
    };
}

}  // namespace

Kernel Kernel::mean(int order) {
    return Kernel(order,
                  sorted_reduction([](std::span<const double> args) {
                      double sum = 0.0;
                      for (double a : args) sum += a;
                      return sum / static_cast<double>(args.size());
                  }),
                  std::nullopt, "mean");
}

Kernel Kernel::product(int order) {
    return Kernel(order,
                  sorted_reduction([](std::span<const double> args) {
                      double prod = 1.0;
                      for (double a : args) prod *= a;
                      return prod;
                  }),
                  std::nullopt, "product");
}

Kernel Kernel::product_of(int order, std::function<double(double)> g, std::string name) {
    return Kernel(order,
                  sorted_reduction([g = std::move(g)](std::span<const double> args) {
                      double prod = 1.0;
                      for (double a : args) prod *= g(a);
                      return prod;
                  }),
                  std::nullopt, std::move(name));
}

Kernel Kernel::shifted_sign(int order, double shift) {
    const double root_m = std::sqrt(static_cast<double>(order));
    return Kernel(order,
                  sorted_reduction([shift, root_m](std::span<const double> args) {
                      double sum = 0.0;
                      for (double a : args) sum += a;
                      const double centered =
                          root_m * (sum / static_cast<double>(args.size()) - shift);
                      return centered >= 0.0 ? 1.0 : -1.0;
                  }),
                  1.0, "shifted_sign");
}

Kernel Kernel::centered_product(int order, double mu) {
    return Kernel(order,
                  sorted_reduction([mu](std::span<const double> args) {
                      double prod = 1.0;
                      for (double a : args) prod *= (a - mu);
                      return prod;
                  }),
                  std::nullopt, "centered_product");
}

double u_statistic_exact(std::span<const double> sample, const Kernel& kernel,
                         std::uint64_t cap) {
    const std::size_t n = sample.size();
    const auto m = static_cast<std::size_t>(kernel.order());
    if (m > n) throw InvalidArgument("u_statistic_exact: kernel order exceeds sample size");
    const std::uint64_t count =
        binomial_saturated(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m));
    if (count > cap) {
        throw CapExceeded("u_statistic_exact: C(N,m) = " + std::to_string(count) +
                              " exceeds cap " + std::to_string(cap),
                          count);
    }
    CombinationCursor cursor(n, m);
    std::vector<double> args(m);
    CompensatedSum acc;
    do {
        auto idx = cursor.indices();
        for (std::size_t i = 0; i < m; ++i) args[i] = sample[idx[i]];
        acc.add(kernel(args));
    } while (cursor.next());
    return acc.value() / static_cast<double>(count);
}

double hajek_statistic(std::span<const double> sample, const Kernel& kernel,
                       const DiscreteFinite& law) {
    if (sample.empty()) throw InvalidArgument("hajek_statistic: empty sample");
    SupportTable table(kernel, law, kEnumerationCap);
    const double grand = table.grand_mean();
    CompensatedSum acc;
    for (double x : sample) {
        const std::size_t idx[1] = {law.index_of(x)};
        acc.add(table.conditional(idx) - grand);
    }
    const double m_over_n =
        static_cast<double>(kernel.order()) / static_cast<double>(sample.size());
    return m_over_n * acc.value();
}

double hoeffding_projection(const Kernel& kernel, const DiscreteFinite& law, int j,
                            std::span<const double> points) {
    if (j < 1 || j > kernel.order()) {
        throw InvalidArgument("hoeffding_projection: need 1 <= j <= m");
    }
    if (points.size() != static_cast<std::size_t>(j)) {
        throw InvalidArgument("hoeffding_projection: need exactly j points");
    }
    SupportTable table(kernel, law, kEnumerationCap);
    std::vector<std::size_t> idx(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) idx[i] = law.index_of(points[i]);
    return table.projection(idx);
}

DecompositionReport decomposition_report(const Kernel& kernel, const DiscreteFinite& law,
                                         std::int64_t n, std::uint64_t cap) {
    const int m = kernel.order();
    if (n < m) throw InvalidArgument("decomposition_report: need N >= m");
    SupportTable table(kernel, law, cap);

    DecompositionReport report;
    report.m = m;
    report.n = n;

    // var_h directly from the kernel values; the component identity
    // sum_j C(m,j) delta_j^2 is asserted against it by callers.
    const double grand = table.grand_mean();
    report.var_h = support_expectation(law, static_cast<std::size_t>(m), [&](auto idx) {
        const double centered = table.kernel_at(idx) - grand;
        return centered * centered;
    });

    report.delta_sq.resize(m);
    for (int j = 1; j <= m; ++j) {
        report.delta_sq[j - 1] = support_expectation(law, static_cast<std::size_t>(j), [&](auto idx) {
            const double pi = table.projection(idx);
            return pi * pi;
        });
    }

    CompensatedSum var_u;
    for (int j = 1; j <= m; ++j) {
        const double weight = binomial_double(m, j) * binomial_double(m, j) /
                              binomial_double(n, j);
        var_u.add(weight * report.delta_sq[j - 1]);
    }
    report.var_u = var_u.value();
    report.var_s = static_cast<double>(m) * static_cast<double>(m) * report.delta_sq[0] /
                   static_cast<double>(n);
    report.var_gap = report.var_u - report.var_s;

    // Cross-covariances between projections of different orders, integrated
    // against the product measure with nested leading arguments.
    double residual = 0.0;
    for (int j = 1; j <= m; ++j) {
        for (int jp = j + 1; jp <= m; ++jp) {
            const double cross =
                support_expectation(law, static_cast<std::size_t>(jp), [&](auto idx) {
                    return table.projection(idx.subspan(0, j)) * table.projection(idx);
                });
            residual = std::max(residual, std::abs(cross));
        }
    }
    report.orthogonality_residual = residual;
    return report;
}

double u_variance_identity(const DecompositionReport& report, const DiscreteFinite& law,
                           const Kernel& kernel, int n, std::uint64_t cap) {
    const int m = kernel.order();
    if (n < m) throw InvalidArgument("u_variance_identity: need N >= m");
    const std::size_t support = law.support_size();
    double outcomes = 1.0;
    for (int i = 0; i < n; ++i) outcomes *= static_cast<double>(support);
    if (outcomes > static_cast<double>(cap)) {
        const auto required = outcomes > 1e18 ? std::numeric_limits<std::uint64_t>::max()
                                              : static_cast<std::uint64_t>(outcomes);
        throw CapExceeded("u_variance_identity: |support|^N exceeds cap", required);
    }
    SupportTable table(kernel, law, cap);

    // The sum over all |support|^N outcomes is grouped by atom multiplicity:
    // both the outcome probability and U depend on the outcome only through
    // its count vector, because the kernel is permutation-symmetric.
    const double inv_cnm = 1.0 / binomial_double(n, m);
    std::vector<std::int64_t> ceilings(support, n);
    std::vector<std::pair<double, double>> classes;  // (probability, U value)
    std::vector<std::size_t> tuple(static_cast<std::size_t>(m));
    for_each_bounded_composition(n, ceilings, [&](std::span<const int> counts) {
        double log_weight = std::lgamma(static_cast<double>(n) + 1.0);
        double prob_part = 1.0;
        for (std::size_t a = 0; a < support; ++a) {
            log_weight -= std::lgamma(static_cast<double>(counts[a]) + 1.0);
            prob_part *= std::pow(law.prob(a), counts[a]);
        }
        const double probability = std::exp(log_weight) * prob_part;

        std::vector<std::int64_t> atom_counts(counts.begin(), counts.end());
        CompensatedSum u_acc;
        for_each_bounded_composition(m, atom_counts, [&](std::span<const int> chosen) {
            double ways = 1.0;
            std::size_t pos = 0;
            for (std::size_t a = 0; a < support; ++a) {
                ways *= binomial_double(atom_counts[a], chosen[a]);
                for (int r = 0; r < chosen[a]; ++r) tuple[pos++] = a;
            }
            if (ways != 0.0) u_acc.add(ways * table.kernel_at(tuple));
        });
        classes.emplace_back(probability, u_acc.value() * inv_cnm);
    });

    CompensatedSum mean_acc;
    for (const auto& [p, u] : classes) mean_acc.add(p * u);
    const double mean_u = mean_acc.value();
    CompensatedSum var_acc;
    for (const auto& [p, u] : classes) var_acc.add(p * (u - mean_u) * (u - mean_u));
    return std::abs(var_acc.value() - report.var_u);
}

double hajek_gap_bound(double var_h, std::int64_t n, int m) {
    if (m >= n) throw InvalidArgument("hajek_gap_bound: need m < N");
    const double ratio = static_cast<double>(m) / static_cast<double>(n);
    return var_h * ratio * ratio / (1.0 - ratio);
}

double blocked_average(std::span<const double> sample, const Kernel& kernel,
                       std::span<const std::size_t> permutation) {
    const std::size_t n = sample.size();
    const auto m = static_cast<std::size_t>(kernel.order());
    if (n < m) throw InvalidArgument("blocked_average: need N >= m");
    if (permutation.size() != n) {
        throw InvalidArgument("blocked_average: permutation length must equal N");
    }
    std::vector<bool> seen(n, false);
    for (std::size_t p : permutation) {
        if (p >= n || seen[p]) throw InvalidArgument("blocked_average: not a permutation");
        seen[p] = true;
    }
    const std::size_t k = n / m;
    std::vector<double> args(m);
    CompensatedSum acc;
    for (std::size_t block = 0; block < k; ++block) {
        for (std::size_t i = 0; i < m; ++i) args[i] = sample[permutation[block * m + i]];
        acc.add(kernel(args));
    }
    return acc.value() / static_cast<double>(k);
}

double realize_degenerate_component(std::span<const double> sample, const Kernel& kernel,
                                    const DiscreteFinite& law, int j) {
    const int m = kernel.order();
    const auto n = static_cast<std::int64_t>(sample.size());
    if (j < 1 || j > m) throw InvalidArgument("realize_degenerate_component: need 1 <= j <= m");
    if (n < j) throw InvalidArgument("realize_degenerate_component: need N >= j");
    SupportTable table(kernel, law, kEnumerationCap);
    const auto indices = support_indices(sample, law);
    const auto counts = support_counts(indices, law.support_size());

    // Group the sum over j-subsets by how many of each atom the subset picks;
    // the projection is symmetric so only the multiset matters.
    CompensatedSum acc;
    std::vector<std::size_t> tuple(static_cast<std::size_t>(j));
    for_each_bounded_composition(j, counts, [&](std::span<const int> chosen) {
        double ways = 1.0;
        std::size_t pos = 0;
        for (std::size_t a = 0; a < counts.size(); ++a) {
            ways *= binomial_double(counts[a], chosen[a]);
            for (int r = 0; r < chosen[a]; ++r) tuple[pos++] = a;
        }
        if (ways != 0.0) acc.add(ways * table.projection(tuple));
    });
    const double scale = std::sqrt(binomial_double(m, j) / binomial_double(n, j));
    return scale * acc.value();
}

std::string DecompositionReport::to_json() const {
    nlohmann::json doc;
    doc["m"] = m;
    doc["N"] = n;
    doc["delta_sq"] = delta_sq;
    doc["var_h"] = var_h;
    doc["var_u"] = var_u;
    doc["var_s"] = var_s;
    doc["var_gap"] = var_gap;
    doc["orthogonality_residual"] = orthogonality_residual;
    return doc.dump(2) + "\n";
}

DecompositionReport DecompositionReport::from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    DecompositionReport report;
    report.m = doc.at("m").get<int>();
    report.n = doc.at("N").get<std::int64_t>();
    report.delta_sq = doc.at("delta_sq").get<std::vector<double>>();
    report.var_h = doc.at("var_h").get<double>();
    report.var_u = doc.at("var_u").get<double>();
    report.var_s = doc.at("var_s").get<double>();
    report.var_gap = doc.at("var_gap").get<double>();
    report.orthogonality_residual = doc.at("orthogonality_residual").get<double>();
    return report;
}

}  // namespace umom
