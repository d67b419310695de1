#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umom/distributions.hpp"

namespace umom {

// Permutation-symmetric kernel h of m real arguments. Built-ins cover the
// kernels the deviation analysis needs; arbitrary callables are accepted as
// long as they are symmetric.
class Kernel {
public:
    using Eval = std::function<double(std::span<const double>)>;

    Kernel(int order, Eval eval, std::optional<double> sup_norm = std::nullopt,
           std::string name = "custom");

    // Average of the arguments.
    static Kernel mean(int order);
    // Product of the arguments.
    static Kernel product(int order);
    // Product of g(x_i).
    static Kernel product_of(int order, std::function<double(double)> g,
                             std::string name = "product_of");
    // sign(sqrt(m) * (mean(args) - shift)) with sign(0) = +1.
    static Kernel shifted_sign(int order, double shift);
    // Product of (x_i - mu); completely degenerate when mu is the law mean.
    static Kernel centered_product(int order, double mu);

    int order() const noexcept { return order_; }
    double operator()(std::span<const double> args) const { return eval_(args); }
    const std::optional<double>& sup_norm() const noexcept { return sup_norm_; }
    const std::string& name() const noexcept { return name_; }

private:
    int order_;
    Eval eval_;
    std::optional<double> sup_norm_;
    std::string name_;
};

// Hoeffding component variances and the variance identities assembled from
// them. delta_sq[j-1] holds delta_j^2 for j = 1..m.
struct DecompositionReport {
    int m = 0;
    std::int64_t n = 0;
    std::vector<double> delta_sq;
    double var_h = 0.0;    // Var h(Y_1..Y_m)
    double var_u = 0.0;    // Var U_{N,m} = sum_j C(m,j)^2 / C(N,j) * delta_j^2
    double var_s = 0.0;    // Var of the Hajek projection, m^2 delta_1^2 / N
    double var_gap = 0.0;  // var_u - var_s
    double orthogonality_residual = 0.0;

    std::string to_json() const;
    static DecompositionReport from_json(const std::string& text);
};

// Exact average of the kernel over all C(N,m) subsets.
double u_statistic_exact(std::span<const double> sample, const Kernel& kernel,
                         std::uint64_t cap = kEnumerationCap);

// Hajek projection (m/N) * sum_i (E[h(X_i, Y_2..Y_m)] - E[h]), with the
// conditional expectations computed exactly over P. Sample values must lie
// in the support of P.
double hajek_statistic(std::span<const double> sample, const Kernel& kernel,
                       const DiscreteFinite& law);

// j-th Hoeffding projection (pi_j h)(points) by inclusion-exclusion over the
// 2^j subsets of the fixed arguments, every expectation exact over P.
double hoeffding_projection(const Kernel& kernel, const DiscreteFinite& law, int j,
                            std::span<const double> points);

// Exact delta_j^2 for all j plus the assembled variance identities at sample
// size N.
DecompositionReport decomposition_report(const Kernel& kernel, const DiscreteFinite& law,
                                         std::int64_t n, std::uint64_t cap = kEnumerationCap);

// Brute-force Var(U_{N,m}) over the product law P^N, returned as the
// absolute difference from report.var_u. The enumeration is grouped by
// outcome multiplicity classes, which is an exact regrouping of the full
// |support|^N sum.
double u_variance_identity(const DecompositionReport& report, const DiscreteFinite& law,
                           const Kernel& kernel, int n, std::uint64_t cap = kEnumerationCap);

// var_h * (m/N)^2 / (1 - m/N), the bound dominating Var(U - S) for m < N.
double hajek_gap_bound(double var_h, std::int64_t n, int m);

// Average of the kernel over the k = floor(N/m) consecutive blocks of the
// permuted sample. Averaging this over all N! permutations reproduces the
// exact U-statistic.
double blocked_average(std::span<const double> sample, const Kernel& kernel,
                       std::span<const std::size_t> permutation);

// Realized degenerate component
//   V_{N,j} = sqrt(C(m,j)/C(N,j)) * sum over j-subsets of (pi_j h)(X, ...),
// computed exactly by grouping the sum over subsets by atom multiplicities.
double realize_degenerate_component(std::span<const double> sample, const Kernel& kernel,
                                    const DiscreteFinite& law, int j);

}  // namespace umom
