#include "umom/selftest.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "umom/combinatorics.hpp"
#include "umom/compensated.hpp"
#include "umom/distributions.hpp"
#include "umom/ustat.hpp"

namespace umom {

namespace {

struct NamedLaw {
    std::string name;
    DiscreteFinite law;
};

std::vector<NamedLaw> identity_laws() {
    std::vector<NamedLaw> laws;
    laws.push_back({"2-atom symmetric", DiscreteFinite({{-1.0, 0.5}, {1.0, 0.5}})});
    laws.push_back({"2-atom skewed", DiscreteFinite({{0.0, 0.3}, {2.0, 0.7}})});
    laws.push_back({"3-atom", DiscreteFinite({{-1.0, 0.25}, {0.5, 0.35}, {2.0, 0.4}})});
    laws.push_back(
        {"4-atom", DiscreteFinite({{-2.0, 0.2}, {-0.5, 0.3}, {1.0, 0.35}, {3.0, 0.15}})});
    return laws;
}

std::vector<Kernel> identity_kernels(int m, double law_mean) {
    std::vector<Kernel> kernels;
    kernels.push_back(Kernel::mean(m));
    kernels.push_back(Kernel::product(m));
    kernels.push_back(Kernel::shifted_sign(m, 0.25));
    kernels.push_back(Kernel::centered_product(m, law_mean));
    return kernels;
}

// Pointwise Hoeffding reconstruction: h(y) - Eh equals the sum of all
// projections over argument subsets, on every support tuple.
double reconstruction_residual(const Kernel& kernel, const DiscreteFinite& law) {
    const int m = kernel.order();
    const std::size_t support = law.support_size();
    double worst = 0.0;
    std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
    std::vector<double> args(static_cast<std::size_t>(m));
    const double grand = discrete_expectation(
        law, [&](std::span<const double> a) { return kernel(a); }, static_cast<std::size_t>(m));
    for (;;) {
        for (std::size_t i = 0; i < idx.size(); ++i) args[i] = law.value(idx[i]);
        CompensatedSum total;
        for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
            std::vector<double> points;
            for (std::size_t b = 0; b < static_cast<std::size_t>(m); ++b) {
                if (mask & (std::size_t{1} << b)) points.push_back(args[b]);
            }
            total.add(hoeffding_projection(kernel, law, static_cast<int>(points.size()), points));
        }
        worst = std::max(worst, std::abs(kernel(args) - grand - total.value()));
        std::size_t pos = 0;
        while (pos < idx.size()) {
            if (++idx[pos] < support) break;
            idx[pos] = 0;
            ++pos;
        }
        if (pos == idx.size()) break;
    }
    return worst;
}

}  // namespace

bool run_identity_selftest(std::ostream& out, const SelftestOptions& options) {
    const double tol = options.tolerance;
    bool all_ok = true;
    int combinations = 0;

    for (const auto& [law_name, law] : identity_laws()) {
        for (int m = 2; m <= 4; ++m) {
            for (const auto& kernel : identity_kernels(m, law.mean())) {
                const double recon = reconstruction_residual(kernel, law);
                bool kernel_ok = recon < tol;
                if (!kernel_ok) {
                    out << "FAIL " << law_name << " m=" << m << " kernel=" << kernel.name()
                        << ": reconstruction residual " << recon << "\n";
                }
                for (int n = 6; n <= 12; ++n) {
                    ++combinations;
                    const auto report = decomposition_report(kernel, law, n);

                    CompensatedSum identity;
                    for (int j = 1; j <= m; ++j) {
                        identity.add(binomial_double(m, j) * report.delta_sq[j - 1]);
                    }
                    const double a01 = std::abs(report.var_h - identity.value());
                    const double ortho = report.orthogonality_residual;
                    const double bound = hajek_gap_bound(report.var_h, n, m);
                    const bool gap_ok =
                        report.var_gap >= -1e-12 && report.var_gap <= bound + 1e-12;

                    double brute = 0.0;
                    bool brute_checked = false;
                    const double outcomes =
                        std::pow(static_cast<double>(law.support_size()), n);
                    if (outcomes <= static_cast<double>(kEnumerationCap)) {
                        brute = u_variance_identity(report, law, kernel, n);
                        brute_checked = true;
                    }

                    const bool ok = a01 < tol && ortho < tol && gap_ok &&
                                    (!brute_checked || brute < tol);
                    if (!ok) {
                        all_ok = false;
                        out << "FAIL " << law_name << " m=" << m << " N=" << n
                            << " kernel=" << kernel.name() << ": a01=" << a01
                            << " ortho=" << ortho << " var_u_brute=" << brute
                            << " gap_ok=" << gap_ok << "\n";
                    } else if (options.verbose) {
                        out << "ok   " << law_name << " m=" << m << " N=" << n
                            << " kernel=" << kernel.name() << " (a01=" << a01
                            << ", ortho=" << ortho << ")\n";
                    }
                }
                all_ok = all_ok && kernel_ok;
            }
        }
    }
    out << (all_ok ? "identity selftest passed" : "identity selftest FAILED") << " ("
        << combinations << " combinations)\n";
    return all_ok;
}

}  // namespace umom
