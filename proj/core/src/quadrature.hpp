#pragma once

#include <cmath>
#include <functional>

namespace umom::detail {

// Adaptive Simpson with Richardson correction.
inline double adaptive_simpson_impl(const std::function<double(double)>& f, double a, double b,
                                    double fa, double fm, double fb, double whole, double tol,
                                    int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson_impl(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_impl(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 48) {
    if (!(a < b)) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_impl(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Integral over [cutoff, inf) of a density-weighted integrand with power-law
// decay g(x) ~ x^{-(decay_exponent+1)}. Substitutes x = cutoff / u followed
// by u = w^p with p chosen so the transformed integrand vanishes at w = 0.
inline double power_tail_integral(const std::function<double(double)>& g, double cutoff,
                                  double decay_exponent, double tol = 1e-12) {
    const int p = static_cast<int>(std::ceil(2.0 / decay_exponent)) + 1;
    auto transformed = [&](double w) {
        if (w <= 0.0) return 0.0;
        const double u = std::pow(w, p);
        if (!(u > 0.0)) return 0.0;
        const double x = cutoff / u;
        const double value =
            g(x) * cutoff * static_cast<double>(p) * std::pow(w, p - 1) / (u * u);
        // Underflow in g times overflow in the Jacobian can round-trip to
        // NaN near w = 0; the true contribution there vanishes.
        return std::isfinite(value) ? value : 0.0;
    };
    return adaptive_simpson(transformed, 0.0, 1.0, tol);
}

}  // namespace umom::detail
