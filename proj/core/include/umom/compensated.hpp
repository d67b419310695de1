#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace umom {

// Neumaier's variant of Kahan summation. All exact-identity paths accumulate
// through this, keeping rounding error well below the 1e-10 assertion level
// even over ~1e7 terms.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> values) noexcept {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

inline double compensated_mean(std::span<const double> values) noexcept {
    return values.empty() ? 0.0 : compensated_total(values) / static_cast<double>(values.size());
}

}  // namespace umom
