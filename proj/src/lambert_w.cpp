#include "memsim/circuits.hpp"
#include "memsim/error.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace memsim {

namespace {

double initial_guess(double x) {
    constexpr double inv_e = 1.0 / std::numbers::e;
    if (x < -0.25) {
        // Series around the branch point -1/e.
        const double p = std::sqrt(2.0 * (std::numbers::e * x + 1.0));
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    }
    if (x < 3.0) return x < inv_e ? x * (1.0 - x) : std::log1p(x) * 0.8;
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    return l1 - l2 + l2 / l1;
}

} // namespace

double lambert_w(double x) {
    constexpr double branch = -1.0 / std::numbers::e;
    if (std::isnan(x)) throw DomainError("lambert_w: NaN argument");
    if (x < branch) {
        // Accept values within rounding of the branch point.
        if (x < branch * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()))
            throw DomainError("lambert_w: argument below -1/e");
        return -1.0;
    }
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return x;

    double w = initial_guess(x);
    for (int it = 0; it < 64; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        if (wp1 == 0.0) break;
        const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        const double dw = f / denom;
        w -= dw;
        if (std::abs(dw) <= 4e-16 * std::abs(w)) break;
    }
    return w;
}

} // namespace memsim
