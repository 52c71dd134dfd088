#include "memsim/error.hpp"
#include "memsim/sim_core.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace memsim {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> periodogram(std::vector<double> x, Taper taper) {
    const std::size_t n = x.size();
    if (taper == Taper::hann)
        for (std::size_t k = 0; k < n; ++k)
            x[k] *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n)));

    const std::size_t nc = n / 2 + 1;
    fftw_complex* out = fftw_alloc_complex(nc);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), x.data(), out, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::vector<double> p(nc);
    for (std::size_t k = 0; k < nc; ++k) p[k] = out[k][0] * out[k][0] + out[k][1] * out[k][1];
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(out);
    return p;
}

} // namespace

SpectrumFit power_spectrum_fit(const Trace& tr, const std::string& channel, double f_lo,
                               double f_hi, Taper taper) {
    const auto& x = tr.channel(channel);
    const std::size_t n = x.size();
    if (n < 1024) throw ValidationError("spectrum needs at least 1024 samples");
    const double nyquist = 0.5 / tr.dt();
    if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < nyquist))
        throw ValidationError("fit band must satisfy 0 < f_lo < f_hi < Nyquist");

    const auto p = periodogram(x, taper);
    const double df = 1.0 / (static_cast<double>(n) * tr.dt());
    std::vector<double> lf, lp;
    double total = 0.0, peak = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        const double f = df * static_cast<double>(k);
        if (f < f_lo || f > f_hi) continue;
        total += p[k];
        peak = std::max(peak, p[k]);
        if (p[k] > 0.0) {
            lf.push_back(std::log(f));
            lp.push_back(std::log(p[k]));
        }
    }
    if (lf.size() < 3) throw FitBandEmpty("fit band holds fewer than 3 usable frequency bins");
    if (peak > 0.99 * total) throw FitRejected("spectrum is a single line; no power law to fit");
    const auto [slope, r2] = ols_slope(lf, lp);
    return {slope, r2, lf.size()};
}

double power_spectrum_exponent(const Trace& tr, const std::string& channel, double f_lo,
                               double f_hi, Taper taper) {
    return power_spectrum_fit(tr, channel, f_lo, f_hi, taper).slope;
}

} // namespace memsim
