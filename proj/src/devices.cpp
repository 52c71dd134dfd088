#include "memsim/devices.hpp"

#include "memsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

void validate(const HpParams& p) {
    if (!(p.r_on > 0.0 && p.r_on <= p.r_off)) throw ValidationError("hp: need 0 < r_on <= r_off");
    if (!(p.alpha >= 0.0)) throw ValidationError("hp: alpha must be >= 0");
    if (!(p.beta > 0.0)) throw ValidationError("hp: beta must be > 0");
    if (p.polarity != 1 && p.polarity != -1) throw ValidationError("hp: polarity must be +1 or -1");
}

double joglekar_window(double w, int p) {
    const double x = 2.0 * w - 1.0;
    return 1.0 - std::pow(x * x, p);
}

double window_value(double w, const WindowSpec& win) {
    return win.kind == WindowKind::joglekar ? joglekar_window(w, win.p) : 1.0;
}

double hp_rhs(double w, double i, const HpParams& p, const WindowSpec& win) {
    return p.alpha * w + static_cast<double>(p.polarity) * window_value(w, win) * i / p.beta;
}

double hp_resistance(double w, const HpParams& p) { return p.r_on * (1.0 - w) + p.r_off * w; }

double clamp_unit(double w) { return std::clamp(w, 0.0, 1.0); }

double hp_analytic_w(double v_integral, double w0, const HpParams& p) {
    // Integrating R(w) dw = polarity V dt / beta gives
    // r_on (w + xi w^2 / 2) = r_on (w0 + xi w0^2 / 2) + polarity flux / beta.
    const double xi = p.xi();
    const double c = 0.5 * xi * w0 * w0 + w0 + static_cast<double>(p.polarity) * v_integral / (p.beta * p.r_on);
    double w;
    if (xi == 0.0) {
        w = c;
    } else {
        const double rad = 2.0 * c * xi + 1.0;
        if (rad < 0.0) throw SaturationError("hp_analytic_w: drive pushes the state below 0");
        // (sqrt(1 + 2 c xi) - 1) / xi, written to avoid cancellation for small xi c.
        w = 2.0 * c / (std::sqrt(rad) + 1.0);
    }
    constexpr double slack = 1e-12;
    if (w < -slack || w > 1.0 + slack) throw SaturationError("hp_analytic_w: state leaves [0,1]");
    return clamp_unit(w);
}

double hp_volatile_analytic(const DriveSignal& i_signal, double w0, const HpParams& p, double t,
                            std::size_t panels) {
    if (t == 0.0) return w0;
    if (panels < 2) panels = 2;
    if (panels % 2) ++panels;
    const double h = t / static_cast<double>(panels);
    auto g = [&](double s) { return std::exp(-p.alpha * s) * eval_signal(i_signal, s); };
    double sum = g(0.0) + g(t);
    for (std::size_t k = 1; k < panels; ++k)
        sum += (k % 2 ? 4.0 : 2.0) * g(h * static_cast<double>(k));
    const double integral = sum * h / 3.0;
    return std::exp(p.alpha * t) * (w0 + static_cast<double>(p.polarity) * integral / p.beta);
}

double beta_from_film(const FilmParams& f) {
    if (!(f.mu_e > 0.0 && f.d > 0.0 && f.r_on > 0.0)) throw ValidationError("film parameters must be positive");
    return f.d / (f.mu_e * f.r_on);
}

double film_charge_coefficient(const FilmParams& f) {
    if (!(f.mu_e > 0.0 && f.d > 0.0 && f.r_on > 0.0)) throw ValidationError("film parameters must be positive");
    return f.mu_e * f.r_on / (f.d * f.d);
}

double pickett_rhs(double w, double i, const PickettParams& p) {
    if (i > 0.0)
        return p.f_off * std::sinh(i / p.i_off) *
               std::exp(-std::exp((w - p.a_off) / p.w_c - std::abs(i) / p.b) - w / p.w_c);
    if (i < 0.0)
        return p.f_on * std::sinh(i / p.i_on) *
               std::exp(-std::exp(-(w - p.a_on) / p.w_c - std::abs(i) / p.b) - w / p.w_c);
    return 0.0;
}

double pickett_resistance(double w, const PickettParams& p) { return p.r_off * (1.0 - w) + p.r_on * w; }

ChangOutput chang_model(double w, double v, const ChangParams& p) {
    const double i = p.c_alpha * (1.0 - w) * (1.0 - std::exp(p.c_beta * v)) + w * p.c_gamma * std::sinh(p.c_delta * v);
    const double dw = p.c_lambda * (std::exp(p.c_eta1 * v) - std::exp(-p.c_eta2 * v));
    return {i, dw};
}

SpinTorqueOutput spin_torque_model(double theta, double i, const SpinTorqueParams& p) {
    const double c = std::cos(theta);
    return {p.damping * p.gyro * p.h_k * std::sin(theta) * (p.pol * i - c), 1.0 / (p.r_a + p.r_b * c)};
}

double heaviside(double x) { return x > 0.0 ? 1.0 : 0.0; }

double threshold_f(double v, const ThresholdDeviceParams& p) {
    return 0.5 * (p.t_beta - p.t_alpha) * (std::abs(v + p.v_t) - std::abs(v - p.v_t)) - p.t_beta * v;
}

double threshold_device_rhs(double m, double v_m, const ThresholdDeviceParams& p) {
    const double gate = heaviside(v_m) * heaviside(m - p.r1) + heaviside(-v_m) * heaviside(p.r2 - m);
    return gate == 0.0 ? 0.0 : threshold_f(v_m, p) * gate;
}

double exprel_inv(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x + x * x / 12.0;
    return x / std::expm1(x);
}

HhOutput hh_model(double w1, double w2, double w3, double v_k, double v_na, const HhParams& p) {
    HhOutput o;
    o.i_k = p.g_k * std::pow(w1, 4) * v_k;
    o.i_na = p.g_na * w2 * w2 * w2 * w3 * v_na;
    o.dw1 = exprel_inv(p.k1 * v_k + p.k2) * (1.0 - w1);
    o.dw2 = exprel_inv(p.na1 * v_na + p.na2) * (1.0 - w2) + p.na3 * std::exp(p.na4 * v_na + p.na5) * w2;
    o.dw3 = p.na6 * std::exp(p.na7 * v_na + p.na8) * (1.0 - w3) - w3 / (std::exp(p.na1 * v_na + p.na9) + 1.0);
    return o;
}

} // namespace memsim
