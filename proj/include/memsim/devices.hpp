#pragma once

#include "memsim/sim_core.hpp"

namespace memsim {

// HP (TiO2) current-controlled memristor.
// dw/dt = alpha w + polarity F(w) i / beta,  R(w) = r_on (1 - w) + r_off w.
// polarity -1 is the displayed equation; +1 is the convention of the closed-form derivation.
struct HpParams {
    double alpha = 0.0;  // 1/s
    double beta = 1.0;   // charge scale of the state
    double r_on = 1.0;   // ohm
    double r_off = 1.0;  // ohm
    int polarity = -1;

    double xi() const { return (r_off - r_on) / r_on; }
};

void validate(const HpParams& p);

enum class WindowKind { none, joglekar };

struct WindowSpec {
    WindowKind kind = WindowKind::none;
    int p = 1;
};

double joglekar_window(double w, int p);
double window_value(double w, const WindowSpec& win);

double hp_rhs(double w, double i, const HpParams& p, const WindowSpec& win = {});
double hp_resistance(double w, const HpParams& p);
double clamp_unit(double w);

// Exact non-volatile state after a flux v_integral, unwindowed, alpha = 0.
// Throws SaturationError if the trajectory would leave [0,1].
double hp_analytic_w(double v_integral, double w0, const HpParams& p);

// w(t) = e^{alpha t}(w0 + (polarity/beta) int_0^t e^{-alpha s} i(s) ds), Simpson quadrature.
double hp_volatile_analytic(const DriveSignal& i_signal, double w0, const HpParams& p, double t,
                            std::size_t panels = 4096);

struct FilmParams {
    double mu_e = 1e-14; // m^2/(V s)
    double d = 1e-8;     // m
    double r_on = 100.0; // ohm
};

double beta_from_film(const FilmParams& f);
// mu_e r_on / d^2, the coefficient of q in R(q) ~ r_off (1 - coefficient q).
double film_charge_coefficient(const FilmParams& f);

// Placeholder values: the model family has no published constants here.
struct PickettParams {
    double f_off = 3.5e-6;
    double f_on = 40e-6;
    double i_off = 115e-6;
    double i_on = 8.9e-6;
    double a_off = 1.2;
    double a_on = 1.8;
    double w_c = 0.107;
    double b = 500e-6;
    double r_on = 100.0;
    double r_off = 20e3;
};

double pickett_rhs(double w, double i, const PickettParams& p);
double pickett_resistance(double w, const PickettParams& p);

struct ChangParams {
    double c_alpha = 5e-7;
    double c_beta = 0.5;
    double c_gamma = 4e-6;
    double c_delta = 2.0;
    double c_lambda = 4.5;
    double c_eta1 = 0.004;
    double c_eta2 = 4.0;
};

struct ChangOutput {
    double i;
    double dw_dt;
};

ChangOutput chang_model(double w, double v, const ChangParams& p);

struct SpinTorqueParams {
    double damping = 0.01;
    double gyro = 1.76e11;
    double h_k = 0.05;
    double pol = 1.0; // 1/A
    double r_a = 1e-3;
    double r_b = 2e-4;
};

struct SpinTorqueOutput {
    double dtheta_dt;
    double r;
};

SpinTorqueOutput spin_torque_model(double theta, double i, const SpinTorqueParams& p);

// Threshold device of the adaptation circuit; M is a resistance bounded to [r1, r2].
struct ThresholdDeviceParams {
    double t_alpha = 0.1;
    double t_beta = 100.0;
    double v_t = 2.5;
    double r1 = 3.0;
    double r2 = 20.0;
};

double heaviside(double x); // H(0) = 0
double threshold_f(double v, const ThresholdDeviceParams& p);
double threshold_device_rhs(double m, double v_m, const ThresholdDeviceParams& p);

// Gated channel memristors. Voltages in volts, time in ms.
struct HhParams {
    double g_k = 36e-3;
    double g_na = 120e-3;
    double k1 = -100.0;
    double k2 = -5.5;
    double na1 = -100.0;
    double na2 = -4.0;
    double na3 = -4.0;
    double na4 = -1000.0 / 18.0;
    double na5 = -65.0 / 18.0;
    double na6 = 0.07;
    double na7 = -50.0;
    double na8 = -3.25;
    double na9 = -3.5;
};

struct HhOutput {
    double i_k, i_na;
    double dw1, dw2, dw3;
};

// x / (e^x - 1) with the removable singularity filled in.
double exprel_inv(double x);
HhOutput hh_model(double w1, double w2, double w3, double v_k, double v_na, const HhParams& p);

} // namespace memsim
