#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace memsim {

using State = std::vector<double>;
// dx/dt as a function of (state, time).
using Rhs = std::function<State(const State&, double)>;

enum class SignalKind { dc, sine, square, pulse_train };

struct DriveSignal {
    SignalKind kind = SignalKind::dc;
    double amplitude = 0.0;
    double frequency = 0.0; // Hz
    double phase = 0.0;     // rad
    double duty = 0.5;
    double offset = 0.0;

    static DriveSignal dc(double a) { return {SignalKind::dc, a, 0.0, 0.0, 0.5, 0.0}; }
    static DriveSignal sine(double a, double f, double phase = 0.0) {
        return {SignalKind::sine, a, f, phase, 0.5, 0.0};
    }
    static DriveSignal square(double a, double f, double duty = 0.5) {
        return {SignalKind::square, a, f, 0.0, duty, 0.0};
    }
    static DriveSignal pulse_train(double a, double f, double duty) {
        return {SignalKind::pulse_train, a, f, 0.0, duty, 0.0};
    }
};

void validate(const DriveSignal& s);

// Square: +amplitude for the first duty fraction of each period, -amplitude after.
// Pulse train: amplitude during the duty fraction, zero after.
double eval_signal(const DriveSignal& s, double t);

// Uniformly sampled multichannel series.
class Trace {
public:
    Trace(double t0, double dt, std::vector<std::string> names);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    std::size_t size() const;
    std::size_t channel_count() const { return names_.size(); }
    double time(std::size_t k) const { return t0_ + dt_ * static_cast<double>(k); }

    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& channel(const std::string& name) const;
    const std::vector<double>& channel(std::size_t idx) const { return data_.at(idx); }
    bool has_channel(const std::string& name) const;

    void push(const State& row);
    void add_channel(std::string name, std::vector<double> values);
    State row(std::size_t k) const;

    // Header `t,<ch>,...`; numbers use the shortest round-trip form, no locale.
    void write_csv(std::ostream& os) const;

private:
    double t0_;
    double dt_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> data_;
};

std::string format_double(double x);

enum class Method { euler, rk4 };

struct IntegratorSpec {
    Method method = Method::rk4;
    double dt = 1e-3;
    double t_end = 1.0;
};

struct IntegrateStats {
    std::size_t steps = 0;
    double t_stop = 0.0;
    bool steady = false;
    State final_state;
};

struct IntegrateOptions {
    std::vector<std::string> names; // defaults to x0, x1, ...
    // Applied after every step. Device models use it to clamp their state.
    std::function<void(State&)> project;
    // Stop once max|x_{k+1} - x_k| / dt falls below this (0 disables).
    double steady_tol = 0.0;
    // Record every stride-th step.
    std::size_t stride = 1;
    IntegrateStats* stats = nullptr;
};

Trace integrate(const Rhs& rhs, const State& x0, const IntegratorSpec& spec,
                const IntegrateOptions& opt = {});

// One step of the chosen method, no projection.
State step(const Rhs& rhs, const State& x, double t, double dt, Method m);

// Sum of absolute lobe areas of the closed v-i curve over one period.
// Lobes are split where v changes sign, so oppositely oriented lobes do not cancel.
double loop_area(const std::vector<double>& v, const std::vector<double>& i);

enum class Taper { rectangular, hann };

struct SpectrumFit {
    double slope = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

SpectrumFit power_spectrum_fit(const Trace& tr, const std::string& channel, double f_lo,
                               double f_hi, Taper taper = Taper::rectangular);
double power_spectrum_exponent(const Trace& tr, const std::string& channel, double f_lo,
                               double f_hi, Taper taper = Taper::rectangular);

struct CostMetrics {
    double r = 0.0;   // max second-derivative norm
    double eps = 0.0; // final-state distance to the reference
};

CostMetrics simulation_cost_metrics(const Trace& tr, const State& reference);

// Ordinary least squares y = a + b x; returns (b, r^2).
std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace memsim
