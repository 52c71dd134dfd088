#include "memsim/circuits.hpp"

#include "memsim/error.hpp"

#include <algorithm>
#include <cmath>

namespace memsim {

double mc_resistance(double q, const McParams& p) {
    return p.hp.r_on * (1.0 + p.hp.xi() * q / p.hp.beta);
}

Trace mc_simulate(const McParams& p, double q0, const IntegratorSpec& spec) {
    validate(p.hp);
    if (!(p.c > 0.0)) throw ValidationError("mc: capacitance must be > 0");
    if (!std::isfinite(q0)) throw ValidationError("mc: q0 must be finite");
    const Rhs rhs = [&p](const State& x, double) {
        return State{-x[0] / (mc_resistance(x[0], p) * p.c)};
    };
    IntegrateOptions opt;
    opt.names = {"q"};
    Trace tr = integrate(rhs, {q0}, spec, opt);
    std::vector<double> vc, r;
    for (double q : tr.channel("q")) {
        vc.push_back(q / p.c);
        r.push_back(mc_resistance(q, p));
    }
    tr.add_channel("v_c", std::move(vc));
    tr.add_channel("r", std::move(r));
    return tr;
}

double mc_analytic(double t, const McParams& p) {
    // ln q + xi q / beta = -t / (r_on C) + K, with K = -c1 / (beta r_on).
    const double rc = p.hp.r_on * p.c;
    const double k = -p.c1 / (p.hp.beta * p.hp.r_on);
    const double xi = p.hp.xi();
    if (xi == 0.0) return std::exp(k - t / rc);
    const double log_z = std::log(xi / p.hp.beta) - t / rc + k;
    const double z = std::exp(log_z);
    if (!std::isfinite(z)) throw DomainError("mc_analytic: Lambert-W argument overflows");
    return p.hp.beta / xi * lambert_w(z);
}

double mc_calibrate_c1(const McParams& p, double q0, double dt) {
    if (!(q0 > 0.0)) throw ValidationError("mc calibration needs q0 > 0");
    const double rc = p.hp.r_on * p.c;
    const double t_a = 10.0 * rc;
    const Trace tr = mc_simulate(p, q0, {Method::rk4, dt, t_a});
    const double q_a = tr.channel("q").back();
    if (!(q_a > 0.0)) throw NumericalError("mc calibration: charge vanished before the anchor time");
    const double t_last = tr.time(tr.size() - 1);
    return -p.hp.beta * p.hp.r_on * (std::log(q_a) + p.hp.xi() * q_a / p.hp.beta + t_last / rc);
}

double schedule_length(const std::vector<DriveSegment>& schedule) {
    double s = 0.0;
    for (const auto& seg : schedule) s += seg.duration;
    return s;
}

double schedule_value(const std::vector<DriveSegment>& schedule, double t) {
    if (schedule.empty()) return 0.0;
    double start = 0.0;
    for (const auto& seg : schedule) {
        if (t < start + seg.duration) return eval_signal(seg.signal, t - start);
        start += seg.duration;
    }
    const auto& last = schedule.back();
    return eval_signal(last.signal, t - (start - last.duration));
}

State amoeba_rhs(const State& x, double v, const AmoebaParams& p) {
    const double i = x[0], vc = x[1], m = x[2];
    return {(v - vc - p.r * i) / p.l, (i - vc / m) / p.c, threshold_device_rhs(m, vc, p.dev)};
}

Trace amoeba_simulate(const AmoebaParams& p, const AmoebaInit& init,
                      const std::vector<DriveSegment>& schedule, const IntegratorSpec& spec) {
    if (!(p.c > 0.0 && p.r > 0.0 && p.l > 0.0)) throw ValidationError("amoeba: C, R, L must be positive");
    if (!(p.dev.r1 < p.dev.r2 && p.dev.v_t > 0.0)) throw ValidationError("amoeba: need r1 < r2 and v_t > 0");
    if (init.m0 < p.dev.r1 || init.m0 > p.dev.r2) throw ValidationError("amoeba: m0 outside [r1, r2]");
    for (const auto& seg : schedule) {
        if (!(seg.duration > 0.0)) throw ValidationError("amoeba: segment durations must be positive");
        validate(seg.signal);
    }
    const Rhs rhs = [&](const State& x, double t) { return amoeba_rhs(x, schedule_value(schedule, t), p); };
    IntegrateOptions opt;
    opt.names = {"i", "v_c", "m"};
    opt.project = [&p](State& x) { x[2] = std::clamp(x[2], p.dev.r1, p.dev.r2); };
    IntegratorSpec s = spec;
    s.t_end = schedule_length(schedule);
    Trace tr = integrate(rhs, {init.i0, init.vc0, init.m0}, s, opt);

    std::vector<double> v, di, dvc, dm;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double t = tr.time(k);
        const double vt = schedule_value(schedule, t);
        const State d = amoeba_rhs(tr.row(k), vt, p);
        v.push_back(vt);
        di.push_back(d[0]);
        dvc.push_back(d[1]);
        dm.push_back(d[2]);
    }
    tr.add_channel("v", std::move(v));
    tr.add_channel("d_i", std::move(di));
    tr.add_channel("d_vc", std::move(dvc));
    tr.add_channel("d_m", std::move(dm));
    return tr;
}

std::vector<SettlingReport> amoeba_settling(const Trace& tr, const std::vector<DriveSegment>& schedule,
                                            double tol) {
    const auto& di = tr.channel("d_i");
    const auto& dvc = tr.channel("d_vc");
    const auto& dm = tr.channel("d_m");
    auto dmax = [&](std::size_t k) { return std::max({std::abs(di[k]), std::abs(dvc[k]), std::abs(dm[k])}); };

    std::vector<SettlingReport> out;
    double start = 0.0;
    for (const auto& seg : schedule) {
        const double end = start + seg.duration;
        auto index_at = [&](double t) {
            return static_cast<std::size_t>(std::ceil((t - tr.t0()) / tr.dt() - 1e-9));
        };
        const std::size_t k0 = std::min(index_at(start), tr.size());
        const std::size_t k1 = std::min(index_at(end), tr.size());
        SettlingReport r{end, std::nan(""), std::nan("")};
        if (k1 > k0) {
            r.max_derivative = dmax(k1 - 1);
            std::size_t first = k1;
            for (std::size_t k = k1; k-- > k0;) {
                if (dmax(k) >= tol) break;
                first = k;
            }
            if (first < k1) r.settle_time = tr.time(first);
        }
        out.push_back(r);
        start = end;
    }
    return out;
}

double plant_h(double v, const PlantH& h) {
    switch (h.kind) {
    case PlantNonlinearity::constant:
        return h.k;
    case PlantNonlinearity::exponential:
        return std::exp(h.k * v);
    case PlantNonlinearity::sinh:
        return std::sinh(h.k * v);
    }
    return 1.0;
}

Trace plant_simulate(const PlantParams& p, const DriveSignal& v, const IntegratorSpec& spec) {
    if (!(p.r_o > 0.0)) throw ValidationError("plant: r_o must be > 0");
    if (!(p.p_beta >= 0.0)) throw ValidationError("plant: beta must be >= 0");
    if (p.a_const == 0.0) throw ValidationError("plant: A must be nonzero");
    if (!(spec.dt > 0.0) || !(spec.t_end >= 0.0)) throw ValidationError("plant: invalid integrator spec");
    validate(v);
    const bool rc_on = std::isfinite(p.rc_r);
    if (rc_on && !(p.rc_r > 0.0 && p.rc_c > 0.0)) throw ValidationError("plant: rc branch needs R, C > 0");

    const double dt = spec.dt;
    const auto n = static_cast<std::size_t>(std::llround(spec.t_end / dt));
    Trace tr(0.0, dt, {"v", "i_m", "i_rc", "i"});

    // J(t) = e^{-beta t} int_0^t h(V(x)) e^{beta x} dx, so that
    // i_m = V / (beta r_o J + A e^{-beta t}). The trapezoid update stays bounded for any t.
    const double decay = std::exp(-p.p_beta * dt);
    double j = 0.0, q = 0.0;
    auto i_rc_at = [&](double qv, double t) { return rc_on ? (eval_signal(v, t) - qv / p.rc_c) / p.rc_r : 0.0; };
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = dt * static_cast<double>(k);
        const double vt = eval_signal(v, t);
        const double den = p.p_beta * p.r_o * j + p.a_const * std::exp(-p.p_beta * t);
        if (!(den * p.a_const > 0.0))
            throw DomainError("plant: denominator crossed zero at t=" + format_double(t));
        const double i_m = vt / den;
        const double i_rc = i_rc_at(q, t);
        tr.push({vt, i_m, i_rc, i_m + i_rc});
        if (k == n) break;

        const double v_next = eval_signal(v, t + dt);
        j = decay * j + 0.5 * dt * (plant_h(vt, p.h) * decay + plant_h(v_next, p.h));
        if (rc_on) {
            const double k1 = i_rc_at(q, t);
            const double k2 = i_rc_at(q + 0.5 * dt * k1, t + 0.5 * dt);
            const double k3 = i_rc_at(q + 0.5 * dt * k2, t + 0.5 * dt);
            const double k4 = i_rc_at(q + dt * k3, t + dt);
            q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return tr;
}

Trace hh_simulate(const HhParams& p, const DriveSignal& v, const HhInit& init, const IntegratorSpec& spec) {
    for (double g : {init.w1, init.w2, init.w3})
        if (g < 0.0 || g > 1.0) throw ValidationError("hh: gates must start in [0,1]");
    if (!(p.g_k > 0.0 && p.g_na > 0.0)) throw ValidationError("hh: conductances must be positive");
    validate(v);
    const Rhs rhs = [&](const State& x, double t) {
        const double vt = eval_signal(v, t);
        const HhOutput o = hh_model(x[0], x[1], x[2], vt, vt, p);
        return State{o.dw1, o.dw2, o.dw3};
    };
    IntegrateOptions opt;
    opt.names = {"w1", "w2", "w3"};
    opt.project = [](State& x) {
        for (double& g : x) g = clamp_unit(g);
    };
    Trace tr = integrate(rhs, {init.w1, init.w2, init.w3}, spec, opt);
    std::vector<double> ik, ina;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const double vt = eval_signal(v, tr.time(k));
        const State x = tr.row(k);
        const HhOutput o = hh_model(x[0], x[1], x[2], vt, vt, p);
        ik.push_back(o.i_k);
        ina.push_back(o.i_na);
    }
    tr.add_channel("i_k", std::move(ik));
    tr.add_channel("i_na", std::move(ina));
    return tr;
}

} // namespace memsim
