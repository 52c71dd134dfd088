#include "memsim/sim_core.hpp"

#include "memsim/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>

namespace memsim {

void validate(const DriveSignal& s) {
    if (!(s.frequency >= 0.0) || !std::isfinite(s.frequency))
        throw ValidationError("drive frequency must be finite and >= 0");
    if (!(s.duty >= 0.0 && s.duty <= 1.0)) throw ValidationError("drive duty must lie in [0,1]");
    if (!std::isfinite(s.amplitude) || !std::isfinite(s.offset) || !std::isfinite(s.phase))
        throw ValidationError("drive amplitude, offset and phase must be finite");
}

namespace {

// Position inside the current period, in [0,1).
double cycle_fraction(const DriveSignal& s, double t) {
    double u = s.frequency * t + s.phase / (2.0 * std::numbers::pi);
    double frac = u - std::floor(u);
    return frac >= 1.0 ? 0.0 : frac;
}

} // namespace

double eval_signal(const DriveSignal& s, double t) {
    switch (s.kind) {
    case SignalKind::dc:
        return s.offset + s.amplitude;
    case SignalKind::sine:
        return s.offset + s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * t + s.phase);
    case SignalKind::square:
        return s.offset + (cycle_fraction(s, t) < s.duty ? s.amplitude : -s.amplitude);
    case SignalKind::pulse_train:
        return s.offset + (cycle_fraction(s, t) < s.duty ? s.amplitude : 0.0);
    }
    return 0.0;
}

Trace::Trace(double t0, double dt, std::vector<std::string> names)
    : t0_(t0), dt_(dt), names_(std::move(names)), data_(names_.size()) {
    if (!(dt > 0.0)) throw ValidationError("trace dt must be > 0");
}

std::size_t Trace::size() const { return data_.empty() ? 0 : data_.front().size(); }

const std::vector<double>& Trace::channel(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw ValidationError("no channel named '" + name + "'");
    return data_[static_cast<std::size_t>(it - names_.begin())];
}

bool Trace::has_channel(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

void Trace::push(const State& row) {
    if (row.size() != data_.size()) throw ValidationError("trace row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) data_[c].push_back(row[c]);
}

void Trace::add_channel(std::string name, std::vector<double> values) {
    if (!data_.empty() && values.size() != size())
        throw ValidationError("channel '" + name + "' length mismatch");
    names_.push_back(std::move(name));
    data_.push_back(std::move(values));
}

State Trace::row(std::size_t k) const {
    State r(data_.size());
    for (std::size_t c = 0; c < data_.size(); ++c) r[c] = data_[c].at(k);
    return r;
}

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void Trace::write_csv(std::ostream& os) const {
    os << 't';
    for (const auto& n : names_) os << ',' << n;
    os << '\n';
    for (std::size_t k = 0; k < size(); ++k) {
        os << format_double(time(k));
        for (const auto& ch : data_) os << ',' << format_double(ch[k]);
        os << '\n';
    }
}

namespace {

void axpy(State& out, const State& x, double a, const State& d) {
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] + a * d[k];
}

bool all_finite(const State& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

} // namespace

State step(const Rhs& rhs, const State& x, double t, double dt, Method m) {
    State out(x.size());
    if (m == Method::euler) {
        axpy(out, x, dt, rhs(x, t));
        return out;
    }
    State tmp(x.size());
    const State k1 = rhs(x, t);
    axpy(tmp, x, 0.5 * dt, k1);
    const State k2 = rhs(tmp, t + 0.5 * dt);
    axpy(tmp, x, 0.5 * dt, k2);
    const State k3 = rhs(tmp, t + 0.5 * dt);
    axpy(tmp, x, dt, k3);
    const State k4 = rhs(tmp, t + dt);
    for (std::size_t k = 0; k < x.size(); ++k)
        out[k] = x[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    return out;
}

Trace integrate(const Rhs& rhs, const State& x0, const IntegratorSpec& spec,
                const IntegrateOptions& opt) {
    if (!(spec.dt > 0.0) || !std::isfinite(spec.dt)) throw ValidationError("integrator dt must be > 0");
    if (!(spec.t_end >= 0.0) || !std::isfinite(spec.t_end))
        throw ValidationError("integrator t_end must be finite and >= 0");
    if (!all_finite(x0)) throw ValidationError("initial state is not finite");
    const std::size_t stride = std::max<std::size_t>(1, opt.stride);

    std::vector<std::string> names = opt.names;
    if (names.empty())
        for (std::size_t k = 0; k < x0.size(); ++k) names.push_back("x" + std::to_string(k));
    if (names.size() != x0.size()) throw ValidationError("channel names do not match state size");

    const auto n_steps = static_cast<std::size_t>(std::llround(spec.t_end / spec.dt));
    Trace tr(0.0, spec.dt * static_cast<double>(stride), std::move(names));
    State x = x0;
    if (opt.project) opt.project(x);
    tr.push(x);

    IntegrateStats st;
    std::size_t k = 0;
    for (; k < n_steps; ++k) {
        const double t = spec.dt * static_cast<double>(k);
        State nx = step(rhs, x, t, spec.dt, spec.method);
        if (opt.project) opt.project(nx);
        if (!all_finite(nx)) {
            const double t_fail = t + spec.dt;
            throw IntegrationDiverged(t_fail, "integration diverged at t=" + format_double(t_fail));
        }
        bool steady = false;
        if (opt.steady_tol > 0.0) {
            double m = 0.0;
            for (std::size_t c = 0; c < x.size(); ++c) m = std::max(m, std::abs(nx[c] - x[c]));
            steady = m / spec.dt < opt.steady_tol;
        }
        x = std::move(nx);
        if ((k + 1) % stride == 0) tr.push(x);
        if (steady) {
            st.steady = true;
            ++k;
            break;
        }
    }
    st.steps = k;
    st.t_stop = spec.dt * static_cast<double>(k);
    st.final_state = x;
    if (opt.stats) *opt.stats = std::move(st);
    return tr;
}

namespace {

double shoelace(const std::vector<std::pair<double, double>>& pts) {
    double s = 0.0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto& a = pts[k];
        const auto& b = pts[(k + 1) % pts.size()];
        s += a.first * b.second - b.first * a.second;
    }
    return 0.5 * s;
}

} // namespace

double loop_area(const std::vector<double>& v, const std::vector<double>& i) {
    if (v.size() != i.size()) throw ValidationError("loop_area: channel length mismatch");
    const std::size_t n = v.size();
    if (n < 3) return 0.0;

    // Walk the closed polygon, inserting the interpolated zero crossings of v.
    std::vector<std::pair<double, double>> pts;
    std::vector<std::size_t> cuts;
    pts.reserve(n + 16);
    for (std::size_t k = 0; k < n; ++k) {
        const double va = v[k], vb = v[(k + 1) % n];
        if (va == 0.0) cuts.push_back(pts.size());
        pts.emplace_back(va, i[k]);
        if (va * vb < 0.0) {
            const double s = va / (va - vb);
            cuts.push_back(pts.size());
            pts.emplace_back(0.0, i[k] + s * (i[(k + 1) % n] - i[k]));
        }
    }
    if (cuts.empty()) return std::abs(shoelace(pts));

    double area = 0.0;
    const std::size_t m = pts.size();
    for (std::size_t c = 0; c < cuts.size(); ++c) {
        const std::size_t from = cuts[c];
        const std::size_t to = cuts[(c + 1) % cuts.size()];
        std::vector<std::pair<double, double>> lobe;
        for (std::size_t k = from;; k = (k + 1) % m) {
            lobe.push_back(pts[k]);
            if (k == to && lobe.size() > 1) break;
            if (cuts.size() == 1 && lobe.size() == m) break;
        }
        if (lobe.size() >= 3) area += std::abs(shoelace(lobe));
    }
    return area;
}

CostMetrics simulation_cost_metrics(const Trace& tr, const State& reference) {
    const std::size_t n = tr.size();
    if (n < 3) throw ValidationError("cost metrics need at least 3 samples");
    const std::size_t c = tr.channel_count();
    if (reference.size() != c) throw ValidationError("reference size does not match channel count");
    CostMetrics m;
    const double h2 = tr.dt() * tr.dt();
    for (std::size_t k = 1; k + 1 < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            const auto& y = tr.channel(j);
            const double d2 = (y[k + 1] - 2.0 * y[k] + y[k - 1]) / h2;
            s += d2 * d2;
        }
        m.r = std::max(m.r, std::sqrt(s));
    }
    double e = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
        const double d = tr.channel(j)[n - 1] - reference[j];
        e += d * d;
    }
    m.eps = std::sqrt(e);
    return m;
}

std::pair<double, double> ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ValidationError("ols needs two equal series of length >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
        syy += (y[k] - my) * (y[k] - my);
    }
    if (sxx == 0.0) throw FitRejected("ols: abscissa has zero spread");
    const double b = sxy / sxx;
    const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {b, r2};
}

} // namespace memsim
