#include "memsim/crossbar.hpp"

#include "memsim/error.hpp"
#include "memsim/sim_core.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace memsim {

Crossbar Crossbar::uniform(Eigen::Index rows, Eigen::Index cols, const HpParams& cell, double r_out, double w) {
    Crossbar x;
    x.m = Eigen::MatrixXd::Constant(rows, cols, hp_resistance(w, cell));
    x.r_out = Eigen::VectorXd::Constant(rows, r_out);
    x.cell = cell;
    return x;
}

double Crossbar::state(Eigen::Index i, Eigen::Index j) const {
    const double span = cell.r_off - cell.r_on;
    return span > 0.0 ? (m(i, j) - cell.r_on) / span : 0.0;
}

void validate(const Crossbar& x) {
    validate(x.cell);
    if (x.r_out.size() != x.m.rows()) throw ValidationError("crossbar: r_out length must equal row count");
    if ((x.r_out.array() <= 0.0).any()) throw ValidationError("crossbar: output loads must be positive");
    const double tol = 1e-9 * x.cell.r_off;
    if ((x.m.array() < x.cell.r_on - tol).any() || (x.m.array() > x.cell.r_off + tol).any())
        throw ValidationError("crossbar: memristance outside [r_on, r_off]");
}

void write_csv(std::ostream& os, const Crossbar& x) {
    for (Eigen::Index i = 0; i < x.m.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.m.cols(); ++j) os << (j ? "," : "") << format_double(x.m(i, j));
        os << '\n';
    }
}

namespace {

Eigen::MatrixXd conductances(const Crossbar& x) {
    return x.m.unaryExpr([](double r) { return std::isinf(r) ? 0.0 : 1.0 / r; });
}

void check_input(const Crossbar& x, const Eigen::VectorXd& xi) {
    if (xi.size() != x.m.cols()) throw ValidationError("crossbar: input length must equal column count");
    if (x.r_out.size() != x.m.rows()) throw ValidationError("crossbar: r_out length must equal row count");
}

} // namespace

Eigen::MatrixXd transfer_matrix(const Crossbar& x) {
    const Eigen::MatrixXd g = conductances(x);
    Eigen::MatrixXd a(g.rows(), g.cols());
    for (Eigen::Index i = 0; i < g.rows(); ++i) a.row(i) = g.row(i) / (1.0 / x.r_out[i] + g.row(i).sum());
    return a;
}

Eigen::VectorXd read_mvm(const Crossbar& x, const Eigen::VectorXd& xi) {
    check_input(x, xi);
    return transfer_matrix(x) * xi;
}

Eigen::VectorXd nodal_oracle(const Crossbar& x, const Eigen::VectorXd& xi) {
    check_input(x, xi);
    const Eigen::Index nr = x.m.rows(), nc = x.m.cols(), n = nr + nc;
    const Eigen::MatrixXd g = conductances(x);
    // Nodes 0..nr-1 are row lines, nr..n-1 column lines; ground is implicit.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < nr; ++i) {
        lap(i, i) += 1.0 / x.r_out[i];
        for (Eigen::Index j = 0; j < nc; ++j) {
            const Eigen::Index a = i, b = nr + j;
            lap(a, a) += g(i, j);
            lap(b, b) += g(i, j);
            lap(a, b) -= g(i, j);
            lap(b, a) -= g(i, j);
        }
    }
    // Column nodes are held at xi by ideal sources.
    const Eigen::MatrixXd l_rr = lap.topLeftCorner(nr, nr);
    const Eigen::MatrixXd l_rc = lap.topRightCorner(nr, nc);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(l_rr);
    if (!lu.isInvertible()) throw SingularMatrix("nodal_oracle: row-node system is singular");
    return lu.solve(-l_rc * xi);
}

WriteSolution write_solution(const HpParams& hp, double w0) {
    const double xi = hp.xi();
    if (xi <= 0.0) throw ValidationError("write solution needs r_off > r_on");
    const double k = static_cast<double>(hp.polarity) / (hp.beta * hp.r_on);
    return {(w0 + 1.0 / xi) * (w0 + 1.0 / xi), 2.0 * k / xi};
}

double write_solution_w(const HpParams& hp, double w0, double v, double t) {
    const WriteSolution s = write_solution(hp, w0);
    return clamp_unit(std::sqrt(std::max(0.0, s.a + s.b * v * t)) - 1.0 / hp.xi());
}

double switching_time(const HpParams& hp, double v_write) {
    validate(hp);
    if (v_write == 0.0) throw ValidationError("switching_time: zero write voltage");
    if (hp.alpha != 0.0) throw ValidationError("switching_time: needs a non-volatile cell (alpha = 0)");
    return (hp.xi() + 2.0) * hp.beta * hp.r_on / (2.0 * std::abs(v_write));
}

namespace {

void check_index(const Crossbar& x, Eigen::Index i, Eigen::Index j) {
    if (i < 0 || j < 0 || i >= x.m.rows() || j >= x.m.cols()) throw ValidationError("crossbar: cell index out of range");
}

} // namespace

Crossbar write_pulse(const Crossbar& x, Eigen::Index i, Eigen::Index j, double v, double duration) {
    check_index(x, i, j);
    if (!(duration >= 0.0) || !std::isfinite(v)) throw ValidationError("write_pulse: invalid pulse");
    Crossbar out = x;
    if (duration == 0.0 || (v == 0.0 && x.cell.alpha == 0.0)) return out;
    const HpParams& hp = x.cell;
    const Rhs rhs = [&](const State& s, double) { return State{hp_rhs(s[0], v / hp_resistance(s[0], hp), hp)}; };
    IntegrateOptions opt;
    opt.names = {"w"};
    opt.project = [](State& s) { s[0] = clamp_unit(s[0]); };
    IntegrateStats st;
    opt.stats = &st;
    opt.stride = 2000;
    integrate(rhs, {x.state(i, j)}, {Method::rk4, duration / 2000.0, duration}, opt);
    out.m(i, j) = hp_resistance(st.final_state[0], hp);
    return out;
}

Crossbar write_pulse(const Crossbar& x, Eigen::Index i, Eigen::Index j, const PulseSpec& p) {
    return write_pulse(x, i, j, p.v_write, p.duration);
}

double read_disturbance_bound(const HpParams& hp, const PulseSpec& p) {
    const double t = p.read_duration > 0.0 ? p.read_duration : p.duration;
    return std::abs(p.v_read) * t / (hp.beta * hp.r_on);
}

ReadResult read_bit(const Crossbar& x, Eigen::Index i, Eigen::Index j, const PulseSpec& p) {
    check_index(x, i, j);
    if (!(std::abs(p.v_read) < std::abs(p.v_write))) throw ValidationError("read_bit: need |v_read| < |v_write|");
    const double r = x.m(i, j);
    const double mid = 0.5 * (x.cell.r_on + x.cell.r_off);
    if (std::abs(r - mid) < 0.05 * mid) throw AmbiguousState("read_bit: resistance inside the guard band");
    const double t = p.read_duration > 0.0 ? p.read_duration : p.duration;
    ReadResult res{r < mid ? 1 : 0, r, 0.0, write_pulse(x, i, j, p.v_read, t)};
    res.disturbance = std::abs(res.after.state(i, j) - x.state(i, j));
    if (x.cell.alpha == 0.0 && res.disturbance > read_disturbance_bound(x.cell, p) * (1.0 + 1e-9) + 1e-15)
        throw NumericalError("read_bit: disturbance exceeds its analytic bound");
    return res;
}

ProgramResult program_matrix(const Crossbar& x, const Eigen::MatrixXd& target, bool best_effort) {
    validate(x);
    if (target.rows() != x.m.rows() || target.cols() != x.m.cols())
        throw ValidationError("program_matrix: target shape mismatch");
    const double g_min = 1.0 / x.cell.r_off, g_max = 1.0 / x.cell.r_on;
    const Eigen::MatrixXd g0 = conductances(x);
    ProgramResult res{x, 0.0, 0, {}};
    Eigen::MatrixXd g = g0;

    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const double load = 1.0 / x.r_out[i];
        double d = load + g.row(i).sum();
        for (int sweep = 1; sweep <= 1000; ++sweep) {
            for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = std::clamp(target(i, j) * d, g_min, g_max);
            const double nd = load + g.row(i).sum();
            const double change = std::abs(nd - d);
            d = nd;
            res.sweeps = std::max(res.sweeps, sweep);
            if (change <= 1e-15 * d) break;
        }
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            const double want = target(i, j) * d;
            if (want < g_min * (1.0 - 1e-12) || want > g_max * (1.0 + 1e-12)) res.clamped.emplace_back(i, j);
        }
    }
    res.x.m = g.cwiseInverse();
    res.residual = (transfer_matrix(res.x) - target).cwiseAbs().maxCoeff();
    if (res.residual >= 1e-6 && !best_effort) {
        std::ostringstream os;
        os << "program_matrix: target not realizable (residual " << res.residual << "); infeasible entries:";
        for (const auto& [i, j] : res.clamped) os << " (" << i << "," << j << ")";
        throw ValidationError(os.str());
    }
    return res;
}

Eigen::MatrixXd apply_update(const Eigen::MatrixXd& w, const UpdateRule& rule, const UpdateData& data) {
    if (!(rule.eta >= 0.0)) throw ValidationError("update: eta must be >= 0");
    switch (rule.kind) {
    case UpdateKind::generic: {
        if (!data.f) throw ValidationError("update: generic rule needs an increment function");
        const Eigen::MatrixXd d = data.f(w);
        if (d.rows() != w.rows() || d.cols() != w.cols()) throw ValidationError("update: increment shape mismatch");
        return w + d;
    }
    case UpdateKind::adaline:
        if (w.rows() != data.x.size() || w.cols() != data.x.size())
            throw ValidationError("update: adaline needs a square W matching x");
        return w + rule.eta * data.x * data.x.transpose();
    case UpdateKind::sanger: {
        if (w.cols() != data.x.size()) throw ValidationError("update: sanger needs cols(W) = len(x)");
        const Eigen::VectorXd o = w * data.x;
        if (rule.literal) {
            if (w.rows() != w.cols()) throw ValidationError("update: literal sanger needs a square W");
            const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(w.rows(), w.cols());
            return w + 2.0 * rule.eta * o * (data.x - (2.0 * w - eye) * o).transpose();
        }
        const Eigen::MatrixXd lt = (o * o.transpose()).triangularView<Eigen::Lower>();
        return w + rule.eta * (o * data.x.transpose() - lt * w);
    }
    case UpdateKind::gradient: {
        if (w.cols() != data.x.size() || w.rows() != data.target.size())
            throw ValidationError("update: gradient needs W (len t x len x)");
        const Eigen::VectorXd o = w * data.x;
        return w + 2.0 * rule.eta * (data.target - o) * data.x.transpose();
    }
    }
    return w;
}

double stdp_kernel(double delta_t, const StdpKernel& k) {
    if (delta_t > 0.0) return k.a_plus * std::exp(-delta_t / k.tau_plus);
    return -k.a_minus * std::exp(delta_t / k.tau_minus);
}

PulseSpec stdp_program(double delta_t, const StdpKernel& k, const HpParams& hp, double v_amplitude,
                       double max_duration) {
    validate(hp);
    if (hp.alpha != 0.0) throw ValidationError("stdp_program: needs a non-volatile cell (alpha = 0)");
    if (!(v_amplitude > 0.0)) throw ValidationError("stdp_program: amplitude must be positive");
    const double dw = stdp_kernel(delta_t, k);
    constexpr double w0 = 0.5;
    const double w1 = w0 - dw;
    if (w1 < 0.0 || w1 > 1.0) throw ValidationError("stdp_program: requested change leaves [0,1]");
    if (dw == 0.0) return {v_amplitude, 0.0, 0.0, 0.0};

    // Lowering w (potentiation) needs polarity * V < 0.
    const double v = (dw > 0.0 ? -1.0 : 1.0) * static_cast<double>(hp.polarity) * v_amplitude;
    const double xi = hp.xi();
    auto phi = [&](double w) { return hp.r_on * (w + 0.5 * xi * w * w); };
    const double t = hp.beta * (phi(w1) - phi(w0)) / (static_cast<double>(hp.polarity) * v);
    if (t > max_duration) throw ValidationError("stdp_program: pulse longer than the allowed duration");
    return {v, t, 0.0, 0.0};
}

EnergyEstimates energy_estimates(const EnergyParams& p) {
    if (!(p.p_err > 0.0 && p.p_err <= 1.0)) throw ValidationError("energy: p_err must lie in (0,1]");
    if (!(p.l_bits >= 1.0) || !(p.n >= 1.0) || !(p.kt > 0.0)) throw ValidationError("energy: need L >= 1, N >= 1, kT > 0");
    const double lg = std::log(1.0 / p.p_err);
    const double l2 = std::log2(p.l_bits);
    return {-2.0 * std::log(p.p_err) * p.kt, 24.0 * lg * l2 * l2 * p.n * p.kt,
            lg * p.l_bits * p.l_bits * p.n * p.n * p.kt / 24.0};
}

} // namespace memsim
