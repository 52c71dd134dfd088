#include "memsim/learning.hpp"

#include "memsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace memsim {

Eigen::MatrixXd elm_features(const Eigen::MatrixXd& samples, const std::vector<Feature>& g) {
    Eigen::MatrixXd out(samples.rows(), static_cast<Eigen::Index>(g.size()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        const Eigen::VectorXd x = samples.row(i).transpose();
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double v = g[j](x);
            if (!std::isfinite(v)) throw NumericalError("elm_features: non-finite feature value");
            out(i, static_cast<Eigen::Index>(j)) = v;
        }
    }
    return out;
}

std::vector<Feature> random_elm_dictionary(std::size_t count, Eigen::Index dim, std::uint64_t seed,
                                           std::function<double(double)> link_inv) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> prior(0.0, 1.0);
    std::vector<Feature> out;
    for (std::size_t k = 0; k < count; ++k) {
        Eigen::VectorXd eta(dim);
        for (Eigen::Index d = 0; d < dim; ++d) eta[d] = prior(rng);
        out.emplace_back([eta, link_inv](const Eigen::VectorXd& x) { return link_inv(x.dot(eta)); });
    }
    return out;
}

ReadoutFit fit_readout(const Eigen::MatrixXd& g, const Eigen::VectorXd& y, double ridge) {
    if (g.rows() != y.size()) throw ValidationError("fit_readout: rows(G) must equal len(y)");
    if (!(ridge >= 0.0)) throw ValidationError("fit_readout: ridge must be >= 0");
    const Eigen::Index n = g.cols();
    ReadoutFit fit;
    if (n == 0) return fit;

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g);
    const auto& s = svd.singularValues();
    const double smax = s.size() ? s.maxCoeff() : 0.0;
    const double smin = (g.cols() > g.rows() || s.size() == 0) ? 0.0 : s.minCoeff();
    const double top = smax * smax + ridge, bottom = smin * smin + ridge;
    fit.condition = bottom > 0.0 ? top / bottom : std::numeric_limits<double>::infinity();

    if (fit.condition <= 1e10) {
        const Eigen::MatrixXd normal = g.transpose() * g + ridge * Eigen::MatrixXd::Identity(n, n);
        fit.coef = normal.llt().solve(g.transpose() * y);
        return fit;
    }
    if (ridge > 0.0) {
        Eigen::MatrixXd aug(g.rows() + n, n);
        aug << g, std::sqrt(ridge) * Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd yy = Eigen::VectorXd::Zero(g.rows() + n);
        yy.head(g.rows()) = y;
        fit.coef = aug.completeOrthogonalDecomposition().solve(yy);
        return fit;
    }
    const auto cod = g.completeOrthogonalDecomposition();
    fit.coef = cod.solve(y);
    fit.min_norm = cod.rank() < n;
    return fit;
}

Trace rc_run(const LinearReservoir& r, const std::function<Eigen::VectorXd(double)>& u, const IntegratorSpec& spec) {
    const Eigen::Index nq = r.a.rows();
    if (r.a.cols() != nq || r.b.rows() != nq || r.h.cols() != nq) throw ValidationError("rc_run: inconsistent dimensions");
    const Rhs rhs = [&](const State& x, double t) {
        const Eigen::Map<const Eigen::VectorXd> q(x.data(), nq);
        const Eigen::VectorXd ut = u(t);
        if (ut.size() != r.b.cols()) throw ValidationError("rc_run: input dimension mismatch");
        const Eigen::VectorXd d = r.a * q + r.b * (r.in_scale * ut.array() + r.in_shift).matrix();
        return State(d.data(), d.data() + nq);
    };
    const Trace qt = integrate(rhs, State(static_cast<std::size_t>(nq), 0.0), spec);
    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < r.h.rows(); ++k) names.push_back("g" + std::to_string(k));
    Trace out(qt.t0(), qt.dt(), names);
    for (std::size_t k = 0; k < qt.size(); ++k) {
        const State row = qt.row(k);
        const Eigen::VectorXd g = r.h * Eigen::Map<const Eigen::VectorXd>(row.data(), nq);
        out.push(State(g.data(), g.data() + g.size()));
    }
    return out;
}

Trace rc_run(const MemristiveReservoir& r, const std::function<Eigen::VectorXd(double)>& u,
             const IntegratorSpec& spec) {
    const Eigen::Index ne = r.circuit.s_volts.size();
    if (r.b.rows() != ne || r.h.cols() != ne || r.w0.size() != ne)
        throw ValidationError("rc_run: inconsistent memristive reservoir dimensions");
    validate(r.hp);
    const Eigen::MatrixXd& om = r.circuit.projector.omega;
    auto sources = [&](double t) {
        const Eigen::VectorXd ut = u(t);
        if (ut.size() != r.b.cols()) throw ValidationError("rc_run: input dimension mismatch");
        return Eigen::VectorXd(r.b * (r.in_scale * ut.array() + r.in_shift).matrix() / r.hp.r_on);
    };
    const Rhs rhs = [&](const State& x, double t) {
        const Eigen::Map<const Eigen::VectorXd> w(x.data(), ne);
        const Eigen::VectorXd d = memnet_rhs(w, sources(t), om, r.hp);
        return State(d.data(), d.data() + ne);
    };
    IntegrateOptions opt;
    opt.project = [](State& x) {
        for (double& v : x) v = clamp_unit(v);
    };
    const Trace wt = integrate(rhs, State(r.w0.data(), r.w0.data() + ne), spec, opt);
    std::vector<std::string> names;
    for (Eigen::Index k = 0; k < r.h.rows(); ++k) names.push_back("g" + std::to_string(k));
    Trace out(wt.t0(), wt.dt(), names);
    for (std::size_t k = 0; k < wt.size(); ++k) {
        const State row = wt.row(k);
        const Eigen::Map<const Eigen::VectorXd> w(row.data(), ne);
        const Eigen::VectorXd g = r.h * memnet_currents(w, sources(wt.time(k)), om, r.hp);
        out.push(State(g.data(), g.data() + g.size()));
    }
    return out;
}

double lif_response(double i_soma, double tau0, double tau_rc, double i_f) {
    if (!(tau0 > 0.0 && tau_rc >= 0.0 && i_f > 0.0)) throw ValidationError("lif: need tau0 > 0, tau_rc >= 0, i_f > 0");
    if (!(i_soma > i_f)) return 0.0;
    return 1.0 / (tau0 - tau_rc * std::log1p(-i_f / i_soma));
}

Eigen::VectorXd NefPopulation::grid() const { return Eigen::VectorXd::LinSpaced(grid_points(), x_min, x_max); }

NefPopulation random_nef_population(Eigen::Index neurons, Eigen::Index grid_points, std::uint64_t seed) {
    if (neurons < 1 || grid_points < 2) throw ValidationError("nef: need >= 1 neuron and >= 2 grid points");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> at(0, grid_points - 1);
    std::uniform_real_distribution<double> gain(1.0, 4.0), bias(0.5, 1.5);
    std::bernoulli_distribution flip(0.5);
    NefPopulation p;
    p.gain.resize(neurons);
    p.bias.resize(neurons);
    p.encoders = Eigen::MatrixXd::Zero(neurons, grid_points);
    for (Eigen::Index i = 0; i < neurons; ++i) {
        Eigen::Index a = at(rng), b = at(rng);
        if (a > b) std::swap(a, b);
        const double sign = flip(rng) ? 1.0 : -1.0;
        p.encoders.row(i).segment(a, b - a + 1).setConstant(sign);
        p.gain[i] = gain(rng);
        p.bias[i] = bias(rng);
    }
    return p;
}

Eigen::VectorXd nef_encode(const Eigen::VectorXd& f, const NefPopulation& p) {
    if (f.size() != p.grid_points()) throw ValidationError("nef_encode: function must live on the population grid");
    if (p.bias.size() != p.neurons() || p.encoders.rows() != p.neurons())
        throw ValidationError("nef_encode: inconsistent population");
    const Eigen::VectorXd mean = p.encoders * f / static_cast<double>(f.size());
    Eigen::VectorXd a(p.neurons());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        a[i] = lif_response(p.gain[i] * mean[i] + p.bias[i], p.tau0, p.tau_rc, p.i_f);
    return a;
}

NefDecoders nef_fit_decoders(const NefPopulation& p, const Eigen::MatrixXd& train, double reg) {
    if (train.cols() < 1 || train.rows() != p.grid_points())
        throw ValidationError("nef_fit_decoders: training functions must be columns on the grid");
    Eigen::MatrixXd act(train.cols(), p.neurons());
    for (Eigen::Index k = 0; k < train.cols(); ++k) act.row(k) = nef_encode(train.col(k), p).transpose();
    NefDecoders d;
    d.phi.resize(p.neurons(), p.grid_points());
    for (Eigen::Index x = 0; x < p.grid_points(); ++x) {
        const ReadoutFit fit = fit_readout(act, train.row(x).transpose(), reg);
        d.phi.col(x) = fit.coef;
        d.min_norm = d.min_norm || fit.min_norm;
    }
    return d;
}

Eigen::VectorXd nef_decode(const Eigen::VectorXd& activities, const NefDecoders& d) {
    if (activities.size() != d.phi.rows()) throw ValidationError("nef_decode: activity count mismatch");
    return d.phi.transpose() * activities;
}

double hard_threshold(double x, double lambda) { return x > lambda ? x : 0.0; }

namespace {

Eigen::VectorXd threshold_all(const Eigen::VectorXd& u, double lambda) {
    return u.unaryExpr([lambda](double v) { return hard_threshold(v, lambda); });
}

} // namespace

LcaResult lca_simulate(const LcaProblem& p, const Eigen::VectorXd& x, const IntegratorSpec& spec) {
    if (!(p.lambda >= 0.0) || !(p.tau > 0.0)) throw ValidationError("lca: need lambda >= 0 and tau > 0");
    if (x.size() != p.phi.rows()) throw ValidationError("lca: input dimension must match the dictionary");
    for (Eigen::Index m = 0; m < p.phi.cols(); ++m)
        if (p.phi.col(m).norm() == 0.0) throw ValidationError("lca: dictionary has a zero atom");
    const Eigen::Index m = p.phi.cols();
    const Eigen::VectorXd b = p.phi.transpose() * x;
    Eigen::MatrixXd g = p.phi.transpose() * p.phi;
    g.diagonal().setZero(); // the sum runs over n != m
    const Rhs rhs = [&](const State& s, double) {
        const Eigen::Map<const Eigen::VectorXd> u(s.data(), m);
        const Eigen::VectorXd d = (b - u - g * threshold_all(u, p.lambda)) / p.tau;
        return State(d.data(), d.data() + m);
    };
    IntegrateOptions opt;
    for (Eigen::Index k = 0; k < m; ++k) opt.names.push_back("u" + std::to_string(k));
    opt.steady_tol = 1e-8;
    IntegrateStats st;
    opt.stats = &st;
    Trace tr = integrate(rhs, State(static_cast<std::size_t>(m), 0.0), spec, opt);
    const Eigen::Map<const Eigen::VectorXd> u(st.final_state.data(), m);
    return {threshold_all(u, p.lambda), std::move(tr), st.steady};
}

double lca_energy(const LcaProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& a) {
    const double active = static_cast<double>((a.array() != 0.0).count());
    return 0.5 * (x - p.phi * a).squaredNorm() + 0.5 * p.lambda * p.lambda * active;
}

} // namespace memsim
