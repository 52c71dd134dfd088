#include "memsim/network.hpp"

#include "memsim/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace memsim {

std::size_t CircuitGraph::memristor_count() const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(),
                                                  [](const Edge& e) { return e.role == EdgeRole::memristor; }));
}

void write_edge_list(std::ostream& os, const CircuitGraph& g) {
    os << "# nodes " << g.nodes << '\n';
    for (const auto& e : g.edges)
        os << e.tail << ' ' << e.head << ' ' << (e.role == EdgeRole::memristor ? 'm' : 'v') << ' '
           << format_double(e.value) << '\n';
}

CircuitGraph read_edge_list(std::istream& is) {
    CircuitGraph g;
    std::string line;
    std::size_t max_node = 0;
    bool declared = false;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "#") {
            std::string key;
            if (ls >> key && key == "nodes" && ls >> g.nodes) declared = true;
            continue;
        }
        Edge e;
        std::string role;
        try {
            e.tail = std::stoul(first);
        } catch (const std::exception&) {
            throw ValidationError("edge list: bad tail '" + first + "'");
        }
        if (!(ls >> e.head >> role >> e.value)) throw ValidationError("edge list: malformed line '" + line + "'");
        if (role == "m")
            e.role = EdgeRole::memristor;
        else if (role == "v")
            e.role = EdgeRole::source;
        else
            throw ValidationError("edge list: unknown role '" + role + "'");
        max_node = std::max({max_node, e.tail + 1, e.head + 1});
        g.edges.push_back(e);
    }
    if (!declared) g.nodes = max_node;
    if (max_node > g.nodes) throw ValidationError("edge list: node index exceeds declared node count");
    return g;
}

namespace {

// Union-find carrying potential offsets: phi_x = phi_parent(x) + off[x].
struct PotentialForest {
    std::vector<std::size_t> parent;
    std::vector<double> off;

    explicit PotentialForest(std::size_t n) : parent(n), off(n, 0.0) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }

    std::pair<std::size_t, double> find(std::size_t x) {
        if (parent[x] == x) return {x, 0.0};
        auto [root, o] = find(parent[x]);
        off[x] += o;
        parent[x] = root;
        return {root, off[x]};
    }
};

} // namespace

ReducedCircuit reduce_circuit(const CircuitGraph& g) {
    if (g.nodes == 0) throw ValidationError("circuit has no nodes");
    for (const auto& e : g.edges)
        if (e.tail >= g.nodes || e.head >= g.nodes) throw ValidationError("edge endpoint out of range");

    PotentialForest pf(g.nodes);
    for (const auto& e : g.edges) {
        if (e.role != EdgeRole::source) continue;
        auto [ra, oa] = pf.find(e.tail);
        auto [rb, ob] = pf.find(e.head);
        if (ra == rb) throw ValidationError("voltage sources form a loop without a memristor");
        pf.parent[rb] = ra;
        pf.off[rb] = oa + e.value - ob;
    }

    std::vector<std::size_t> id(g.nodes, SIZE_MAX);
    std::size_t n = 0;
    for (std::size_t x = 0; x < g.nodes; ++x) {
        auto r = pf.find(x).first;
        if (id[r] == SIZE_MAX) id[r] = n++;
    }

    ReducedCircuit rc;
    rc.contracted_nodes = n;
    std::vector<std::pair<std::size_t, std::size_t>> ends;
    std::vector<double> s;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const auto& e = g.edges[k];
        if (e.role != EdgeRole::memristor) continue;
        auto [ru, ou] = pf.find(e.tail);
        auto [rv, ov] = pf.find(e.head);
        rc.memristor_edges.push_back(k);
        ends.emplace_back(id[ru], id[rv]);
        s.push_back(e.value + ou - ov);
    }
    const std::size_t m = ends.size();
    rc.s_volts = Eigen::Map<Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(m));

    // BFS spanning tree over the contracted graph.
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t k = 0; k < m; ++k) {
        adj[ends[k].first].push_back(k);
        if (ends[k].second != ends[k].first) adj[ends[k].second].push_back(k);
    }
    std::vector<char> seen(n, 0), tree_edge(m, 0);
    std::vector<Eigen::VectorXd> path(n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)));
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!q.empty()) {
        const std::size_t x = q.front();
        q.pop();
        for (std::size_t k : adj[x]) {
            const auto [u, v] = ends[k];
            const std::size_t y = (u == x) ? v : u;
            if (seen[y]) continue;
            seen[y] = 1;
            ++reached;
            tree_edge[k] = 1;
            path[y] = path[x];
            path[y][static_cast<Eigen::Index>(k)] += (u == x) ? 1.0 : -1.0;
            q.push(y);
        }
    }
    if (reached != n) throw ValidationError("circuit graph is disconnected");

    // Fundamental cycles: edge u->v closed through the tree, e_k + P(u) - P(v).
    std::vector<Eigen::VectorXd> cycles;
    for (std::size_t k = 0; k < m; ++k) {
        if (tree_edge[k]) continue;
        Eigen::VectorXd c = path[ends[k].first] - path[ends[k].second];
        c[static_cast<Eigen::Index>(k)] += 1.0;
        cycles.push_back(std::move(c));
    }
    const auto mm = static_cast<Eigen::Index>(m);
    rc.projector.omega = Eigen::MatrixXd::Zero(mm, mm);
    if (!cycles.empty()) {
        Eigen::MatrixXd b(static_cast<Eigen::Index>(cycles.size()), mm);
        for (std::size_t c = 0; c < cycles.size(); ++c) b.row(static_cast<Eigen::Index>(c)) = cycles[c].transpose();
        const Eigen::MatrixXd gram = b * b.transpose();
        const Eigen::MatrixXd om = b.transpose() * gram.ldlt().solve(b);
        rc.projector.omega = 0.5 * (om + om.transpose());
    }
    return rc;
}

Projector cycle_projector(const CircuitGraph& g) { return reduce_circuit(g).projector; }

Eigen::VectorXd memnet_currents(const Eigen::VectorXd& w, const Eigen::VectorXd& s_norm,
                                const Eigen::MatrixXd& omega, const HpParams& hp) {
    const Eigen::Index n = w.size();
    if (s_norm.size() != n || omega.rows() != n || omega.cols() != n)
        throw ValidationError("memnet: dimension mismatch");
    if (n == 0) return Eigen::VectorXd();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) + hp.xi() * (omega * w.asDiagonal());
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    if (!(lu.rcond() > 1e-14)) throw SingularMatrix("memnet: I + chi Omega W is singular");
    return lu.solve(omega * s_norm);
}

Eigen::VectorXd memnet_rhs(const Eigen::VectorXd& w, const Eigen::VectorXd& s_norm,
                           const Eigen::MatrixXd& omega, const HpParams& hp) {
    return hp.alpha * w - memnet_currents(w, s_norm, omega, hp) / hp.beta;
}

Trace simulate_network(const ReducedCircuit& rc, const HpParams& hp, const Eigen::VectorXd& w0,
                       const IntegratorSpec& spec, const NetworkRunOptions& opt) {
    validate(hp);
    validate(opt.envelope);
    const auto n = static_cast<std::size_t>(rc.s_volts.size());
    if (static_cast<std::size_t>(w0.size()) != n) throw ValidationError("network: w0 size mismatch");
    const Eigen::VectorXd s_norm = rc.s_volts / hp.r_on;
    const Eigen::MatrixXd& om = rc.projector.omega;
    const Rhs rhs = [&](const State& x, double t) {
        const Eigen::Map<const Eigen::VectorXd> w(x.data(), static_cast<Eigen::Index>(n));
        const Eigen::VectorXd d = memnet_rhs(w, s_norm * eval_signal(opt.envelope, t), om, hp);
        return State(d.data(), d.data() + d.size());
    };
    IntegrateOptions io;
    for (std::size_t k = 0; k < n; ++k) io.names.push_back("w" + std::to_string(k));
    io.project = [](State& x) {
        for (double& v : x) v = clamp_unit(v);
    };
    io.steady_tol = opt.steady_tol;
    io.stride = opt.stride;
    io.stats = opt.stats;
    Trace tr = integrate(rhs, State(w0.data(), w0.data() + w0.size()), spec, io);
    std::vector<double> mean(tr.size(), 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        const auto& ch = tr.channel(c);
        for (std::size_t k = 0; k < ch.size(); ++k) mean[k] += ch[k] / static_cast<double>(n);
    }
    tr.add_channel("mean", std::move(mean));
    return tr;
}

Eigen::MatrixXd linearize(const ReducedCircuit& rc, const HpParams& hp, const Eigen::VectorXd& w_star, double h) {
    const Eigen::Index n = w_star.size();
    const Eigen::VectorXd s_norm = rc.s_volts / hp.r_on;
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd wp = w_star, wm = w_star;
    for (Eigen::Index k = 0; k < n; ++k) {
        wp[k] += h;
        wm[k] -= h;
        a.col(k) = (memnet_rhs(wp, s_norm, rc.projector.omega, hp) - memnet_rhs(wm, s_norm, rc.projector.omega, hp)) /
                   (2.0 * h);
        wp[k] = w_star[k];
        wm[k] = w_star[k];
    }
    if (!a.allFinite()) throw NumericalError("linearize: non-finite Jacobian entry");
    return a;
}

std::vector<double> mean_relaxation(const Eigen::MatrixXd& a, const Eigen::VectorXd& w0,
                                    const std::vector<double>& ts) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n || w0.size() != n) throw ValidationError("mean_relaxation: dimension mismatch");
    std::vector<double> out;
    out.reserve(ts.size());
    if (n == 0) {
        out.assign(ts.size(), 0.0);
        return out;
    }
    const double nn = static_cast<double>(n);

    Eigen::EigenSolver<Eigen::MatrixXd> es(a);
    bool ok = es.info() == Eigen::Success;
    Eigen::VectorXcd coef;
    if (ok) {
        const Eigen::MatrixXcd v = es.eigenvectors();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
        const Eigen::MatrixXcd vinv = lu.inverse();
        const Eigen::MatrixXcd rec = v * es.eigenvalues().asDiagonal() * vinv;
        const double scale = std::max(1.0, a.norm());
        ok = vinv.allFinite() && (rec.real() - a).norm() <= 1e-9 * scale && rec.imag().norm() <= 1e-9 * scale;
        if (ok) {
            // tr(V e^{Lt} V^{-1} W0) = sum_k e^{l_k t} (V^{-1} W0 V)_kk.
            coef = (vinv * w0.cast<std::complex<double>>().asDiagonal() * v).diagonal();
        }
    }
    if (ok) {
        const Eigen::VectorXcd lam = es.eigenvalues();
        for (double t : ts) {
            std::complex<double> s = 0.0;
            for (Eigen::Index k = 0; k < n; ++k) s += coef[k] * std::exp(lam[k] * t);
            out.push_back(s.real() / nn);
        }
        return out;
    }
    // Defective or badly conditioned eigenbasis: matrix exponential by scaling and squaring.
    for (double t : ts) {
        const Eigen::MatrixXd e = (a * t).exp();
        out.push_back((e * w0.asDiagonal()).trace() / nn);
    }
    return out;
}

CircuitGraph random_graph(std::size_t nodes, double p_extra, std::uint64_t seed) {
    if (nodes < 2) throw ValidationError("random_graph needs at least 2 nodes");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> perm(nodes);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::set<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t i = 1; i < nodes; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        const std::size_t a = perm[i], b = perm[pick(rng)];
        es.emplace(std::min(a, b), std::max(a, b));
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t a = 0; a < nodes; ++a)
        for (std::size_t b = a + 1; b < nodes; ++b)
            if (u(rng) < p_extra) es.emplace(a, b);
    CircuitGraph g;
    g.nodes = nodes;
    for (const auto& [a, b] : es) g.edges.push_back({a, b, EdgeRole::memristor, 0.0});
    return g;
}

namespace {

// Linear-interpolated percentile of sorted data, q in [0,100].
double percentile(const std::vector<double>& sorted, double q) {
    const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double ensemble_mean(const std::vector<double>& rates, std::size_t edges, double t) {
    double s = 0.0;
    for (double l : rates) s += std::exp(-l * t);
    return s / (2.0 * static_cast<double>(edges));
}

} // namespace

PowerLawFit relaxation_exponent(const std::vector<double>& rates, std::size_t edges) {
    if (rates.size() < 2) throw FitRejected("relaxation has a single time scale");
    std::vector<double> l = rates;
    std::sort(l.begin(), l.end());
    PowerLawFit fit;
    fit.t_lo = 1.0 / percentile(l, 50.0);
    fit.t_hi = 1.0 / percentile(l, 5.0);
    if (fit.t_hi < std::sqrt(10.0) * fit.t_lo) throw FitRejected("relaxation fit window spans under half a decade");
    std::vector<double> lt, lf;
    constexpr int points = 50;
    for (int k = 0; k < points; ++k) {
        const double t = fit.t_lo * std::pow(fit.t_hi / fit.t_lo, k / double(points - 1));
        lt.push_back(std::log(t));
        lf.push_back(std::log(ensemble_mean(l, edges, t)));
    }
    const auto [slope, r2] = ols_slope(lt, lf);
    fit.exponent = slope;
    fit.r2 = r2;
    if (r2 < 0.9) throw FitRejected("relaxation is not a power law (R^2 < 0.9)");
    return fit;
}

namespace {

struct BranchResult {
    PowerLawFit fit;
    SpectrumFit spec;
    Trace relaxation;
};

BranchResult analyze_branch(const std::vector<double>& rates, std::size_t edges, std::size_t samples) {
    BranchResult br{relaxation_exponent(rates, edges), {}, Trace(0.0, 1.0, {"mean_w"})};
    std::vector<double> l = rates;
    std::sort(l.begin(), l.end());
    const double l5 = percentile(l, 5.0), l50 = percentile(l, 50.0);
    const double dt = 4.0 / (l5 * static_cast<double>(samples));
    Trace tr(0.0, dt, {"mean_w"});
    for (std::size_t k = 0; k < samples; ++k) tr.push({ensemble_mean(l, edges, dt * static_cast<double>(k))});
    const double f_lo = l50 / (2.0 * std::numbers::pi), f_hi = 0.25 / dt;
    if (!(f_lo < f_hi)) throw FitBandEmpty("spectral band collapses for this spectrum");
    br.spec = power_spectrum_fit(tr, "mean_w", f_lo, f_hi, Taper::rectangular);
    br.relaxation = std::move(tr);
    return br;
}

} // namespace

SocResult soc_analyze(const std::vector<double>& eigen_real, std::size_t edges, std::size_t spectrum_samples) {
    double scale = 0.0;
    for (double x : eigen_real) scale = std::max(scale, std::abs(x));
    const double tol = 1e-8 * scale;
    std::vector<double> neg, pos;
    for (double x : eigen_real) {
        if (x < -tol) neg.push_back(-x);
        if (x > tol) pos.push_back(x);
    }
    SocResult r;
    r.edges = edges;
    r.eigenvalues = eigen_real;
    BranchResult b = analyze_branch(neg, edges, spectrum_samples);
    r.gamma = b.fit.exponent;
    r.gamma_r2 = b.fit.r2;
    r.slope = b.spec.slope;
    r.slope_r2 = b.spec.r2;
    r.relaxation = std::move(b.relaxation);
    r.gamma_pos = r.slope_pos = std::nan("");
    try {
        BranchResult bp = analyze_branch(pos, edges, spectrum_samples);
        r.gamma_pos = bp.fit.exponent;
        r.slope_pos = bp.spec.slope;
    } catch (const NumericalError&) {
    }
    return r;
}

SocResult soc_experiment(const SocConfig& cfg) {
    validate(cfg.hp);
    CircuitGraph g = random_graph(cfg.nodes, cfg.p_extra, cfg.seed);
    std::mt19937_64 rng(cfg.seed ^ 0x5bd1e995u);
    std::uniform_real_distribution<double> us(-1.0, 1.0), uw(0.0, 1.0);
    for (auto& e : g.edges) e.value = us(rng);
    const ReducedCircuit rc = reduce_circuit(g);
    const auto n = rc.s_volts.size();
    Eigen::VectorXd w0(n);
    for (Eigen::Index k = 0; k < n; ++k) w0[k] = uw(rng);

    IntegrateStats st;
    NetworkRunOptions opt;
    opt.steady_tol = cfg.steady_tol;
    opt.stride = cfg.max_steps;
    opt.stats = &st;
    simulate_network(rc, cfg.hp, w0, {Method::euler, cfg.dt, cfg.dt * static_cast<double>(cfg.max_steps)}, opt);
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(st.final_state.data(), n);

    const Eigen::MatrixXd a = linearize(rc, cfg.hp, w);
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    if (es.info() != Eigen::Success) throw NumericalError("soc: eigenvalue computation failed");
    std::vector<double> lam(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) lam[static_cast<std::size_t>(k)] = es.eigenvalues()[k].real();

    SocResult r = soc_analyze(lam, static_cast<std::size_t>(n), cfg.spectrum_samples);
    r.steps = st.steps;
    r.steady = st.steady;
    std::size_t sat = 0;
    for (Eigen::Index k = 0; k < n; ++k) sat += (w[k] <= 0.0 || w[k] >= 1.0);
    r.saturated_fraction = static_cast<double>(sat) / static_cast<double>(n);
    return r;
}

} // namespace memsim
