#include "cli_internal.hpp"

#include "memsim/circuits.hpp"
#include "memsim/crossbar.hpp"
#include "memsim/error.hpp"
#include "memsim/learning.hpp"
#include "memsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace memsim::cli {

namespace {

constexpr double rad_to_deg = 180.0 / std::numbers::pi;

HpParams make_hp(double alpha, double beta, double r_on, double r_off) {
    HpParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.r_on = r_on;
    p.r_off = r_off;
    return p;
}

const HpParams storage_cell = make_hp(0.0, 1e-2, 100.0, 16e3);

Eigen::MatrixXd normal_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n01(rng);
    return m;
}

double angle_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double c = std::abs(a.dot(b)) / (a.norm() * b.norm());
    return std::acos(std::min(1.0, c)) * rad_to_deg;
}

std::string str(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw ValidationError("field '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

int positive(const json& j, const std::string& key) {
    const int v = integer(j, key);
    if (v < 1) throw ValidationError("field '" + key + "' must be >= 1");
    return v;
}

// ---- hysteresis ------------------------------------------------------------

void hysteresis(RunContext& ctx) {
    const json& c = ctx.cfg;
    const HpParams hp = hp_from(c["hp"]);
    WindowSpec win;
    const std::string wk = str(c["window"], "kind");
    if (wk == "joglekar")
        win = {WindowKind::joglekar, positive(c["window"], "p")};
    else if (wk != "none")
        throw ValidationError("field 'window.kind' must be none or joglekar");
    const double w0 = num(c, "w0"), amp = num(c, "amplitude");
    const int spp = positive(c, "samples_per_period");

    std::vector<std::vector<double>> table;
    double prev = INFINITY, pinch = 0.0;
    bool monotone = true;
    int k = 0;
    for (const auto& fj : c["frequencies"]) {
        const double f = fj.get<double>();
        if (!(f > 0.0)) throw ValidationError("field 'frequencies' must hold positive values");
        const DriveSignal v = DriveSignal::sine(amp, f);
        const Rhs rhs = [&](const State& x, double t) {
            return State{hp_rhs(x[0], eval_signal(v, t) / hp_resistance(x[0], hp), hp, win)};
        };
        IntegrateOptions opt;
        opt.names = {"w"};
        opt.project = [](State& x) { x[0] = clamp_unit(x[0]); };
        Trace tr = integrate(rhs, {w0}, {Method::rk4, 1.0 / (f * spp), 1.0 / f}, opt);
        std::vector<double> vs, is;
        for (std::size_t s = 0; s < tr.size(); ++s) {
            vs.push_back(eval_signal(v, tr.time(s)));
            is.push_back(vs.back() / hp_resistance(tr.channel(0)[s], hp));
            if (std::abs(vs.back()) < 1e-9) pinch = std::max(pinch, std::abs(is.back()));
        }
        const double area = loop_area(vs, is);
        monotone = monotone && area < prev;
        prev = area;
        table.push_back({f, area});
        tr.add_channel("v", vs);
        tr.add_channel("i", is);
        ctx.write_trace("iv_" + std::to_string(k) + ".csv", tr);
        ctx.metric("area_" + std::to_string(k), area);
        ++k;
    }
    ctx.write_table("loop_areas.csv", {"frequency", "area"}, table);
    ctx.metric("monotone_decrease", monotone ? "1" : "0");
    ctx.metric("max_current_at_zero_voltage", pinch);
}

// ---- write-read ------------------------------------------------------------

void write_read(RunContext& ctx) {
    const json& c = ctx.cfg;
    const HpParams hp = hp_from(c["hp"]);
    const int rows = positive(c, "rows"), cols = positive(c, "cols"), reads = positive(c, "reads");
    PulseSpec p;
    p.v_write = num(c, "v_write");
    p.v_read = num(c, "v_read");
    const double tau = switching_time(hp, p.v_write);
    p.duration = num(c, "duration_factor") * tau;

    // Full-swing time straight from the ODE, for comparison with the closed form.
    {
        const Rhs rhs = [&](const State& x, double) { return State{hp_rhs(x[0], p.v_write / hp_resistance(x[0], hp), hp)}; };
        IntegrateOptions opt;
        opt.project = [](State& x) { x[0] = clamp_unit(x[0]); };
        const double dt = tau / 20000.0;
        const Trace tr = integrate(rhs, {1.0}, {Method::rk4, dt, 1.5 * tau}, opt);
        const auto& w = tr.channel(0);
        const double target = p.v_write * hp.polarity < 0.0 ? 0.0 : 1.0;
        const auto hit = std::find_if(w.begin(), w.end(), [&](double x) { return x == target; });
        ctx.metric("switching_time", tau);
        ctx.metric("switching_time_ode", hit == w.end() ? NAN : tr.time(static_cast<std::size_t>(hit - w.begin())));
    }

    std::mt19937_64 rng(seed_of(c));
    std::bernoulli_distribution coin(0.5);
    Crossbar x = Crossbar::uniform(rows, cols, hp, num(c, "r_out"), 0.5);
    std::vector<int> bits(static_cast<std::size_t>(rows * cols));
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            x = write_pulse(x, i, j, bits[static_cast<std::size_t>(i * cols + j)] ? p.v_write : -p.v_write, p.duration);

    int errors = 0, flips = 0;
    double worst = 0.0;
    std::vector<std::vector<double>> rows_out;
    Crossbar after = x;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            const int want = bits[static_cast<std::size_t>(i * cols + j)];
            int first = -1;
            for (int r = 0; r < reads; ++r) {
                const ReadResult rr = read_bit(after, i, j, p);
                if (first < 0) first = rr.bit;
                flips += rr.bit != first;
                worst = std::max(worst, rr.disturbance);
                after = rr.after;
            }
            errors += first != want;
            rows_out.push_back({double(i), double(j), double(want), double(first), x.state(i, j), after.state(i, j)});
        }
    ctx.write_table("cells.csv", {"row", "col", "written", "read", "w_written", "w_after_reads"}, rows_out);
    std::ostringstream os;
    write_csv(os, after);
    ctx.write_text("crossbar.csv", os.str());
    ctx.metric("pulse_duration", p.duration);
    ctx.metric("bit_errors", double(errors));
    ctx.metric("read_flips", double(flips));
    ctx.metric("max_read_disturbance", worst);
    ctx.metric("read_disturbance_bound", read_disturbance_bound(hp, p));
}

// ---- mc-volatility ---------------------------------------------------------

void mc_volatility(RunContext& ctx) {
    const json& c = ctx.cfg;
    McParams p;
    p.c = num(c, "c");
    p.hp = hp_from(c["hp"]);
    const double q0 = num(c, "q0");
    const IntegratorSpec spec = integrator_from(c["integrator"]);
    p.c1 = mc_calibrate_c1(p, q0, spec.dt);
    Trace tr = mc_simulate(p, q0, spec);
    const double rc = p.hp.r_on * p.c;
    std::vector<double> qa;
    double late = 0.0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        qa.push_back(mc_analytic(tr.time(k), p));
        if (tr.time(k) > 5.0 * rc) late = std::max(late, std::abs(qa.back() - tr.channel("q")[k]) / tr.channel("q")[k]);
    }
    tr.add_channel("q_analytic", qa);
    ctx.write_trace("trace.csv", tr);
    ctx.metric("rc", rc);
    ctx.metric("c1", p.c1);
    ctx.metric("max_rel_err_after_5rc", late);
}

// ---- amoeba ----------------------------------------------------------------

void amoeba(RunContext& ctx) {
    const json& c = ctx.cfg;
    AmoebaParams p;
    p.c = num(c["params"], "c");
    p.r = num(c["params"], "r");
    p.l = num(c["params"], "l");
    const json& d = c["params"]["device"];
    p.dev = {num(d, "t_alpha"), num(d, "t_beta"), num(d, "v_t"), num(d, "r1"), num(d, "r2")};
    const AmoebaInit init{num(c["init"], "i0"), num(c["init"], "vc0"), num(c["init"], "m0")};
    std::vector<DriveSegment> sched;
    for (const auto& s : c["schedule"]) sched.push_back({num(s, "duration"), signal_from(s["signal"])});
    if (sched.empty()) throw ValidationError("field 'schedule' must not be empty");
    const Trace tr = amoeba_simulate(p, init, sched, integrator_from(c["integrator"]));
    const double tol = num(c, "tol");
    const auto rep = amoeba_settling(tr, sched, tol);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < rep.size(); ++k) {
        rows.push_back({rep[k].switch_time, rep[k].settle_time, rep[k].max_derivative});
        ctx.metric("settle_time_" + std::to_string(k), rep[k].settle_time);
        ctx.metric("max_derivative_before_switch_" + std::to_string(k), rep[k].max_derivative);
    }
    const auto& m = tr.channel("m");
    ctx.metric("m_min", *std::min_element(m.begin(), m.end()));
    ctx.metric("m_max", *std::max_element(m.begin(), m.end()));
    ctx.write_trace("trace.csv", tr);
    ctx.write_table("settling.csv", {"switch_time", "settle_time", "max_derivative"}, rows);
}

// ---- plant -----------------------------------------------------------------

void plant(RunContext& ctx) {
    const json& c = ctx.cfg;
    PlantParams p;
    p.p_beta = num(c, "beta");
    p.r_o = num(c, "r_o");
    p.a_const = num(c, "a_const");
    const std::string hk = str(c["h"], "kind");
    if (hk == "constant")
        p.h.kind = PlantNonlinearity::constant;
    else if (hk == "exponential")
        p.h.kind = PlantNonlinearity::exponential;
    else if (hk == "sinh")
        p.h.kind = PlantNonlinearity::sinh;
    else
        throw ValidationError("field 'h.kind' must be constant, exponential or sinh");
    p.h.k = num(c["h"], "k");
    if (c["rc"]["enabled"].get<bool>()) {
        p.rc_r = num(c["rc"], "r");
        p.rc_c = num(c["rc"], "c");
    }
    const Trace tr = plant_simulate(p, signal_from(c["drive"]), integrator_from(c["integrator"]));
    ctx.write_trace("trace.csv", tr);
    ctx.metric("loop_area", loop_area(tr.channel("v"), tr.channel("i")));
    const auto& i = tr.channel("i");
    ctx.metric("i_max", *std::max_element(i.begin(), i.end()));
    ctx.metric("i_min", *std::min_element(i.begin(), i.end()));
}

// ---- hh --------------------------------------------------------------------

void hh(RunContext& ctx) {
    const json& c = ctx.cfg;
    const json& q = c["params"];
    HhParams p;
    double* fields[] = {&p.g_k, &p.g_na, &p.k1, &p.k2, &p.na1, &p.na2, &p.na3,
                        &p.na4, &p.na5, &p.na6, &p.na7, &p.na8, &p.na9};
    const char* names[] = {"g_k", "g_na", "k1", "k2", "na1", "na2", "na3", "na4", "na5", "na6", "na7", "na8", "na9"};
    for (std::size_t k = 0; k < std::size(names); ++k) *fields[k] = num(q, names[k]);
    const HhInit init{num(c["init"], "w1"), num(c["init"], "w2"), num(c["init"], "w3")};
    const DriveSignal v = signal_from(c["drive"]);
    const IntegratorSpec spec = integrator_from(c["integrator"]);
    Trace tr = hh_simulate(p, v, init, spec);
    std::vector<double> vs;
    for (std::size_t k = 0; k < tr.size(); ++k) vs.push_back(eval_signal(v, tr.time(k)));
    tr.add_channel("v", vs);
    ctx.write_trace("trace.csv", tr);
    // Loop areas over the last full drive period.
    if (v.frequency > 0.0) {
        const auto per = static_cast<std::size_t>(std::llround(1.0 / (v.frequency * spec.dt)));
        if (per >= 4 && per < tr.size()) {
            const std::size_t from = tr.size() - per;
            auto tail = [&](const std::string& ch) {
                const auto& x = tr.channel(ch);
                return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(from), x.end());
            };
            ctx.metric("loop_area_k", loop_area(tail("v"), tail("i_k")));
            ctx.metric("loop_area_na", loop_area(tail("v"), tail("i_na")));
        }
    }
    for (const char* g : {"w1", "w2", "w3"}) ctx.metric(std::string(g) + "_final", tr.channel(g).back());
}

// ---- network-soc -----------------------------------------------------------

void network_soc(RunContext& ctx) {
    const json& c = ctx.cfg;
    SocConfig s;
    s.nodes = static_cast<std::size_t>(positive(c, "nodes"));
    s.p_extra = num(c, "p_extra");
    s.seed = seed_of(c);
    s.hp = hp_from(c["hp"]);
    const IntegratorSpec spec = integrator_from(c["integrator"]);
    if (spec.method != Method::euler) throw ValidationError("field 'integrator.method' must be euler for network-soc");
    s.dt = spec.dt;
    s.max_steps = static_cast<std::size_t>(std::llround(spec.t_end / spec.dt));
    s.steady_tol = num(c, "steady_tol");
    s.spectrum_samples = static_cast<std::size_t>(positive(c, "spectrum_samples"));
    const SocResult r = soc_experiment(s);
    ctx.write_trace("relaxation.csv", r.relaxation);
    std::vector<std::vector<double>> ev;
    for (double x : r.eigenvalues) ev.push_back({x});
    ctx.write_table("eigenvalues.csv", {"real_part"}, ev);
    ctx.metric("edges", double(r.edges));
    ctx.metric("steps", double(r.steps));
    ctx.metric("steady", r.steady ? "1" : "0");
    ctx.metric("saturated_fraction", r.saturated_fraction);
    ctx.metric("gamma", r.gamma);
    ctx.metric("gamma_r2", r.gamma_r2);
    ctx.metric("slope", r.slope);
    ctx.metric("slope_r2", r.slope_r2);
    ctx.metric("slope_plus_one_minus_gamma", r.slope + (1.0 - r.gamma));
    ctx.metric("gamma_positive_branch", r.gamma_pos);
    ctx.metric("slope_positive_branch", r.slope_pos);
}

// ---- maze ------------------------------------------------------------------

void maze(RunContext& ctx) {
    const json& c = ctx.cfg;
    MazeSpec m;
    const std::string file = str(c, "maze_file");
    if (!file.empty()) {
        std::ifstream is(file);
        if (!is) throw ValidationError("cannot read maze '" + file + "'");
        std::stringstream ss;
        ss << is.rdbuf();
        m = parse_maze(ss.str());
    } else {
        m = random_maze(positive(c, "rows"), positive(c, "cols"), seed_of(c), num(c, "p_open"));
    }
    validate(m);
    if (shortest_path_count(m) != 1) throw ValidationError("maze must have exactly one shortest path");
    const json& s = c["solver"];
    MazeSolveOptions o;
    o.r_on = num(s, "r_on");
    o.r_off = num(s, "r_off");
    o.beta = num(s, "beta");
    o.alpha = num(s, "alpha");
    o.dt = num(s, "dt");
    o.max_steps = static_cast<std::size_t>(positive(s, "max_steps"));
    o.steady_tol = num(s, "steady_tol");
    o.threshold = num(s, "threshold");
    const double v_dc = num(c, "v_dc");
    const MazeSolution sol = solve_maze(m, v_dc, o);
    const std::vector<Cell> bfs = bfs_shortest_path(m);

    const MazeCircuit mc = maze_to_circuit(m, v_dc);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < mc.edge_cells.size(); ++k) {
        const auto& [a, b] = mc.edge_cells[k];
        rows.push_back({double(a.r), double(a.c), double(b.r), double(b.c), sol.currents[Eigen::Index(k)],
                        sol.w[Eigen::Index(k)]});
    }
    ctx.write_table("currents.csv", {"tail_r", "tail_c", "head_r", "head_c", "current", "w"}, rows);
    std::vector<std::vector<double>> path;
    std::ostringstream shown;
    for (const auto& cell : sol.path) {
        path.push_back({double(cell.r), double(cell.c)});
        shown << (shown.tellp() ? " " : "") << '(' << cell.r << ',' << cell.c << ')';
    }
    ctx.write_table("path.csv", {"r", "c"}, path);
    ctx.write_text("maze.txt", format_maze(m));
    const bool match = sol.path == bfs;
    ctx.log << "path: " << shown.str() << '\n';
    ctx.metric("path_length", double(sol.path.size()));
    ctx.metric("bfs_length", double(bfs.size()));
    ctx.metric("matches_bfs", match ? "1" : "0");
    ctx.metric("contrast", sol.contrast);
    ctx.metric("steady", sol.steady ? "1" : "0");
    ctx.metric("t_stop", sol.t_stop);
    if (!match) ctx.exit_code = 3;
}

// ---- crossbar-mvm ----------------------------------------------------------

Crossbar random_array(int rows, int cols, const HpParams& hp, double r_lo, double r_hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Crossbar x = Crossbar::uniform(rows, cols, hp, r_lo, 0.5);
    for (int i = 0; i < rows; ++i) {
        x.r_out[i] = r_lo + (r_hi - r_lo) * u(rng);
        for (int j = 0; j < cols; ++j) x.m(i, j) = hp_resistance(u(rng), hp);
    }
    return x;
}

void crossbar_mvm(RunContext& ctx) {
    const json& c = ctx.cfg;
    const HpParams hp = hp_from(c["hp"]);
    const int rows = positive(c, "rows"), cols = positive(c, "cols"), trials = positive(c, "trials");
    const double r_lo = num(c, "r_out_min"), r_hi = num(c, "r_out_max");
    if (!(r_lo > 0.0 && r_hi >= r_lo)) throw ValidationError("field 'r_out_min' must be > 0 and <= r_out_max");
    std::mt19937_64 rng(seed_of(c));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = 0.0;
    Crossbar last;
    Eigen::VectorXd xi, eta, ref;
    for (int t = 0; t < trials; ++t) {
        last = random_array(rows, cols, hp, r_lo, r_hi, rng);
        xi = Eigen::VectorXd::NullaryExpr(cols, [&] { return u(rng); });
        eta = read_mvm(last, xi);
        ref = nodal_oracle(last, xi);
        worst = std::max(worst, (eta - ref).norm() / std::max(ref.norm(), 1e-300));
    }
    std::vector<std::vector<double>> mvm;
    for (int i = 0; i < rows; ++i) mvm.push_back({double(i), eta[i], ref[i]});
    ctx.write_table("mvm.csv", {"row", "eta", "nodal"}, mvm);
    std::ostringstream os;
    write_csv(os, last);
    ctx.write_text("crossbar.csv", os.str());

    // Program the transfer matrix of another random array onto a fresh one.
    const Crossbar ref_array = random_array(rows, cols, hp, r_lo, r_hi, rng);
    Crossbar fresh = Crossbar::uniform(rows, cols, hp, 1.0, 0.5);
    fresh.r_out = ref_array.r_out;
    const Eigen::MatrixXd target = transfer_matrix(ref_array);
    const ProgramResult pr = program_matrix(fresh, target);
    std::ostringstream prog;
    write_csv(prog, pr.x);
    ctx.write_text("programmed.csv", prog.str());
    ctx.metric("max_rel_err_vs_nodal", worst);
    ctx.metric("program_residual", pr.residual);
    ctx.metric("program_sweeps", double(pr.sweeps));
}

// ---- crossbar-train --------------------------------------------------------

void crossbar_train(RunContext& ctx) {
    const json& c = ctx.cfg;
    const std::string rule = str(c, "rule");
    UpdateRule r;
    r.eta = num(c, "eta");
    r.literal = c["literal"].get<bool>();
    if (rule == "sanger")
        r.kind = UpdateKind::sanger;
    else if (rule == "adaline")
        r.kind = UpdateKind::adaline;
    else if (rule == "gradient")
        r.kind = UpdateKind::gradient;
    else
        throw ValidationError("field 'rule' must be adaline, sanger or gradient");
    if (r.literal && r.kind != UpdateKind::sanger) throw ValidationError("--literal applies to the sanger rule only");
    std::vector<double> var;
    for (const auto& v : c["variances"]) var.push_back(v.get<double>());
    const auto dim = static_cast<Eigen::Index>(var.size());
    if (dim < 1 || std::any_of(var.begin(), var.end(), [](double v) { return !(v >= 0.0); }))
        throw ValidationError("field 'variances' must hold non-negative values");
    const int steps = positive(c, "steps"), every = positive(c, "record_every");
    const Eigen::Index outs = r.kind == UpdateKind::adaline ? dim : positive(c, "outputs");

    std::mt19937_64 rng(seed_of(c));
    std::normal_distribution<double> n01;
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(normal_matrix(dim, dim, rng)).householderQ();
    const Eigen::VectorXd sd = Eigen::Map<const Eigen::VectorXd>(var.data(), dim).cwiseSqrt();
    const Eigen::MatrixXd teacher = normal_matrix(outs, dim, rng);
    Eigen::MatrixXd w = 0.1 * normal_matrix(outs, dim, rng);
    if (r.kind == UpdateKind::adaline) w.setZero();

    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < outs; ++i)
        for (Eigen::Index j = 0; j < dim; ++j) names.push_back("w_" + std::to_string(i) + "_" + std::to_string(j));
    Trace tr(0.0, double(every), names);
    auto record = [&] {
        State row;
        for (Eigen::Index i = 0; i < outs; ++i)
            for (Eigen::Index j = 0; j < dim; ++j) row.push_back(w(i, j));
        tr.push(row);
    };
    record();
    for (int s = 1; s <= steps; ++s) {
        Eigen::VectorXd z(dim);
        for (Eigen::Index k = 0; k < dim; ++k) z[k] = n01(rng);
        const Eigen::VectorXd x = q * sd.cwiseProduct(z);
        w = apply_update(w, r, {x, teacher * x, nullptr});
        if (!w.allFinite()) throw NumericalError("weights diverged at step " + std::to_string(s));
        if (s % every == 0) record();
    }
    ctx.write_trace("weights.csv", tr);
    switch (r.kind) {
    case UpdateKind::sanger:
        for (Eigen::Index i = 0; i < std::min(outs, dim); ++i)
            ctx.metric("angle_deg_" + std::to_string(i), angle_deg(w.row(i).transpose(), q.col(i)));
        ctx.metric("row0_norm", w.row(0).norm());
        break;
    case UpdateKind::adaline: {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()));
        ctx.metric("angle_deg_0", angle_deg(es.eigenvectors().col(dim - 1), q.col(0)));
        break;
    }
    default:
        ctx.metric("relative_weight_error", (w - teacher).norm() / teacher.norm());
    }
}

// ---- stdp ------------------------------------------------------------------

void stdp(RunContext& ctx) {
    const json& c = ctx.cfg;
    const StdpKernel k{num(c["kernel"], "a_plus"), num(c["kernel"], "a_minus"), num(c["kernel"], "tau_plus"),
                       num(c["kernel"], "tau_minus")};
    const HpParams hp = hp_from(c["hp"]);
    const double v_amp = num(c, "v_amplitude"), t_max = num(c, "max_duration");
    const double lo = num(c, "delta_t_min"), hi = num(c, "delta_t_max");
    const int n = positive(c, "points");
    std::vector<std::vector<double>> rows;
    double worst = 0.0;
    const Crossbar cell = Crossbar::uniform(1, 1, hp, 1.0, 0.5);
    for (int s = 0; s < n; ++s) {
        const double dt = n == 1 ? lo : lo + (hi - lo) * s / (n - 1);
        const double want = stdp_kernel(dt, k);
        const PulseSpec p = stdp_program(dt, k, hp, v_amp, t_max);
        const double got = 0.5 - write_pulse(cell, 0, 0, p.v_write, p.duration).state(0, 0);
        worst = std::max(worst, std::abs(got - want));
        rows.push_back({dt, want, p.v_write, p.duration, got});
    }
    ctx.write_table("stdp.csv", {"delta_t", "kernel", "v", "duration", "achieved"}, rows);
    ctx.metric("max_abs_error", worst);
}

// ---- rc-demo ---------------------------------------------------------------

void rc_demo(RunContext& ctx) {
    const json& c = ctx.cfg;
    const std::string kind = str(c, "kind");
    const IntegratorSpec spec = integrator_from(c["integrator"]);
    const double delay = num(c, "delay"), washout = num(c, "washout"), ridge = num(c, "ridge");
    std::mt19937_64 rng(seed_of(c));
    auto input = [](double t) { return std::sin(t) * std::sin(0.31 * t) + 0.3 * std::cos(0.7 * t); };
    const auto u = [&](double t) { return Eigen::VectorXd::Constant(1, input(t)); };

    Trace feats(0.0, 1.0, {"g0"});
    if (kind == "linear") {
        const int n = positive(c, "size");
        LinearReservoir r;
        r.a = 0.9 * normal_matrix(n, n, rng) / std::sqrt(double(n)) - Eigen::MatrixXd::Identity(n, n);
        r.b = normal_matrix(n, 1, rng);
        r.h = Eigen::MatrixXd::Identity(n, n);
        feats = rc_run(r, u, spec);
    } else if (kind == "memristive") {
        const json& g = c["graph"];
        MemristiveReservoir r;
        r.circuit = reduce_circuit(random_graph(static_cast<std::size_t>(positive(g, "nodes")), num(g, "p_extra"), seed_of(c)));
        r.hp = hp_from(c["hp"]);
        const Eigen::Index e = r.circuit.s_volts.size();
        r.b = normal_matrix(e, 1, rng);
        r.h = Eigen::MatrixXd::Identity(e, e);
        r.w0 = Eigen::VectorXd::Constant(e, 0.5);
        r.in_scale = num(c, "in_scale");
        feats = rc_run(r, u, spec);
    } else {
        throw ValidationError("field 'kind' must be linear or memristive");
    }
    const auto first = static_cast<std::size_t>(std::ceil((washout + delay) / spec.dt));
    if (first + 10 >= feats.size()) throw ValidationError("field 'integrator.t_end' leaves no samples after washout");
    const std::size_t n = feats.size() - first, half = n / 2;
    const auto nf = static_cast<Eigen::Index>(feats.channel_count());
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), nf + 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const State row = feats.row(first + k);
        for (Eigen::Index j = 0; j < nf; ++j) g(Eigen::Index(k), j) = row[std::size_t(j)];
        g(Eigen::Index(k), nf) = 1.0;
        y[Eigen::Index(k)] = input(feats.time(first + k) - delay);
    }
    const auto h = static_cast<Eigen::Index>(half);
    const ReadoutFit fit = fit_readout(g.topRows(h), y.head(h), ridge);
    const Eigen::VectorXd pred = g * fit.coef;
    auto nrmse = [&](Eigen::Index from, Eigen::Index len) {
        const Eigen::VectorXd yy = y.segment(from, len);
        const double sd = std::sqrt((yy.array() - yy.mean()).square().mean());
        return std::sqrt((pred.segment(from, len) - yy).array().square().mean()) / sd;
    };
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < n; ++k) rows.push_back({feats.time(first + k), y[Eigen::Index(k)], pred[Eigen::Index(k)]});
    ctx.write_trace("features.csv", feats);
    ctx.write_table("prediction.csv", {"t", "target", "prediction"}, rows);
    ctx.metric("features", double(nf));
    ctx.metric("nrmse_train", nrmse(0, h));
    ctx.metric("nrmse_test", nrmse(h, static_cast<Eigen::Index>(n) - h));
    ctx.metric("readout_condition", fit.condition);
}

// ---- nef-demo --------------------------------------------------------------

void nef_demo(RunContext& ctx) {
    const json& c = ctx.cfg;
    const NefPopulation p = random_nef_population(positive(c, "neurons"), positive(c, "grid_points"), seed_of(c));
    const Eigen::VectorXd x = p.grid();
    const int k = positive(c, "train_functions");
    Eigen::MatrixXd train(x.size(), k);
    for (int j = 0; j < k; ++j) train.col(j) = ((0.5 + 0.1 * j) * x).array().sin();
    const NefDecoders d = nef_fit_decoders(p, train, num(c, "reg"));
    double worst = 0.0;
    for (int j = 0; j < k; ++j)
        worst = std::max(worst, (nef_decode(nef_encode(train.col(j), p), d) - train.col(j)).cwiseAbs().maxCoeff());
    const Eigen::VectorXd f = (num(c, "test_frequency") * x).array().sin();
    const Eigen::VectorXd fh = nef_decode(nef_encode(f, p), d);
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < x.size(); ++i) rows.push_back({x[i], f[i], fh[i]});
    ctx.write_table("decode.csv", {"x", "f", "f_decoded"}, rows);
    ctx.metric("max_error_train", worst);
    ctx.metric("max_error_test", (fh - f).cwiseAbs().maxCoeff());
    ctx.metric("min_norm", d.min_norm ? "1" : "0");
}

// ---- lca -------------------------------------------------------------------

void lca(RunContext& ctx) {
    const json& c = ctx.cfg;
    const int n = positive(c, "dim"), m = positive(c, "atoms"), active = positive(c, "active");
    if (active > m) throw ValidationError("field 'active' must not exceed 'atoms'");
    std::mt19937_64 rng(seed_of(c));
    LcaProblem p;
    p.phi = normal_matrix(n, m, rng);
    p.phi.colwise().normalize();
    p.lambda = num(c, "lambda");
    p.tau = num(c, "tau");
    std::vector<int> idx(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) idx[std::size_t(k)] = k;
    std::shuffle(idx.begin(), idx.end(), rng);
    std::uniform_real_distribution<double> mag(0.5, 1.5);
    Eigen::VectorXd truth = Eigen::VectorXd::Zero(m);
    for (int k = 0; k < active; ++k) truth[idx[std::size_t(k)]] = mag(rng);
    const Eigen::VectorXd x = p.phi * truth;
    const LcaResult r = lca_simulate(p, x, integrator_from(c["integrator"]));
    std::vector<std::vector<double>> rows;
    int support_hits = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
        rows.push_back({double(k), truth[k], r.a[k]});
        support_hits += (truth[k] != 0.0) == (r.a[k] != 0.0);
    }
    ctx.write_trace("u.csv", r.u);
    ctx.write_table("coefficients.csv", {"atom", "true", "recovered"}, rows);
    ctx.metric("converged", r.converged ? "1" : "0");
    ctx.metric("energy", lca_energy(p, x, r.a));
    ctx.metric("energy_of_truth", lca_energy(p, x, truth));
    ctx.metric("support_agreement", double(support_hits) / m);
    ctx.metric("relative_residual", (x - p.phi * r.a).norm() / x.norm());
}

// ---- energy ----------------------------------------------------------------

void energy(RunContext& ctx) {
    const json& c = ctx.cfg;
    std::vector<std::vector<double>> rows;
    for (const auto& nj : c["n_values"]) {
        const EnergyParams p{num(c, "p_err"), num(c, "l_bits"), nj.get<double>(), num(c, "kt")};
        const EnergyEstimates e = energy_estimates(p);
        rows.push_back({p.n, e.e_gate, e.e_dig, e.e_memr});
        const std::string s = format_double(p.n);
        ctx.metric("e_dig_n" + s, e.e_dig);
        ctx.metric("e_memr_n" + s, e.e_memr);
    }
    if (!rows.empty()) ctx.metric("e_gate", rows.front()[1]);
    ctx.write_table("energy.csv", {"n", "e_gate", "e_dig", "e_memr"}, rows);
}

json with_seed(json j) {
    j["seed"] = 1;
    return j;
}

std::vector<Command> build() {
    const json storage = hp_to(storage_cell);
    std::vector<Command> cs;

    cs.push_back({"hysteresis",
                  with_seed({{"hp", hp_to(make_hp(0.0, 3e-4, 1e3, 6e3))},
                             {"w0", 0.5},
                             {"amplitude", 1.0},
                             {"frequencies", {1.0, 10.0, 100.0}},
                             {"samples_per_period", 4000},
                             {"window", {{"kind", "none"}, {"p", 1}}}}),
                  {{"default", json::object()}, {"hp-fig", json::object()}},
                  hysteresis});

    cs.push_back({"write-read",
                  with_seed({{"hp", storage},
                             {"rows", 8},
                             {"cols", 8},
                             {"r_out", 1.0},
                             {"v_write", 2.0},
                             {"duration_factor", 1.2},
                             {"v_read", 1e-3},
                             {"reads", 100}}),
                  {{"default", json::object()}},
                  write_read});

    cs.push_back({"mc-volatility",
                  with_seed({{"c", 1e-3},
                             {"hp", hp_to(make_hp(0.0, 1e-3, 100.0, 1600.0))},
                             {"q0", 2e-3},
                             {"integrator", integrator_to({Method::rk4, 1e-4, 2.0})}}),
                  {{"default", json::object()}},
                  mc_volatility});

    json amoeba_sched = json::array();
    amoeba_sched.push_back({{"duration", 150.0}, {"signal", signal_to(DriveSignal::dc(0.5))}});
    amoeba_sched.push_back({{"duration", 300.0}, {"signal", signal_to(DriveSignal::dc(-2.0))}});
    json square_sched = json::array();
    square_sched.push_back({{"duration", 600.0}, {"signal", signal_to(DriveSignal::square(2.0, 1.0 / 200.0))}});
    cs.push_back({"amoeba",
                  with_seed({{"params",
                              {{"c", 1.0},
                               {"r", 1.0},
                               {"l", 2.0},
                               {"device", {{"t_alpha", 0.1}, {"t_beta", 100.0}, {"v_t", 2.5}, {"r1", 3.0}, {"r2", 20.0}}}}},
                             {"init", {{"i0", 1.0}, {"vc0", 1.0}, {"m0", 7.0}}},
                             {"schedule", amoeba_sched},
                             {"integrator", {{"method", "euler"}, {"dt", 0.1}}},
                             {"tol", 1e-3}}),
                  {{"default", json::object()}, {"amoeba-fig", json::object()}, {"amoeba-square", {{"schedule", square_sched}}}},
                  amoeba});

    cs.push_back({"plant",
                  with_seed({{"beta", 1.0},
                             {"r_o", 1.0},
                             {"h", {{"kind", "exponential"}, {"k", 1.0}}},
                             {"a_const", 1.0},
                             {"rc", {{"enabled", false}, {"r", 1.0}, {"c", 1.0}}},
                             {"drive", signal_to(DriveSignal::sine(1.0, 0.5))},
                             {"integrator", integrator_to({Method::rk4, 1e-3, 10.0})}}),
                  {{"default", json::object()}, {"plant-fig", json::object()}},
                  plant});

    const HhParams hp0;
    cs.push_back({"hh",
                  with_seed({{"params",
                              {{"g_k", hp0.g_k}, {"g_na", hp0.g_na}, {"k1", hp0.k1}, {"k2", hp0.k2}, {"na1", hp0.na1},
                               {"na2", hp0.na2}, {"na3", hp0.na3}, {"na4", hp0.na4}, {"na5", hp0.na5}, {"na6", hp0.na6},
                               {"na7", hp0.na7}, {"na8", hp0.na8}, {"na9", hp0.na9}}},
                             {"init", {{"w1", 0.3}, {"w2", 0.05}, {"w3", 0.6}}},
                             {"drive", signal_to(DriveSignal::sine(0.03, 0.05))},
                             {"integrator", integrator_to({Method::rk4, 0.01, 100.0})}}),
                  {{"default", json::object()}},
                  hh});

    cs.push_back({"network-soc",
                  with_seed({{"nodes", 100},
                             {"p_extra", 0.02},
                             {"hp", hp_to(make_hp(0.0, 1.0, 1.0, 20.0))},
                             {"integrator", integrator_to({Method::euler, 0.2, 600.0})},
                             {"steady_tol", 1e-6},
                             {"spectrum_samples", 4096}}),
                  {{"default", json::object()}, {"soc-fig", json::object()}},
                  network_soc});

    const MazeSolveOptions mo;
    cs.push_back({"maze",
                  with_seed({{"maze_file", ""},
                             {"rows", 8},
                             {"cols", 8},
                             {"p_open", 0.72},
                             {"v_dc", 1.0},
                             {"solver",
                              {{"r_on", mo.r_on}, {"r_off", mo.r_off}, {"beta", mo.beta}, {"alpha", mo.alpha}, {"dt", mo.dt},
                               {"max_steps", mo.max_steps}, {"steady_tol", mo.steady_tol}, {"threshold", mo.threshold}}}}),
                  {{"default", json::object()}},
                  maze});

    cs.push_back({"crossbar-mvm",
                  with_seed({{"hp", storage}, {"rows", 8}, {"cols", 8}, {"r_out_min", 10.0}, {"r_out_max", 1000.0}, {"trials", 100}}),
                  {{"default", json::object()}},
                  crossbar_mvm});

    cs.push_back({"crossbar-train",
                  with_seed({{"rule", "sanger"},
                             {"eta", 2e-3},
                             {"steps", 20000},
                             {"outputs", 2},
                             {"variances", {4.0, 1.0, 0.25, 0.0625}},
                             {"record_every", 100},
                             {"literal", false}}),
                  {{"default", json::object()},
                   {"adaline", {{"rule", "adaline"}, {"eta", 1e-4}, {"steps", 5000}}},
                   {"gradient", {{"rule", "gradient"}, {"eta", 5e-3}, {"steps", 5000}}}},
                  crossbar_train});

    cs.push_back({"stdp",
                  with_seed({{"kernel", {{"a_plus", 0.1}, {"a_minus", 0.12}, {"tau_plus", 20e-3}, {"tau_minus", 20e-3}}},
                             {"hp", storage},
                             {"v_amplitude", 1.0},
                             {"max_duration", 20.0},
                             {"delta_t_min", -0.1},
                             {"delta_t_max", 0.1},
                             {"points", 41}}),
                  {{"default", json::object()}},
                  stdp});

    cs.push_back({"rc-demo",
                  with_seed({{"kind", "linear"},
                             {"size", 30},
                             {"graph", {{"nodes", 10}, {"p_extra", 0.3}}},
                             {"hp", hp_to(make_hp(0.0, 1.0, 1.0, 10.0))},
                             {"in_scale", 0.5},
                             {"delay", 1.0},
                             {"washout", 20.0},
                             {"ridge", 1e-8},
                             {"integrator", integrator_to({Method::rk4, 0.05, 300.0})}}),
                  {{"default", json::object()}, {"memristive", {{"kind", "memristive"}, {"delay", 0.3}}}},
                  rc_demo});

    cs.push_back({"nef-demo",
                  with_seed({{"neurons", 200}, {"grid_points", 21}, {"train_functions", 30}, {"reg", 1e-6}, {"test_frequency", 1.75}}),
                  {{"default", json::object()}},
                  nef_demo});

    cs.push_back({"lca",
                  with_seed({{"dim", 16},
                             {"atoms", 32},
                             {"active", 3},
                             {"lambda", 0.1},
                             {"tau", 1.0},
                             {"integrator", integrator_to({Method::rk4, 0.01, 60.0})}}),
                  {{"default", json::object()}},
                  lca});

    cs.push_back({"energy",
                  with_seed({{"p_err", 1e-3}, {"l_bits", 8.0}, {"kt", 4.14e-21}, {"n_values", {1.0, 2.0, 4.0, 8.0}}}),
                  {{"default", json::object()}},
                  energy});
    return cs;
}

} // namespace

const std::vector<Command>& commands() {
    static const std::vector<Command> cs = build();
    return cs;
}

} // namespace memsim::cli
