#include <doctest.h>

#include "memsim/crossbar.hpp"
#include "memsim/error.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace memsim;

namespace {

HpParams cell() {
    HpParams hp;
    hp.beta = 1e-2;
    hp.r_on = 100.0;
    hp.r_off = 16e3;
    return hp;
}

Crossbar random_crossbar(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
    const HpParams hp = cell();
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Crossbar x = Crossbar::uniform(r, c, hp, 50.0, 0.5);
    for (Eigen::Index i = 0; i < r; ++i) {
        x.r_out[i] = 10.0 + 990.0 * u(rng);
        for (Eigen::Index j = 0; j < c; ++j) x.m(i, j) = hp_resistance(u(rng), hp);
    }
    return x;
}

// w(t) of a voltage-driven cell by dense rk4, independent of write_pulse.
double ode_state(const HpParams& hp, double w0, double v, double t) {
    const Rhs rhs = [&](const State& s, double) { return State{hp_rhs(s[0], v / hp_resistance(s[0], hp), hp)}; };
    return integrate(rhs, {w0}, {Method::rk4, t / 20000.0, t}).channel(0).back();
}

} // namespace

TEST_CASE("one cell divider by hand") {
    Crossbar x = Crossbar::uniform(1, 1, cell(), 300.0, 0.0);
    const Eigen::VectorXd in = Eigen::VectorXd::Constant(1, 2.0);
    CHECK(read_mvm(x, in)[0] == doctest::Approx(2.0 * 300.0 / 400.0));
    CHECK(nodal_oracle(x, in)[0] == doctest::Approx(2.0 * 300.0 / 400.0));
}

TEST_CASE("read matches full nodal analysis") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index r = 1 + trial % 8, c = 1 + (trial * 3) % 8;
        const Crossbar x = random_crossbar(r, c, rng);
        const Eigen::VectorXd in = Eigen::VectorXd::Random(c);
        const Eigen::VectorXd a = read_mvm(x, in), b = nodal_oracle(x, in);
        CHECK((a - b).norm() <= 1e-9 * std::max(1e-300, b.norm()));
    }
    Crossbar x = Crossbar::uniform(2, 2, cell(), 10.0, 0.5);
    CHECK_THROWS_AS(read_mvm(x, Eigen::VectorXd::Ones(3)), ValidationError);
}

TEST_CASE("programming reaches a feasible target") {
    std::mt19937_64 rng(5);
    const Crossbar ref = random_crossbar(4, 3, rng);
    const Eigen::MatrixXd target = transfer_matrix(ref);
    const Crossbar start = Crossbar::uniform(4, 3, cell(), 0.0, 0.5);
    Crossbar s = start;
    s.r_out = ref.r_out;
    const ProgramResult res = program_matrix(s, target);
    CHECK(res.residual < 1e-6);
    CHECK(res.clamped.empty());
    CHECK((transfer_matrix(res.x) - target).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_NOTHROW(validate(res.x));
}

TEST_CASE("infeasible targets are reported") {
    Crossbar x = Crossbar::uniform(1, 2, cell(), 100.0, 0.5);
    Eigen::MatrixXd target(1, 2);
    target << 0.9, 0.9;
    CHECK_THROWS_AS(program_matrix(x, target), ValidationError);
    const ProgramResult best = program_matrix(x, target, true);
    CHECK(best.residual >= 1e-6);
    CHECK(!best.clamped.empty());
}

TEST_CASE("write solution agrees with the ode") {
    for (int pol : {-1, 1}) {
        HpParams hp = cell();
        hp.polarity = pol;
        for (double v : {0.5, -0.5}) {
            const double t = 0.2 * switching_time(hp, v);
            const double w = write_solution_w(hp, 0.5, v, t);
            CHECK(w == doctest::Approx(ode_state(hp, 0.5, v, t)).epsilon(1e-9));
        }
    }
}

TEST_CASE("switching time is the full-swing time of the ode") {
    const HpParams hp = cell();
    const double tau = switching_time(hp, 2.0);
    CHECK(tau == doctest::Approx((hp.xi() + 2.0) * hp.beta * hp.r_on / 4.0));
    // Just short of tau the cell has not yet reached the bound; just past it, it has.
    CHECK(ode_state(hp, 1.0, 2.0, 0.99 * tau) > 0.0);
    const Crossbar done = write_pulse(Crossbar::uniform(1, 1, hp, 1.0, 1.0), 0, 0, 2.0, 1.01 * tau);
    CHECK(done.state(0, 0) == 0.0);
    HpParams leaky = hp;
    leaky.alpha = 0.1;
    CHECK_THROWS_AS(switching_time(leaky, 1.0), ValidationError);
}

TEST_CASE("set reset read cycle on a small array") {
    const HpParams hp = cell();
    PulseSpec p;
    p.v_write = 2.0;
    p.duration = 1.2 * switching_time(hp, p.v_write);
    p.v_read = 1e-3;
    Crossbar x = Crossbar::uniform(3, 3, hp, 1.0, 0.5);
    const int bits[3][3] = {{1, 0, 1}, {0, 0, 1}, {1, 1, 0}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) x = write_pulse(x, i, j, bits[i][j] ? p.v_write : -p.v_write, p.duration);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Crossbar y = x;
            for (int r = 0; r < 100; ++r) {
                const ReadResult rr = read_bit(y, i, j, p);
                CHECK(rr.bit == bits[i][j]);
                CHECK(rr.disturbance <= read_disturbance_bound(hp, p) * (1.0 + 1e-9));
                y = rr.after;
            }
        }
}

TEST_CASE("reads inside the guard band are ambiguous") {
    const HpParams hp = cell();
    const Crossbar x = Crossbar::uniform(1, 1, hp, 1.0, 0.5);
    PulseSpec p;
    CHECK_THROWS_AS(read_bit(x, 0, 0, p), AmbiguousState);
    p.v_read = 2.0;
    CHECK_THROWS_AS(read_bit(x, 0, 0, p), ValidationError);
    CHECK_THROWS_AS(write_pulse(x, 1, 0, 1.0, 1.0), ValidationError);
}

TEST_CASE("update rules by hand") {
    Eigen::MatrixXd w(2, 2);
    w << 1.0, 0.5, -0.5, 2.0;
    const Eigen::Vector2d x(1.0, -1.0);
    UpdateData d{x, Eigen::Vector2d(0.0, 1.0), nullptr};
    Eigen::MatrixXd ad(2, 2);
    ad << 1.1, 0.4, -0.6, 2.1;
    CHECK((apply_update(w, {UpdateKind::adaline, 0.1}, d) - ad).norm() < 1e-15);
    // o = W x = (0.5, -2.5); t - o = (-0.5, 3.5).
    Eigen::MatrixXd gr = w;
    gr += 2.0 * 0.1 * Eigen::Vector2d(-0.5, 3.5) * x.transpose();
    CHECK((apply_update(w, {UpdateKind::gradient, 0.1}, d) - gr).norm() < 1e-15);
    d.f = [](const Eigen::MatrixXd& m) { return Eigen::MatrixXd(-m); };
    CHECK(apply_update(w, {}, d).isZero());
    // Literal form, 1 x 1: w + 2 eta o (x - (2w - 1) o).
    Eigen::MatrixXd one = Eigen::MatrixXd::Constant(1, 1, 0.5);
    UpdateData d1{Eigen::VectorXd::Constant(1, 2.0), {}, nullptr};
    const double lit = apply_update(one, {UpdateKind::sanger, 0.1, true}, d1)(0, 0);
    CHECK(lit == doctest::Approx(0.5 + 0.2 * 1.0 * (2.0 - 0.0)));
    CHECK_THROWS_AS(apply_update(Eigen::MatrixXd::Ones(1, 2), {UpdateKind::sanger, 0.1, true},
                                 {Eigen::Vector2d(1.0, 1.0), {}, nullptr}),
                    ValidationError);
}

TEST_CASE("sanger finds the leading principal axis") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    const double th = 0.6;
    const Eigen::Vector2d u1(std::cos(th), std::sin(th)), u2(-std::sin(th), std::cos(th));
    Eigen::MatrixXd w(1, 2);
    w << 0.3, -0.2;
    for (int k = 0; k < 20000; ++k) {
        const Eigen::Vector2d x = 2.0 * n01(rng) * u1 + 0.5 * n01(rng) * u2;
        w = apply_update(w, {UpdateKind::sanger, 2e-3}, {x, {}, nullptr});
    }
    const double c = std::abs(w.row(0).dot(u1.transpose())) / w.row(0).norm();
    CHECK(std::acos(std::min(1.0, c)) * 180.0 / std::numbers::pi < 5.0);
    CHECK(w.row(0).norm() == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("stdp kernel and pulse programming") {
    const StdpKernel k;
    CHECK(stdp_kernel(0.01, k) == doctest::Approx(0.1 * std::exp(-0.5)));
    CHECK(stdp_kernel(-0.01, k) == doctest::Approx(-0.12 * std::exp(-0.5)));
    CHECK(stdp_kernel(0.0, k) == doctest::Approx(-0.12));
    const HpParams hp = cell();
    for (double dt : {0.005, 0.03, -0.005, -0.04}) {
        const PulseSpec p = stdp_program(dt, k, hp, 1.0, 10.0);
        CHECK(p.duration > 0.0);
        const double w = ode_state(hp, 0.5, p.v_write, p.duration);
        CHECK(w == doctest::Approx(0.5 - stdp_kernel(dt, k)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(stdp_program(0.01, k, hp, 1.0, 1e-9), ValidationError);
}

TEST_CASE("energy estimates") {
    const EnergyParams p{1e-3, 8.0, 4.0, 1.0};
    const EnergyEstimates e = energy_estimates(p);
    const double l = std::log(1000.0);
    CHECK(e.e_gate == doctest::Approx(2.0 * l));
    CHECK(e.e_dig == doctest::Approx(24.0 * l * 9.0 * 4.0));
    CHECK(e.e_memr == doctest::Approx(l * 64.0 * 16.0 / 24.0));
    for (double n : {1.0, 2.0, 4.0, 8.0}) {
        const EnergyEstimates en = energy_estimates({1e-3, 8.0, n, 1.0});
        CHECK(en.e_dig / n == doctest::Approx(e.e_dig / 4.0));
        CHECK(en.e_memr / (n * n) == doctest::Approx(e.e_memr / 16.0));
    }
    CHECK_THROWS_AS(energy_estimates({0.0, 8.0, 1.0, 1.0}), ValidationError);
}
