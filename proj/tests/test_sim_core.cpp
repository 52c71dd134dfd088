#include <doctest.h>

#include "memsim/error.hpp"
#include "memsim/sim_core.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace memsim;

namespace {

const Rhs decay = [](const State& x, double) { return State{-x[0]}; };

Trace sampled(double dt, const std::vector<double>& x) {
    Trace tr(0.0, dt, {"x"});
    for (double v : x) tr.push({v});
    return tr;
}

} // namespace

TEST_CASE("zero derivative keeps the state constant") {
    const Rhs zero = [](const State& x, double) { return State(x.size(), 0.0); };
    const Trace tr = integrate(zero, {1.0}, {Method::rk4, 0.1, 2.0});
    CHECK(tr.size() == 21);
    for (double v : tr.channel("x0")) CHECK(v == 1.0);
}

TEST_CASE("rk4 decay reaches exp(-1)") {
    const Trace tr = integrate(decay, {1.0}, {Method::rk4, 0.01, 1.0});
    CHECK(std::abs(tr.channel(0).back() - std::exp(-1.0)) < 1e-6);
    CHECK(tr.time(tr.size() - 1) == doctest::Approx(1.0));
}

TEST_CASE("euler decay equals the hand-unrolled recursion bit for bit") {
    const Trace tr = integrate(decay, {1.0}, {Method::euler, 0.1, 1.0});
    double x = 1.0;
    for (int k = 0; k < 10; ++k) x = x + 0.1 * (-x);
    CHECK(tr.channel(0).back() == x);
    CHECK(std::abs(x - std::pow(0.9, 10)) < 1e-15);
}

TEST_CASE("integrate is deterministic") {
    const Rhs osc = [](const State& x, double t) { return State{x[1], -x[0] + std::sin(3.0 * t)}; };
    const Trace a = integrate(osc, {1.0, 0.0}, {Method::rk4, 0.013, 5.0});
    const Trace b = integrate(osc, {1.0, 0.0}, {Method::rk4, 0.013, 5.0});
    CHECK(a.channel(0) == b.channel(0));
    CHECK(a.channel(1) == b.channel(1));
}

TEST_CASE("rk4 error falls at least 8x when dt halves") {
    const double lambda = -1.3;
    const Rhs lin = [lambda](const State& x, double) { return State{lambda * x[0]}; };
    const double exact = std::exp(lambda * 2.0);
    const double e1 = std::abs(integrate(lin, {1.0}, {Method::rk4, 0.1, 2.0}).channel(0).back() - exact);
    const double e2 = std::abs(integrate(lin, {1.0}, {Method::rk4, 0.05, 2.0}).channel(0).back() - exact);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("blow-up reports the failure time") {
    const Rhs blow = [](const State& x, double) { return State{x[0] * x[0] * x[0]}; };
    try {
        integrate(blow, {1.0}, {Method::euler, 0.01, 5.0});
        FAIL("expected divergence");
    } catch (const IntegrationDiverged& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() < 5.0);
    }
}

TEST_CASE("steady stop and projection") {
    IntegrateStats st;
    IntegrateOptions opt;
    opt.steady_tol = 1e-6;
    opt.stats = &st;
    opt.project = [](State& x) { x[0] = std::max(x[0], 0.5); };
    integrate(decay, {1.0}, {Method::euler, 0.1, 100.0}, opt);
    CHECK(st.steady);
    CHECK(st.final_state[0] == 0.5);
    CHECK(st.t_stop < 100.0);
}

TEST_CASE("bad integrator specs are rejected") {
    CHECK_THROWS_AS(integrate(decay, {1.0}, {Method::rk4, 0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(integrate(decay, {1.0}, {Method::rk4, 0.1, -1.0}), ValidationError);
    CHECK_THROWS_AS(integrate(decay, {NAN}, {Method::rk4, 0.1, 1.0}), ValidationError);
}

TEST_CASE("signal evaluation") {
    CHECK(eval_signal(DriveSignal::sine(1.0, 1.0), 0.0) == 0.0);
    CHECK(eval_signal(DriveSignal::dc(0.5), 123.4) == 0.5);
    const auto sq = DriveSignal::square(2.0, 1.0, 0.5);
    CHECK(eval_signal(sq, 0.25) == 2.0);
    CHECK(eval_signal(sq, 0.75) == -2.0);
    CHECK(eval_signal(sq, 1.25) == 2.0);
    const auto pt = DriveSignal::pulse_train(3.0, 10.0, 0.2);
    CHECK(eval_signal(pt, 0.01) == 3.0);
    CHECK(eval_signal(pt, 0.05) == 0.0);
    DriveSignal s = DriveSignal::sine(2.0, 0.5, std::numbers::pi / 2);
    s.offset = 1.0;
    CHECK(eval_signal(s, 0.0) == doctest::Approx(3.0));
    DriveSignal bad = sq;
    bad.duty = 1.5;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = sq;
    bad.frequency = -1.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("csv layout") {
    Trace tr(0.0, 0.5, {"a", "b"});
    tr.push({1.0, 2.5});
    tr.push({-3.0, 1e-20});
    std::ostringstream os;
    tr.write_csv(os);
    CHECK(os.str() == "t,a,b\n0,1,2.5\n0.5,-3,1e-20\n");
}

TEST_CASE("loop area of a resistor is zero") {
    std::vector<double> v, i;
    for (int k = 0; k < 1000; ++k) {
        v.push_back(std::sin(2.0 * std::numbers::pi * k / 1000.0));
        i.push_back(v.back() / 470.0);
    }
    CHECK(std::abs(loop_area(v, i)) < 1e-15);
}

TEST_CASE("loop area of the unit circle is pi") {
    std::vector<double> v, i;
    for (int k = 0; k < 720; ++k) {
        const double th = 2.0 * std::numbers::pi * k / 720.0;
        v.push_back(std::cos(th));
        i.push_back(std::sin(th));
    }
    CHECK(std::abs(loop_area(v, i) - std::numbers::pi) < 0.01 * std::numbers::pi);
}

TEST_CASE("loop area of a pinched loop counts both lobes and ignores rotation") {
    // i = v (1 + 0.4 cos th): two lobes of opposite orientation.
    const int n = 2000;
    std::vector<double> v, i;
    for (int k = 0; k < n; ++k) {
        const double th = 2.0 * std::numbers::pi * k / n;
        v.push_back(std::sin(th));
        i.push_back(std::sin(th) * (1.0 + 0.4 * std::cos(th)));
    }
    // Per lobe, |closed integral of v di| over th in [0, pi] = 0.4 (4/3 - 2/3).
    const double oracle = 2.0 * 0.4 * (4.0 / 3.0 - 2.0 / 3.0);
    const double a = loop_area(v, i);
    CHECK(std::abs(a - oracle) < 1e-3 * oracle);
    for (int shift : {1, 137, 999, 1500}) {
        std::vector<double> rv(n), ri(n);
        for (int k = 0; k < n; ++k) {
            rv[k] = v[(k + shift) % n];
            ri[k] = i[(k + shift) % n];
        }
        CHECK(std::abs(loop_area(rv, ri) - a) <= 1e-6 * a);
    }
}

TEST_CASE("loop area rejects mismatched channels") {
    CHECK_THROWS_AS(loop_area({1.0, 2.0}, {1.0}), ValidationError);
}

TEST_CASE("white noise has a flat spectrum") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n01;
    std::vector<double> x(8192);
    for (double& v : x) v = n01(rng);
    const Trace tr = sampled(1.0, x);
    CHECK(std::abs(power_spectrum_exponent(tr, "x", 0.01, 0.45)) < 0.2);
    CHECK(std::abs(power_spectrum_exponent(tr, "x", 0.01, 0.45, Taper::hann)) < 0.2);
}

TEST_CASE("power-law relaxation 1/(1+t) has slope near -2") {
    const double dt = 0.01;
    std::vector<double> x(8192);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = 1.0 / (1.0 + dt * static_cast<double>(k));
    const Trace tr = sampled(dt, x);
    const double s = power_spectrum_exponent(tr, "x", 1.0, 12.5);
    CHECK(std::abs(s + 2.0) < 0.3);
}

TEST_CASE("log-uniform exponential mixture has slope between -2 and -1") {
    const double dt = 0.05;
    std::vector<double> rates;
    for (int k = 0; k < 200; ++k) rates.push_back(std::pow(10.0, -3.0 + 4.0 * k / 199.0));
    std::vector<double> x(8192, 0.0);
    for (std::size_t k = 0; k < x.size(); ++k)
        for (double l : rates) x[k] += std::exp(-l * dt * static_cast<double>(k));
    const Trace tr = sampled(dt, x);
    const double s = power_spectrum_exponent(tr, "x", 0.01, 1.0);
    CHECK(s > -2.0);
    CHECK(s < -1.0);
}

TEST_CASE("a single spectral line is rejected") {
    const double dt = 1.0 / 1024.0;
    std::vector<double> x(4096);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::sin(2.0 * std::numbers::pi * 8.0 * dt * static_cast<double>(k)) / 1e3;
    CHECK_THROWS_AS(power_spectrum_exponent(sampled(dt, x), "x", 1.0, 100.0), FitRejected);
}

TEST_CASE("spectrum preconditions") {
    std::vector<double> shortx(512, 1.0);
    CHECK_THROWS_AS(power_spectrum_exponent(sampled(1.0, shortx), "x", 0.1, 0.2), ValidationError);
    std::vector<double> x(2048, 0.0);
    x[3] = 1.0;
    const Trace tr = sampled(1.0, x);
    CHECK_THROWS_AS(power_spectrum_exponent(tr, "x", 0.2, 0.1), ValidationError);
    CHECK_THROWS_AS(power_spectrum_exponent(tr, "x", 0.1, 0.6), ValidationError);
    CHECK_THROWS_AS(power_spectrum_exponent(tr, "x", 0.1000, 0.1001), FitBandEmpty);
}

TEST_CASE("simulation cost metrics") {
    Trace c(0.0, 0.1, {"a", "b"});
    for (int k = 0; k < 5; ++k) c.push({1.0, 2.0});
    const auto m = simulation_cost_metrics(c, {4.0, 6.0});
    CHECK(m.r == 0.0);
    CHECK(m.eps == doctest::Approx(5.0));

    const double dt = 1e-3;
    Trace s(0.0, dt, {"y"});
    for (int k = 0; k <= 7000; ++k) s.push({std::sin(dt * k)});
    const auto ms = simulation_cost_metrics(s, {s.channel("y").back()});
    CHECK(std::abs(ms.r - 1.0) < 0.01);
    CHECK(ms.eps == 0.0);

    Trace tiny(0.0, 1.0, {"y"});
    tiny.push({0.0});
    tiny.push({1.0});
    CHECK_THROWS_AS(simulation_cost_metrics(tiny, {0.0}), ValidationError);
}
