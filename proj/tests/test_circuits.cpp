#include <doctest.h>

#include "memsim/circuits.hpp"
#include "memsim/error.hpp"

#include <cmath>
#include <numbers>

using namespace memsim;

TEST_CASE("lambert w satisfies its defining identity") {
    for (double x : {-1.0 / std::numbers::e + 1e-12, -0.3, -0.1, -1e-8, 1e-10, 0.5, 1.0, 2.5, 10.0, 1e3, 1e10, 1e300}) {
        const double w = lambert_w(x);
        CHECK(std::abs(w * std::exp(w) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
    }
    CHECK(lambert_w(0.0) == 0.0);
    CHECK(lambert_w(std::numbers::e) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(lambert_w(-1.0 / std::numbers::e) == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK_THROWS_AS(lambert_w(-0.4), DomainError);
    CHECK_THROWS_AS(lambert_w(NAN), DomainError);
}

TEST_CASE("memristor-capacitor closed form tracks the simulation") {
    McParams p;
    p.c = 1e-3;
    p.hp.r_on = 100.0;
    p.hp.r_off = 1600.0;
    p.hp.beta = 1e-3;
    const double q0 = 2e-3;
    const double dt = 1e-4;
    p.c1 = mc_calibrate_c1(p, q0, dt);
    const double rc = p.hp.r_on * p.c;
    const Trace tr = mc_simulate(p, q0, {Method::rk4, dt, 20.0 * rc});
    const auto& q = tr.channel("q");
    for (std::size_t k = 0; k < tr.size(); k += 50) {
        const double t = tr.time(k);
        if (t <= 5.0 * rc) continue;
        CHECK(std::abs(mc_analytic(t, p) - q[k]) <= 0.01 * q[k]);
    }
    CHECK(tr.channel("r")[0] == doctest::Approx(mc_resistance(q0, p)));
    CHECK(tr.channel("v_c")[0] == doctest::Approx(q0 / p.c));
}

TEST_CASE("large beta recovers the RC exponential") {
    McParams p;
    p.c = 1e-3;
    p.hp.r_on = 100.0;
    p.hp.r_off = 1600.0;
    p.hp.beta = 1e12;
    const double q0 = 1e-3, rc = p.hp.r_on * p.c;
    p.c1 = -p.hp.beta * p.hp.r_on * (std::log(q0) + p.hp.xi() * q0 / p.hp.beta);
    for (double t : {0.0, 0.5 * rc, rc, 3.0 * rc, 8.0 * rc}) {
        const double ref = q0 * std::exp(-t / rc);
        CHECK(std::abs(mc_analytic(t, p) - ref) <= 1e-3 * ref);
    }
}

TEST_CASE("schedule lookup uses segment-local time") {
    const std::vector<DriveSegment> s{{1.0, DriveSignal::dc(2.0)}, {2.0, DriveSignal::sine(1.0, 0.25)}};
    CHECK(schedule_length(s) == 3.0);
    CHECK(schedule_value(s, 0.5) == 2.0);
    CHECK(schedule_value(s, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(schedule_value(s, 2.0) == doctest::Approx(1.0));
    CHECK(schedule_value({}, 2.0) == 0.0);
}

TEST_CASE("amoeba settles between switches and keeps M bounded") {
    const AmoebaParams p;
    const std::vector<DriveSegment> sched{{150.0, DriveSignal::dc(0.5)}, {300.0, DriveSignal::dc(-2.0)}};
    const Trace tr = amoeba_simulate(p, {}, sched, {Method::euler, 0.1, 0.0});
    CHECK(tr.time(tr.size() - 1) == doctest::Approx(450.0));
    for (double m : tr.channel("m")) {
        CHECK(m >= 3.0);
        CHECK(m <= 20.0);
    }
    const auto rep = amoeba_settling(tr, sched, 1e-3);
    REQUIRE(rep.size() == 2);
    for (const auto& r : rep) {
        CHECK(r.max_derivative < 1e-3);
        CHECK(std::isfinite(r.settle_time));
        CHECK(r.settle_time < r.switch_time);
    }
    // DC equilibrium: V_c = V M / (M + R), I = V_c / M.
    const double m = tr.channel("m").back(), v = -2.0;
    CHECK(tr.channel("v_c").back() == doctest::Approx(v * m / (m + p.r)).epsilon(1e-4));
}

TEST_CASE("amoeba derivative channels equal the rhs") {
    const AmoebaParams p;
    const std::vector<DriveSegment> sched{{5.0, DriveSignal::dc(1.0)}};
    const Trace tr = amoeba_simulate(p, {}, sched, {Method::rk4, 0.05, 0.0});
    const std::size_t k = 17;
    const State d = amoeba_rhs(tr.row(k), 1.0, p);
    CHECK(tr.channel("d_i")[k] == d[0]);
    CHECK(tr.channel("d_vc")[k] == d[1]);
    CHECK(tr.channel("d_m")[k] == d[2]);
}

TEST_CASE("amoeba input validation") {
    AmoebaParams p;
    AmoebaInit init;
    init.m0 = 25.0;
    CHECK_THROWS_AS(amoeba_simulate(p, init, {{1.0, DriveSignal::dc(1.0)}}, {Method::euler, 0.1, 0.0}),
                    ValidationError);
    CHECK_THROWS_AS(amoeba_simulate(p, {}, {{0.0, DriveSignal::dc(1.0)}}, {Method::euler, 0.1, 0.0}),
                    ValidationError);
}

TEST_CASE("plant with constant h has a closed form") {
    PlantParams p;
    p.p_beta = 0.5;
    p.r_o = 2.0;
    p.h = {PlantNonlinearity::constant, 3.0};
    p.a_const = 1.5;
    const Trace tr = plant_simulate(p, DriveSignal::dc(1.0), {Method::euler, 1e-3, 4.0});
    for (std::size_t k = 0; k < tr.size(); k += 400) {
        const double t = tr.time(k);
        const double j = 3.0 * (1.0 - std::exp(-0.5 * t)) / 0.5;
        const double ref = 1.0 / (0.5 * 2.0 * j + 1.5 * std::exp(-0.5 * t));
        CHECK(tr.channel("i_m")[k] == doctest::Approx(ref).epsilon(1e-6));
        CHECK(tr.channel("i_rc")[k] == 0.0);
    }
}

TEST_CASE("plant RC branch charges exponentially") {
    PlantParams p;
    p.p_beta = 0.0;
    p.rc_r = 2.0;
    p.rc_c = 0.5;
    const Trace tr = plant_simulate(p, DriveSignal::dc(1.0), {Method::rk4, 1e-3, 3.0});
    for (std::size_t k = 0; k < tr.size(); k += 300) {
        const double t = tr.time(k);
        CHECK(tr.channel("i_rc")[k] == doctest::Approx(0.5 * std::exp(-t)).epsilon(1e-8));
        CHECK(tr.channel("i_m")[k] == doctest::Approx(1.0));
        CHECK(tr.channel("i")[k] == doctest::Approx(tr.channel("i_m")[k] + tr.channel("i_rc")[k]));
    }
}

TEST_CASE("plant flags a vanishing denominator") {
    PlantParams p;
    p.p_beta = 1.0;
    p.h = {PlantNonlinearity::sinh, 1.0};
    p.a_const = 0.1;
    CHECK_THROWS_AS(plant_simulate(p, DriveSignal::dc(-1.0), {Method::euler, 1e-3, 5.0}), DomainError);
    p.a_const = 0.0;
    CHECK_THROWS_AS(plant_simulate(p, DriveSignal::dc(1.0), {Method::euler, 1e-3, 1.0}), ValidationError);
}

TEST_CASE("plant nonlinearities") {
    CHECK(plant_h(0.7, {PlantNonlinearity::constant, 2.0}) == 2.0);
    CHECK(plant_h(0.7, {PlantNonlinearity::exponential, 2.0}) == doctest::Approx(std::exp(1.4)));
    CHECK(plant_h(0.7, {PlantNonlinearity::sinh, 2.0}) == doctest::Approx(std::sinh(1.4)));
}

TEST_CASE("gated channels stay in range and currents follow the gates") {
    const HhParams p;
    const Trace tr = hh_simulate(p, DriveSignal::sine(0.02, 0.05), {}, {Method::rk4, 0.01, 40.0});
    for (const char* g : {"w1", "w2", "w3"})
        for (double v : tr.channel(g)) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    const std::size_t k = tr.size() / 2;
    const State x = tr.row(k);
    const double v = eval_signal(DriveSignal::sine(0.02, 0.05), tr.time(k));
    CHECK(tr.channel("i_k")[k] == doctest::Approx(p.g_k * std::pow(x[0], 4) * v));
    HhInit bad;
    bad.w1 = 1.5;
    CHECK_THROWS_AS(hh_simulate(p, DriveSignal::dc(0.0), bad, {Method::rk4, 0.01, 1.0}), ValidationError);
}
