#pragma once

#include "memsim/devices.hpp"
#include "memsim/sim_core.hpp"

#include <limits>
#include <vector>

namespace memsim {

// Principal branch W0 by Halley iteration. Throws DomainError below -1/e.
double lambert_w(double x);

// Series memristor-capacitor discharge, dq/dt = -q / (R(q) C) with R(q) = r_on (1 + xi q / beta).
struct McParams {
    double c = 1.0;
    HpParams hp;
    double c1 = 0.0;
};

double mc_resistance(double q, const McParams& p);
Trace mc_simulate(const McParams& p, double q0, const IntegratorSpec& spec);
double mc_analytic(double t, const McParams& p);
// Pins c1 so that the closed form passes through the simulated charge at t_a = 10 r_on C.
double mc_calibrate_c1(const McParams& p, double q0, double dt);

// Threshold memristor in parallel with C, driven through series R and L.
struct AmoebaParams {
    double c = 1.0;
    double r = 1.0;
    double l = 2.0;
    ThresholdDeviceParams dev;
};

struct AmoebaInit {
    double i0 = 1.0;
    double vc0 = 1.0;
    double m0 = 7.0;
};

struct DriveSegment {
    double duration;
    DriveSignal signal; // evaluated in segment-local time
};

double schedule_value(const std::vector<DriveSegment>& schedule, double t);
double schedule_length(const std::vector<DriveSegment>& schedule);

State amoeba_rhs(const State& x, double v, const AmoebaParams& p);

// Channels: i, v_c, m, v, d_i, d_vc, d_m. The derivative channels are the rhs at each sample.
Trace amoeba_simulate(const AmoebaParams& p, const AmoebaInit& init,
                      const std::vector<DriveSegment>& schedule, const IntegratorSpec& spec);

struct SettlingReport {
    double switch_time;    // end of the segment
    double settle_time;    // first time after which all |d| stay below tol, NaN if never
    double max_derivative; // at the last sample before the switch
};

std::vector<SettlingReport> amoeba_settling(const Trace& tr, const std::vector<DriveSegment>& schedule,
                                            double tol);

enum class PlantNonlinearity { constant, exponential, sinh };

struct PlantH {
    PlantNonlinearity kind = PlantNonlinearity::constant;
    double k = 1.0;
};

double plant_h(double v, const PlantH& h);

struct PlantParams {
    double p_beta = 1.0;
    double r_o = 1.0;
    PlantH h;
    double a_const = 1.0;
    double rc_r = std::numeric_limits<double>::infinity();
    double rc_c = 1.0;
};

// Channels: v, i_m, i_rc, i.
Trace plant_simulate(const PlantParams& p, const DriveSignal& v, const IntegratorSpec& spec);

struct HhInit {
    double w1 = 0.3;
    double w2 = 0.05;
    double w3 = 0.6;
};

// Channels: w1, w2, w3, i_k, i_na. The drive sets both channel potentials.
Trace hh_simulate(const HhParams& p, const DriveSignal& v, const HhInit& init, const IntegratorSpec& spec);

} // namespace memsim
