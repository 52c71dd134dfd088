#pragma once

#include "memsim/devices.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

namespace memsim {

// Rows are output (b) lines, columns input (e) lines. Cells share one device model.
struct Crossbar {
    Eigen::MatrixXd m;     // memristances, ohm
    Eigen::VectorXd r_out; // output-line load per row, ohm
    HpParams cell;

    static Crossbar uniform(Eigen::Index rows, Eigen::Index cols, const HpParams& cell, double r_out, double w);
    double state(Eigen::Index i, Eigen::Index j) const; // w of a cell
};

void validate(const Crossbar& x);
void write_csv(std::ostream& os, const Crossbar& x);

// eta_i = sum_j xi_j / M_ij / (1/R_i + sum_s 1/M_is).
Eigen::VectorXd read_mvm(const Crossbar& x, const Eigen::VectorXd& xi);
Eigen::MatrixXd transfer_matrix(const Crossbar& x);
// Full nodal analysis over all row and column nodes.
Eigen::VectorXd nodal_oracle(const Crossbar& x, const Eigen::VectorXd& xi);

struct PulseSpec {
    double v_write = 1.0;
    double duration = 1.0;
    double v_read = 1e-3;
    double read_duration = 0.0; // 0 means the write duration
};

// Constants of the write solution w(t) = sqrt(a + b V t) - 1/xi, valid for alpha = 0.
struct WriteSolution {
    double a;
    double b;
};

WriteSolution write_solution(const HpParams& hp, double w0);
double write_solution_w(const HpParams& hp, double w0, double v, double t);

// Full-swing time (xi + 2) beta r_on / (2 |V|) = 1 / (b_switch |V|).
double switching_time(const HpParams& hp, double v_write);

Crossbar write_pulse(const Crossbar& x, Eigen::Index i, Eigen::Index j, double v, double duration);
Crossbar write_pulse(const Crossbar& x, Eigen::Index i, Eigen::Index j, const PulseSpec& p);

struct ReadResult {
    int bit;
    double resistance;
    double disturbance; // |dw| caused by the read pulse
    Crossbar after;
};

// Worst-case |dw| of one read pulse: |v_read| t_read / (beta r_on).
double read_disturbance_bound(const HpParams& hp, const PulseSpec& p);
ReadResult read_bit(const Crossbar& x, Eigen::Index i, Eigen::Index j, const PulseSpec& p);

struct ProgramResult {
    Crossbar x;
    double residual;
    int sweeps;
    std::vector<std::pair<Eigen::Index, Eigen::Index>> clamped;
};

// Row-wise fixed point on M. Throws ValidationError if the residual stays above 1e-6,
// unless best_effort is set.
ProgramResult program_matrix(const Crossbar& x, const Eigen::MatrixXd& target, bool best_effort = false);

enum class UpdateKind { generic, adaline, sanger, gradient };

struct UpdateRule {
    UpdateKind kind = UpdateKind::generic;
    double eta = 0.0;
    bool literal = false; // Sanger as printed, square W only
};

struct UpdateData {
    Eigen::VectorXd x;
    Eigen::VectorXd target;
    std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> f; // generic increment
};

Eigen::MatrixXd apply_update(const Eigen::MatrixXd& w, const UpdateRule& rule, const UpdateData& data);

struct StdpKernel {
    double a_plus = 0.1;
    double a_minus = 0.12;
    double tau_plus = 20e-3;
    double tau_minus = 20e-3;
};

// Positive for pre-before-post (delta_t > 0).
double stdp_kernel(double delta_t, const StdpKernel& k);

// Pulse that moves a w = 0.5 cell by the kernel value in conductance, i.e. w -> 0.5 - dw.
// Potentiation uses +v_amplitude (SET), depression -v_amplitude.
PulseSpec stdp_program(double delta_t, const StdpKernel& k, const HpParams& hp, double v_amplitude,
                       double max_duration);

struct EnergyParams {
    double p_err = 1e-3;
    double l_bits = 8.0;
    double n = 1.0;
    double kt = 4.14e-21;
};

struct EnergyEstimates {
    double e_gate, e_dig, e_memr;
};

EnergyEstimates energy_estimates(const EnergyParams& p);

} // namespace memsim
