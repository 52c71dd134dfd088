#pragma once

#include "memsim/devices.hpp"
#include "memsim/network.hpp"
#include "memsim/sim_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <vector>

namespace memsim {

using Feature = std::function<double(const Eigen::VectorXd&)>;

// Rows are samples, columns features: G_ij = g_j(x_i).
Eigen::MatrixXd elm_features(const Eigen::MatrixXd& samples, const std::vector<Feature>& g);

// g_k(x) = link_inv(x . eta_k) with eta_k drawn from a standard normal prior.
std::vector<Feature> random_elm_dictionary(std::size_t count, Eigen::Index dim, std::uint64_t seed,
                                           std::function<double(double)> link_inv);

struct ReadoutFit {
    Eigen::VectorXd coef;
    bool min_norm = false; // rank deficient without ridge
    double condition = 0.0;
};

// argmin |G c - y|^2 + ridge |c|^2. Cholesky unless cond(G^T G + ridge) > 1e10.
ReadoutFit fit_readout(const Eigen::MatrixXd& g, const Eigen::VectorXd& y, double ridge);

// Linear reservoir dq/dt = A q + B E(u), features g = H q, with E(u) = scale u + shift.
struct LinearReservoir {
    Eigen::MatrixXd a, b, h;
    double in_scale = 1.0;
    double in_shift = 0.0;
};

// Channels g0..g{N-1}. u is a function of time with dim(u) = cols(B).
Trace rc_run(const LinearReservoir& r, const std::function<Eigen::VectorXd(double)>& u, const IntegratorSpec& spec);

// Memristive reservoir: per-edge sources S = B E(u), features g = H i over edge currents.
struct MemristiveReservoir {
    ReducedCircuit circuit;
    HpParams hp;
    Eigen::MatrixXd b, h;
    Eigen::VectorXd w0;
    double in_scale = 1.0;
    double in_shift = 0.0;
};

Trace rc_run(const MemristiveReservoir& r, const std::function<Eigen::VectorXd(double)>& u,
             const IntegratorSpec& spec);

double lif_response(double i_soma, double tau0, double tau_rc, double i_f);

struct NefPopulation {
    Eigen::VectorXd gain, bias;
    Eigen::MatrixXd encoders; // neurons x grid points
    double tau0 = 2e-3;
    double tau_rc = 20e-3;
    double i_f = 1.0;
    double x_min = -1.0, x_max = 1.0;

    Eigen::Index neurons() const { return gain.size(); }
    Eigen::Index grid_points() const { return encoders.cols(); }
    Eigen::VectorXd grid() const;
};

// Random signed indicator encoders over sub-intervals of the grid.
NefPopulation random_nef_population(Eigen::Index neurons, Eigen::Index grid_points, std::uint64_t seed);

// a_i = G(gain_i mean_x(f phi_i) + bias_i).
Eigen::VectorXd nef_encode(const Eigen::VectorXd& f, const NefPopulation& p);

struct NefDecoders {
    Eigen::MatrixXd phi; // neurons x grid points
    bool min_norm = false;
};

// Training functions are the columns of `train` (grid points x K).
NefDecoders nef_fit_decoders(const NefPopulation& p, const Eigen::MatrixXd& train, double reg);
Eigen::VectorXd nef_decode(const Eigen::VectorXd& activities, const NefDecoders& d);

double hard_threshold(double x, double lambda);

struct LcaProblem {
    Eigen::MatrixXd phi; // N x M, one atom per column
    double lambda = 0.0;
    double tau = 1.0;
};

struct LcaResult {
    Eigen::VectorXd a;
    Trace u;
    bool converged = false;
};

// du/dt = (b - u - sum_{n != m} G_mn a_n) / tau, b = Phi^T x, a = T_lambda(u).
LcaResult lca_simulate(const LcaProblem& p, const Eigen::VectorXd& x, const IntegratorSpec& spec);
// 1/2 |x - Phi a|^2 + (lambda^2 / 2) #{a != 0}, the cost implied by the hard threshold.
double lca_energy(const LcaProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& a);

} // namespace memsim
