#pragma once

#include "memsim/devices.hpp"
#include "memsim/sim_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace memsim {

enum class EdgeRole { memristor, source };

// A memristor edge may carry a series source `value` (volts) driving current tail -> head.
// A source edge is an ideal source that holds phi_head - phi_tail = value.
struct Edge {
    std::size_t tail;
    std::size_t head;
    EdgeRole role = EdgeRole::memristor;
    double value = 0.0;
};

struct CircuitGraph {
    std::size_t nodes = 0;
    std::vector<Edge> edges;

    std::size_t memristor_count() const;
};

void write_edge_list(std::ostream& os, const CircuitGraph& g);
CircuitGraph read_edge_list(std::istream& is);

struct Projector {
    Eigen::MatrixXd omega; // E x E over memristive edges, in edge-list order
};

// Ideal sources are eliminated by contracting their end nodes; each memristive edge then
// carries an equivalent series source. Omega acts on that contracted graph.
struct ReducedCircuit {
    Projector projector;
    Eigen::VectorXd s_volts;                 // equivalent series source per memristive edge
    std::vector<std::size_t> memristor_edges; // indices into CircuitGraph::edges
    std::size_t contracted_nodes = 0;
};

ReducedCircuit reduce_circuit(const CircuitGraph& g);
Projector cycle_projector(const CircuitGraph& g);

// dw/dt = alpha w - (1/beta) (I + chi Omega W)^{-1} Omega S, with S = volts / r_on.
Eigen::VectorXd memnet_rhs(const Eigen::VectorXd& w, const Eigen::VectorXd& s_norm,
                           const Eigen::MatrixXd& omega, const HpParams& hp);
// Edge currents (amperes, along edge orientation): (I + chi Omega W)^{-1} Omega S.
Eigen::VectorXd memnet_currents(const Eigen::VectorXd& w, const Eigen::VectorXd& s_norm,
                                const Eigen::MatrixXd& omega, const HpParams& hp);

struct NetworkRunOptions {
    DriveSignal envelope = DriveSignal::dc(1.0); // scales every source in time
    double steady_tol = 1e-6;
    std::size_t stride = 1;
    IntegrateStats* stats = nullptr;
};

// Channels w0..w{E-1} and mean; each w_i is clamped to [0,1].
Trace simulate_network(const ReducedCircuit& rc, const HpParams& hp, const Eigen::VectorXd& w0,
                       const IntegratorSpec& spec, const NetworkRunOptions& opt = {});

// Central-difference Jacobian of memnet_rhs.
Eigen::MatrixXd linearize(const ReducedCircuit& rc, const HpParams& hp, const Eigen::VectorXd& w_star,
                          double h = 1e-6);

// (1/N) tr(e^{A t} W0) on each time in ts.
std::vector<double> mean_relaxation(const Eigen::MatrixXd& a, const Eigen::VectorXd& w0,
                                    const std::vector<double>& ts);

// Random connected graph: random spanning tree plus Erdos-Renyi extras.
CircuitGraph random_graph(std::size_t nodes, double p_extra, std::uint64_t seed);

struct PowerLawFit {
    double exponent = 0.0;
    double r2 = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
};

// Fits f(t) = (1/2E) sum_k e^{-rate_k t} to t^gamma on [1/median rate, 1/5th-percentile rate].
PowerLawFit relaxation_exponent(const std::vector<double>& rates, std::size_t edges);

struct SocConfig {
    std::size_t nodes = 100;
    double p_extra = 0.02;
    std::uint64_t seed = 1;
    HpParams hp{0.0, 1.0, 1.0, 20.0, -1};
    double dt = 0.2;
    std::size_t max_steps = 3000;
    double steady_tol = 1e-6;
    std::size_t spectrum_samples = 4096;
};

struct SocResult {
    std::size_t edges = 0;
    std::size_t steps = 0;
    bool steady = false;
    double saturated_fraction = 0.0;
    double gamma = 0.0;
    double gamma_r2 = 0.0;
    double slope = 0.0;
    double slope_r2 = 0.0;
    double gamma_pos = 0.0; // NaN when the positive branch has too few modes
    double slope_pos = 0.0;
    std::vector<double> eigenvalues;
    Trace relaxation{0.0, 1.0, {"mean_w"}};
};

// Relaxation of the stable branch plus its spectrum slope; throws FitRejected on one scale.
SocResult soc_analyze(const std::vector<double>& eigen_real, std::size_t edges, std::size_t spectrum_samples);
SocResult soc_experiment(const SocConfig& cfg);

// Mazes.
struct Cell {
    int r = 0, c = 0;
    bool operator==(const Cell&) const = default;
};

struct MazeSpec {
    int rows = 0, cols = 0;
    std::vector<bool> open; // row-major
    Cell entrance, exit;

    bool is_open(Cell x) const;
};

MazeSpec parse_maze(const std::string& text);
std::string format_maze(const MazeSpec& m);
void validate(const MazeSpec& m);

struct MazeCircuit {
    CircuitGraph graph;
    std::vector<Cell> node_cells;
    std::vector<std::pair<Cell, Cell>> edge_cells; // one per memristive edge, tail then head
    int distance = 0;                              // BFS steps entrance -> exit
};

// Only the component reachable from the entrance enters the circuit.
MazeCircuit maze_to_circuit(const MazeSpec& m, double v_dc);

std::vector<int> bfs_distances(const MazeSpec& m, Cell from);
// Number of distinct shortest paths entrance -> exit (saturates at 2).
int shortest_path_count(const MazeSpec& m);
std::vector<Cell> bfs_shortest_path(const MazeSpec& m);

struct MazeSolveOptions {
    double r_on = 1.0;
    double r_off = 100.0;
    double beta = 1.0;
    double alpha = -1.0; // negative selects v_dc / (beta r_off (d + 1))
    double dt = 0.1;
    std::size_t max_steps = 60000;
    double steady_tol = 1e-7;
    double threshold = 0.5;
};

struct MazeSolution {
    std::vector<Cell> path; // entrance -> exit
    double contrast = 0.0;
    bool steady = false;
    double t_stop = 0.0;
    Eigen::VectorXd currents;
    Eigen::VectorXd w;
};

MazeSolution solve_maze(const MazeSpec& m, double v_dc, const MazeSolveOptions& opt = {});

// Random maze with a unique shortest path; rejection sampled.
MazeSpec random_maze(int rows, int cols, std::uint64_t seed, double p_open = 0.72);

} // namespace memsim
