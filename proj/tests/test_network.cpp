#include <doctest.h>

#include "memsim/error.hpp"
#include "memsim/network.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>
#include <sstream>

using namespace memsim;

namespace {

// Projector onto the cycle space: orthonormal basis of ker(incidence).
Eigen::MatrixXd incidence_oracle(const CircuitGraph& g) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.nodes), static_cast<Eigen::Index>(g.edges.size()));
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        a(static_cast<Eigen::Index>(g.edges[k].tail), static_cast<Eigen::Index>(k)) += 1.0;
        a(static_cast<Eigen::Index>(g.edges[k].head), static_cast<Eigen::Index>(k)) -= 1.0;
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) rank += s[k] > 1e-10;
    const Eigen::MatrixXd v = svd.matrixV().rightCols(a.cols() - rank);
    return v * v.transpose();
}

CircuitGraph source_with(std::vector<Edge> memristors, std::size_t nodes, double v) {
    CircuitGraph g;
    g.nodes = nodes;
    g.edges.push_back({0, 1, EdgeRole::source, v});
    for (auto& e : memristors) g.edges.push_back(e);
    return g;
}

HpParams unit_hp() {
    HpParams hp;
    hp.r_on = 1.0;
    hp.r_off = 20.0;
    return hp;
}

} // namespace

TEST_CASE("projector matches the incidence-kernel oracle") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const CircuitGraph g = random_graph(6 + seed % 7, 0.3, seed);
        const Eigen::MatrixXd om = cycle_projector(g).omega;
        CHECK((om - incidence_oracle(g)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((om * om - om).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((om - om.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("a tree has an empty cycle space") {
    CircuitGraph g;
    g.nodes = 4;
    g.edges = {{0, 1}, {1, 2}, {1, 3}};
    CHECK(cycle_projector(g).omega.isZero());
}

TEST_CASE("one memristor on a source reduces to the device equation") {
    const HpParams hp = unit_hp();
    const ReducedCircuit rc = reduce_circuit(source_with({{1, 0}}, 2, 0.7));
    REQUIRE(rc.s_volts.size() == 1);
    CHECK(rc.s_volts[0] == doctest::Approx(0.7));
    CHECK(rc.projector.omega(0, 0) == doctest::Approx(1.0));
    for (double w : {0.0, 0.3, 0.9}) {
        const Eigen::VectorXd wv = Eigen::VectorXd::Constant(1, w);
        const double i = 0.7 / hp_resistance(w, hp);
        const double got = memnet_rhs(wv, rc.s_volts / hp.r_on, rc.projector.omega, hp)[0];
        CHECK(std::abs(got - hp_rhs(w, i, hp)) < 1e-12);
    }
}

TEST_CASE("series and parallel currents obey Kirchhoff") {
    const HpParams hp = unit_hp();
    const Eigen::Vector2d w(0.2, 0.7);
    // Series: 1 -> 2 -> 0.
    {
        const ReducedCircuit rc = reduce_circuit(source_with({{1, 2}, {2, 0}}, 3, 2.0));
        const Eigen::VectorXd i = memnet_currents(w, rc.s_volts / hp.r_on, rc.projector.omega, hp);
        const double ref = 2.0 / (hp_resistance(0.2, hp) + hp_resistance(0.7, hp));
        CHECK(i[0] == doctest::Approx(ref).epsilon(1e-12));
        CHECK(i[1] == doctest::Approx(ref).epsilon(1e-12));
    }
    // Parallel: both 1 -> 0.
    {
        const ReducedCircuit rc = reduce_circuit(source_with({{1, 0}, {1, 0}}, 2, 2.0));
        const Eigen::VectorXd i = memnet_currents(w, rc.s_volts / hp.r_on, rc.projector.omega, hp);
        CHECK(i[0] == doctest::Approx(2.0 / hp_resistance(0.2, hp)).epsilon(1e-12));
        CHECK(i[1] == doctest::Approx(2.0 / hp_resistance(0.7, hp)).epsilon(1e-12));
    }
}

TEST_CASE("invalid circuits are rejected") {
    CircuitGraph loop;
    loop.nodes = 2;
    loop.edges = {{0, 1, EdgeRole::source, 1.0}, {1, 0, EdgeRole::source, 1.0}, {0, 1}};
    CHECK_THROWS_AS(reduce_circuit(loop), ValidationError);
    CircuitGraph split;
    split.nodes = 4;
    split.edges = {{0, 1}, {2, 3}};
    CHECK_THROWS_AS(reduce_circuit(split), ValidationError);
    CircuitGraph out_of_range;
    out_of_range.nodes = 2;
    out_of_range.edges = {{0, 5}};
    CHECK_THROWS_AS(reduce_circuit(out_of_range), ValidationError);
}

TEST_CASE("edge lists round-trip") {
    CircuitGraph g = source_with({{1, 2, EdgeRole::memristor, 0.25}, {2, 0}}, 3, -1.5);
    std::ostringstream os;
    write_edge_list(os, g);
    std::istringstream is(os.str());
    const CircuitGraph h = read_edge_list(is);
    CHECK(h.nodes == 3);
    REQUIRE(h.edges.size() == 3);
    CHECK(h.edges[0].role == EdgeRole::source);
    CHECK(h.edges[0].value == -1.5);
    CHECK(h.edges[1].value == 0.25);
    CHECK(h.memristor_count() == 2);
    std::istringstream bad("0 1 x 2\n");
    CHECK_THROWS_AS(read_edge_list(bad), ValidationError);
}

TEST_CASE("random graphs are connected and reproducible") {
    const CircuitGraph a = random_graph(30, 0.05, 9), b = random_graph(30, 0.05, 9);
    CHECK(a.edges.size() >= 29);
    CHECK(a.edges.size() == b.edges.size());
    CHECK_NOTHROW(reduce_circuit(a));
}

TEST_CASE("linearization of one edge matches the derivative by hand") {
    const HpParams hp = unit_hp();
    const ReducedCircuit rc = reduce_circuit(source_with({{1, 0}}, 2, 0.5));
    const double w = 0.4;
    const Eigen::MatrixXd a = linearize(rc, hp, Eigen::VectorXd::Constant(1, w));
    const double xi = hp.xi();
    CHECK(a(0, 0) == doctest::Approx(0.5 * xi / (hp.beta * std::pow(1.0 + xi * w, 2))).epsilon(1e-8));
}

TEST_CASE("mean relaxation agrees with the matrix exponential") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd a(6, 6);
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) a(i, j) = 0.3 * n01(rng);
    a.diagonal().array() -= 1.0;
    Eigen::VectorXd w0(6);
    w0 << 0.1, 0.9, 0.5, 0.3, 0.7, 0.2;
    const std::vector<double> ts{0.0, 0.3, 1.0, 4.0};
    const auto f = mean_relaxation(a, w0, ts);
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const Eigen::MatrixXd e = (a * ts[k]).exp();
        CHECK(f[k] == doctest::Approx((e * w0.asDiagonal()).trace() / 6.0).epsilon(1e-10));
    }
    // A Jordan block takes the fallback path.
    Eigen::Matrix2d j;
    j << -1.0, 1.0, 0.0, -1.0;
    const auto g = mean_relaxation(j, Eigen::Vector2d(1.0, 1.0), {2.0});
    CHECK(g[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));
}

TEST_CASE("uniform rate density gives a 1/t relaxation") {
    std::vector<double> rates;
    for (int k = 1; k <= 2000; ++k) rates.push_back(k / 2000.0);
    const PowerLawFit fit = relaxation_exponent(rates, rates.size());
    CHECK(fit.exponent == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(fit.r2 > 0.99);
    CHECK_THROWS_AS(relaxation_exponent(std::vector<double>(50, 1.0), 50), FitRejected);
}

TEST_CASE("single time scale is rejected by the ensemble analysis") {
    CHECK_THROWS_AS(soc_analyze(std::vector<double>(40, -2.0), 40, 4096), FitRejected);
}

TEST_CASE("network simulation clamps and reports the mean") {
    const HpParams hp = unit_hp();
    const ReducedCircuit rc = reduce_circuit(source_with({{1, 2}, {2, 0}}, 3, 5.0));
    const Trace tr = simulate_network(rc, hp, Eigen::Vector2d(0.5, 0.5), {Method::euler, 0.01, 5.0});
    for (std::size_t k = 0; k < tr.size(); ++k) {
        CHECK(tr.channel("w0")[k] >= 0.0);
        CHECK(tr.channel("mean")[k] == doctest::Approx(0.5 * (tr.channel("w0")[k] + tr.channel("w1")[k])));
    }
    CHECK(tr.channel("w0").back() == 0.0);
}

TEST_CASE("maze text round-trips") {
    const std::string text = "S.#\n..#\n#.E\n";
    const MazeSpec m = parse_maze(text);
    CHECK(m.rows == 3);
    CHECK(m.cols == 3);
    CHECK(m.entrance == Cell{0, 0});
    CHECK(m.exit == Cell{2, 2});
    CHECK(format_maze(m) == text);
    CHECK_THROWS_AS(parse_maze("S.\n.\n"), ValidationError);
    CHECK_THROWS_AS(parse_maze("S.x\n..E\n"), ValidationError);
    CHECK_THROWS_AS(parse_maze("..\n.E\n"), ValidationError);
}

TEST_CASE("shortest path bookkeeping") {
    const MazeSpec open = parse_maze("S..\n...\n..E\n");
    CHECK(shortest_path_count(open) == 2);
    CHECK(bfs_distances(open, open.entrance)[8] == 4);
    const MazeSpec corridor = parse_maze("S.#\n#.#\n#.E\n");
    CHECK(shortest_path_count(corridor) == 1);
    const auto p = bfs_shortest_path(corridor);
    const std::vector<Cell> ref{{0, 0}, {0, 1}, {1, 1}, {2, 1}, {2, 2}};
    CHECK(p == ref);
}

TEST_CASE("maze circuit keeps the reachable component") {
    const MazeSpec m = parse_maze("S.#.\n#..#\n#.E.\n####\n");
    const MazeCircuit mc = maze_to_circuit(m, 1.0);
    CHECK(mc.distance == 4);
    for (const auto& c : mc.node_cells) CHECK(c != Cell{0, 3});
    CHECK(mc.graph.memristor_count() == mc.edge_cells.size());
}

TEST_CASE("memristive maze solver follows the shortest path") {
    const MazeSpec m = parse_maze("S...\n.##.\n...#\n##.E\n");
    REQUIRE(shortest_path_count(m) == 1);
    const MazeSolution s = solve_maze(m, 1.0);
    CHECK(s.path == bfs_shortest_path(m));
    CHECK(s.contrast > 1.0);
    CHECK(s.steady);
}

TEST_CASE("random mazes have a unique shortest path") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const MazeSpec m = random_maze(6, 6, seed);
        CHECK(shortest_path_count(m) == 1);
        CHECK(m.entrance == Cell{0, 0});
        CHECK(m.exit == Cell{5, 5});
    }
}
