#include "memsim/error.hpp"
#include "memsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <sstream>

namespace memsim {

namespace {

constexpr int kDr[4] = {1, -1, 0, 0};
constexpr int kDc[4] = {0, 0, 1, -1};

int index_of(const MazeSpec& m, Cell x) { return x.r * m.cols + x.c; }

bool inside(const MazeSpec& m, Cell x) { return x.r >= 0 && x.r < m.rows && x.c >= 0 && x.c < m.cols; }

} // namespace

bool MazeSpec::is_open(Cell x) const {
    return inside(*this, x) && open[static_cast<std::size_t>(index_of(*this, x))];
}

MazeSpec parse_maze(const std::string& text) {
    std::istringstream is(text);
    std::vector<std::string> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        rows.push_back(line);
    }
    while (!rows.empty() && rows.back().empty()) rows.pop_back();
    if (rows.empty()) throw ValidationError("maze: empty grid");

    MazeSpec m;
    m.rows = static_cast<int>(rows.size());
    m.cols = static_cast<int>(rows.front().size());
    int starts = 0, exits = 0;
    for (int r = 0; r < m.rows; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != m.cols) throw ValidationError("maze: rows differ in length");
        for (int c = 0; c < m.cols; ++c) {
            const char ch = row[static_cast<std::size_t>(c)];
            switch (ch) {
            case '#':
                m.open.push_back(false);
                break;
            case '.':
                m.open.push_back(true);
                break;
            case 'S':
                m.open.push_back(true);
                m.entrance = {r, c};
                ++starts;
                break;
            case 'E':
                m.open.push_back(true);
                m.exit = {r, c};
                ++exits;
                break;
            default:
                throw ValidationError(std::string("maze: unexpected character '") + ch + "'");
            }
        }
    }
    if (starts != 1 || exits != 1) throw ValidationError("maze: need exactly one S and one E");
    validate(m);
    return m;
}

std::string format_maze(const MazeSpec& m) {
    std::string s;
    for (int r = 0; r < m.rows; ++r) {
        for (int c = 0; c < m.cols; ++c) {
            const Cell x{r, c};
            s += x == m.entrance ? 'S' : x == m.exit ? 'E' : m.is_open(x) ? '.' : '#';
        }
        s += '\n';
    }
    return s;
}

std::vector<int> bfs_distances(const MazeSpec& m, Cell from) {
    std::vector<int> dist(static_cast<std::size_t>(m.rows * m.cols), -1);
    if (!m.is_open(from)) return dist;
    std::queue<Cell> q;
    dist[static_cast<std::size_t>(index_of(m, from))] = 0;
    q.push(from);
    while (!q.empty()) {
        const Cell x = q.front();
        q.pop();
        const int dx = dist[static_cast<std::size_t>(index_of(m, x))];
        for (int k = 0; k < 4; ++k) {
            const Cell y{x.r + kDr[k], x.c + kDc[k]};
            if (!m.is_open(y)) continue;
            int& dy = dist[static_cast<std::size_t>(index_of(m, y))];
            if (dy < 0) {
                dy = dx + 1;
                q.push(y);
            }
        }
    }
    return dist;
}

void validate(const MazeSpec& m) {
    if (m.rows <= 0 || m.cols <= 0) throw ValidationError("maze: empty grid");
    if (static_cast<int>(m.open.size()) != m.rows * m.cols) throw ValidationError("maze: grid size mismatch");
    if (m.entrance == m.exit) throw ValidationError("maze: entrance equals exit");
    if (!m.is_open(m.entrance) || !m.is_open(m.exit)) throw ValidationError("maze: entrance and exit must be open");
    if (bfs_distances(m, m.entrance)[static_cast<std::size_t>(index_of(m, m.exit))] < 0)
        throw ValidationError("maze: no path from entrance to exit");
}

int shortest_path_count(const MazeSpec& m) {
    const auto dist = bfs_distances(m, m.entrance);
    std::vector<Cell> order;
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c)
            if (dist[static_cast<std::size_t>(index_of(m, {r, c}))] >= 0) order.push_back({r, c});
    std::sort(order.begin(), order.end(), [&](Cell a, Cell b) {
        return dist[static_cast<std::size_t>(index_of(m, a))] < dist[static_cast<std::size_t>(index_of(m, b))];
    });
    std::vector<int> count(dist.size(), 0);
    count[static_cast<std::size_t>(index_of(m, m.entrance))] = 1;
    for (const Cell x : order) {
        const auto ix = static_cast<std::size_t>(index_of(m, x));
        for (int k = 0; k < 4; ++k) {
            const Cell y{x.r + kDr[k], x.c + kDc[k]};
            if (!m.is_open(y)) continue;
            const auto iy = static_cast<std::size_t>(index_of(m, y));
            if (dist[iy] == dist[ix] + 1) count[iy] = std::min(2, count[iy] + count[ix]);
        }
    }
    return count[static_cast<std::size_t>(index_of(m, m.exit))];
}

std::vector<Cell> bfs_shortest_path(const MazeSpec& m) {
    validate(m);
    const auto dist = bfs_distances(m, m.entrance);
    std::vector<Cell> path{m.exit};
    Cell x = m.exit;
    while (!(x == m.entrance)) {
        const int dx = dist[static_cast<std::size_t>(index_of(m, x))];
        for (int k = 0; k < 4; ++k) {
            const Cell y{x.r + kDr[k], x.c + kDc[k]};
            if (m.is_open(y) && dist[static_cast<std::size_t>(index_of(m, y))] == dx - 1) {
                x = y;
                break;
            }
        }
        path.push_back(x);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

MazeCircuit maze_to_circuit(const MazeSpec& m, double v_dc) {
    validate(m);
    const auto dist = bfs_distances(m, m.entrance);
    MazeCircuit mc;
    std::vector<int> node(dist.size(), -1);
    for (int r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) {
            const auto i = static_cast<std::size_t>(index_of(m, {r, c}));
            if (dist[i] < 0) continue;
            node[i] = static_cast<int>(mc.node_cells.size());
            mc.node_cells.push_back({r, c});
        }
    mc.graph.nodes = mc.node_cells.size();
    // Edges point away from the entrance, so the steady currents are mostly positive.
    for (const Cell x : mc.node_cells) {
        for (const Cell y : {Cell{x.r + 1, x.c}, Cell{x.r, x.c + 1}}) {
            if (!inside(m, y)) continue;
            const auto ix = static_cast<std::size_t>(index_of(m, x));
            const auto iy = static_cast<std::size_t>(index_of(m, y));
            if (node[iy] < 0) continue;
            const bool forward = dist[ix] <= dist[iy];
            const Cell a = forward ? x : y, b = forward ? y : x;
            mc.graph.edges.push_back({static_cast<std::size_t>(node[static_cast<std::size_t>(index_of(m, a))]),
                                      static_cast<std::size_t>(node[static_cast<std::size_t>(index_of(m, b))]),
                                      EdgeRole::memristor, 0.0});
            mc.edge_cells.emplace_back(a, b);
        }
    }
    // The source lifts the entrance v_dc above the exit.
    mc.graph.edges.push_back({static_cast<std::size_t>(node[static_cast<std::size_t>(index_of(m, m.exit))]),
                              static_cast<std::size_t>(node[static_cast<std::size_t>(index_of(m, m.entrance))]),
                              EdgeRole::source, v_dc});
    mc.distance = dist[static_cast<std::size_t>(index_of(m, m.exit))];
    return mc;
}

namespace {

// Orders the selected edges into a simple entrance -> exit walk, or explains why not.
std::vector<Cell> trace_path(const MazeSpec& m, const std::vector<std::pair<Cell, Cell>>& sel) {
    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : sel) {
        adj[index_of(m, a)].push_back(index_of(m, b));
        adj[index_of(m, b)].push_back(index_of(m, a));
    }
    const int s = index_of(m, m.entrance), e = index_of(m, m.exit);
    std::ostringstream why;
    for (const auto& [v, nb] : adj) {
        const std::size_t want = (v == s || v == e) ? 1 : 2;
        if (nb.size() != want) {
            why << "cell (" << v / m.cols << "," << v % m.cols << ") has degree " << nb.size() << "; ";
        }
    }
    if (!adj.count(s) || !adj.count(e)) why << "selection does not touch both entrance and exit; ";
    const std::string w = why.str();
    if (!w.empty())
        throw AmbiguousPath("maze: " + std::to_string(sel.size()) + " edges above threshold do not form a simple path: " + w);

    std::vector<Cell> path{m.entrance};
    int prev = -1, cur = s;
    while (cur != e) {
        const auto& nb = adj[cur];
        const int next = nb[0] != prev ? nb[0] : nb[1];
        prev = cur;
        cur = next;
        path.push_back({cur / m.cols, cur % m.cols});
        if (path.size() > sel.size() + 1) throw AmbiguousPath("maze: selected edges contain a cycle");
    }
    if (path.size() != sel.size() + 1) throw AmbiguousPath("maze: selected edges include a detached cycle");
    return path;
}

} // namespace

MazeSolution solve_maze(const MazeSpec& m, double v_dc, const MazeSolveOptions& opt) {
    if (!(v_dc != 0.0)) throw ValidationError("maze: v_dc must be nonzero");
    if (!(opt.threshold > 0.0 && opt.threshold <= 1.0)) throw ValidationError("maze: threshold must be in (0,1]");
    const MazeCircuit mc = maze_to_circuit(m, v_dc);
    const ReducedCircuit rc = reduce_circuit(mc.graph);
    HpParams hp{opt.alpha, opt.beta, opt.r_on, opt.r_off, -1};
    if (opt.alpha < 0.0) hp.alpha = std::abs(v_dc) / (opt.beta * opt.r_off * (mc.distance + 1));
    validate(hp);

    // Everything starts OFF; the drive opens a channel along the low-resistance route.
    const Eigen::VectorXd w0 = Eigen::VectorXd::Ones(rc.s_volts.size());
    IntegrateStats st;
    NetworkRunOptions nro;
    nro.steady_tol = opt.steady_tol;
    nro.stride = std::max<std::size_t>(1, opt.max_steps);
    nro.stats = &st;
    simulate_network(rc, hp, w0, {Method::euler, opt.dt, opt.dt * static_cast<double>(opt.max_steps)}, nro);

    MazeSolution sol;
    sol.steady = st.steady;
    sol.t_stop = st.t_stop;
    sol.w = Eigen::Map<const Eigen::VectorXd>(st.final_state.data(), rc.s_volts.size());
    sol.currents = memnet_currents(sol.w, rc.s_volts / hp.r_on, rc.projector.omega, hp);

    const Eigen::VectorXd mag = sol.currents.cwiseAbs();
    const double imax = mag.maxCoeff();
    if (!(imax > 0.0)) throw NumericalError("maze: no current flows");
    std::vector<std::pair<Cell, Cell>> sel;
    double on_min = std::numeric_limits<double>::infinity(), off_max = 0.0;
    for (Eigen::Index k = 0; k < mag.size(); ++k) {
        if (mag[k] >= opt.threshold * imax) {
            sel.push_back(mc.edge_cells[static_cast<std::size_t>(k)]);
            on_min = std::min(on_min, mag[k]);
        } else {
            off_max = std::max(off_max, mag[k]);
        }
    }
    sol.contrast = off_max > 0.0 ? on_min / off_max : std::numeric_limits<double>::infinity();
    sol.path = trace_path(m, sel);
    return sol;
}

MazeSpec random_maze(int rows, int cols, std::uint64_t seed, double p_open) {
    if (rows < 1 || cols < 1 || rows * cols < 2) throw ValidationError("random_maze: grid too small");
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution open(p_open);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        MazeSpec m;
        m.rows = rows;
        m.cols = cols;
        m.open.resize(static_cast<std::size_t>(rows * cols));
        for (std::size_t k = 0; k < m.open.size(); ++k) m.open[k] = open(rng);
        m.entrance = {0, 0};
        m.exit = {rows - 1, cols - 1};
        m.open.front() = true;
        m.open.back() = true;
        if (bfs_distances(m, m.entrance).back() < 0) continue;
        if (shortest_path_count(m) == 1) return m;
    }
    throw NumericalError("random_maze: no unique-path maze found");
}

} // namespace memsim
