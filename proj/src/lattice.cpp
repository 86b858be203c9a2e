#include "ozlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ozlab {

namespace {

// all sign-flip variants of a displacement (the reflection orbit)
std::vector<std::vector<int>> reflection_orbit(const std::vector<int>& x) {
    std::vector<std::vector<int>> orbit{{}};
    for (int c : x) {
        std::vector<std::vector<int>> next;
        for (const auto& prefix : orbit) {
            auto a = prefix;
            a.push_back(c);
            next.push_back(a);
            if (c != 0) {
                auto b = prefix;
                b.push_back(-c);
                next.push_back(b);
            }
        }
        orbit.swap(next);
    }
    std::sort(orbit.begin(), orbit.end());
    orbit.erase(std::unique(orbit.begin(), orbit.end()), orbit.end());
    return orbit;
}

double norm2(const std::vector<int>& x) {
    double s = 0;
    for (int c : x) s += static_cast<double>(c) * c;
    return std::sqrt(s);
}

std::string coords_to_string(const std::vector<int>& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(x[i]);
    }
    return s + ")";
}

}  // namespace

void add_coupling_orbit(CouplingSpec& spec, const std::vector<int>& displacement, double value) {
    if (static_cast<int>(displacement.size()) != spec.d)
        throw std::invalid_argument("displacement dimension does not match spec");
    for (const auto& y : reflection_orbit(displacement)) spec.entries[y] = value;
}

CouplingSpec nn_spec(int d, double beta, double j) {
    CouplingSpec spec;
    spec.d = d;
    spec.beta = beta;
    spec.range = 1.5;
    std::vector<int> e(d, 0);
    e[0] = 1;
    add_coupling_orbit(spec, e, j);
    // permutations of the axis vector
    for (int k = 1; k < d; ++k) {
        std::vector<int> ek(d, 0);
        ek[k] = 1;
        add_coupling_orbit(spec, ek, j);
    }
    return spec;
}

std::vector<std::string> validate_couplings(const CouplingSpec& spec) {
    std::vector<std::string> violations;
    if (spec.d < 2) violations.push_back("dimension must be at least 2");
    if (!(spec.beta > 0)) violations.push_back("beta must be positive");
    if (!(spec.range > 0)) violations.push_back("range must be positive");

    for (const auto& [x, j] : spec.entries) {
        if (static_cast<int>(x.size()) != spec.d) {
            violations.push_back("displacement " + coords_to_string(x) + " has wrong dimension");
            continue;
        }
        if (j < 0)
            violations.push_back("ferromagnetism violated at " + coords_to_string(x));
        if (j != 0 && norm2(x) >= spec.range)
            violations.push_back("finite range violated at " + coords_to_string(x));
        for (const auto& y : reflection_orbit(x)) {
            auto it = spec.entries.find(y);
            double jy = (it == spec.entries.end()) ? 0.0 : it->second;
            if (jy != j) {
                violations.push_back("reflection symmetry violated at " + coords_to_string(x) +
                                     " vs " + coords_to_string(y));
                break;
            }
        }
    }
    for (int k = 0; k < spec.d; ++k) {
        std::vector<int> ek(spec.d, 0);
        ek[k] = 1;
        auto it = spec.entries.find(ek);
        if (it == spec.entries.end() || !(it->second > 0))
            violations.push_back("irreducibility violated at " + coords_to_string(ek));
    }
    return violations;
}

int LatticeGraph::incident_rank(int vertex, int edge) const {
    const auto& list = incident[vertex];
    for (std::size_t i = 0; i < list.size(); ++i)
        if (list[i] == edge) return static_cast<int>(i);
    throw std::invalid_argument("edge not incident at vertex");
}

std::string LatticeGraph::canonical_string() const {
    std::ostringstream os;
    os << id << ";d=" << d << ";V=" << vertex_count() << ";";
    for (int v = 0; v < vertex_count(); ++v) {
        if (!coords.empty()) os << coords_to_string(coords[v]);
        os << "[";
        for (int e : incident[v]) os << e << " ";
        os << "]";
    }
    os << ";E=";
    for (const auto& e : edges) os << "{" << e.u << "," << e.v << ":" << e.coupling << "}";
    return os.str();
}

LatticeGraph build_box(const CouplingSpec& spec, int N) {
    auto violations = validate_couplings(spec);
    if (!violations.empty())
        throw std::invalid_argument("invalid coupling spec: " + violations.front());
    if (N < 1) throw std::invalid_argument("N must be >= 1");

    LatticeGraph g;
    g.d = spec.d;
    g.id = "box_d" + std::to_string(spec.d) + "_N" + std::to_string(N);

    // vertices in lexicographic coordinate order
    std::map<std::vector<int>, int> index;
    std::vector<int> x(spec.d, -N);
    for (;;) {
        index.emplace(x, static_cast<int>(g.coords.size()));
        g.coords.push_back(x);
        int k = spec.d - 1;
        while (k >= 0 && x[k] == N) x[k--] = -N;
        if (k < 0) break;
        ++x[k];
    }

    g.incident.resize(g.coords.size());
    for (int u = 0; u < static_cast<int>(g.coords.size()); ++u) {
        for (const auto& [dx, j] : spec.entries) {
            if (j == 0) continue;
            std::vector<int> y = g.coords[u];
            bool inside = true;
            for (int k = 0; k < spec.d; ++k) {
                y[k] += dx[k];
                if (std::abs(y[k]) > N) inside = false;
            }
            if (!inside) continue;
            int v = index.at(y);
            if (v <= u) continue;   // one direction per pair
            g.edges.push_back({u, v, j});
        }
    }
    // deterministic edge ids: sort by endpoint coordinates
    std::sort(g.edges.begin(), g.edges.end(), [&](const LatticeGraph::Edge& a, const LatticeGraph::Edge& b) {
        return std::tie(g.coords[a.u], g.coords[a.v]) < std::tie(g.coords[b.u], g.coords[b.v]);
    });
    for (int e = 0; e < g.edge_count(); ++e) {
        g.incident[g.edges[e].u].push_back(e);
        g.incident[g.edges[e].v].push_back(e);
    }
    // incident order: lexicographic by the other endpoint's coordinates
    for (int v = 0; v < g.vertex_count(); ++v) {
        std::sort(g.incident[v].begin(), g.incident[v].end(), [&](int a, int b) {
            return g.coords[g.other_end(a, v)] < g.coords[g.other_end(b, v)];
        });
    }
    return g;
}

std::vector<int> lattice_point(double n, const Eigen::VectorXd& u) {
    if (std::abs(u.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("direction must be a unit vector (|norm-1| <= 1e-12)");
    std::vector<int> p(u.size());
    for (int k = 0; k < u.size(); ++k) p[k] = static_cast<int>(std::floor(n * u[k]));
    return p;
}

namespace {

LatticeGraph from_edge_list(std::string id, int vertices,
                            const std::vector<std::pair<int, int>>& pairs, double j) {
    LatticeGraph g;
    g.id = std::move(id);
    g.incident.resize(vertices);
    for (auto [u, v] : pairs) g.edges.push_back({u, v, j});
    for (int e = 0; e < g.edge_count(); ++e) {
        g.incident[g.edges[e].u].push_back(e);
        g.incident[g.edges[e].v].push_back(e);
    }
    // abstract graphs: order incident edges by the other endpoint's index
    for (int v = 0; v < vertices; ++v) {
        std::sort(g.incident[v].begin(), g.incident[v].end(), [&](int a, int b) {
            int oa = g.other_end(a, v), ob = g.other_end(b, v);
            return std::tie(oa, a) < std::tie(ob, b);
        });
    }
    return g;
}

}  // namespace

LatticeGraph make_single_edge(double j) { return from_edge_list("single_edge", 2, {{0, 1}}, j); }

LatticeGraph make_path(int vertices, double j) {
    std::vector<std::pair<int, int>> pairs;
    for (int v = 0; v + 1 < vertices; ++v) pairs.emplace_back(v, v + 1);
    return from_edge_list("path" + std::to_string(vertices), vertices, pairs, j);
}

LatticeGraph make_triangle(double j) {
    return from_edge_list("triangle", 3, {{0, 1}, {0, 2}, {1, 2}}, j);
}

LatticeGraph make_cycle(int vertices, double j) {
    std::vector<std::pair<int, int>> pairs;
    for (int v = 0; v < vertices; ++v) pairs.emplace_back(v, (v + 1) % vertices);
    return from_edge_list("cycle" + std::to_string(vertices), vertices, pairs, j);
}

LatticeGraph make_grid(int rows, int cols, double j) {
    std::vector<std::pair<int, int>> pairs;
    auto at = [&](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) pairs.emplace_back(at(r, c), at(r, c + 1));
            if (r + 1 < rows) pairs.emplace_back(at(r, c), at(r + 1, c));
        }
    return from_edge_list("grid" + std::to_string(rows) + "x" + std::to_string(cols),
                          rows * cols, pairs, j);
}

std::vector<LatticeGraph> library_graphs() {
    return {make_single_edge(), make_path(3), make_triangle(), make_cycle(4),
            make_grid(2, 3), make_grid(2, 4)};
}

CouplingSpec load_coupling_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open coupling config: " + path);
    CouplingSpec spec;
    spec.entries.clear();
    std::vector<std::pair<std::vector<int>, double>> raw;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream is(line);
        std::string key;
        if (!(is >> key)) continue;
        auto expect_eq = [&] {
            std::string eq;
            if (!(is >> eq) || eq != "=")
                throw std::runtime_error("config line " + std::to_string(lineno) + ": expected '='");
        };
        if (key == "d") {
            expect_eq();
            is >> spec.d;
        } else if (key == "beta") {
            expect_eq();
            is >> spec.beta;
        } else if (key == "range") {
            expect_eq();
            is >> spec.range;
        } else if (key == "J") {
            std::vector<int> x;
            std::string tok;
            while (is >> tok && tok != "=") x.push_back(std::stoi(tok));
            double j;
            if (tok != "=" || !(is >> j))
                throw std::runtime_error("config line " + std::to_string(lineno) + ": bad J entry");
            raw.emplace_back(std::move(x), j);
        } else {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key " + key);
        }
    }
    for (auto& [x, j] : raw) add_coupling_orbit(spec, x, j);
    if (spec.range <= 0) {
        // default: tight range from the stored entries
        double r = 1.0;
        for (const auto& [x, j] : spec.entries)
            if (j != 0) r = std::max(r, norm2(x));
        spec.range = r + 0.5;
    }
    return spec;
}

}  // namespace ozlab
