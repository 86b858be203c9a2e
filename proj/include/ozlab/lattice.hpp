#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace ozlab {

// Translation-invariant coupling family J_x, x in Z^d. The four admissibility
// conditions (ferromagnetism, reflection symmetry, finite range,
// irreducibility) are checked by validate_couplings, never assumed.
struct CouplingSpec {
    int d = 2;
    double beta = 1.0;
    double range = 2.0;                       // J_x = 0 required for |x|_2 >= range
    std::map<std::vector<int>, double> entries;  // displacement -> J_x, full orbit stored
};

// Inserts the whole reflection orbit of one displacement. Conflicting values
// for the same orbit are reported by validate_couplings rather than here.
void add_coupling_orbit(CouplingSpec& spec, const std::vector<int>& displacement, double value);

// Nearest-neighbour spec with J = j on |x| = 1.
CouplingSpec nn_spec(int d, double beta, double j = 1.0);

std::vector<std::string> validate_couplings(const CouplingSpec& spec);

// Finite graph with per-edge couplings and a fixed total order on the edges
// incident to each vertex. The order drives the path-extraction algorithm, so
// it is part of the graph's identity, not a representation detail.
struct LatticeGraph {
    struct Edge {
        int u, v;
        double coupling;
    };

    std::string id;
    int d = 0;                                  // 0 for abstract graphs
    std::vector<std::vector<int>> coords;       // per vertex, empty for abstract graphs
    std::vector<Edge> edges;
    std::vector<std::vector<int>> incident;     // per vertex: edge ids, ordered

    int vertex_count() const { return static_cast<int>(incident.size()); }
    int edge_count() const { return static_cast<int>(edges.size()); }

    int other_end(int edge, int vertex) const {
        const Edge& e = edges[edge];
        return e.u == vertex ? e.v : e.u;
    }

    // rank of `edge` in the incident order at `vertex`
    int incident_rank(int vertex, int edge) const;

    std::string canonical_string() const;   // byte-stable serialization
};

// Box {x : max_i |x_i| <= N} with an edge {i,j} whenever J_{j-i} != 0.
// Incident edges at each vertex are ordered lexicographically by the other
// endpoint's coordinates. Free boundary.
LatticeGraph build_box(const CouplingSpec& spec, int N);

// [n u] with component-wise floor; u must be a unit vector to 1e-12.
std::vector<int> lattice_point(double n, const Eigen::VectorXd& u);

// Small graphs used throughout the exact suites. All couplings equal `j`.
LatticeGraph make_single_edge(double j = 1.0);
LatticeGraph make_path(int vertices, double j = 1.0);
LatticeGraph make_triangle(double j = 1.0);
LatticeGraph make_cycle(int vertices, double j = 1.0);
LatticeGraph make_grid(int rows, int cols, double j = 1.0);
std::vector<LatticeGraph> library_graphs();

// Key-value config: lines `d = 2`, `beta = 0.4`, `range = 2`,
// `J <x1> ... <xd> = <value>`. One orbit representative per line suffices;
// the reflection orbit is closed automatically.
CouplingSpec load_coupling_spec(const std::string& path);

}  // namespace ozlab
