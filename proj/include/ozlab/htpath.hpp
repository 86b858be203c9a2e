#pragma once

#include <map>
#include <string>
#include <vector>

#include "ozlab/gibbs_exact.hpp"
#include "ozlab/lattice.hpp"

namespace ozlab {

// A subgraph together with its odd-degree vertex set.
struct HTConfig {
    EdgeMask edges = 0;
    VertexMask sources = 0;
};

HTConfig ht_config(const LatticeGraph& g, EdgeMask edges);

// Path produced by the deterministic extraction walk. Vertices may repeat;
// edges never do. boundary is the edge-boundary [gamma].
struct ExtractedPath {
    std::vector<int> vertices;   // x_0 ... x_m
    std::vector<int> edge_seq;   // e_0 ... e_{m-1}
    EdgeMask edge_set = 0;
    EdgeMask boundary = 0;
};

// Starting from source x, repeatedly follow the smallest present incident
// edge (in the graph's per-vertex order) not yet traversed, until another
// source is reached. Throws if x is not a source; a missing candidate edge
// indicates a parity bug and is raised as std::logic_error.
ExtractedPath extract_path(const LatticeGraph& g, const HTConfig& config, int x);

// union over path positions k of { e incident at x_k : e <= e_k }
EdgeMask edge_boundary(const LatticeGraph& g, const ExtractedPath& path);

struct PathLawEntry {
    std::vector<int> edge_seq;
    int endpoint = -1;
    double p_extracted = 0;   // pushforward of the HT measure under extraction
    double p_formula = 0;     // Zhat^{A\{x,y}}_{G[gamma]} / Zhat^A_G * prod tanh
};

struct PathLaw {
    std::vector<PathLawEntry> entries;
    double total_mass = 0;
    double max_rel_diff = 0;
};

// Exact distribution over (endpoint, path) of the extraction started at x
// under the HT measure with sources A, with the closed form checked per path.
PathLaw path_law(const LatticeGraph& g, double beta, VertexMask a, int x,
                 const EnumCaps& caps = {});

struct MonotonicityRow {
    std::vector<int> edge_seq;
    double p_sources_a = 0;
    double p_two_sources = 0;
};

struct MonotonicityResult {
    std::vector<MonotonicityRow> rows;
    double max_violation = 0;   // max over paths of p_A - p_{x,y}
    bool ok = false;
};

// P_A(gamma: x->y) <= P_{x,y}(gamma: x->y) for every extracted path.
MonotonicityResult verify_monotonicity(const LatticeGraph& g, double beta, VertexMask a,
                                       int x, int y, const EnumCaps& caps = {});

// Currents vs HT: P^A_currents(odd-class edge set = gamma) equals the HT
// weight of gamma. Returns the max relative discrepancy over all admissible
// subgraphs.
double verify_parity_coupling(const LatticeGraph& g, double beta, VertexMask a,
                              const EnumCaps& caps = {});

// all subgraphs with odd-degree set A, as masks
std::vector<EdgeMask> configs_with_sources(const LatticeGraph& g, VertexMask a);

}  // namespace ozlab
