#include "ozlab/htpath.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ozlab {

namespace {

VertexMask boundary_of(const LatticeGraph& g, EdgeMask edges) {
    VertexMask b = 0;
    for (int e = 0; e < g.edge_count(); ++e)
        if (edges & (EdgeMask(1) << e)) b ^= (1u << g.edges[e].u) ^ (1u << g.edges[e].v);
    return b;
}

double tanh_product(const LatticeGraph& g, double beta, const std::vector<int>& edge_seq) {
    double p = 1;
    for (int e : edge_seq) p *= std::tanh(beta * g.edges[e].coupling);
    return p;
}

}  // namespace

HTConfig ht_config(const LatticeGraph& g, EdgeMask edges) {
    return {edges, boundary_of(g, edges)};
}

ExtractedPath extract_path(const LatticeGraph& g, const HTConfig& config, int x) {
    if (!(config.sources & (1u << x)))
        throw std::invalid_argument("extraction must start at a source vertex");
    ExtractedPath path;
    path.vertices.push_back(x);
    int v = x;
    EdgeMask used = 0;
    do {
        int chosen = -1;
        for (int e : g.incident[v]) {   // incident lists are kept in edge order
            EdgeMask bit = EdgeMask(1) << e;
            if ((config.edges & bit) && !(used & bit)) {
                chosen = e;
                break;
            }
        }
        if (chosen < 0)
            throw std::logic_error("no unused present edge at an interior vertex (parity bug)");
        used |= EdgeMask(1) << chosen;
        path.edge_seq.push_back(chosen);
        v = g.other_end(chosen, v);
        path.vertices.push_back(v);
    } while (!((config.sources & (1u << v)) && v != x));
    path.edge_set = used;
    path.boundary = edge_boundary(g, path);
    return path;
}

EdgeMask edge_boundary(const LatticeGraph& g, const ExtractedPath& path) {
    EdgeMask boundary = 0;
    for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k) {
        int v = path.vertices[k];
        int departing = path.edge_seq[k];
        for (int e : g.incident[v]) {
            boundary |= EdgeMask(1) << e;
            if (e == departing) break;
        }
    }
    return boundary;
}

std::vector<EdgeMask> configs_with_sources(const LatticeGraph& g, VertexMask a) {
    std::vector<EdgeMask> out;
    const EdgeMask n = EdgeMask(1) << g.edge_count();
    for (EdgeMask s = 0; s < n; ++s)
        if (boundary_of(g, s) == a) out.push_back(s);
    return out;
}

PathLaw path_law(const LatticeGraph& g, double beta, VertexMask a, int x, const EnumCaps& caps) {
    if (!(a & (1u << x))) throw std::invalid_argument("x must belong to A");
    if (g.edge_count() > caps.ht_edges)
        throw std::invalid_argument("edge count exceeds HT enumeration cap");

    double zhat_a = ht_polynomial(g, beta, a, std::nullopt, caps);
    std::map<std::vector<int>, std::pair<int, double>> pushforward;   // edge seq -> (y, mass)
    for (EdgeMask s : configs_with_sources(g, a)) {
        ExtractedPath p = extract_path(g, {s, a}, x);
        double w = 1;
        for (int e = 0; e < g.edge_count(); ++e)
            if (s & (EdgeMask(1) << e)) w *= std::tanh(beta * g.edges[e].coupling);
        auto& cell = pushforward[p.edge_seq];
        cell.first = p.vertices.back();
        cell.second += w / zhat_a;
    }

    PathLaw law;
    const EdgeMask all = (EdgeMask(1) << g.edge_count()) - 1;
    for (const auto& [edge_seq, cell] : pushforward) {
        PathLawEntry entry;
        entry.edge_seq = edge_seq;
        entry.endpoint = cell.first;
        entry.p_extracted = cell.second;

        ExtractedPath p;
        p.edge_seq = edge_seq;
        p.vertices.push_back(x);
        int v = x;
        for (int e : edge_seq) {
            v = g.other_end(e, v);
            p.vertices.push_back(v);
        }
        EdgeMask remaining = all & ~edge_boundary(g, p);
        VertexMask rest = a & ~(1u << x) & ~(1u << entry.endpoint);
        entry.p_formula = ht_polynomial(g, beta, rest, remaining, caps) / zhat_a *
                          tanh_product(g, beta, edge_seq);

        law.max_rel_diff = std::max(law.max_rel_diff,
                                    rel_diff(entry.p_extracted, entry.p_formula));
        law.total_mass += entry.p_extracted;
        law.entries.push_back(std::move(entry));
    }
    return law;
}

MonotonicityResult verify_monotonicity(const LatticeGraph& g, double beta, VertexMask a,
                                       int x, int y, const EnumCaps& caps) {
    if (x == y || !(a & (1u << x)) || !(a & (1u << y)))
        throw std::invalid_argument("x != y must both belong to A");
    MonotonicityResult out;
    PathLaw under_a = path_law(g, beta, a, x, caps);
    VertexMask xy = (1u << x) | (1u << y);
    double zhat_xy = ht_polynomial(g, beta, xy, std::nullopt, caps);
    const EdgeMask all = (EdgeMask(1) << g.edge_count()) - 1;

    for (const auto& entry : under_a.entries) {
        if (entry.endpoint != y) continue;
        MonotonicityRow row;
        row.edge_seq = entry.edge_seq;
        row.p_sources_a = entry.p_extracted;

        ExtractedPath p;
        p.edge_seq = entry.edge_seq;
        p.vertices.push_back(x);
        int v = x;
        for (int e : entry.edge_seq) {
            v = g.other_end(e, v);
            p.vertices.push_back(v);
        }
        EdgeMask remaining = all & ~edge_boundary(g, p);
        row.p_two_sources = ht_polynomial(g, beta, 0, remaining, caps) / zhat_xy *
                            tanh_product(g, beta, entry.edge_seq);

        out.max_violation = std::max(out.max_violation, row.p_sources_a - row.p_two_sources);
        out.rows.push_back(std::move(row));
    }
    out.ok = out.max_violation <= 1e-10;
    return out;
}

double verify_parity_coupling(const LatticeGraph& g, double beta, VertexMask a,
                              const EnumCaps& caps) {
    if (g.edge_count() > caps.current_class_edges)
        throw std::invalid_argument("edge count exceeds current class enumeration cap");
    double z_a = current_partition_function(g, beta, a, caps);
    double zhat_a = ht_polynomial(g, beta, a, std::nullopt, caps);
    double coshp = cosh_product(g, beta);

    double max_disc = 0;
    for (EdgeMask s : configs_with_sources(g, a)) {
        // current side: odd classes pinned to s, even classes free
        double w_current = 1;
        for (int e = 0; e < g.edge_count(); ++e) {
            double bj = beta * g.edges[e].coupling;
            w_current *= (s & (EdgeMask(1) << e)) ? std::sinh(bj) : std::cosh(bj);
        }
        double p_current = w_current / z_a;
        double p_ht = 1;
        for (int e = 0; e < g.edge_count(); ++e)
            if (s & (EdgeMask(1) << e)) p_ht *= std::tanh(beta * g.edges[e].coupling);
        p_ht /= zhat_a;
        max_disc = std::max(max_disc, rel_diff(p_current, p_ht));
        (void)coshp;
    }
    return max_disc;
}

}  // namespace ozlab
