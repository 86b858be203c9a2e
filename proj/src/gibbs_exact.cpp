#include "ozlab/gibbs_exact.hpp"

#include <cmath>
#include <stdexcept>

#include "ozlab/common.hpp"

namespace ozlab {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

int popcount(std::uint32_t x) { return __builtin_popcount(x); }

}  // namespace

VertexMask vertex_mask(std::initializer_list<int> vertices) {
    VertexMask m = 0;
    for (int v : vertices) m |= (1u << v);
    return m;
}

VertexMask vertex_mask(const std::vector<int>& vertices) {
    VertexMask m = 0;
    for (int v : vertices) m |= (1u << v);
    return m;
}

std::vector<VertexMask> all_even_subsets(int vertex_count) {
    std::vector<VertexMask> out;
    out.reserve(std::size_t(1) << (vertex_count - 1));
    for (VertexMask a = 0; a < (1u << vertex_count); ++a)
        if ((popcount(a) & 1) == 0) out.push_back(a);
    return out;
}

double rel_diff(double x, double y) {
    double scale = std::max({std::abs(x), std::abs(y), 1e-12});
    return std::abs(x - y) / scale;
}

double tol_excess(double x, double y) {
    return std::abs(x - y) / (1e-12 + 1e-10 * std::max(std::abs(x), std::abs(y)));
}

bool close_to(double x, double y) { return tol_excess(x, y) <= 1.0; }

// ---------------------------------------------------------------- local functions

double LocalFunction::eval_global(VertexMask spins) const {
    std::uint32_t local = 0;
    for (std::size_t i = 0; i < support.size(); ++i)
        if (spins & (1u << support[i])) local |= (1u << i);
    return table[local];
}

Eigen::ArrayXd fourier_coefficients(const LocalFunction& f, const EnumCaps& caps) {
    const int s = static_cast<int>(f.support.size());
    require(s <= caps.fourier_support, "local-function support exceeds cap");
    require(f.table.size() == (1L << s), "value table must have 2^|support| entries");
    const std::uint32_t n = 1u << s;
    Eigen::ArrayXd coeffs = Eigen::ArrayXd::Zero(n);
    for (std::uint32_t subset = 0; subset < n; ++subset) {
        double acc = 0;
        for (std::uint32_t omega = 0; omega < n; ++omega) {
            int sign = (popcount(subset & ~omega) & 1) ? -1 : 1;
            acc += f.table[omega] * sign;
        }
        coeffs[subset] = acc / static_cast<double>(n);
    }
    return coeffs;
}

double reconstruct_local(const std::vector<int>& support, const Eigen::ArrayXd& coeffs,
                         std::uint32_t local_mask) {
    double acc = 0;
    for (std::uint32_t subset = 0; subset < coeffs.size(); ++subset) {
        int sign = (popcount(subset & ~local_mask) & 1) ? -1 : 1;
        acc += coeffs[subset] * sign;
    }
    return acc;
}

// ---------------------------------------------------------------- spin enumeration

namespace {

// one pass over all spin configurations; cb(spin_mask, boltzmann_weight)
template <typename Cb>
void for_each_spin_config(const LatticeGraph& g, double beta, const EnumCaps& caps, Cb&& cb) {
    const int v = g.vertex_count();
    require(v <= caps.spin_vertices, "vertex count exceeds spin enumeration cap");
    const std::uint32_t n = 1u << v;
    for (std::uint32_t s = 0; s < n; ++s) {
        double energy = 0;
        for (const auto& e : g.edges) {
            bool agree = ((s >> e.u) & 1) == ((s >> e.v) & 1);
            energy += agree ? e.coupling : -e.coupling;
        }
        cb(s, std::exp(beta * energy));
    }
}

}  // namespace

Eigen::VectorXd spin_expectations(const LatticeGraph& g, double beta,
                                  const std::vector<VertexMask>& sets, const EnumCaps& caps) {
    const int v = g.vertex_count();
    require(v <= caps.spin_vertices, "vertex count exceeds spin enumeration cap");
    // pair each configuration with its global flip: halves the work and makes
    // odd-set expectations vanish exactly instead of merely to rounding
    std::vector<int> parity(sets.size());
    for (std::size_t i = 0; i < sets.size(); ++i)
        parity[i] = (__builtin_popcount(sets[i]) & 1) ? 0 : 2;
    Eigen::VectorXd num = Eigen::VectorXd::Zero(sets.size());
    double z = 0;
    const std::uint32_t half = (v == 1) ? 1 : (1u << (v - 1));
    for (std::uint32_t s = 0; s < half; ++s) {
        double energy = 0;
        for (const auto& e : g.edges) {
            bool agree = ((s >> e.u) & 1) == ((s >> e.v) & 1);
            energy += agree ? e.coupling : -e.coupling;
        }
        double w = std::exp(beta * energy);
        z += 2 * w;
        for (std::size_t i = 0; i < sets.size(); ++i)
            num[i] += w * parity[i] * sigma_of(sets[i], s);
    }
    return num / z;
}

double spin_expectation(const LatticeGraph& g, double beta, VertexMask a, const EnumCaps& caps) {
    return spin_expectations(g, beta, {a}, caps)[0];
}

double spin_cov(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                const EnumCaps& caps) {
    auto e = spin_expectations(g, beta, {a ^ b, a, b}, caps);
    return e[0] - e[1] * e[2];
}

std::pair<double, double> local_function_cov(const LatticeGraph& g, double beta,
                                             const LocalFunction& f, const LocalFunction& h,
                                             const EnumCaps& caps) {
    double z = 0, ef = 0, eh = 0, efh = 0;
    for_each_spin_config(g, beta, caps, [&](std::uint32_t s, double w) {
        double fv = f.eval_global(s), hv = h.eval_global(s);
        z += w;
        ef += w * fv;
        eh += w * hv;
        efh += w * fv * hv;
    });
    double direct = efh / z - (ef / z) * (eh / z);

    auto fc = fourier_coefficients(f, caps);
    auto hc = fourier_coefficients(h, caps);
    double via_coeffs = 0;
    for (std::uint32_t mf = 0; mf < fc.size(); ++mf) {
        if (fc[mf] == 0) continue;
        VertexMask a = 0;
        for (std::size_t i = 0; i < f.support.size(); ++i)
            if (mf & (1u << i)) a |= (1u << f.support[i]);
        for (std::uint32_t mh = 0; mh < hc.size(); ++mh) {
            if (hc[mh] == 0) continue;
            VertexMask b = 0;
            for (std::size_t i = 0; i < h.support.size(); ++i)
                if (mh & (1u << i)) b |= (1u << h.support[i]);
            via_coeffs += fc[mf] * hc[mh] * spin_cov(g, beta, a, b, caps);
        }
    }
    return {direct, via_coeffs};
}

// ---------------------------------------------------------------- HT representation

namespace {

// DFS over subgraphs of `allowed`; multiply-only products keep the sums exact
// to one rounding per factor. cb(odd_degree_mask, tanh_product).
template <typename Cb>
void for_each_subgraph(const LatticeGraph& g, double beta, EdgeMask allowed, Cb&& cb) {
    std::vector<int> edge_ids;
    for (int e = 0; e < g.edge_count(); ++e)
        if (allowed & (EdgeMask(1) << e)) edge_ids.push_back(e);
    std::vector<double> tanh_w(edge_ids.size());
    std::vector<VertexMask> vmask(edge_ids.size());
    for (std::size_t i = 0; i < edge_ids.size(); ++i) {
        tanh_w[i] = std::tanh(beta * g.edges[edge_ids[i]].coupling);
        vmask[i] = (1u << g.edges[edge_ids[i]].u) | (1u << g.edges[edge_ids[i]].v);
    }
    // explicit stack recursion
    struct Frame {
        std::size_t depth;
        VertexMask boundary;
        double weight;
    };
    std::vector<Frame> stack{{0, 0, 1.0}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.depth == edge_ids.size()) {
            cb(fr.boundary, fr.weight);
            continue;
        }
        stack.push_back({fr.depth + 1, fr.boundary, fr.weight});
        stack.push_back(
            {fr.depth + 1, fr.boundary ^ vmask[fr.depth], fr.weight * tanh_w[fr.depth]});
    }
}

}  // namespace

double ht_polynomial(const LatticeGraph& g, double beta, VertexMask a,
                     std::optional<EdgeMask> allowed, const EnumCaps& caps) {
    require(g.edge_count() <= caps.ht_edges, "edge count exceeds HT enumeration cap");
    EdgeMask mask = allowed.value_or((g.edge_count() == 32) ? ~EdgeMask(0)
                                                            : (EdgeMask(1) << g.edge_count()) - 1);
    double acc = 0;
    for_each_subgraph(g, beta, mask, [&](VertexMask boundary, double w) {
        if (boundary == a) acc += w;
    });
    return acc;
}

std::vector<double> ht_source_sums(const LatticeGraph& g, double beta, const EnumCaps& caps) {
    require(g.edge_count() <= caps.ht_edges, "edge count exceeds HT enumeration cap");
    require(g.vertex_count() <= 20, "all-sources table needs <= 20 vertices");
    std::vector<double> out(std::size_t(1) << g.vertex_count(), 0.0);
    EdgeMask all = (EdgeMask(1) << g.edge_count()) - 1;
    for_each_subgraph(g, beta, all, [&](VertexMask boundary, double w) { out[boundary] += w; });
    return out;
}

double ht_expectation(const LatticeGraph& g, double beta, VertexMask a, const EnumCaps& caps) {
    return ht_polynomial(g, beta, a, std::nullopt, caps) /
           ht_polynomial(g, beta, 0, std::nullopt, caps);
}

// ---------------------------------------------------------------- random currents

double cosh_product(const LatticeGraph& g, double beta) {
    double p = 1;
    for (const auto& e : g.edges) p *= std::cosh(beta * e.coupling);
    return p;
}

namespace {

// DFS over per-edge parity classes {zero, even-positive, odd} with exact
// class weights {1, cosh-1, sinh}. cb(source_mask, odd_edge_mask, weight).
template <typename Cb>
void for_each_current_class(const LatticeGraph& g, double beta, Cb&& cb) {
    const int m = g.edge_count();
    std::vector<double> sinh_w(m), coshm1_w(m);
    std::vector<VertexMask> vmask(m);
    for (int e = 0; e < m; ++e) {
        sinh_w[e] = std::sinh(beta * g.edges[e].coupling);
        coshm1_w[e] = std::cosh(beta * g.edges[e].coupling) - 1.0;
        vmask[e] = (1u << g.edges[e].u) | (1u << g.edges[e].v);
    }
    struct Frame {
        int depth;
        VertexMask sources;
        EdgeMask odd;
        double weight;
    };
    std::vector<Frame> stack{{0, 0, 0, 1.0}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.depth == m) {
            cb(fr.sources, fr.odd, fr.weight);
            continue;
        }
        int e = fr.depth;
        stack.push_back({e + 1, fr.sources, fr.odd, fr.weight});                       // zero
        stack.push_back({e + 1, fr.sources, fr.odd, fr.weight * coshm1_w[e]});         // even > 0
        stack.push_back({e + 1, VertexMask(fr.sources ^ vmask[e]),
                         EdgeMask(fr.odd | (EdgeMask(1) << e)), fr.weight * sinh_w[e]});  // odd
    }
}

}  // namespace

double current_partition_function(const LatticeGraph& g, double beta, VertexMask a,
                                  const EnumCaps& caps) {
    require((popcount(a) & 1) == 0, "source set must have even cardinality");
    require(g.edge_count() <= caps.current_class_edges,
            "edge count exceeds current class enumeration cap");
    double acc = 0;
    for_each_current_class(g, beta, [&](VertexMask sources, EdgeMask, double w) {
        if (sources == a) acc += w;
    });
    return acc;
}

double current_expectation(const LatticeGraph& g, double beta, VertexMask a,
                           const EnumCaps& caps) {
    return current_partition_function(g, beta, a, caps) /
           current_partition_function(g, beta, 0, caps);
}

std::vector<double> current_source_sums(const LatticeGraph& g, double beta,
                                        const EnumCaps& caps) {
    require(g.edge_count() <= caps.current_class_edges,
            "edge count exceeds current class enumeration cap");
    require(g.vertex_count() <= 20, "all-sources table needs <= 20 vertices");
    std::vector<double> out(std::size_t(1) << g.vertex_count(), 0.0);
    for_each_current_class(g, beta,
                           [&](VertexMask sources, EdgeMask, double w) { out[sources] += w; });
    return out;
}

// ---------------------------------------------------------------- double currents

namespace {

// source-constrained odd sets with their sinh products
struct OddSets {
    std::vector<EdgeMask> masks;
    std::vector<double> sinh_prod;
};

OddSets odd_sets_with_sources(const LatticeGraph& g, double beta, VertexMask a) {
    OddSets out;
    const int m = g.edge_count();
    std::vector<double> sinh_w(m);
    std::vector<VertexMask> vmask(m);
    for (int e = 0; e < m; ++e) {
        sinh_w[e] = std::sinh(beta * g.edges[e].coupling);
        vmask[e] = (1u << g.edges[e].u) | (1u << g.edges[e].v);
    }
    struct Frame {
        int depth;
        EdgeMask mask;
        VertexMask boundary;
        double weight;
    };
    std::vector<Frame> stack{{0, 0, 0, 1.0}};
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        if (fr.depth == m) {
            if (fr.boundary == a) {
                out.masks.push_back(fr.mask);
                out.sinh_prod.push_back(fr.weight);
            }
            continue;
        }
        int e = fr.depth;
        stack.push_back({e + 1, fr.mask, fr.boundary, fr.weight});
        stack.push_back({e + 1, EdgeMask(fr.mask | (EdgeMask(1) << e)),
                         VertexMask(fr.boundary ^ vmask[e]), fr.weight * sinh_w[e]});
    }
    return out;
}

}  // namespace

double double_current_bracket(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                              const std::function<double(EdgeMask)>& f, const EnumCaps& caps) {
    const int m = g.edge_count();
    require(m <= caps.pair_edges, "edge count exceeds double-current cap");
    require((popcount(a) & 1) == 0 && (popcount(b) & 1) == 0,
            "source sets must have even cardinality");
    const std::size_t n = std::size_t(1) << m;

    // weighted superset transform: after the loop,
    //   zeta[U] = sum_{S >= U} f(S) * prod_{e in S\U} (cosh^2 - 1)
    std::vector<double> zeta(n);
    for (std::size_t s = 0; s < n; ++s) zeta[s] = f(static_cast<EdgeMask>(s));
    for (int e = 0; e < m; ++e) {
        double c = std::cosh(beta * g.edges[e].coupling);
        double w = c * c - 1.0;
        const std::size_t bit = std::size_t(1) << e;
        for (std::size_t u = 0; u < n; ++u)
            if (!(u & bit)) zeta[u] += w * zeta[u | bit];
    }

    std::vector<double> cosh_prod(n, 1.0);
    for (std::size_t s = 1; s < n; ++s) {
        int e = __builtin_ctzl(s);
        cosh_prod[s] = cosh_prod[s & (s - 1)] * std::cosh(beta * g.edges[e].coupling);
    }

    OddSets ga = odd_sets_with_sources(g, beta, a);
    OddSets gb = odd_sets_with_sources(g, beta, b);
    double acc = 0;
    for (std::size_t i = 0; i < ga.masks.size(); ++i)
        for (std::size_t j = 0; j < gb.masks.size(); ++j) {
            EdgeMask g1 = ga.masks[i], g2 = gb.masks[j];
            acc += ga.sinh_prod[i] * gb.sinh_prod[j] * cosh_prod[g1 ^ g2] * zeta[g1 | g2];
        }
    return acc;
}

// ---------------------------------------------------------------- FK representation

void components_of(const LatticeGraph& g, EdgeMask mask, std::vector<int>& roots) {
    static thread_local UnionFind uf;
    uf.reset(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e)
        if (mask & (EdgeMask(1) << e)) uf.unite(g.edges[e].u, g.edges[e].v);
    roots.resize(g.vertex_count());
    for (int v = 0; v < g.vertex_count(); ++v) roots[v] = uf.find(v);
}

bool connected_in(const LatticeGraph& g, EdgeMask mask, int u, int v) {
    std::vector<int> roots;
    components_of(g, mask, roots);
    return roots[u] == roots[v];
}

bool evenly_partitioned(const LatticeGraph& g, EdgeMask mask, VertexMask a) {
    std::vector<int> roots;
    components_of(g, mask, roots);
    // odd-count components of A
    std::uint64_t parity_by_root = 0;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (a & (1u << v)) parity_by_root ^= (std::uint64_t(1) << roots[v]);
    return parity_by_root == 0;
}

namespace {

template <typename Cb>
void for_each_fk_config(const LatticeGraph& g, double beta, const EnumCaps& caps, Cb&& cb) {
    const int m = g.edge_count();
    require(m <= caps.fk_edges, "edge count exceeds FK enumeration cap");
    std::vector<double> open_w(m);
    for (int e = 0; e < m; ++e) open_w[e] = std::exp(2.0 * beta * g.edges[e].coupling) - 1.0;
    const std::size_t n = std::size_t(1) << m;
    UnionFind uf;
    std::vector<int> roots(g.vertex_count());
    for (std::size_t s = 0; s < n; ++s) {
        double w = 1;
        uf.reset(g.vertex_count());
        for (int e = 0; e < m; ++e)
            if (s & (std::size_t(1) << e)) {
                w *= open_w[e];
                uf.unite(g.edges[e].u, g.edges[e].v);
            }
        int k = 0;
        for (int v = 0; v < g.vertex_count(); ++v) {
            roots[v] = uf.find(v);
            if (roots[v] == v) ++k;
        }
        cb(static_cast<EdgeMask>(s), w * std::ldexp(1.0, k), roots);
    }
}

}  // namespace

double fk_probability(const LatticeGraph& g, double beta,
                      const std::function<bool(EdgeMask)>& event, const EnumCaps& caps) {
    double z = 0, num = 0;
    for_each_fk_config(g, beta, caps, [&](EdgeMask s, double w, const std::vector<int>&) {
        z += w;
        if (event(s)) num += w;
    });
    return num / z;
}

Eigen::VectorXd fk_even_expectations(const LatticeGraph& g, double beta,
                                     const std::vector<VertexMask>& sets, const EnumCaps& caps) {
    Eigen::VectorXd num = Eigen::VectorXd::Zero(sets.size());
    double z = 0;
    for_each_fk_config(g, beta, caps, [&](EdgeMask, double w, const std::vector<int>& roots) {
        z += w;
        for (std::size_t i = 0; i < sets.size(); ++i) {
            std::uint64_t parity_by_root = 0;
            for (int v = 0; v < g.vertex_count(); ++v)
                if (sets[i] & (1u << v)) parity_by_root ^= (std::uint64_t(1) << roots[v]);
            if (parity_by_root == 0) num[i] += w;
        }
    });
    return num / z;
}

double fk_expectation(const LatticeGraph& g, double beta, VertexMask a, const EnumCaps& caps) {
    return fk_even_expectations(g, beta, {a}, caps)[0];
}

// ---------------------------------------------------------------- functionals

std::function<double(EdgeMask)> event_one() {
    return [](EdgeMask) { return 1.0; };
}

std::function<double(EdgeMask)> event_connected(const LatticeGraph& g, int u, int v) {
    return [&g, u, v](EdgeMask s) { return connected_in(g, s, u, v) ? 1.0 : 0.0; };
}

std::function<double(EdgeMask)> event_even_partition(const LatticeGraph& g, VertexMask a) {
    return [&g, a](EdgeMask s) { return evenly_partitioned(g, s, a) ? 1.0 : 0.0; };
}

std::function<double(EdgeMask)> event_sets_not_connected(const LatticeGraph& g, VertexMask s1,
                                                         VertexMask s2) {
    return [&g, s1, s2](EdgeMask s) {
        std::vector<int> roots;
        components_of(g, s, roots);
        for (int u = 0; u < g.vertex_count(); ++u) {
            if (!(s1 & (1u << u))) continue;
            for (int v = 0; v < g.vertex_count(); ++v)
                if ((s2 & (1u << v)) && roots[u] == roots[v]) return 0.0;
        }
        return 1.0;
    };
}

// ---------------------------------------------------------------- checks

CheckResult verify_switching(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                             const std::function<double(EdgeMask)>& f, const EnumCaps& caps) {
    CheckResult r;
    r.lhs = double_current_bracket(g, beta, a, b, f, caps);
    auto rhs_f = [&](EdgeMask s) { return evenly_partitioned(g, s, a) ? f(s) : 0.0; };
    r.rhs = double_current_bracket(g, beta, a ^ b, 0, rhs_f, caps);
    r.diff = r.lhs - r.rhs;
    r.ok = close_to(r.lhs, r.rhs);
    return r;
}

CovRoutes truncated_cov(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                        const EnumCaps& caps) {
    CovRoutes out;
    if ((popcount(a) & 1) != (popcount(b) & 1)) return out;   // zero by spin-flip symmetry

    out.spin = spin_cov(g, beta, a, b, caps);

    double z0 = current_partition_function(g, beta, 0, caps);
    auto not_even_a = [&](EdgeMask s) { return evenly_partitioned(g, s, a) ? 0.0 : 1.0; };
    out.current = double_current_bracket(g, beta, a ^ b, 0, not_even_a, caps) / (z0 * z0);

    auto p = fk_even_expectations(g, beta, {VertexMask(a ^ b), a, b}, caps);
    out.fk = p[0] - p[1] * p[2];
    return out;
}

CheckResult verify_ub_decoupled(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                                const EnumCaps& caps) {
    require((a & b) == 0, "A and B must be disjoint");
    require((popcount(a) & 1) == 0 && (popcount(b) & 1) == 0, "|A| and |B| must be even");
    CheckResult r;
    r.lhs = spin_cov(g, beta, a, b, caps);

    double z0 = current_partition_function(g, beta, 0, caps);
    double rhs = 0;
    // iterate over odd subsets of A and of B
    for (VertexMask a1 = a;; a1 = (a1 - 1) & a) {
        if (popcount(a1) & 1) {
            VertexMask a1c = a & ~a1;
            for (VertexMask b1 = b;; b1 = (b1 - 1) & b) {
                if (popcount(b1) & 1) {
                    VertexMask b1c = b & ~b1;
                    double z1 = current_partition_function(g, beta, a1 | b1, caps);
                    double z2 = current_partition_function(g, beta, a1c | b1c, caps);
                    if (z1 > 0 && z2 > 0) {
                        auto nc_a = event_sets_not_connected(g, a1, a1c);
                        auto nc_b = event_sets_not_connected(g, b1, b1c);
                        auto f = [&](EdgeMask s) { return nc_a(s) * nc_b(s); };
                        double bracket = double_current_bracket(g, beta, a1 | b1, a1c | b1c, f, caps);
                        rhs += (z1 / z0) * (z2 / z0) * (bracket / (z1 * z2));
                    }
                }
                if (b1 == 0) break;
            }
        }
        if (a1 == 0) break;
    }
    r.rhs = rhs;
    r.diff = r.rhs - r.lhs;   // slack, expected >= 0
    r.ok = r.diff >= -1e-10;
    return r;
}

CheckResult verify_lb_decoupled(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                                int x, int y, int u, int v, const EnumCaps& caps) {
    require(x != y && (a & (1u << x)) && (a & (1u << y)), "x != y must lie in A");
    require(u != v && (b & (1u << u)) && (b & (1u << v)), "u != v must lie in B");
    CheckResult r;

    double z = 0, p_xu = 0, p_yv = 0;
    std::map<std::pair<VertexMask, VertexMask>, std::pair<double, double>> joint;  // w, w*event
    std::map<VertexMask, double> single1, single2;

    for_each_fk_config(g, beta, caps, [&](EdgeMask s, double w, const std::vector<int>& roots) {
        z += w;
        bool cxu = roots[x] == roots[u];
        bool cyv = roots[y] == roots[v];
        VertexMask c1 = 0, c2 = 0;
        if (cxu) {
            for (int t = 0; t < g.vertex_count(); ++t)
                if (roots[t] == roots[x]) c1 |= (1u << t);
            p_xu += w;
            single1[c1] += w;
        }
        if (cyv) {
            for (int t = 0; t < g.vertex_count(); ++t)
                if (roots[t] == roots[y]) c2 |= (1u << t);
            p_yv += w;
            single2[c2] += w;
        }
        if (cxu && cyv && roots[x] != roots[y]) {
            bool ev = evenly_partitioned(g, s, a | b) && !evenly_partitioned(g, s, a);
            auto& cell = joint[{c1, c2}];
            cell.first += w;
            if (ev) cell.second += w;
        }
    });

    if (p_xu == 0 || p_yv == 0) {
        r.ok = false;
        r.note = "precondition failure: zero pair correlation (never connected)";
        return r;
    }

    double rhs = 0;
    // distinct roots already imply disjoint clusters, so every recorded pair qualifies
    for (const auto& [key, cell] : joint) {
        rhs += (cell.second / cell.first) * (single1.at(key.first) / p_xu) *
               (single2.at(key.second) / p_yv);
    }
    r.rhs = rhs;
    r.lhs = spin_cov(g, beta, a, b, caps) / ((p_xu / z) * (p_yv / z));
    r.diff = r.lhs - r.rhs;   // slack, expected >= 0
    r.ok = r.diff >= -1e-10;
    return r;
}

}  // namespace ozlab
