#include "ozlab/mcmc.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace ozlab {

ChainState init_chain(const LatticeGraph& g, double beta, std::uint64_t seed,
                      std::uint64_t stream) {
    ChainState st;
    st.graph = &g;
    st.beta = beta;
    st.rng = Rng(seed, stream);
    st.spin.resize(g.vertex_count());
    st.bond.assign(g.edge_count(), 0);
    st.roots.resize(g.vertex_count());
    st.open_prob.resize(g.edge_count());
    for (int e = 0; e < g.edge_count(); ++e)
        st.open_prob[e] = 1.0 - std::exp(-2.0 * beta * g.edges[e].coupling);
    for (auto& s : st.spin) s = st.rng.bernoulli(0.5) ? 1 : -1;
    return st;
}

void sw_sweep(ChainState& state) {
    const LatticeGraph& g = *state.graph;
    static thread_local UnionFind uf;
    uf.reset(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        const auto& edge = g.edges[e];
        bool open = state.spin[edge.u] == state.spin[edge.v] &&
                    state.rng.uniform() < state.open_prob[e];
        state.bond[e] = open;
        if (open) uf.unite(edge.u, edge.v);
    }
    for (int v = 0; v < g.vertex_count(); ++v) state.roots[v] = uf.find(v);
    for (int v = 0; v < g.vertex_count(); ++v)
        if (state.roots[v] == v) state.spin[v] = state.rng.bernoulli(0.5) ? 1 : -1;
    for (int v = 0; v < g.vertex_count(); ++v) state.spin[v] = state.spin[state.roots[v]];
    ++state.sweeps_done;
}

std::vector<EstimateRecord> run_chain(const LatticeGraph& g, double beta,
                                      const std::vector<Observable>& observables,
                                      const RunOptions& opts) {
    if (opts.sweeps < opts.batch || opts.batch < 1)
        throw std::invalid_argument("need at least one full batch of sweeps");
    const std::size_t m = observables.size();
    std::vector<EstimateRecord> records(m);
    for (std::size_t i = 0; i < m; ++i) records[i].id = observables[i].id;

    // per-chain batch means, merged in chain order afterwards so the thread
    // count never changes the result
    const long batches = opts.sweeps / opts.batch;
    std::vector<std::vector<std::vector<double>>> per_chain(
        opts.chains, std::vector<std::vector<double>>(m));
    auto run_one = [&](int chain) {
        ChainState st = init_chain(g, beta, opts.seed, static_cast<std::uint64_t>(chain));
        for (long s = 0; s < opts.burnin; ++s) sw_sweep(st);
        for (long b = 0; b < batches; ++b) {
            std::vector<double> acc(m, 0.0);
            for (long s = 0; s < opts.batch; ++s) {
                sw_sweep(st);
                for (std::size_t i = 0; i < m; ++i) acc[i] += observables[i].eval(st.roots);
            }
            for (std::size_t i = 0; i < m; ++i)
                per_chain[chain][i].push_back(acc[i] / double(opts.batch));
        }
    };
    const int jobs = std::max(1, std::min(opts.jobs, opts.chains));
    if (jobs == 1) {
        for (int chain = 0; chain < opts.chains; ++chain) run_one(chain);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (int c = next.fetch_add(1); c < opts.chains; c = next.fetch_add(1)) run_one(c);
            });
        for (auto& th : pool) th.join();
    }

    std::vector<double> sum(m, 0.0);
    long total = 0;
    for (int chain = 0; chain < opts.chains; ++chain) {
        for (std::size_t i = 0; i < m; ++i)
            for (double mb : per_chain[chain][i]) {
                records[i].batch_means.push_back(mb);
                sum[i] += mb * double(opts.batch);
            }
        total += batches * opts.batch;
    }

    for (std::size_t i = 0; i < m; ++i) {
        auto& r = records[i];
        const long nb = static_cast<long>(r.batch_means.size());
        r.count = total;
        r.mean = sum[i] / double(total);
        double var_bm = 0;
        for (double mb : r.batch_means) var_bm += (mb - r.mean) * (mb - r.mean);
        if (nb > 1) {
            var_bm /= double(nb) * double(nb - 1);
            r.stderr_ = std::sqrt(var_bm);
        }
        double p = r.mean;
        double var_naive = std::max(p * (1 - p), 0.0);   // indicator-scale variance
        r.n_eff = (var_bm > 0 && var_naive > 0) ? var_naive / var_bm : double(total);
    }
    return records;
}

namespace {

// every distinct root must occur an even number of times among `members`
bool even_pairing(const std::vector<int>& members, const std::vector<int>& roots) {
    std::array<int, 16> r{};
    int k = 0;
    for (int v : members) r[k++] = roots[v];
    for (int i = 0; i < k; ++i) {
        if (r[i] < 0) continue;
        int count = 0;
        int val = r[i];
        for (int j = i; j < k; ++j)
            if (r[j] == val) {
                ++count;
                r[j] = -1;
            }
        if (count & 1) return false;
    }
    return true;
}

}  // namespace

Observable obs_even_partition(const LatticeGraph& g, VertexMask a, const std::string& id) {
    std::vector<int> members;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (a & (1u << v)) members.push_back(v);
    if (members.size() > 16) throw std::invalid_argument("observable set too large");
    return {id, [members](const std::vector<int>& roots) {
                return even_pairing(members, roots) ? 1.0 : 0.0;
            }};
}

Observable obs_connected(int x, int y, const std::string& id) {
    return {id, [x, y](const std::vector<int>& roots) {
                return roots[x] == roots[y] ? 1.0 : 0.0;
            }};
}

Observable obs_cross_pairing(int a1, int a2, int b1, int b2, const std::string& id) {
    return {id, [a1, a2, b1, b2](const std::vector<int>& roots) {
                int r1 = roots[a1], r2 = roots[a2], r3 = roots[b1], r4 = roots[b2];
                if (r1 == r2) return 0.0;
                bool paired = (r1 == r3 && r2 == r4) || (r1 == r4 && r2 == r3);
                return paired ? 1.0 : 0.0;
            }};
}

EstimateRecord estimate_two_point(const LatticeGraph& g, double beta, int x, int y,
                                  const RunOptions& opts) {
    if (x == y) {
        EstimateRecord r;
        r.id = "two_point_equal";
        r.mean = 1.0;
        r.count = opts.sweeps;
        return r;
    }
    auto records = run_chain(g, beta, {obs_connected(x, y, "two_point")}, opts);
    return records[0];
}

EvenCovEstimate estimate_even_cov(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                                  const RunOptions& opts) {
    if (a & b) throw std::invalid_argument("A and B must be disjoint");
    if ((__builtin_popcount(a) & 1) || (__builtin_popcount(b) & 1))
        throw std::invalid_argument("|A| and |B| must be even");
    std::vector<int> av, bv;
    for (int v = 0; v < g.vertex_count(); ++v) {
        if (a & (1u << v)) av.push_back(v);
        if (b & (1u << v)) bv.push_back(v);
    }
    std::vector<Observable> obs{
        obs_even_partition(g, a | b, "p_union"),
        obs_even_partition(g, a, "p_a"),
        obs_even_partition(g, b, "p_b"),
    };
    std::vector<int> unionv = av;
    unionv.insert(unionv.end(), bv.begin(), bv.end());
    obs.push_back({"cross", [av, unionv](const std::vector<int>& roots) {
                       if (even_pairing(av, roots)) return 0.0;   // E_A holds, not a cross event
                       return even_pairing(unionv, roots) ? 1.0 : 0.0;
                   }});

    auto records = run_chain(g, beta, obs, opts);
    EvenCovEstimate out;
    out.p_union = records[0];
    out.p_a = records[1];
    out.p_b = records[2];
    out.cross = records[3];

    // split-block product: A from odd batches, B from even ones, symmetrized
    const auto& am = out.p_a.batch_means;
    const auto& bm = out.p_b.batch_means;
    double a_odd = 0, a_even = 0, b_odd = 0, b_even = 0;
    long n_odd = 0, n_even = 0;
    for (std::size_t i = 0; i < am.size(); ++i) {
        if (i % 2) {
            a_odd += am[i];
            b_odd += bm[i];
            ++n_odd;
        } else {
            a_even += am[i];
            b_even += bm[i];
            ++n_even;
        }
    }
    if (n_odd == 0 || n_even == 0) throw std::invalid_argument("need at least two batches");
    double product = 0.5 * ((a_odd / n_odd) * (b_even / n_even) +
                            (a_even / n_even) * (b_odd / n_odd));
    out.cov = out.p_union.mean - product;

    // delta-method error through per-batch linearization
    double pa = out.p_a.mean, pb = out.p_b.mean;
    const auto& um = out.p_union.batch_means;
    double lin_mean = 0;
    std::vector<double> lin(um.size());
    for (std::size_t i = 0; i < um.size(); ++i) {
        lin[i] = um[i] - pa * bm[i] - pb * am[i];
        lin_mean += lin[i];
    }
    lin_mean /= double(lin.size());
    double var = 0;
    for (double l : lin) var += (l - lin_mean) * (l - lin_mean);
    if (lin.size() > 1) var /= double(lin.size()) * double(lin.size() - 1);
    out.cov_stderr = std::sqrt(var);
    return out;
}

XiEstimate estimate_xi(const CouplingSpec& spec, const Eigen::VectorXd& u,
                       const std::vector<int>& n_list, int box_side, const RunOptions& opts) {
    XiEstimate out;
    int n_max = 0;
    for (int n : n_list) n_max = std::max(n, n_max);
    if (box_side < 4 * n_max)
        throw std::invalid_argument("box side must be at least 4 * max(n)");

    LatticeGraph g = build_box(spec, box_side / 2);
    std::map<std::vector<int>, int> index;
    for (int v = 0; v < g.vertex_count(); ++v) index.emplace(g.coords[v], v);
    std::vector<int> origin_coord(spec.d, 0);
    int origin = index.at(origin_coord);

    std::vector<Observable> obs;
    for (int n : n_list) {
        auto target = lattice_point(n, u);
        auto it = index.find(target);
        if (it == index.end()) throw std::invalid_argument("lattice point outside the box");
        obs.push_back(obs_connected(origin, it->second, "two_point_n" + std::to_string(n)));
    }
    out.records = run_chain(g, spec.beta, obs, opts);

    std::vector<double> ns, ys, ws;
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        out.ns.push_back(n_list[i]);
        const auto& r = out.records[i];
        if (r.mean <= 0) {
            out.indeterminate = true;
            out.note = "nonpositive estimate at n = " + std::to_string(n_list[i]) +
                       " (signal below the noise floor)";
            continue;
        }
        ns.push_back(n_list[i]);
        ys.push_back(r.mean);
        ws.push_back(r.stderr_ > 0 ? r.mean / r.stderr_ : 1.0);   // 1/sigma(log y)
    }
    if (out.indeterminate || ns.size() < 3) {
        out.indeterminate = true;
        if (out.note.empty()) out.note = "too few usable points";
        return out;
    }
    out.fit = fit_rate(ns, ys, (spec.d - 1) / 2.0, ws);
    return out;
}

std::vector<ValidationRow> validate_against_exact(const LatticeGraph& g, double beta,
                                                  const std::vector<VertexMask>& sets,
                                                  const RunOptions& opts, const EnumCaps& caps) {
    std::vector<Observable> obs;
    for (std::size_t i = 0; i < sets.size(); ++i)
        obs.push_back(obs_even_partition(g, sets[i], "E_A_" + std::to_string(i)));
    auto records = run_chain(g, beta, obs, opts);
    Eigen::VectorXd exact = spin_expectations(g, beta, sets, caps);

    std::vector<ValidationRow> rows;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        ValidationRow row;
        row.id = records[i].id;
        row.mc = records[i].mean;
        row.stderr_ = records[i].stderr_;
        row.exact = exact[i];
        row.zscore = row.stderr_ > 0 ? (row.mc - row.exact) / row.stderr_ : 0.0;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ozlab
