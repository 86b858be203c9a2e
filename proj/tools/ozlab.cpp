// Command-line front end. Subcommands bind the exact, walk and Monte Carlo
// engines to CSV/JSON artifacts; all arithmetic lives in the library.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ozlab/common.hpp"
#include "ozlab/gibbs_exact.hpp"
#include "ozlab/htpath.hpp"
#include "ozlab/lattice.hpp"
#include "ozlab/mcmc.hpp"
#include "ozlab/scaling.hpp"
#include "ozlab/walk.hpp"

using namespace ozlab;

namespace {

int default_jobs() {
    if (const char* env = std::getenv("OZLAB_JOBS")) {
        int j = std::atoi(env);
        if (j > 0) return j;
    }
    return 1;
}

std::string mask_to_string(VertexMask m) {
    std::string s = "{";
    bool first = true;
    for (int v = 0; v < 32; ++v)
        if (m & (1u << v)) {
            if (!first) s += " ";
            s += std::to_string(v);
            first = false;
        }
    return s + "}";
}

struct SuiteStatus {
    long rows = 0;
    long failures = 0;
    void count(bool pass) {
        ++rows;
        if (!pass) ++failures;
    }
};

// -------------------------------------------------- verify exact

int cmd_verify_exact(const std::string& out_path, int betas, std::uint64_t seed) {
    Rng rng(seed);
    CsvWriter csv(out_path,
                  {"graph_id", "identity_id", "beta", "lhs", "rhs", "abs_diff", "verdict"},
                  {"command=verify exact", "betas=" + std::to_string(betas),
                   "seed=" + std::to_string(seed)});
    SuiteStatus status;
    auto emit = [&](const std::string& graph, const std::string& id, double beta, double lhs,
                    double rhs, bool pass) {
        csv.row({graph, id, fmt17(beta), fmt17(lhs), fmt17(rhs), fmt17(std::abs(lhs - rhs)),
                 pass ? "pass" : "FAIL"});
        status.count(pass);
    };

    for (const auto& g : library_graphs()) {
        auto sets = all_even_subsets(g.vertex_count());
        for (int trial = 0; trial < betas; ++trial) {
            double beta = 1e-6 + (1.0 - 1e-6) * rng.uniform();
            auto spin = spin_expectations(g, beta, sets);
            auto fk = fk_even_expectations(g, beta, sets);
            auto ht = ht_source_sums(g, beta);
            auto cur = current_source_sums(g, beta);
            double worst_ht = 0, worst_fk = 0, worst_cur = 0;
            for (std::size_t i = 0; i < sets.size(); ++i) {
                worst_ht = std::max(worst_ht, rel_diff(spin[i], ht[sets[i]] / ht[0]));
                worst_cur = std::max(worst_cur, rel_diff(spin[i], cur[sets[i]] / cur[0]));
                worst_fk = std::max(worst_fk, rel_diff(spin[i], fk[i]));
            }
            emit(g.id, "repr_spin_vs_ht_maxrel", beta, worst_ht, 0, worst_ht <= 1e-10);
            emit(g.id, "repr_spin_vs_current_maxrel", beta, worst_cur, 0, worst_cur <= 1e-10);
            emit(g.id, "repr_spin_vs_fk_maxrel", beta, worst_fk, 0, worst_fk <= 1e-10);

            // switching and covariance identities on canonical sets
            VertexMask a = sets[sets.size() / 2];
            VertexMask b = sets[sets.size() / 3];
            auto sw = verify_switching(g, beta, a, b, event_one());
            emit(g.id, "switching_" + mask_to_string(a) + mask_to_string(b), beta, sw.lhs, sw.rhs,
                 sw.ok);
            auto routes = truncated_cov(g, beta, a, b);
            emit(g.id, "cov_spin_vs_current", beta, routes.spin, routes.current,
                 rel_diff(routes.spin, routes.current) <= 1e-10);
            emit(g.id, "cov_spin_vs_fk", beta, routes.spin, routes.fk,
                 rel_diff(routes.spin, routes.fk) <= 1e-10);
        }
    }
    std::cout << (status.failures == 0 ? "PASS" : "FAIL") << " verify exact: " << status.rows
              << " rows, " << status.failures << " failures\n";
    return status.failures == 0 ? 0 : 1;
}

// -------------------------------------------------- verify htpath

int cmd_verify_htpath(const std::string& out_path, int betas, std::uint64_t seed) {
    Rng rng(seed);
    CsvWriter csv(out_path,
                  {"graph_id", "A", "x", "y", "gamma_id", "p_extracted", "p_formula", "verdict"},
                  {"command=verify htpath", "betas=" + std::to_string(betas),
                   "seed=" + std::to_string(seed)});
    SuiteStatus status;

    for (const auto& g : library_graphs()) {
        if (g.edge_count() > 10) continue;
        auto evens = all_even_subsets(g.vertex_count());
        for (int trial = 0; trial < betas; ++trial) {
            double beta = 0.05 + 0.9 * rng.uniform();
            VertexMask a = evens[rng.below(evens.size())];
            if (a == 0) continue;
            int x = __builtin_ctz(a);
            PathLaw law = path_law(g, beta, a, x);
            for (std::size_t i = 0; i < law.entries.size(); ++i) {
                const auto& entry = law.entries[i];
                bool pass = rel_diff(entry.p_extracted, entry.p_formula) <= 1e-10;
                csv.row({g.id, mask_to_string(a), std::to_string(x),
                         std::to_string(entry.endpoint), "gamma" + std::to_string(i),
                         fmt17(entry.p_extracted), fmt17(entry.p_formula),
                         pass ? "pass" : "FAIL"});
                status.count(pass);
            }
            bool mass_ok = std::abs(law.total_mass - 1.0) <= 1e-10;
            csv.row({g.id, mask_to_string(a), std::to_string(x), "-", "total_mass",
                     fmt17(law.total_mass), fmt17(1.0), mass_ok ? "pass" : "FAIL"});
            status.count(mass_ok);

            if (__builtin_popcount(a) >= 2) {
                VertexMask rest = a & ~(1u << x);
                int y = __builtin_ctz(rest);
                auto mono = verify_monotonicity(g, beta, a, x, y);
                csv.row({g.id, mask_to_string(a), std::to_string(x), std::to_string(y),
                         "monotonicity_max_violation", fmt17(mono.max_violation), fmt17(0.0),
                         mono.ok ? "pass" : "FAIL"});
                status.count(mono.ok);
            }
            double parity = verify_parity_coupling(g, beta, a);
            csv.row({g.id, mask_to_string(a), std::to_string(x), "-", "parity_coupling_maxrel",
                     fmt17(parity), fmt17(0.0), parity <= 1e-10 ? "pass" : "FAIL"});
            status.count(parity <= 1e-10);
        }
    }
    std::cout << (status.failures == 0 ? "PASS" : "FAIL") << " verify htpath: " << status.rows
              << " rows, " << status.failures << " failures\n";
    return status.failures == 0 ? 0 : 1;
}

// -------------------------------------------------- walk commands

std::vector<std::string> walk_echo(const std::string& command, int d, const std::string& model,
                                   double delta, int nmax, double tol, std::uint64_t seed) {
    return {"command=" + command,          "d=" + std::to_string(d),
            "model=" + model,              "delta=" + fmt17(delta),
            "nmax=" + std::to_string(nmax), "tol=" + fmt17(tol),
            "seed=" + std::to_string(seed)};
}

int cmd_walk_tables(int d, const std::string& model_name, double delta, int nmax, double tol,
                    const std::string& out_path) {
    WalkModel model = make_model(model_name, d, delta);
    WalkTables t = dp_tables(model, nmax, tol);
    CsvWriter csv(out_path, {"n", "u", "f", "rbar", "leak"},
                  walk_echo("walk tables", d, model_name, delta, nmax, tol, 0));
    for (int n = 0; n <= t.n_max; ++n)
        csv.row({std::to_string(n), fmt17(t.u[n]), fmt17(t.f[n]), fmt17(t.rbar[n]),
                 fmt17(t.leak_u[n] + t.leak_f[n])});
    std::cout << "PASS walk tables: n_max=" << t.n_max << " radius=" << t.radius
              << (t.exact_radius ? " (exact)" : " (truncated)") << "\n";
    return 0;
}

int cmd_walk_verify(int d, const std::string& model_name, double delta, int nmax, double tol,
                    const std::string& out_path) {
    WalkModel model = make_model(model_name, d, delta);
    std::vector<std::vector<int>> slices;
    std::vector<int> z0(d - 1, 0), z3(d - 1, 0);
    z3[0] = 3;
    slices.push_back(z0);
    slices.push_back(z3);
    WalkTables t = dp_tables(model, nmax, tol, slices);

    auto renewal = verify_renewal(t);
    auto dec0 = verify_decomposition(t, z0);
    auto dec3 = verify_decomposition(t, z3);
    auto reports = asymptotic_bound_reports(t);

    bool ok = renewal.ok && dec0.ok && dec3.ok;
    std::vector<ScalingReport> all;
    ScalingReport r1;
    r1.series_id = "renewal_identity";
    r1.model_form = "sum_m u_m rbar_{n-m} = 1";
    r1.window_lo = 0;
    r1.window_hi = nmax;
    r1.params["max_deviation"] = renewal.max_deviation;
    r1.params["allowed"] = renewal.allowed;
    r1.pass = renewal.ok;
    all.push_back(r1);
    ScalingReport r2;
    r2.series_id = "decomposition_identity";
    r2.model_form = "p_m(0,z) = sum_t u_{m-t} q_t(0,z), z in {0, 3e1}";
    r2.window_lo = 0;
    r2.window_hi = nmax;
    r2.params["max_deviation_z0"] = dec0.max_deviation;
    r2.params["max_deviation_z3"] = dec3.max_deviation;
    r2.pass = dec0.ok && dec3.ok;
    all.push_back(r2);
    for (const auto& r : reports) {
        all.push_back(r);
        ok = ok && r.pass;
    }

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        out << reports_to_json(all, walk_echo("walk verify", d, model_name, delta, nmax, tol, 0));
    }
    for (const auto& r : all)
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.series_id << "\n";
    return ok ? 0 : 1;
}

int cmd_walk_mc(int d, const std::string& model_name, double delta, int level, long samples,
                std::uint64_t seed, int z, int w, const std::string& out_path) {
    WalkModel model = make_model(model_name, d, delta);
    std::vector<int> zv(d - 1, 0), wv(d - 1, 0);
    zv[0] = z;
    wv[0] = w;
    auto est = mc_nonintersection(model, level, zv, wv, samples, seed);
    if (!out_path.empty()) {
        CsvWriter csv(out_path, {"L", "estimate", "stderr", "nsamples"},
                      walk_echo("walk mc", d, model_name, delta, level, 0, seed));
        csv.row({std::to_string(level), fmt17(est.estimate), fmt17(est.stderr_),
                 std::to_string(est.samples)});
    }
    std::cout << "PASS walk mc: L=" << level << " estimate=" << fmt17(est.estimate)
              << " stderr=" << fmt17(est.stderr_) << "\n";
    return 0;
}

// -------------------------------------------------- mc commands

int cmd_mc_validate(double beta, const RunOptions& opts, const std::string& out_path) {
    LatticeGraph g = make_grid(3, 3);
    std::vector<VertexMask> sets;
    auto evens = all_even_subsets(g.vertex_count());
    Rng rng(opts.seed + 1);
    sets.push_back(vertex_mask({0, 1}));
    sets.push_back(vertex_mask({0, 8}));
    sets.push_back(vertex_mask({0, 4}));
    sets.push_back(vertex_mask({0, 2, 6, 8}));
    while (sets.size() < 20) {
        VertexMask a = evens[rng.below(evens.size())];
        if (a != 0) sets.push_back(a);
    }
    auto rows = validate_against_exact(g, beta, sets, opts);
    CsvWriter csv(out_path, {"observable", "mc", "stderr", "exact", "zscore", "verdict"},
                  {"command=mc validate", "beta=" + fmt17(beta),
                   "sweeps=" + std::to_string(opts.sweeps), "seed=" + std::to_string(opts.seed)});
    SuiteStatus status;
    for (const auto& row : rows) {
        bool pass = std::abs(row.zscore) <= 4.0;
        csv.row({row.id, fmt17(row.mc), fmt17(row.stderr_), fmt17(row.exact), fmt17(row.zscore),
                 pass ? "pass" : "FAIL"});
        status.count(pass);
    }
    std::cout << (status.failures == 0 ? "PASS" : "FAIL") << " mc validate: " << status.rows
              << " observables, " << status.failures << " outside 4 sigma\n";
    return status.failures == 0 ? 0 : 1;
}

int cmd_mc_xi(const CouplingSpec& spec, int box_side, int n_lo, int n_hi,
              const RunOptions& opts, const std::string& out_path) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(spec.d);
    u(0) = 1.0;
    std::vector<int> ns;
    for (int n = n_lo; n <= n_hi; ++n) ns.push_back(n);
    auto xi = estimate_xi(spec, u, ns, box_side, opts);

    CsvWriter csv(out_path, {"n", "estimate", "stderr", "nsamples"},
                  {"command=mc xi", "beta=" + fmt17(spec.beta), "L=" + std::to_string(box_side),
                   "sweeps=" + std::to_string(opts.sweeps), "seed=" + std::to_string(opts.seed),
                   "chains=" + std::to_string(opts.chains)});
    for (std::size_t i = 0; i < xi.records.size(); ++i)
        csv.row({std::to_string(ns[i]), fmt17(xi.records[i].mean), fmt17(xi.records[i].stderr_),
                 std::to_string(xi.records[i].count)});
    if (xi.indeterminate) {
        std::cout << "FAIL mc xi: indeterminate (" << xi.note << ")\n";
        return 1;
    }
    std::cout << "PASS mc xi: rate=" << fmt17(xi.fit.rate)
              << " rate_stderr=" << fmt17(xi.fit.rate_stderr) << "\n";
    if (xi.fit.rate < 0.05)
        std::cout << "note: fitted rate below 0.05; beta may be too close to criticality\n";
    return 0;
}

int cmd_mc_evencov(const CouplingSpec& spec, int box_side, int n_lo, int n_hi,
                   const RunOptions& opts, const std::string& out_path) {
    LatticeGraph g = build_box(spec, box_side / 2);
    std::map<std::vector<int>, int> index;
    for (int v = 0; v < g.vertex_count(); ++v) index.emplace(g.coords[v], v);
    auto vertex_at = [&](int x0, int x1) {
        std::vector<int> c(spec.d, 0);
        c[0] = x0;
        c[1] = x1;
        return index.at(c);
    };

    CsvWriter csv(out_path, {"n", "estimate", "stderr", "nsamples", "cross", "cross_stderr"},
                  {"command=mc evencov", "beta=" + fmt17(spec.beta),
                   "L=" + std::to_string(box_side), "sweeps=" + std::to_string(opts.sweeps),
                   "seed=" + std::to_string(opts.seed)});
    for (int n = n_lo; n <= n_hi; ++n) {
        int half = n / 2;
        VertexMask a = VertexMask(1u << vertex_at(-half, 0)) | (1u << vertex_at(-half, 1));
        VertexMask b = VertexMask(1u << vertex_at(n - half, 0)) | (1u << vertex_at(n - half, 1));
        auto est = estimate_even_cov(g, spec.beta, a, b, opts);
        csv.row({std::to_string(n), fmt17(est.cov), fmt17(est.cov_stderr),
                 std::to_string(est.p_union.count), fmt17(est.cross.mean),
                 fmt17(est.cross.stderr_)});
    }
    std::cout << "PASS mc evencov: rows written\n";
    return 0;
}

// -------------------------------------------------- report commands

struct WalkCsv {
    std::vector<double> n, u, f, rbar, leak;
};

WalkCsv read_walk_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    WalkCsv out;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::istringstream is(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(is, cell, ',')) cells.push_back(std::stod(cell));
        if (cells.size() < 5) throw std::runtime_error("walk csv must have 5 columns");
        out.n.push_back(cells[0]);
        out.u.push_back(cells[1]);
        out.f.push_back(cells[2]);
        out.rbar.push_back(cells[3]);
        out.leak.push_back(cells[4]);
    }
    return out;
}

int cmd_report_walk(const std::string& in_path, int d, const std::string& out_path) {
    WalkCsv data = read_walk_csv(in_path);
    WalkTables t;
    t.d = d;
    t.model_id = "csv";
    t.n_max = static_cast<int>(data.n.back());
    t.u = Eigen::ArrayXd::Zero(t.n_max + 1);
    t.f = Eigen::ArrayXd::Zero(t.n_max + 1);
    t.rbar = Eigen::ArrayXd::Zero(t.n_max + 1);
    for (std::size_t i = 0; i < data.n.size(); ++i) {
        int n = static_cast<int>(data.n[i]);
        t.u[n] = data.u[i];
        t.f[n] = data.f[i];
        t.rbar[n] = data.rbar[i];
    }
    auto reports = asymptotic_bound_reports(t);
    bool ok = true;
    for (const auto& r : reports) {
        ok = ok && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.series_id << "\n";
    }
    std::ofstream out(out_path);
    out << reports_to_json(reports, {"command=report walk", "in=" + in_path,
                                     "d=" + std::to_string(d)});
    return ok ? 0 : 1;
}

int cmd_report_xi(const std::string& in_path, int d, const std::string& out_path) {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open " + in_path);
    std::vector<double> ns, ys, ws;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::istringstream is(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(is, cell, ',')) cells.push_back(std::stod(cell));
        if (cells.size() < 3) throw std::runtime_error("xi csv must have >= 3 columns");
        if (cells[1] <= 0) continue;
        ns.push_back(cells[0]);
        ys.push_back(cells[1]);
        ws.push_back(cells[2] > 0 ? cells[1] / cells[2] : 1.0);
    }
    if (ns.size() < 3) {
        std::cout << "FAIL report xi: too few usable points\n";
        return 1;
    }
    auto fit = fit_rate(ns, ys, (d - 1) / 2.0, ws);
    ScalingReport r;
    r.series_id = "xi_fit";
    r.model_form = "log y + ((d-1)/2) log n = log C - xi n";
    r.window_lo = ns.front();
    r.window_hi = ns.back();
    r.params["rate"] = fit.rate;
    r.params["rate_stderr"] = fit.rate_stderr;
    r.params["log_const"] = fit.log_const;
    r.residual = fit.residual_rms;
    r.pass = fit.rate > 0;
    std::ofstream out(out_path);
    out << reports_to_json({r}, {"command=report xi", "in=" + in_path});
    std::cout << (r.pass ? "PASS" : "FAIL") << " report xi: rate=" << fmt17(fit.rate) << "\n";
    return r.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification laboratory for subcritical correlation decay"};
    app.require_subcommand(1);

    // verify
    auto* verify = app.add_subcommand("verify", "exact small-graph identity suites");
    verify->require_subcommand(1);
    std::string out_path = "out.csv";
    int betas = 20;
    std::uint64_t seed = 1;
    auto* vexact = verify->add_subcommand("exact", "representation/switching/covariance suite");
    vexact->add_option("--out", out_path, "output CSV path");
    vexact->add_option("--betas", betas, "random betas per graph");
    vexact->add_option("--seed", seed, "RNG seed");
    auto* vht = verify->add_subcommand("htpath", "path extraction and path-law suite");
    vht->add_option("--out", out_path, "output CSV path");
    vht->add_option("--betas", betas, "random (beta, A) draws per graph");
    vht->add_option("--seed", seed, "RNG seed");

    // walk
    auto* walk = app.add_subcommand("walk", "directed difference-walk engine");
    walk->require_subcommand(1);
    int d = 2, nmax = 512;
    double delta = 0.4, tol = 1e-12;
    std::string model = "lazy";
    int level = 256, zlat = 4, wlat = 4;
    long samples = 100000;
    auto add_model_opts = [&](CLI::App* cmd) {
        cmd->add_option("--d", d, "ambient dimension (lateral is d-1)")->check(CLI::Range(2, 4));
        cmd->add_option("--model", model, "lazy|geom");
        cmd->add_option("--delta", delta, "cone parameter in (0, 1/sqrt 2)");
    };
    auto* wtables = walk->add_subcommand("tables", "exact u/f/rbar tables by level DP");
    add_model_opts(wtables);
    wtables->add_option("--nmax", nmax, "table length");
    wtables->add_option("--tol", tol, "total truncation-leak budget");
    wtables->add_option("--out", out_path, "output CSV path");
    auto* wverify = walk->add_subcommand("verify", "renewal/decomposition identities + verdicts");
    add_model_opts(wverify);
    wverify->add_option("--nmax", nmax, "table length");
    wverify->add_option("--tol", tol, "total truncation-leak budget");
    wverify->add_option("--out", out_path, "output JSON path");
    auto* wmc = walk->add_subcommand("mc", "bridge non-intersection estimate");
    add_model_opts(wmc);
    wmc->add_option("--L", level, "bridge level");
    wmc->add_option("--samples", samples, "bridge samples");
    wmc->add_option("--seed", seed, "RNG seed");
    wmc->add_option("--z", zlat, "start lateral offset (first coordinate)");
    wmc->add_option("--w", wlat, "end lateral offset (first coordinate)");
    wmc->add_option("--out", out_path, "output CSV path");

    // mc
    auto* mc = app.add_subcommand("mc", "Swendsen-Wang estimators");
    mc->require_subcommand(1);
    double beta = 0.35;
    int box_side = 32, n_lo = 2, n_hi = 8, chains = 1;
    long sweeps = 20000, burnin = 1000;
    std::string config_path;
    int jobs = default_jobs();
    auto add_mc_opts = [&](CLI::App* cmd) {
        cmd->add_option("--beta", beta, "inverse temperature");
        cmd->add_option("--L", box_side, "box side length");
        cmd->add_option("--sweeps", sweeps, "measurement sweeps per chain");
        cmd->add_option("--burnin", burnin, "burn-in sweeps per chain");
        cmd->add_option("--seed", seed, "RNG seed");
        cmd->add_option("--chains", chains, "independent chains");
        cmd->add_option("--jobs", jobs, "worker threads (default: OZLAB_JOBS or 1)");
        cmd->add_option("--config", config_path, "coupling spec file (key-value format)");
        cmd->add_option("--out", out_path, "output CSV path");
    };
    auto* mval = mc->add_subcommand("validate", "3x3 estimates vs exact enumeration");
    add_mc_opts(mval);
    auto* mxi = mc->add_subcommand("xi", "two-point decay-rate fit");
    add_mc_opts(mxi);
    mxi->add_option("--nmin", n_lo, "smallest distance");
    mxi->add_option("--nmax", n_hi, "largest distance");
    auto* mcov = mc->add_subcommand("evencov", "even-even covariance series");
    add_mc_opts(mcov);
    mcov->add_option("--nmin", n_lo, "smallest distance");
    mcov->add_option("--nmax", n_hi, "largest distance");

    // report
    auto* report = app.add_subcommand("report", "fit verdicts over CSV artifacts");
    report->require_subcommand(1);
    std::string in_path;
    auto* rwalk = report->add_subcommand("walk", "scaling verdicts over a walk tables CSV");
    rwalk->add_option("--in", in_path, "walk tables CSV")->required();
    rwalk->add_option("--d", d, "dimension the tables were computed for");
    rwalk->add_option("--out", out_path, "output JSON path");
    auto* rxi = report->add_subcommand("xi", "rate fit over an xi CSV");
    rxi->add_option("--in", in_path, "xi CSV")->required();
    rxi->add_option("--d", d, "dimension");
    rxi->add_option("--out", out_path, "output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunOptions opts;
        opts.sweeps = sweeps;
        opts.burnin = burnin;
        opts.chains = chains;
        opts.jobs = jobs;
        opts.seed = seed;

        if (vexact->parsed()) return cmd_verify_exact(out_path, betas, seed);
        if (vht->parsed()) return cmd_verify_htpath(out_path, betas, seed);
        if (wtables->parsed()) return cmd_walk_tables(d, model, delta, nmax, tol, out_path);
        if (wverify->parsed()) return cmd_walk_verify(d, model, delta, nmax, tol, out_path);
        if (wmc->parsed())
            return cmd_walk_mc(d, model, delta, level, samples, seed, zlat, wlat, out_path);

        CouplingSpec spec = config_path.empty() ? nn_spec(2, beta) : load_coupling_spec(config_path);
        if (!config_path.empty() && spec.beta <= 0) spec.beta = beta;
        if (config_path.empty()) spec.beta = beta;

        if (mval->parsed()) return cmd_mc_validate(spec.beta, opts, out_path);
        if (mxi->parsed()) return cmd_mc_xi(spec, box_side, n_lo, n_hi, opts, out_path);
        if (mcov->parsed()) return cmd_mc_evencov(spec, box_side, n_lo, n_hi, opts, out_path);
        if (rwalk->parsed()) return cmd_report_walk(in_path, d, out_path);
        if (rxi->parsed()) return cmd_report_xi(in_path, d, out_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
