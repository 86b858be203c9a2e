#include "ozlab/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ozlab {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double lat_norm(const Lateral& lat, int ld) {
    double s = 0;
    for (int i = 0; i < ld; ++i) s += double(lat[i]) * lat[i];
    return std::sqrt(s);
}

}  // namespace

int WalkModel::max_par() const {
    int m = 0;
    for (const auto& s : steps) m = std::max(m, s.par);
    return m;
}

int WalkModel::max_lat() const {
    int m = 0;
    for (const auto& s : steps)
        for (int i = 0; i < lat_dim(); ++i) m = std::max(m, std::abs(s.lat[i]));
    return m;
}

bool WalkModel::coordinate_symmetric() const {
    for (const auto& s : steps)
        for (int i = 0; i < lat_dim(); ++i) {
            Lateral flipped = s.lat;
            flipped[i] = -flipped[i];
            bool found = false;
            for (const auto& t : steps)
                if (t.par == s.par && t.lat == flipped && std::abs(t.prob - s.prob) <= 1e-15) {
                    found = true;
                    break;
                }
            if (!found) return false;
        }
    return true;
}

std::vector<std::string> validate_model(const WalkModel& model) {
    std::vector<std::string> violations;
    const int ld = model.lat_dim();
    if (model.d < 2) violations.push_back("dimension must be at least 2");
    if (ld > 3) violations.push_back("lateral dimension above 3 not supported");
    if (!(model.delta > 0 && model.delta < 1.0 / std::sqrt(2.0)))
        violations.push_back("delta must lie in (0, 1/sqrt(2))");
    if (model.steps.empty()) violations.push_back("step distribution is empty");

    double total = 0;
    bool has_zero_lat = false;
    std::array<bool, 3> has_unit{false, false, false};
    int par_gcd = 0;
    for (const auto& s : model.steps) {
        total += s.prob;
        if (!(s.prob > 0)) violations.push_back("step probabilities must be positive");
        if (s.par < 1) violations.push_back("parallel increments must be positive integers");
        par_gcd = std::gcd(par_gcd, s.par);
        if (s.par < model.delta / 2.0 * lat_norm(s.lat, ld))
            violations.push_back("cone property violated on a support point");
        bool zero = true;
        for (int i = 0; i < ld; ++i)
            if (s.lat[i] != 0) zero = false;
        if (zero) has_zero_lat = true;
        for (int i = 0; i < ld; ++i) {
            bool unit = std::abs(s.lat[i]) == 1;
            for (int k = 0; k < ld; ++k)
                if (k != i && s.lat[k] != 0) unit = false;
            if (unit) has_unit[i] = true;
        }
        // global lateral sign flip must be weight-preserving
        Lateral flipped = s.lat;
        for (int i = 0; i < ld; ++i) flipped[i] = -flipped[i];
        bool found = false;
        for (const auto& t : model.steps)
            if (t.par == s.par && t.lat == flipped && std::abs(t.prob - s.prob) <= 1e-15)
                found = true;
        if (!found) violations.push_back("lateral sign symmetry violated on a support point");
    }
    if (std::abs(total - 1.0) > 1e-12) violations.push_back("step probabilities must sum to 1");
    if (par_gcd != 1) violations.push_back("parallel increments must have gcd 1 (aperiodicity)");
    if (!has_zero_lat) violations.push_back("need a zero lateral step (lateral aperiodicity)");
    for (int i = 0; i < ld; ++i)
        if (!has_unit[i])
            violations.push_back("need a +-e_i lateral step in coordinate " + std::to_string(i) +
                                 " (lateral irreducibility)");
    return violations;
}

WalkModel make_lazy_model(int d, double delta, double laziness) {
    require(laziness > 0 && laziness <= 1, "laziness must lie in (0, 1]");
    WalkModel model;
    model.d = d;
    model.delta = delta;
    model.id = laziness == 1.0 ? "lazy" : "lazy" + std::to_string(laziness);
    const int ld = d - 1;
    const int options = 2 * ld + 1;   // 0 and +-e_i
    auto add_block = [&](int par, double par_prob) {
        if (par_prob <= 0) return;
        WalkStep s;
        s.par = par;
        s.prob = par_prob / options;
        model.steps.push_back(s);   // zero lateral
        for (int i = 0; i < ld; ++i)
            for (int sign : {+1, -1}) {
                WalkStep t;
                t.par = par;
                t.lat[i] = sign;
                t.prob = par_prob / options;
                model.steps.push_back(t);
            }
    };
    add_block(1, laziness);
    add_block(2, 1.0 - laziness);
    auto violations = validate_model(model);
    require(violations.empty(), "invalid walk model: " + (violations.empty() ? "" : violations[0]));
    return model;
}

WalkModel make_geom_model(int d, double delta) {
    WalkModel model = make_lazy_model(d, delta, 0.7);
    model.id = "geom";
    return model;
}

WalkModel make_model(const std::string& name, int d, double delta) {
    if (name == "lazy") return make_lazy_model(d, delta);
    if (name == "geom") return make_geom_model(d, delta);
    throw std::invalid_argument("unknown walk model: " + name);
}

// ---------------------------------------------------------------- DP domain

namespace {

// Lateral grid over either the sign-reflected domain [0,R]^ld (valid for
// per-coordinate symmetric models started at the origin) or the full signed
// box [-R,R]^ld. Gather semantics: reads outside the box contribute nothing,
// which is exactly the truncation whose mass the leak ledger tracks.
struct Domain {
    int ld = 1;
    int radius = 0;
    bool reflected = true;
    std::array<long, 3> stride{1, 0, 0};
    long entries = 0;

    Domain(int ld_, int radius_, bool reflected_) : ld(ld_), radius(radius_), reflected(reflected_) {
        long w = width();
        stride = {1, 0, 0};
        entries = w;
        for (int i = 1; i < ld; ++i) {
            stride[i] = entries;
            entries *= w;
        }
    }

    long width() const { return reflected ? radius + 1 : 2L * radius + 1; }

    // flat index of a signed lateral point, or -1 when outside the box
    long flat(const Lateral& z) const {
        long idx = 0;
        for (int i = 0; i < ld; ++i) {
            long c = reflected ? std::abs(z[i]) : z[i] + radius;
            if (c < 0 || c > (reflected ? radius : 2L * radius)) return -1;
            idx += c * stride[i];
        }
        return idx;
    }

    long origin() const {
        Lateral z{0, 0, 0};
        return flat(z);
    }

    Eigen::ArrayXd multiplicity() const {
        Eigen::ArrayXd m = Eigen::ArrayXd::Ones(entries);
        if (!reflected) return m;
        long w = width();
        for (long idx = 0; idx < entries; ++idx) {
            long rest = idx;
            double mult = 1;
            for (int i = 0; i < ld; ++i) {
                if (rest % w != 0) mult *= 2;
                rest /= w;
            }
            m[idx] = mult;
        }
        return m;
    }
};

void inner_reflected(double* dst, const double* src, double w, int b, int radius) {
    using Map = Eigen::Map<Eigen::ArrayXd>;
    using CMap = Eigen::Map<const Eigen::ArrayXd>;
    if (b >= 0) {
        for (int z = 0; z < b && z <= radius; ++z) {
            int s = b - z;
            if (s <= radius) dst[z] += w * src[s];
        }
        if (b <= radius) Map(dst + b, radius - b + 1) += w * CMap(src, radius - b + 1);
    } else {
        int m = -b;
        if (m <= radius) Map(dst, radius - m + 1) += w * CMap(src + m, radius - m + 1);
    }
}

void inner_full(double* dst, const double* src, double w, int b, long width) {
    using Map = Eigen::Map<Eigen::ArrayXd>;
    using CMap = Eigen::Map<const Eigen::ArrayXd>;
    if (b >= 0) {
        if (b < width) Map(dst + b, width - b) += w * CMap(src, width - b);
    } else {
        if (-b < width) Map(dst, width + b) += w * CMap(src - b, width + b);
    }
}

// dst += w * (src shifted by lateral offset b)
void add_shifted(const Domain& dom, Eigen::ArrayXd& dst, const Eigen::ArrayXd& src, double w,
                 const Lateral& b) {
    const long width = dom.width();
    auto outer_src = [&](long z, int i) -> long {
        if (dom.reflected) {
            long s = std::abs(z - b[i]);
            return s <= dom.radius ? s : -1;
        }
        long s = z - b[i];
        return (s >= 0 && s < width) ? s : -1;
    };
    if (dom.ld == 1) {
        if (dom.reflected)
            inner_reflected(dst.data(), src.data(), w, b[0], dom.radius);
        else
            inner_full(dst.data(), src.data(), w, b[0], width);
        return;
    }
    if (dom.ld == 2) {
        for (long z1 = 0; z1 < width; ++z1) {
            long s1 = outer_src(z1, 1);
            if (s1 < 0) continue;
            if (dom.reflected)
                inner_reflected(dst.data() + z1 * width, src.data() + s1 * width, w, b[0],
                                dom.radius);
            else
                inner_full(dst.data() + z1 * width, src.data() + s1 * width, w, b[0], width);
        }
        return;
    }
    for (long z2 = 0; z2 < width; ++z2) {
        long s2 = outer_src(z2, 2);
        if (s2 < 0) continue;
        for (long z1 = 0; z1 < width; ++z1) {
            long s1 = outer_src(z1, 1);
            if (s1 < 0) continue;
            long doff = (z2 * width + z1) * width;
            long soff = (s2 * width + s1) * width;
            if (dom.reflected)
                inner_reflected(dst.data() + doff, src.data() + soff, w, b[0], dom.radius);
            else
                inner_full(dst.data() + doff, src.data() + soff, w, b[0], width);
        }
    }
}

constexpr long kMaxGridEntries = 24'000'000;   // 192 MB per level array
constexpr long kExactPreferredEntries = 2'000'000;

// Smallest radius whose Chernoff tail bound keeps the total dropped mass
// below `target` over n_max levels (at most n_max steps since par >= 1).
int chernoff_radius(const WalkModel& model, int n_max, double target) {
    const int ld = model.lat_dim();
    auto log_mgf_max = [&](double lambda) {
        double worst = 0;
        for (int i = 0; i < ld; ++i) {
            double m = 0;
            for (const auto& s : model.steps) m += s.prob * std::exp(lambda * s.lat[i]);
            worst = std::max(worst, std::log(m));
        }
        return worst;
    };
    auto bound = [&](double radius) {
        double best = 1e300;
        for (double lambda = 1.0 / 64; lambda <= 16; lambda *= 1.1) {
            double exponent = -lambda * radius + n_max * log_mgf_max(lambda);
            best = std::min(best, exponent);
        }
        return std::log(2.0 * ld * n_max) + best;   // union over levels, sides, coordinates
    };
    double log_target = std::log(target);
    long lo = 1, hi = 2;
    while (bound(double(hi)) > log_target && hi < (1L << 30)) hi *= 2;
    while (lo + 1 < hi) {
        long mid = (lo + hi) / 2;
        if (bound(double(mid)) > log_target)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<int>(hi);
}

struct DpPass {
    Eigen::ArrayXd value_at_origin;      // per level
    Eigen::ArrayXd leak_cumulative;      // per level
    std::map<std::vector<int>, Eigen::ArrayXd> slices;
};

Lateral lateral_from(const std::vector<int>& z, int ld) {
    require(static_cast<int>(z.size()) == ld, "lateral vector has wrong dimension");
    Lateral out{0, 0, 0};
    for (int i = 0; i < ld; ++i) out[i] = z[i];
    return out;
}

// Mass of src (in full-lattice units) that a lateral offset b would push
// through the box boundary in coordinate `coord`. Summed over the boundary
// strip only, so the bookkeeping costs nothing against the DP itself.
double exit_mass(const Domain& dom, const Eigen::ArrayXd& src, const Eigen::ArrayXd& mult,
                 int coord, int b) {
    if (b == 0) return 0.0;
    const long width = dom.width();
    const long stride = dom.stride[coord];
    const long blocks = dom.entries / (stride * width);
    const int m = std::abs(b);
    double acc = 0;
    auto slab_sum = [&](long v, double scale) {
        for (long blk = 0; blk < blocks; ++blk) {
            long base = blk * stride * width + v * stride;
            acc += scale * (Eigen::Map<const Eigen::ArrayXd>(src.data() + base, stride) *
                            Eigen::Map<const Eigen::ArrayXd>(mult.data() + base, stride))
                               .sum();
        }
    };
    if (dom.reflected) {
        // a stored cell with y != 0 represents both signs; one sign exits
        for (long y = std::max<long>(dom.radius - m + 1, 0); y <= dom.radius; ++y)
            slab_sum(y, y == 0 ? 1.0 : 0.5);
    } else if (b > 0) {
        for (long v = width - m; v < width; ++v) slab_sum(v, 1.0);
    } else {
        for (long v = 0; v < m; ++v) slab_sum(v, 1.0);
    }
    return acc;
}

// One visit-measure pass. With `taboo`, lateral-origin mass at levels >= 1 is
// recorded and removed before it propagates (start mass at level 0 survives).
// With `exact_box` no mass can reach the boundary and the ledger stays zero.
DpPass run_dp(const WalkModel& model, const Domain& dom, const Lateral& start, int n_max,
              bool taboo, const std::vector<std::vector<int>>& slice_zs, bool exact_box) {
    const int hist = model.max_par();
    std::vector<Eigen::ArrayXd> ring(hist + 1);
    for (auto& g : ring) g = Eigen::ArrayXd::Zero(dom.entries);
    Eigen::ArrayXd mult = dom.multiplicity();

    DpPass out;
    out.value_at_origin = Eigen::ArrayXd::Zero(n_max + 1);
    out.leak_cumulative = Eigen::ArrayXd::Zero(n_max + 1);
    for (const auto& z : slice_zs) out.slices[z] = Eigen::ArrayXd::Zero(n_max + 1);

    long start_idx = dom.flat(start);
    require(start_idx >= 0, "start lateral outside the DP box");
    ring[0][start_idx] = 1.0;
    long origin = dom.origin();
    out.value_at_origin[0] = (start_idx == origin) ? 1.0 : 0.0;
    for (const auto& z : slice_zs) {
        long idx = dom.flat(lateral_from(z, dom.ld));
        if (idx == start_idx) out.slices[z][0] = 1.0;
    }

    double leak_acc = 0;
    for (int t = 1; t <= n_max; ++t) {
        Eigen::ArrayXd& cur = ring[t % (hist + 1)];
        cur.setZero();
        for (const auto& s : model.steps) {
            if (s.par > t) continue;
            const Eigen::ArrayXd& src = ring[(t - s.par) % (hist + 1)];
            add_shifted(dom, cur, src, s.prob, s.lat);
            if (!exact_box)
                for (int i = 0; i < dom.ld; ++i)
                    leak_acc += s.prob * exit_mass(dom, src, mult, i, s.lat[i]);
        }
        out.leak_cumulative[t] = leak_acc;

        out.value_at_origin[t] = cur[origin];
        for (const auto& z : slice_zs) {
            long idx = dom.flat(lateral_from(z, dom.ld));
            out.slices[z][t] = idx >= 0 ? cur[idx] : 0.0;
        }
        if (taboo) cur[origin] = 0.0;
    }
    return out;
}

struct DomainChoice {
    Domain dom;
    bool exact;   // box covers the whole reachable support
};

DomainChoice make_domain(const WalkModel& model, int n_max, double tolerance, int extra_radius,
                         bool allow_reflected) {
    const int ld = model.lat_dim();
    long exact_radius = static_cast<long>(n_max) * model.max_lat() + extra_radius;
    long cher = chernoff_radius(model, n_max, std::max(tolerance, 1e-300) / 4.0) + extra_radius;
    long radius = std::min(exact_radius, cher);
    bool reflected = allow_reflected && model.coordinate_symmetric() && extra_radius == 0;

    auto entries_for = [&](long r) {
        long w = reflected ? r + 1 : 2 * r + 1;
        long e = 1;
        for (int i = 0; i < ld; ++i) e *= w;
        return e;
    };
    // prefer the exact box when it is small anyway
    if (entries_for(exact_radius) <= kExactPreferredEntries) radius = exact_radius;
    if (entries_for(radius) > kMaxGridEntries)
        throw std::runtime_error(
            "DP tolerance unachievable within the memory budget: required lateral radius " +
            std::to_string(radius));
    return {Domain(ld, static_cast<int>(radius), reflected), radius >= exact_radius};
}

}  // namespace

WalkTables dp_tables(const WalkModel& model, int n_max, double tolerance,
                     const std::vector<std::vector<int>>& slice_zs) {
    require(n_max >= 1, "n_max must be >= 1");
    require(tolerance >= 1e-14, "tolerance must be >= 1e-14");
    auto violations = validate_model(model);
    require(violations.empty(), violations.empty() ? "" : "invalid model: " + violations[0]);

    DomainChoice choice = make_domain(model, n_max, tolerance, 0, true);

    WalkTables tables;
    tables.d = model.d;
    tables.model_id = model.id;
    tables.n_max = n_max;
    tables.tolerance = tolerance;
    tables.radius = choice.dom.radius;
    tables.exact_radius = choice.exact;

    Lateral origin{0, 0, 0};
    DpPass visit = run_dp(model, choice.dom, origin, n_max, false, slice_zs, choice.exact);
    DpPass taboo = run_dp(model, choice.dom, origin, n_max, true, slice_zs, choice.exact);

    tables.u = visit.value_at_origin;
    tables.f = taboo.value_at_origin;
    tables.f[0] = 0.0;   // q_0(0,0) := 0 by convention
    tables.leak_u = visit.leak_cumulative;
    tables.leak_f = taboo.leak_cumulative;
    tables.p_slices.clear();
    for (auto& [z, arr] : visit.slices) tables.p_slices[z] = arr;
    for (auto& [z, arr] : taboo.slices) {
        bool is_origin = true;
        for (int c : z)
            if (c != 0) is_origin = false;
        if (!is_origin) tables.q_slices[z] = arr;
    }

    tables.rbar = Eigen::ArrayXd::Zero(n_max + 1);
    tables.r_weak = Eigen::ArrayXd::Zero(n_max + 1);
    double fsum = 0;
    for (int n = 0; n <= n_max; ++n) {
        fsum += tables.f[n];
        tables.rbar[n] = 1.0 - fsum;
        tables.r_weak[n] = n == 0 ? 1.0 : tables.rbar[n - 1];
    }
    return tables;
}

IdentityCheck verify_renewal(const WalkTables& tables) {
    IdentityCheck check;
    check.ok = true;
    for (int n = 0; n <= tables.n_max; ++n) {
        double acc = 0;
        for (int m = 0; m <= n; ++m) acc += tables.u[m] * tables.rbar[n - m];
        double dev = std::abs(acc - 1.0);
        double allowed = 1e-9 + tables.leak_u[n] + tables.leak_f[n];
        if (dev > allowed) check.ok = false;
        if (dev > check.max_deviation) {
            check.max_deviation = dev;
            check.allowed = allowed;
        }
    }
    return check;
}

IdentityCheck verify_decomposition(const WalkTables& tables, const std::vector<int>& z) {
    bool z_origin = true;
    for (int c : z)
        if (c != 0) z_origin = false;

    const Eigen::ArrayXd& p = z_origin ? tables.u : tables.p_slices.at(z);
    const Eigen::ArrayXd& q = z_origin ? tables.f : tables.q_slices.at(z);

    IdentityCheck check;
    check.ok = true;
    for (int m = z_origin ? 1 : 0; m <= tables.n_max; ++m) {
        double acc = 0;
        for (int t = 0; t <= m; ++t) acc += tables.u[m - t] * q[t];
        double dev = std::abs(acc - p[m]);
        double allowed = 1e-9 + tables.leak_u[m] + tables.leak_f[m];
        if (dev > allowed) check.ok = false;
        if (dev > check.max_deviation) {
            check.max_deviation = dev;
            check.allowed = allowed;
        }
    }
    return check;
}

Eigen::ArrayXd q_from(const WalkModel& model, const std::vector<int>& z,
                      const std::vector<int>& w, int n_max) {
    int extra = 0;
    for (int c : z) extra = std::max(extra, std::abs(c));
    for (int c : w) extra = std::max(extra, std::abs(c));
    DomainChoice choice = make_domain(model, n_max, 1e-13, extra, false);
    DpPass pass =
        run_dp(model, choice.dom, lateral_from(z, choice.dom.ld), n_max, true, {w}, choice.exact);
    return pass.slices.at(w);
}

Eigen::ArrayXd p_slice_fullbox(const WalkModel& model, const std::vector<int>& w, int n_max) {
    int extra = 0;
    for (int c : w) extra = std::max(extra, std::abs(c));
    DomainChoice choice = make_domain(model, n_max, 1e-13, extra, false);
    Lateral origin{0, 0, 0};
    DpPass pass = run_dp(model, choice.dom, origin, n_max, false, {w}, choice.exact);
    return pass.slices.at(w);
}

// ---------------------------------------------------------------- trajectories

Trajectory sample_trajectory(const WalkModel& model, Rng& rng, int min_level) {
    Trajectory traj;
    SpaceTime cur;
    traj.push_back(cur);
    while (cur.par < min_level) {
        double x = rng.uniform();
        double acc = 0;
        const WalkStep* chosen = &model.steps.back();
        for (const auto& s : model.steps) {
            acc += s.prob;
            if (x < acc) {
                chosen = &s;
                break;
            }
        }
        cur.par += chosen->par;
        for (int i = 0; i < model.lat_dim(); ++i) cur.lat[i] += chosen->lat[i];
        traj.push_back(cur);
    }
    return traj;
}

SyncResult synchronize(const Trajectory& t1, const Trajectory& t2) {
    SyncResult out;
    std::size_t i = 0, j = 0;
    while (i < t1.size() && j < t2.size()) {
        if (t1[i].par == t2[j].par) {
            out.first.push_back(t1[i]);
            out.second.push_back(t2[j]);
            ++i;
            ++j;
        } else if (t1[i].par < t2[j].par) {
            ++i;
        } else {
            ++j;
        }
    }
    out.empty = out.first.empty();
    return out;
}

Trajectory difference_walk(const SyncResult& pair) {
    require(pair.first.size() == pair.second.size(), "pair must be synchronized");
    Trajectory diff;
    for (std::size_t k = 0; k < pair.first.size(); ++k) {
        require(pair.first[k].par == pair.second[k].par, "pair must share parallel levels");
        SpaceTime p;
        p.par = pair.first[k].par;
        for (int i = 0; i < 3; ++i) p.lat[i] = pair.first[k].lat[i] - pair.second[k].lat[i];
        diff.push_back(p);
    }
    return diff;
}

// ---------------------------------------------------------------- cones, diamonds

bool in_forward_cone(const Eigen::VectorXd& t, const Eigen::VectorXd& apex, double delta) {
    Eigen::VectorXd r = t - apex;
    return r(0) >= delta * r.norm();
}

bool in_backward_cone(const Eigen::VectorXd& t, const Eigen::VectorXd& apex, double delta) {
    Eigen::VectorXd r = apex - t;
    return r(0) >= delta * r.norm();
}

bool in_diamond(const Eigen::VectorXd& t, const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                double delta) {
    return in_forward_cone(t, v, delta) && in_backward_cone(t, w, delta);
}

bool diamond_necessary_overlap(double lat_norm, int next_par, double delta) {
    return lat_norm < 2.0 * delta * next_par;
}

bool diamonds_intersect_exact(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& v2, const Eigen::VectorXd& w2, double delta) {
    const int d = static_cast<int>(v.size());
    // lateral spread of a delta-cone diamond per unit of parallel extent
    double slope = std::sqrt(1.0 - delta * delta) / delta;
    double lo_par = std::ceil(std::max(v(0), v2(0)));
    double hi_par = std::floor(std::min(w(0), w2(0)));
    if (lo_par > hi_par) return false;

    std::vector<std::pair<long, long>> ranges(d - 1);
    double reach1 = slope * (w(0) - v(0));
    double reach2 = slope * (w2(0) - v2(0));
    double volume = hi_par - lo_par + 1;
    for (int i = 1; i < d; ++i) {
        double lo = std::max(std::min(v(i), w(i)) - reach1, std::min(v2(i), w2(i)) - reach2);
        double hi = std::min(std::max(v(i), w(i)) + reach1, std::max(v2(i), w2(i)) + reach2);
        ranges[i - 1] = {static_cast<long>(std::ceil(lo)), static_cast<long>(std::floor(hi))};
        if (ranges[i - 1].first > ranges[i - 1].second) return false;
        volume *= ranges[i - 1].second - ranges[i - 1].first + 1;
    }
    if (volume > 2e7) throw std::invalid_argument("diamond scan region too large");

    std::vector<long> point(d);
    std::function<bool(int)> scan = [&](int dim) -> bool {
        if (dim == d) {
            Eigen::VectorXd t(d);
            for (int i = 0; i < d; ++i) t(i) = static_cast<double>(point[i]);
            return in_diamond(t, v, w, delta) && in_diamond(t, v2, w2, delta);
        }
        long lo = dim == 0 ? static_cast<long>(lo_par) : ranges[dim - 1].first;
        long hi = dim == 0 ? static_cast<long>(hi_par) : ranges[dim - 1].second;
        for (long c = lo; c <= hi; ++c) {
            point[dim] = c;
            if (scan(dim + 1)) return true;
        }
        return false;
    };
    return scan(0);
}

// ---------------------------------------------------------------- bridge MC

namespace {

// visit-measure field from the origin over all levels 0..L (full signed box)
struct BridgeField {
    Domain dom;
    std::vector<Eigen::ArrayXd> level;

    BridgeField(const WalkModel& model, int top)
        : dom(model.lat_dim(),
              std::min<long>(static_cast<long>(top) * model.max_lat() + 8,
                             chernoff_radius(model, top, 1e-16) + 8),
              false) {
        if (dom.entries * (top + 1) > kMaxGridEntries)
            throw std::runtime_error("bridge field too large; reduce the level");
        const int hist = model.max_par();
        level.assign(top + 1, Eigen::ArrayXd::Zero(dom.entries));
        level[0][dom.origin()] = 1.0;
        for (int t = 1; t <= top; ++t)
            for (const auto& s : model.steps) {
                if (s.par > t) continue;
                add_shifted(dom, level[t], level[t - s.par], s.prob, s.lat);
            }
    }

    double value(int t, const Lateral& z) const {
        if (t < 0) return 0.0;
        long idx = dom.flat(z);
        return idx < 0 ? 0.0 : level[t][idx];
    }
};

Lateral minus(const Lateral& a, const Lateral& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

}  // namespace

McEstimate mc_nonintersection(const WalkModel& model, int level, const std::vector<int>& z,
                              const std::vector<int>& w, long samples, std::uint64_t seed) {
    const int ld = model.lat_dim();
    Lateral z0 = lateral_from(z, ld);
    Lateral wl = lateral_from(w, ld);
    BridgeField field(model, level);
    if (field.value(level, minus(wl, z0)) <= 0)
        throw std::runtime_error("bridge endpoint unreachable at the requested level");

    Rng rng(seed);
    McEstimate est;
    est.samples = samples;
    const double two_delta = 2.0 * model.delta;
    for (long it = 0; it < samples; ++it) {
        int t = 0;
        Lateral c = z0;
        bool ok = true;
        while (t < level) {
            double h = field.value(level - t, minus(wl, c));
            double x = rng.uniform() * h;
            double acc = 0;
            const WalkStep* chosen = nullptr;
            const WalkStep* last_positive = nullptr;
            for (const auto& s : model.steps) {
                Lateral cn = c;
                for (int i = 0; i < ld; ++i) cn[i] += s.lat[i];
                double wgt = s.prob * field.value(level - t - s.par, minus(wl, cn));
                if (wgt > 0) last_positive = &s;
                acc += wgt;
                if (x < acc) {
                    chosen = &s;
                    break;
                }
            }
            if (chosen == nullptr) chosen = last_positive;   // rounding residue at the top
            if (chosen == nullptr) throw std::logic_error("bridge sampler ran out of mass");
            if (!(lat_norm(c, ld) > two_delta * chosen->par)) {
                ok = false;
                break;
            }
            t += chosen->par;
            for (int i = 0; i < ld; ++i) c[i] += chosen->lat[i];
        }
        if (ok) ++est.successes;
    }
    est.estimate = double(est.successes) / double(samples);
    est.stderr_ = std::sqrt(est.estimate * (1.0 - est.estimate) / double(samples));
    return est;
}

McEstimate mc_nonintersection_rejection(const WalkModel& model, int level,
                                        const std::vector<int>& z, const std::vector<int>& w,
                                        long samples, std::uint64_t seed) {
    const int ld = model.lat_dim();
    Lateral z0 = lateral_from(z, ld);
    Lateral wl = lateral_from(w, ld);
    Rng rng(seed);
    const double two_delta = 2.0 * model.delta;
    long accepted = 0, good = 0;
    for (long it = 0; it < samples; ++it) {
        int t = 0;
        Lateral c = z0;
        bool ok = true;
        while (t < level) {
            double x = rng.uniform();
            double acc = 0;
            const WalkStep* chosen = &model.steps.back();
            for (const auto& s : model.steps) {
                acc += s.prob;
                if (x < acc) {
                    chosen = &s;
                    break;
                }
            }
            if (!(lat_norm(c, ld) > two_delta * chosen->par)) ok = false;
            t += chosen->par;
            for (int i = 0; i < ld; ++i) c[i] += chosen->lat[i];
        }
        if (t == level && c == wl) {
            ++accepted;
            if (ok) ++good;
        }
    }
    McEstimate est;
    est.samples = accepted;
    est.successes = good;
    if (accepted == 0) throw std::runtime_error("rejection sampler accepted no bridges");
    est.estimate = double(good) / double(accepted);
    est.stderr_ = std::sqrt(est.estimate * (1.0 - est.estimate) / double(accepted));
    return est;
}

VisitEstimate mc_visit(const WalkModel& model, int n, long samples, std::uint64_t seed) {
    Rng rng(seed);
    const int ld = model.lat_dim();
    long u_hits = 0, f_hits = 0;
    for (long it = 0; it < samples; ++it) {
        int t = 0;
        Lateral c{0, 0, 0};
        bool touched_origin = false;
        while (t < n) {
            double x = rng.uniform();
            double acc = 0;
            const WalkStep* chosen = &model.steps.back();
            for (const auto& s : model.steps) {
                acc += s.prob;
                if (x < acc) {
                    chosen = &s;
                    break;
                }
            }
            t += chosen->par;
            for (int i = 0; i < ld; ++i) c[i] += chosen->lat[i];
            if (t < n && lat_norm(c, ld) == 0) touched_origin = true;
        }
        if (t == n && lat_norm(c, ld) == 0) {
            ++u_hits;
            if (!touched_origin) ++f_hits;
        }
    }
    VisitEstimate out;
    out.u.samples = out.f.samples = samples;
    out.u.successes = u_hits;
    out.f.successes = f_hits;
    out.u.estimate = double(u_hits) / samples;
    out.f.estimate = double(f_hits) / samples;
    out.u.stderr_ = std::sqrt(out.u.estimate * (1 - out.u.estimate) / samples);
    out.f.stderr_ = std::sqrt(out.f.estimate * (1 - out.f.estimate) / samples);
    return out;
}

// ---------------------------------------------------------------- cyclic shift

int first_lateral_argmin(const Increments& incs) {
    int best = 0;
    long cur = 0, min_val = 0;
    for (std::size_t i = 0; i < incs.size(); ++i) {
        cur += incs[i].second;
        if (cur < min_val) {
            min_val = cur;
            best = static_cast<int>(i) + 1;
        }
    }
    return best;
}

Increments cyclic_shift(const Increments& incs, int j0) {
    const std::size_t k = incs.size();
    Increments out(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = incs[(j0 + j) % k];
    return out;
}

// ---------------------------------------------------------------- verdicts

std::vector<ScalingReport> asymptotic_bound_reports(const WalkTables& tables) {
    const int d = tables.d;
    std::vector<ScalingReport> reports;
    std::vector<double> ns, u, f, rbar, fu;
    for (int n = 64; n <= tables.n_max; ++n) {
        ns.push_back(n);
        u.push_back(tables.u[n]);
        f.push_back(tables.f[n]);
        rbar.push_back(tables.rbar[n]);
        fu.push_back(tables.f[n] / tables.u[n]);
    }
    if (ns.empty()) throw std::invalid_argument("tables too short for scaling verdicts");
    const double n_lo = ns.front(), n_hi = ns.back();

    {
        ScalingReport r;
        r.series_id = tables.model_id + "_d" + std::to_string(d) + "_u";
        r.model_form = "u_n * n^{(d-1)/2} in [c-, c+]";
        r.window_lo = n_lo;
        r.window_hi = n_hi;
        auto range = bounded_ratio(ns, u, [&](double n) { return std::pow(n, -(d - 1) / 2.0); });
        r.params["c_minus"] = range.min_ratio;
        r.params["c_plus"] = range.max_ratio;
        r.params["spread"] = range.spread();
        r.pass = range.spread() <= 3.0;
        reports.push_back(r);
    }
    if (d == 2 || d == 3) {
        ScalingReport r;
        r.series_id = tables.model_id + "_d" + std::to_string(d) + "_rbar";
        r.model_form = d == 2 ? "rbar_n * sqrt(n) bounded" : "rbar_n * log(n) bounded";
        r.window_lo = n_lo;
        r.window_hi = n_hi;
        auto ref = [&](double n) {
            return d == 2 ? 1.0 / std::sqrt(n) : 1.0 / std::log(n);
        };
        auto range = bounded_ratio(ns, rbar, ref);
        r.params["c_minus"] = range.min_ratio;
        r.params["c_plus"] = range.max_ratio;
        r.params["spread"] = range.spread();
        r.pass = range.spread() <= 3.0;
        reports.push_back(r);
    }
    {
        ScalingReport r;
        r.series_id = tables.model_id + "_d" + std::to_string(d) + "_f";
        r.window_lo = n_lo;
        r.window_hi = n_hi;
        std::function<double(double)> ref;
        if (d == 2) {
            r.model_form = "f_n * n^{3/2} bounded";
            ref = [](double n) { return std::pow(n, -1.5); };
        } else if (d == 3) {
            r.model_form = "f_n * n log(1+n)^2 bounded";
            ref = [](double n) { return 1.0 / (n * std::log(1 + n) * std::log(1 + n)); };
        } else {
            r.model_form = "f_n * n^{(d-1)/2} bounded";
            ref = [d](double n) { return std::pow(n, -(d - 1) / 2.0); };
        }
        auto range = bounded_ratio(ns, f, ref);
        r.params["c_minus"] = range.min_ratio;
        r.params["c_plus"] = range.max_ratio;
        r.params["spread"] = range.spread();
        r.pass = range.spread() <= 4.0;
        reports.push_back(r);
    }
    {
        ScalingReport r;
        r.series_id = tables.model_id + "_d" + std::to_string(d) + "_fu";
        r.window_lo = n_lo;
        if (d == 2) {
            r.model_form = "log(f/u) slope vs log(n) in [-1.15, -0.85]";
            double hi = std::min<double>(tables.n_max, 4096);
            r.window_hi = hi;
            std::vector<double> wn, wy;
            for (std::size_t i = 0; i < ns.size(); ++i)
                if (ns[i] <= hi) {
                    wn.push_back(ns[i]);
                    wy.push_back(fu[i]);
                }
            auto fit = fit_power(wn, wy);
            r.params["slope"] = fit.exponent;
            r.params["slope_stderr"] = fit.exponent_stderr;
            r.residual = fit.residual_rms;
            r.pass = fit.exponent >= -1.15 && fit.exponent <= -0.85;
        } else if (d == 3) {
            r.model_form = "(f/u) * log(n)^2 max/min <= 4";
            double hi = std::min<double>(tables.n_max, 2048);
            r.window_hi = hi;
            std::vector<double> wn, wy;
            for (std::size_t i = 0; i < ns.size(); ++i)
                if (ns[i] <= hi) {
                    wn.push_back(ns[i]);
                    wy.push_back(fu[i]);
                }
            auto range = bounded_ratio(wn, wy, [](double n) {
                return 1.0 / (std::log(n) * std::log(n));
            });
            r.params["c_minus"] = range.min_ratio;
            r.params["c_plus"] = range.max_ratio;
            r.params["spread"] = range.spread();
            r.pass = range.spread() <= 4.0;
        } else {
            r.model_form = "f/u bounded below: min >= 0.5 * value at n=64";
            double hi = std::min<double>(tables.n_max, 512);
            r.window_hi = hi;
            double at64 = tables.f[64] / tables.u[64];
            double worst = at64;
            for (std::size_t i = 0; i < ns.size(); ++i)
                if (ns[i] <= hi) worst = std::min(worst, fu[i]);
            r.params["value_at_64"] = at64;
            r.params["min_over_window"] = worst;
            r.pass = worst >= 0.5 * at64;
        }
        reports.push_back(r);
    }
    return reports;
}

}  // namespace ozlab
