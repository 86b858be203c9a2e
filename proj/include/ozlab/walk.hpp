#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ozlab/common.hpp"
#include "ozlab/scaling.hpp"

namespace ozlab {

using Lateral = std::array<int, 3>;   // d-1 <= 3 coordinates used

// Directed step: parallel advance >= 1 plus a lateral displacement. Models
// stand in for the effective walk of a long subcritical cluster; the table
// and scaling machinery only sees the abstract step law.
struct WalkStep {
    int par = 1;
    Lateral lat{0, 0, 0};
    double prob = 0;
};

struct WalkModel {
    int d = 2;              // ambient dimension; lateral dimension is d-1
    double delta = 0.4;     // cone parameter, in (0, 1/sqrt(2))
    std::vector<WalkStep> steps;
    std::string id;

    int lat_dim() const { return d - 1; }
    int max_par() const;
    int max_lat() const;    // max per-coordinate |lateral|
    bool coordinate_symmetric() const;   // per-coordinate sign symmetry
};

std::vector<std::string> validate_model(const WalkModel& model);

// X_par = 1 w.p. laziness else 2; lateral uniform on {0, +-e_i}. laziness = 1
// is the pure-lazy model used for all hand-computed values.
WalkModel make_lazy_model(int d, double delta, double laziness = 1.0);
WalkModel make_geom_model(int d, double delta);   // laziness 0.7, id "geom"
WalkModel make_model(const std::string& name, int d, double delta);

// ---- exact level-by-level tables ----

struct WalkTables {
    int d = 2;
    std::string model_id;
    int n_max = 0;
    double tolerance = 0;
    int radius = 0;               // lateral box radius actually used
    bool exact_radius = false;    // true when the box contains the full support
    Eigen::ArrayXd u;             // u[n] = P(visit (n, 0))
    Eigen::ArrayXd f;             // f[n] = P(first lateral-origin return at level n)
    Eigen::ArrayXd rbar;          // rbar[n] = P(first return level > n) = 1 - sum f
    Eigen::ArrayXd r_weak;       // P(first return level >= n) = rbar[n-1]
    Eigen::ArrayXd leak_u;        // cumulative truncation leak of the visit pass
    Eigen::ArrayXd leak_f;        // cumulative truncation leak of the taboo pass
    std::map<std::vector<int>, Eigen::ArrayXd> p_slices;   // z -> p_n(0, z)
    std::map<std::vector<int>, Eigen::ArrayXd> q_slices;   // z -> q_n(0, z), z != 0
};

// Level DP inside a lateral box whose radius comes from the model's exact
// support when affordable, else from a Chernoff bound on the lateral tail;
// mass crossing the box boundary is dropped and recorded per level.
WalkTables dp_tables(const WalkModel& model, int n_max, double tolerance,
                     const std::vector<std::vector<int>>& slice_zs = {});

// max_n | sum_m u_m rbar_{n-m} - 1 | against 1e-9 + accumulated leak
struct IdentityCheck {
    double max_deviation = 0;
    double allowed = 0;
    bool ok = false;
};
IdentityCheck verify_renewal(const WalkTables& tables);
// p_m(0,z) = sum_t u_{m-t} q_t(0,z), exact with q_0(0,0) = 0; the z = 0 case
// starts at m = 1 (the m = 0 term is the convention boundary).
IdentityCheck verify_decomposition(const WalkTables& tables, const std::vector<int>& z);

// q_m(z, w) for general starting lateral z (full-box taboo DP)
Eigen::ArrayXd q_from(const WalkModel& model, const std::vector<int>& z,
                      const std::vector<int>& w, int n_max);
// p_m(0, w) slices from a full-box pass (used by the symmetry test)
Eigen::ArrayXd p_slice_fullbox(const WalkModel& model, const std::vector<int>& w, int n_max);

// ---- trajectories ----

struct SpaceTime {
    int par = 0;
    Lateral lat{0, 0, 0};
};
using Trajectory = std::vector<SpaceTime>;

Trajectory sample_trajectory(const WalkModel& model, Rng& rng, int min_level);

struct SyncResult {
    Trajectory first;
    Trajectory second;
    bool empty = false;   // no common parallel level
};
SyncResult synchronize(const Trajectory& t1, const Trajectory& t2);
Trajectory difference_walk(const SyncResult& pair);

// ---- cones and diamonds ----

bool in_forward_cone(const Eigen::VectorXd& t, const Eigen::VectorXd& apex, double delta);
bool in_backward_cone(const Eigen::VectorXd& t, const Eigen::VectorXd& apex, double delta);
bool in_diamond(const Eigen::VectorXd& t, const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                double delta);
// the 2*delta screen: lateral distance below 2 delta times the next parallel
// increment (the event whose complement drives the lower-bound experiments)
bool diamond_necessary_overlap(double lat_norm, int next_par, double delta);
// oracle: exhaustive lattice-point scan of the bounding region
bool diamonds_intersect_exact(const Eigen::VectorXd& v, const Eigen::VectorXd& w,
                              const Eigen::VectorXd& v2, const Eigen::VectorXd& w2, double delta);

// ---- bridge Monte Carlo ----

struct McEstimate {
    double estimate = 0;
    double stderr_ = 0;
    long samples = 0;
    long successes = 0;
};

// P( |S_perp_k| > 2 delta X_par_{k+1} for all k before reaching level L,
//   conditioned on visiting (L, w) from (0, z) ). Bridges are drawn by
// DP-guided sequential sampling: exact, rejection-free.
McEstimate mc_nonintersection(const WalkModel& model, int level, const std::vector<int>& z,
                              const std::vector<int>& w, long samples, std::uint64_t seed);
// rejection-sampling oracle for small levels
McEstimate mc_nonintersection_rejection(const WalkModel& model, int level,
                                        const std::vector<int>& z, const std::vector<int>& w,
                                        long samples, std::uint64_t seed);

// free-walk estimates of u_n and f_n for DP cross-validation
struct VisitEstimate {
    McEstimate u;
    McEstimate f;
};
VisitEstimate mc_visit(const WalkModel& model, int n, long samples, std::uint64_t seed);

// ---- cyclic shift (d = 2 lower-bound device) ----

using Increments = std::vector<std::pair<int, int>>;   // (par, lat) steps

int first_lateral_argmin(const Increments& incs);
Increments cyclic_shift(const Increments& incs, int j0);

// ---- scaling verdicts over the tables ----

std::vector<ScalingReport> asymptotic_bound_reports(const WalkTables& tables);

}  // namespace ozlab
