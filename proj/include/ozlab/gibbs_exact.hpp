#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ozlab/lattice.hpp"

namespace ozlab {

using VertexMask = std::uint32_t;
using EdgeMask = std::uint32_t;

VertexMask vertex_mask(std::initializer_list<int> vertices);
VertexMask vertex_mask(const std::vector<int>& vertices);
std::vector<VertexMask> all_even_subsets(int vertex_count);  // includes the empty set

// Enumeration ceilings. All overridable; the defaults keep every suite in
// this repository within minutes on one core.
struct EnumCaps {
    int spin_vertices = 24;
    int fk_edges = 24;
    int ht_edges = 22;
    int current_class_edges = 15;
    int pair_edges = 12;
    int fourier_support = 16;
};

// f: {-1,+1}^support -> R, table indexed by a bitmask over support positions
// (bit i set means the spin at support[i] is +1).
struct LocalFunction {
    std::vector<int> support;
    Eigen::ArrayXd table;   // size 2^|support|

    double eval_local(std::uint32_t local_mask) const { return table[local_mask]; }
    double eval_global(VertexMask spins) const;
};

// sigma_A as +-1 from a spin bitmask (bit set = +1)
inline int sigma_of(VertexMask a, VertexMask spins) {
    return (__builtin_popcount(a & ~spins) & 1) ? -1 : 1;
}

// Coefficients f_hat indexed by subset masks of the support; the expansion
// f = sum_M f_hat(M) sigma_M is exact and recoverable via reconstruct_local.
Eigen::ArrayXd fourier_coefficients(const LocalFunction& f, const EnumCaps& caps = {});
double reconstruct_local(const std::vector<int>& support, const Eigen::ArrayXd& coeffs,
                         std::uint32_t local_mask);

// ---- spin representation (summation over all 2^V configurations) ----

double spin_expectation(const LatticeGraph& g, double beta, VertexMask a,
                        const EnumCaps& caps = {});
Eigen::VectorXd spin_expectations(const LatticeGraph& g, double beta,
                                  const std::vector<VertexMask>& sets,
                                  const EnumCaps& caps = {});
double spin_cov(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                const EnumCaps& caps = {});
// direct covariance of two local functions, and the same number through the
// coefficient double sum; both returned for cross-checking
std::pair<double, double> local_function_cov(const LatticeGraph& g, double beta,
                                             const LocalFunction& f, const LocalFunction& h,
                                             const EnumCaps& caps = {});

// ---- high-temperature representation ----

// tanh-weight polynomial Zhat^A over subgraphs of `allowed` with odd-degree
// set exactly A. `allowed` defaults to all edges.
double ht_polynomial(const LatticeGraph& g, double beta, VertexMask a,
                     std::optional<EdgeMask> allowed = std::nullopt,
                     const EnumCaps& caps = {});
// Zhat^A for every source set at once, indexed by vertex mask (V <= 20)
std::vector<double> ht_source_sums(const LatticeGraph& g, double beta,
                                   const EnumCaps& caps = {});
double ht_expectation(const LatticeGraph& g, double beta, VertexMask a,
                      const EnumCaps& caps = {});

// ---- random-current representation ----

double cosh_product(const LatticeGraph& g, double beta);
// Z^A, computed exactly by the per-edge parity-class factorization
// (1 / cosh-1 / sinh per class); no truncation of n_e is involved.
double current_partition_function(const LatticeGraph& g, double beta, VertexMask a,
                                  const EnumCaps& caps = {});
double current_expectation(const LatticeGraph& g, double beta, VertexMask a,
                           const EnumCaps& caps = {});
// Z^A for every source set at once, indexed by vertex mask (V <= 20)
std::vector<double> current_source_sums(const LatticeGraph& g, double beta,
                                        const EnumCaps& caps = {});

// Unnormalized double-current bracket Z^A Z^B {F(support of n1+n2)} for
// functionals that depend on the pair only through the positive-edge set of
// n1+n2 and the per-copy source constraints. Exact.
double double_current_bracket(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                              const std::function<double(EdgeMask)>& f,
                              const EnumCaps& caps = {});

// ---- random-cluster (FK) representation ----

// component roots of (V, mask); out[v] = representative vertex of v's cluster
void components_of(const LatticeGraph& g, EdgeMask mask, std::vector<int>& roots);
bool connected_in(const LatticeGraph& g, EdgeMask mask, int u, int v);
bool evenly_partitioned(const LatticeGraph& g, EdgeMask mask, VertexMask a);

double fk_probability(const LatticeGraph& g, double beta,
                      const std::function<bool(EdgeMask)>& event,
                      const EnumCaps& caps = {});
Eigen::VectorXd fk_even_expectations(const LatticeGraph& g, double beta,
                                     const std::vector<VertexMask>& sets,
                                     const EnumCaps& caps = {});
double fk_expectation(const LatticeGraph& g, double beta, VertexMask a,
                      const EnumCaps& caps = {});

// ---- identity / inequality checks ----

struct CheckResult {
    double lhs = 0;
    double rhs = 0;
    double diff = 0;    // lhs - rhs
    bool ok = false;
    std::string note;
};

// Switching identity: Z^A Z^B {F} vs Z^{A xor B} Z^0 {1_{E_A} F}.
CheckResult verify_switching(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                             const std::function<double(EdgeMask)>& f,
                             const EnumCaps& caps = {});

struct CovRoutes {
    double spin = 0;
    double current = 0;
    double fk = 0;
};
// Cov(sigma_A, sigma_B) through spin enumeration, the current formula and the
// FK formula. The three agree to relative 1e-10 on admissible inputs.
CovRoutes truncated_cov(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                        const EnumCaps& caps = {});

// Upper decoupling: Cov(sigma_A, sigma_B) vs the odd-split sum with the
// double-current non-connection probability. slack = rhs - lhs >= 0 expected.
CheckResult verify_ub_decoupled(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                                const EnumCaps& caps = {});

// Lower decoupling: normalized covariance vs the disjoint-cluster-pair sum.
// slack = lhs - rhs >= 0 expected. Fails the precondition when x-u or y-v are
// never connected (zero denominator).
CheckResult verify_lb_decoupled(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                                int x, int y, int u, int v, const EnumCaps& caps = {});

// convenience functionals on union supports
std::function<double(EdgeMask)> event_one();
std::function<double(EdgeMask)> event_connected(const LatticeGraph& g, int u, int v);
std::function<double(EdgeMask)> event_even_partition(const LatticeGraph& g, VertexMask a);
std::function<double(EdgeMask)> event_sets_not_connected(const LatticeGraph& g, VertexMask s1,
                                                         VertexMask s2);

double rel_diff(double x, double y);
// suite tolerance: 1e-10 relative with a 1e-12 absolute floor
bool close_to(double x, double y);
// |x - y| as a fraction of the allowed tolerance (pass iff <= 1)
double tol_excess(double x, double y);

}  // namespace ozlab
