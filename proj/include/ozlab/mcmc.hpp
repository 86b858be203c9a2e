#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ozlab/common.hpp"
#include "ozlab/gibbs_exact.hpp"
#include "ozlab/lattice.hpp"
#include "ozlab/scaling.hpp"

namespace ozlab {

// Swendsen-Wang chain through the joint spin/bond coupling: bonds are
// resampled given spins (open with 1 - e^{-2 beta J} on agreeing edges), then
// spins uniformly per cluster. Measurements read the bond clusters, matching
// the connectivity form of the even correlation functions.
struct ChainState {
    const LatticeGraph* graph = nullptr;
    double beta = 0;
    std::vector<std::int8_t> spin;
    std::vector<std::uint8_t> bond;
    std::vector<double> open_prob;
    std::vector<int> roots;   // cluster representative per vertex, set by sw_sweep
    Rng rng;
    long sweeps_done = 0;

    ChainState() : rng(0) {}
};

ChainState init_chain(const LatticeGraph& g, double beta, std::uint64_t seed,
                      std::uint64_t stream = 0);
void sw_sweep(ChainState& state);

// Observables are functions of the cluster structure only.
struct Observable {
    std::string id;
    std::function<double(const std::vector<int>& roots)> eval;
};

struct EstimateRecord {
    std::string id;
    double mean = 0;
    double stderr_ = 0;
    long count = 0;
    double n_eff = 0;
    std::vector<double> batch_means;
};

struct RunOptions {
    long sweeps = 10000;
    long burnin = 1000;
    long batch = 100;
    int chains = 1;
    int jobs = 1;   // worker threads over chains; results independent of it
    std::uint64_t seed = 1;
};

// Runs `chains` independently seeded chains and merges their batch means in
// fixed order; same options and seed give a byte-identical result.
std::vector<EstimateRecord> run_chain(const LatticeGraph& g, double beta,
                                      const std::vector<Observable>& observables,
                                      const RunOptions& opts);

EstimateRecord estimate_two_point(const LatticeGraph& g, double beta, int x, int y,
                                  const RunOptions& opts);

struct EvenCovEstimate {
    EstimateRecord p_union;   // P(E_{A u B})
    EstimateRecord p_a;       // P(E_A)
    EstimateRecord p_b;       // P(E_B)
    EstimateRecord cross;     // P(E_{A u B} and not E_A): the cross-pairing part
    double cov = 0;           // p_union - split-block product
    double cov_stderr = 0;
};

// The product term pairs disjoint halves of the batch list so that the
// product of means stays unbiased under autocorrelation.
EvenCovEstimate estimate_even_cov(const LatticeGraph& g, double beta, VertexMask a, VertexMask b,
                                  const RunOptions& opts);

// connectivity observables
Observable obs_even_partition(const LatticeGraph& g, VertexMask a, const std::string& id);
Observable obs_connected(int x, int y, const std::string& id);
Observable obs_cross_pairing(int a1, int a2, int b1, int b2, const std::string& id);

struct XiEstimate {
    std::vector<double> ns;
    std::vector<EstimateRecord> records;
    RateFit fit;              // log y + ((d-1)/2) log n = log C - xi n
    bool indeterminate = false;
    std::string note;
};

// Two-point decay rate along direction u from box simulations. Estimates with
// nonpositive central value make the fit indeterminate rather than silently
// shrinking the window.
XiEstimate estimate_xi(const CouplingSpec& spec, const Eigen::VectorXd& u,
                       const std::vector<int>& n_list, int box_side, const RunOptions& opts);

struct ValidationRow {
    std::string id;
    double mc = 0;
    double stderr_ = 0;
    double exact = 0;
    double zscore = 0;
};

// MC vs exact enumeration for a list of even source sets
std::vector<ValidationRow> validate_against_exact(const LatticeGraph& g, double beta,
                                                  const std::vector<VertexMask>& sets,
                                                  const RunOptions& opts,
                                                  const EnumCaps& caps = {});

}  // namespace ozlab
