#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sid/model.hpp"
#include "sid/objective.hpp"

namespace sid {

// Self-contained oracle implementations used by the verification suites and
// the test harness. Each one recomputes its answer along a route independent
// of the production path it certifies.

// Minimizer of K(A,B; x, w) obtained from one dense solve of the full KKT
// system over the stacked unknowns [x_0..x_M, w_0..w_{M-1}]. No noise
// elimination, no banded structure.
struct DenseKktSolution {
    std::vector<Vector> x;
    std::vector<Vector> w;
};
DenseKktSolution dense_kkt_estep(const DynamicsEstimate& dyn,
                                 const Dataset& dataset,
                                 const ModelSpec& spec);

// Minimizer of L(A,B; x, w) from one dense solve of the normal equations over
// vec([A B]), assembled entry by entry.
DynamicsEstimate dense_vec_mstep(const std::vector<Vector>& x,
                                 const std::vector<Vector>& w,
                                 const Dataset& dataset,
                                 const ModelSpec& spec);

// Fixed-interval Rauch-Tung-Striebel smoother on the Euler-discretized model
//   x_{k+1} = (I + hA) x_k + h B v_k + noise,  cov h G Q G'
//   y_k     = C x_k + noise,                   cov R / h
// with prior N(x0, Pi0). Returns the smoothed node means, k = 0..M.
std::vector<Vector> rts_smoother(const DynamicsEstimate& dyn,
                                 const Dataset& dataset,
                                 const ModelSpec& spec);

// A reproducible random problem: spec, grid, simulated dataset, and the
// ground-truth dynamics the data came from.
struct RandomInstance {
    ModelSpec spec;
    TimeGrid grid;
    Dataset dataset;
    Matrix A_true;
    Matrix B_true;
};

struct InstanceSizes {
    int N = 2;
    int d = 1;
    int m = 1;
    int p = 1;
    int M = 16;
    double T = 1.0;
};

RandomInstance random_instance(std::uint64_t seed, const InstanceSizes& sizes);

// A random full iterate near the priors of the given instance, for gradient
// checks away from any minimizer.
Iterate random_iterate(std::uint64_t seed, const RandomInstance& inst);

struct SuiteResult {
    std::string name;
    bool passed = false;
    double worst_error = 0.0;
    double threshold = 0.0;
    std::uint64_t seed = 0;
    int instances = 0;
};

struct VerifyOptions {
    std::uint64_t seed = 20240901;
    // Flips the sign of one gradient block inside the gradient suite's test
    // double, to prove the harness can fail.
    bool inject_gradient_sign_error = false;
};

// The five verification suites at the sizes of the supplied model document:
// gradient vs central finite differences, E-step vs dense KKT, M-step vs
// dense normal equations, per-sweep descent identity, and the large-beta
// smoother consistency check. Deterministic given options.seed.
std::vector<SuiteResult> run_verification(const ModelSpec& spec,
                                          const TimeGrid& grid,
                                          const VerifyOptions& options = {});

}  // namespace sid
