#pragma once

#include <Eigen/Dense>
#include <vector>

#include "sid/errors.hpp"

namespace sid {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Problem dimensions: x ∈ R^N, v ∈ R^d, w ∈ R^m, y ∈ R^p.
struct Dims {
    int N = 0;
    int d = 0;
    int m = 0;
    int p = 0;
};

// All known quantities of the model
//     dx = (A x + B v) dt + G dw,   x(0) ~ N(x0, Pi0)
//     dy = C x dt + db
// plus the priors (A0, B0) and the weights (alpha, beta) of the objective.
// (A, B) themselves are the unknowns and live in DynamicsEstimate.
struct ModelSpec {
    Dims dims;
    Matrix C;    // p x N
    Matrix G;    // N x m
    Matrix Q;    // m x m, SPD (process-noise covariance)
    Matrix R;    // p x p, SPD (observation-noise covariance)
    Matrix Pi0;  // N x N, SPD (initial covariance)
    Vector x0;   // N     (prior mean of x(0))
    Matrix A0;   // N x N (dynamics prior)
    Matrix B0;   // N x d (input-map prior)
    double alpha = 1.0;
    double beta = 1.0;
};

// Uniform grid on [0, T]: nodes t_k = k h, k = 0..M, h = T/M.
// Signals are piecewise constant on intervals [t_k, t_{k+1}); states live at
// nodes.
struct TimeGrid {
    double T = 0.0;
    int M = 0;

    double h() const { return T / M; }
    double node(int k) const { return k * h(); }
    std::vector<double> nodes() const {
        std::vector<double> out(static_cast<std::size_t>(M) + 1);
        for (int k = 0; k <= M; ++k) out[static_cast<std::size_t>(k)] = node(k);
        return out;
    }
};

// The unknown pair (A, B): the M-step variable.
struct DynamicsEstimate {
    Matrix A;  // N x N
    Matrix B;  // N x d
};

// Discretized (x, w) plus the derived adjoint q: the E-step variable.
//   x: M+1 node states, w: M interval noises, q: M interval adjoints,
//   q_k = -beta * ((x_{k+1}-x_k)/h - A x_k - B v_k - G w_k).
struct TrajectoryEstimate {
    std::vector<Vector> x;
    std::vector<Vector> w;
    std::vector<Vector> q;
};

// One full iterate Z = (A, B, x(.), w(.)).
struct Iterate {
    DynamicsEstimate dyn;
    TrajectoryEstimate traj;
};

// Sampled control and observation-rate signal, one value per interval.
// y stores the rate signal (the derivative of the observation process), not
// the integrated process.
struct Dataset {
    TimeGrid grid;
    std::vector<Vector> v;  // M controls
    std::vector<Vector> y;  // M observation rates
};

// Checks shapes against dims, SPD-ness of Q, R, Pi0 (eigenvalues > 0 to
// relative tolerance 1e-12, inputs symmetrized when asymmetry <= 1e-10
// relative) and positivity of alpha, beta. Returns the (symmetrized) spec.
// Idempotent: validating a validated spec returns an identical value.
ModelSpec validate_spec(const ModelSpec& spec);

// Uniform grid with M intervals on [0, T]. Throws InvalidGrid for T <= 0 or
// M < 1.
TimeGrid make_grid(double T, int M);

}  // namespace sid
