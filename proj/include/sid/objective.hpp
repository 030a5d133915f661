#pragma once

#include <vector>

#include "sid/model.hpp"

namespace sid {

// Gradient of the discrete J with respect to (A, B, x nodes, w intervals).
// The pairing with a direction (Atil, Btil, xtil, wtil) is the plain
// Euclidean one: tr(dA' Atil) + tr(dB' Btil) + sum_j dx_j.xtil_j
// + sum_k dw_k.wtil_k, and equals the directional derivative of evaluate_J.
struct GradientJ {
    Matrix dA;               // N x N
    Matrix dB;               // N x d
    std::vector<Vector> dx;  // M+1 node cotangents
    std::vector<Vector> dw;  // M interval cotangents
};

// Adjoint per interval: q_k = -beta * d_k with
//   d_k = (x_{k+1} - x_k)/h - A x_k - B v_k - G w_k.
std::vector<Vector> residual_q(const Matrix& A, const Matrix& B,
                               const std::vector<Vector>& x,
                               const std::vector<Vector>& w,
                               const std::vector<Vector>& v,
                               const ModelSpec& spec, const TimeGrid& grid);

// Discrete objective, rectangle rule on interval left endpoints:
//   J = (alpha/2) (|A-A0|_F^2 + |B-B0|_F^2)
//     + (beta/2) h sum_k |d_k|^2
//     + (1/2) (x_0-x0)' Pi0^{-1} (x_0-x0)
//     + (1/2) h sum_k w_k' Q^{-1} w_k
//     + (1/2) h sum_k (y_k - C x_k)' R^{-1} (y_k - C x_k).
double evaluate_J(const Iterate& z, const Dataset& dataset,
                  const ModelSpec& spec);

// Exact gradient of the discrete J above (discretize-then-differentiate):
//   dA   = alpha (A - A0) + h sum_k q_k x_k'
//   dB   = alpha (B - B0) + h sum_k q_k v_k'
//   dw_k = h (G' q_k + Q^{-1} w_k)
//   dx_0 = Pi0^{-1}(x_0 - x0) + q_0 + h A' q_0 - h C' R^{-1}(y_0 - C x_0)
//   dx_j = -q_{j-1} + q_j + h A' q_j - h C' R^{-1}(y_j - C x_j), 0 < j < M
//   dx_M = -q_{M-1}.
GradientJ gradient_J(const Iterate& z, const Dataset& dataset,
                     const ModelSpec& spec);

// Both sides of the per-sweep descent identity. lhs = J(Z_n) - J(Z_{n+1});
// rhs is the completion-of-squares sum: prior-difference quadratic at t=0,
// beta-weighted dynamics-difference integral (at the new (A,B)), Q^{-1}
// noise-difference integral, R^{-1} observation-difference integral, alpha
// trace term, and beta model-difference integral. rhs >= 0 always; lhs = rhs
// when z_next came from one exact alternating step at z_prev.
struct DescentGap {
    double lhs = 0.0;
    double rhs = 0.0;
};

DescentGap descent_gap(const Iterate& z_prev, const Iterate& z_next,
                       const Dataset& dataset, const ModelSpec& spec);

}  // namespace sid
