#include "sid/estep.hpp"

#include <Eigen/Cholesky>
#include <sstream>

#include "sid/objective.hpp"

namespace sid {

namespace {

Matrix inner_normal_matrix(const ModelSpec& spec) {
    const int m = spec.dims.m;
    const Matrix Qinv = spec.Q.llt().solve(Matrix::Identity(m, m));
    return Qinv + spec.beta * spec.G.transpose() * spec.G;
}

}  // namespace

Matrix noise_gain(const ModelSpec& spec) {
    const Matrix P = inner_normal_matrix(spec);
    const auto llt = P.llt();
    if (llt.info() != Eigen::Success) {
        throw SingularSystem("noise elimination normal matrix is not SPD");
    }
    return spec.beta * llt.solve(spec.G.transpose());
}

Vector eliminate_noise(const Vector& defect, const ModelSpec& spec) {
    if (defect.size() != spec.dims.N) {
        throw DimensionMismatch("eliminate_noise: defect must have length N");
    }
    return noise_gain(spec) * defect;
}

Matrix eliminated_weight(const ModelSpec& spec) {
    const int N = spec.dims.N;
    const Matrix W =
        spec.beta * (Matrix::Identity(N, N) - spec.G * noise_gain(spec));
    return 0.5 * (W + W.transpose());
}

EStepSolution solve_estep(const DynamicsEstimate& dyn, const Dataset& dataset,
                          const ModelSpec& spec) {
    const auto& [N, d, m, p] = spec.dims;
    if (dyn.A.rows() != N || dyn.A.cols() != N) {
        throw DimensionMismatch("solve_estep: A must be NxN");
    }
    if (dyn.B.rows() != N || dyn.B.cols() != d) {
        throw DimensionMismatch("solve_estep: B must be Nxd");
    }
    const TimeGrid& grid = dataset.grid;
    const std::size_t M = static_cast<std::size_t>(grid.M);
    if (dataset.v.size() != M || dataset.y.size() != M) {
        throw DimensionMismatch("solve_estep: dataset lengths must match grid");
    }
    const double h = grid.h();

    const Matrix gain = noise_gain(spec);  // m x N
    const Matrix W0 =
        spec.beta * (Matrix::Identity(N, N) - spec.G * gain);
    const Matrix W = 0.5 * (W0 + W0.transpose());
    const Matrix E = Matrix::Identity(N, N) + h * dyn.A;
    const Matrix Pi0_inv = spec.Pi0.llt().solve(Matrix::Identity(N, N));
    const auto R_llt = spec.R.llt();
    const Matrix CtRinvC =
        spec.C.transpose() * R_llt.solve(spec.C);

    // Hessian blocks of the eliminated quadratic in (x_0..x_M). Interval k
    // contributes (1/(2h)) |x_{k+1} - E x_k - h B v_k|_W^2; the observation
    // and prior terms sit on the diagonal.
    const Matrix EtWE = E.transpose() * W * E;
    const Matrix sub = -(1.0 / h) * W * E;  // block (k+1, k), constant
    const Matrix diag_mid = (1.0 / h) * (W + EtWE) + h * CtRinvC;

    std::vector<Eigen::LLT<Matrix>> pivots(M + 1);
    std::vector<Vector> rhs(M + 1);

    rhs[0] = Pi0_inv * spec.x0 + h * spec.C.transpose() * R_llt.solve(dataset.y[0]) -
             E.transpose() * (W * (dyn.B * dataset.v[0]));
    for (std::size_t k = 1; k <= M; ++k) {
        rhs[k] = W * (dyn.B * dataset.v[k - 1]);
        if (k < M) {
            rhs[k] += h * spec.C.transpose() * R_llt.solve(dataset.y[k]) -
                      E.transpose() * (W * (dyn.B * dataset.v[k]));
        }
    }

    // Block-Thomas forward sweep: S_k = D_k - L S_{k-1}^{-1} L', factored in
    // place; rhs is updated alongside.
    Matrix S = Pi0_inv + (1.0 / h) * EtWE + h * CtRinvC;
    pivots[0].compute(S);
    if (pivots[0].info() != Eigen::Success) {
        throw SingularSystem("E-step pivot block 0 is not SPD");
    }
    for (std::size_t k = 1; k <= M; ++k) {
        const Matrix X = pivots[k - 1].solve(sub.transpose());
        S = (k < M ? diag_mid : (1.0 / h) * W) - sub * X;
        S = 0.5 * (S + S.transpose());
        pivots[k].compute(S);
        if (pivots[k].info() != Eigen::Success) {
            std::ostringstream msg;
            msg << "E-step pivot block " << k << " is not SPD";
            throw SingularSystem(msg.str());
        }
        rhs[k] -= sub * pivots[k - 1].solve(rhs[k - 1]);
    }

    EStepSolution sol;
    sol.traj.x.resize(M + 1);
    sol.traj.x[M] = pivots[M].solve(rhs[M]);
    for (std::size_t k = M; k-- > 0;) {
        sol.traj.x[k] =
            pivots[k].solve(rhs[k] - sub.transpose() * sol.traj.x[k + 1]);
    }

    // Recover w per interval from the noise-free defect, then q.
    sol.traj.w.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        const Vector delta = (sol.traj.x[k + 1] - sol.traj.x[k]) / h -
                             dyn.A * sol.traj.x[k] - dyn.B * dataset.v[k];
        sol.traj.w[k] = gain * delta;
    }
    sol.traj.q = residual_q(dyn.A, dyn.B, sol.traj.x, sol.traj.w, dataset.v,
                            spec, grid);

    const auto Q_llt = spec.Q.llt();
    const Vector e0 = sol.traj.x[0] - spec.x0;
    double K = 0.5 * e0.dot(spec.Pi0.llt().solve(e0));
    for (std::size_t k = 0; k < M; ++k) {
        const Vector r = dataset.y[k] - spec.C * sol.traj.x[k];
        K += (0.5 / spec.beta) * h * sol.traj.q[k].squaredNorm();
        K += 0.5 * h * sol.traj.w[k].dot(Q_llt.solve(sol.traj.w[k]));
        K += 0.5 * h * r.dot(R_llt.solve(r));
    }
    sol.objective_K = K;
    sol.residuals = estep_residuals(sol, dyn, dataset, spec);
    return sol;
}

EStepResiduals estep_residuals(const EStepSolution& sol,
                               const DynamicsEstimate& dyn,
                               const Dataset& dataset, const ModelSpec& spec) {
    const TimeGrid& grid = dataset.grid;
    const std::size_t M = static_cast<std::size_t>(grid.M);
    const double h = grid.h();
    const auto& x = sol.traj.x;
    const auto& q = sol.traj.q;
    const int N = spec.dims.N;

    const auto R_llt = spec.R.llt();
    const Matrix GQGt_Ib = spec.G * spec.Q * spec.G.transpose() +
                           Matrix::Identity(N, N) / spec.beta;

    EStepResiduals res;
    for (std::size_t k = 0; k < M; ++k) {
        const Vector fwd = (x[k + 1] - x[k]) / h - dyn.A * x[k] -
                           dyn.B * dataset.v[k] + GQGt_Ib * q[k];
        res.forward = std::max(res.forward, fwd.norm());
        if (k >= 1) {
            const Vector bwd =
                -(q[k] - q[k - 1]) / h - dyn.A.transpose() * q[k] +
                spec.C.transpose() * R_llt.solve(dataset.y[k] - spec.C * x[k]);
            res.backward = std::max(res.backward, bwd.norm());
        }
    }
    // Adjoint extended to t=0 by one backward step; the initial condition
    // reads x_0 = x0 - Pi0 q(0).
    const Vector q_at_0 =
        q[0] + h * (dyn.A.transpose() * q[0] -
                    spec.C.transpose() *
                        R_llt.solve(dataset.y[0] - spec.C * x[0]));
    res.bc_initial = (x[0] - spec.x0 + spec.Pi0 * q_at_0).norm();
    res.bc_terminal = q[M - 1].norm();
    return res;
}

}  // namespace sid
