#include "sid/objective.hpp"

#include <Eigen/Cholesky>
#include <sstream>

namespace sid {

namespace {

void check_lengths(const std::vector<Vector>& x, const std::vector<Vector>& w,
                   const std::vector<Vector>& v, const TimeGrid& grid,
                   const char* where) {
    const std::size_t M = static_cast<std::size_t>(grid.M);
    if (x.size() != M + 1 || w.size() != M || v.size() != M) {
        std::ostringstream msg;
        msg << where << ": expected x:" << M + 1 << " w:" << M << " v:" << M
            << ", got x:" << x.size() << " w:" << w.size() << " v:" << v.size();
        throw DimensionMismatch(msg.str());
    }
}

}  // namespace

std::vector<Vector> residual_q(const Matrix& A, const Matrix& B,
                               const std::vector<Vector>& x,
                               const std::vector<Vector>& w,
                               const std::vector<Vector>& v,
                               const ModelSpec& spec, const TimeGrid& grid) {
    check_lengths(x, w, v, grid, "residual_q");
    const double h = grid.h();
    const std::size_t M = w.size();
    std::vector<Vector> q(M);
    for (std::size_t k = 0; k < M; ++k) {
        const Vector d =
            (x[k + 1] - x[k]) / h - A * x[k] - B * v[k] - spec.G * w[k];
        q[k] = -spec.beta * d;
    }
    return q;
}

double evaluate_J(const Iterate& z, const Dataset& dataset,
                  const ModelSpec& spec) {
    const auto& [A, B] = z.dyn;
    const auto& x = z.traj.x;
    const auto& w = z.traj.w;
    check_lengths(x, w, dataset.v, dataset.grid, "evaluate_J");
    const double h = dataset.grid.h();
    const std::size_t M = w.size();

    const auto Pi0_llt = spec.Pi0.llt();
    const auto Q_llt = spec.Q.llt();
    const auto R_llt = spec.R.llt();

    double J = 0.5 * spec.alpha *
               ((A - spec.A0).squaredNorm() + (B - spec.B0).squaredNorm());
    const Vector e0 = x[0] - spec.x0;
    J += 0.5 * e0.dot(Pi0_llt.solve(e0));
    for (std::size_t k = 0; k < M; ++k) {
        const Vector d = (x[k + 1] - x[k]) / h - A * x[k] -
                         B * dataset.v[k] - spec.G * w[k];
        const Vector r = dataset.y[k] - spec.C * x[k];
        J += 0.5 * spec.beta * h * d.squaredNorm();
        J += 0.5 * h * w[k].dot(Q_llt.solve(w[k]));
        J += 0.5 * h * r.dot(R_llt.solve(r));
    }
    return J;
}

GradientJ gradient_J(const Iterate& z, const Dataset& dataset,
                     const ModelSpec& spec) {
    const auto& [A, B] = z.dyn;
    const auto& x = z.traj.x;
    const auto& w = z.traj.w;
    check_lengths(x, w, dataset.v, dataset.grid, "gradient_J");
    const double h = dataset.grid.h();
    const std::size_t M = w.size();

    const auto Pi0_llt = spec.Pi0.llt();
    const auto Q_llt = spec.Q.llt();
    const auto R_llt = spec.R.llt();
    const std::vector<Vector> q =
        residual_q(A, B, x, w, dataset.v, spec, dataset.grid);

    GradientJ g;
    g.dA = spec.alpha * (A - spec.A0);
    g.dB = spec.alpha * (B - spec.B0);
    g.dx.resize(M + 1);
    g.dw.resize(M);
    for (std::size_t k = 0; k < M; ++k) {
        g.dA += h * q[k] * x[k].transpose();
        g.dB += h * q[k] * dataset.v[k].transpose();
        g.dw[k] = h * (spec.G.transpose() * q[k] + Q_llt.solve(w[k]));
    }
    for (std::size_t j = 0; j <= M; ++j) {
        Vector dxj = Vector::Zero(spec.dims.N);
        if (j < M) {
            const Vector obs =
                spec.C.transpose() * R_llt.solve(dataset.y[j] - spec.C * x[j]);
            dxj += q[j] + h * (A.transpose() * q[j] - obs);
        }
        if (j > 0) dxj -= q[j - 1];
        if (j == 0) dxj += Pi0_llt.solve(x[0] - spec.x0);
        g.dx[j] = dxj;
    }
    return g;
}

DescentGap descent_gap(const Iterate& z_prev, const Iterate& z_next,
                       const Dataset& dataset, const ModelSpec& spec) {
    const auto& x_n = z_prev.traj.x;
    const auto& w_n = z_prev.traj.w;
    const auto& x_p = z_next.traj.x;
    const auto& w_p = z_next.traj.w;
    check_lengths(x_n, w_n, dataset.v, dataset.grid, "descent_gap (z_prev)");
    check_lengths(x_p, w_p, dataset.v, dataset.grid, "descent_gap (z_next)");
    const double h = dataset.grid.h();
    const std::size_t M = w_n.size();

    const auto Pi0_llt = spec.Pi0.llt();
    const auto Q_llt = spec.Q.llt();
    const auto R_llt = spec.R.llt();
    const Matrix dA = z_prev.dyn.A - z_next.dyn.A;
    const Matrix dB = z_prev.dyn.B - z_next.dyn.B;
    const Matrix& A_new = z_next.dyn.A;

    DescentGap gap;
    gap.lhs = evaluate_J(z_prev, dataset, spec) -
              evaluate_J(z_next, dataset, spec);

    // K-side quadratic at the new (A, B): prior, dynamics, noise, observation.
    const Vector e0 = x_n[0] - x_p[0];
    double rhs = 0.5 * e0.dot(Pi0_llt.solve(e0));
    for (std::size_t k = 0; k < M; ++k) {
        const Vector ex = x_n[k] - x_p[k];
        const Vector ex1 = x_n[k + 1] - x_p[k + 1];
        const Vector ew = w_n[k] - w_p[k];
        const Vector ed = (ex1 - ex) / h - A_new * ex - spec.G * ew;
        const Vector eobs = spec.C * ex;
        rhs += 0.5 * spec.beta * h * ed.squaredNorm();
        rhs += 0.5 * h * ew.dot(Q_llt.solve(ew));
        rhs += 0.5 * h * eobs.dot(R_llt.solve(eobs));
    }
    // L-side quadratic at the old trajectory: alpha trace, model difference.
    rhs += 0.5 * spec.alpha * (dA.squaredNorm() + dB.squaredNorm());
    for (std::size_t k = 0; k < M; ++k) {
        rhs += 0.5 * spec.beta * h *
               (dA * x_n[k] + dB * dataset.v[k]).squaredNorm();
    }
    gap.rhs = rhs;
    return gap;
}

}  // namespace sid
