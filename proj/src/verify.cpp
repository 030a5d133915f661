#include "sid/verify.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>

#include "sid/estep.hpp"
#include "sid/fit.hpp"
#include "sid/mstep.hpp"
#include "sid/simulate.hpp"

namespace sid {

DenseKktSolution dense_kkt_estep(const DynamicsEstimate& dyn,
                                 const Dataset& dataset,
                                 const ModelSpec& spec) {
    const auto& [N, d, m, p] = spec.dims;
    const int M = dataset.grid.M;
    const double h = dataset.grid.h();
    const int n_x = (M + 1) * N;
    const int n = n_x + M * m;
    const auto x_at = [N](int k) { return k * N; };
    const auto w_at = [&](int k) { return n_x + k * m; };

    const Matrix Pi0_inv = spec.Pi0.llt().solve(Matrix::Identity(N, N));
    const Matrix Q_inv = spec.Q.llt().solve(Matrix::Identity(m, m));
    const Matrix R_inv = spec.R.llt().solve(Matrix::Identity(p, p));

    Matrix H = Matrix::Zero(n, n);
    Vector b = Vector::Zero(n);

    H.block(x_at(0), x_at(0), N, N) += Pi0_inv;
    b.segment(x_at(0), N) += Pi0_inv * spec.x0;

    // Defect d_k = P x_k + S x_{k+1} + T w_k + c_k enters as
    // (beta h / 2) |d_k|^2; the observation and Q terms are diagonal.
    const Matrix P = -(1.0 / h) * Matrix::Identity(N, N) - dyn.A;
    const Matrix S = (1.0 / h) * Matrix::Identity(N, N);
    const Matrix T = -spec.G;
    for (int k = 0; k < M; ++k) {
        const Vector c = -dyn.B * dataset.v[static_cast<std::size_t>(k)];
        const double bh = spec.beta * h;
        const int ix = x_at(k), ix1 = x_at(k + 1), iw = w_at(k);

        H.block(ix, ix, N, N) += bh * P.transpose() * P;
        H.block(ix1, ix1, N, N) += bh * S.transpose() * S;
        H.block(iw, iw, m, m) += bh * T.transpose() * T;
        H.block(ix, ix1, N, N) += bh * P.transpose() * S;
        H.block(ix1, ix, N, N) += bh * S.transpose() * P;
        H.block(ix, iw, N, m) += bh * P.transpose() * T;
        H.block(iw, ix, m, N) += bh * T.transpose() * P;
        H.block(ix1, iw, N, m) += bh * S.transpose() * T;
        H.block(iw, ix1, m, N) += bh * T.transpose() * S;
        b.segment(ix, N) -= bh * P.transpose() * c;
        b.segment(ix1, N) -= bh * S.transpose() * c;
        b.segment(iw, m) -= bh * T.transpose() * c;

        H.block(iw, iw, m, m) += h * Q_inv;

        H.block(ix, ix, N, N) +=
            h * spec.C.transpose() * R_inv * spec.C;
        b.segment(ix, N) += h * spec.C.transpose() * R_inv *
                            dataset.y[static_cast<std::size_t>(k)];
    }

    const Vector u = H.ldlt().solve(b);
    DenseKktSolution sol;
    sol.x.resize(static_cast<std::size_t>(M) + 1);
    sol.w.resize(static_cast<std::size_t>(M));
    for (int k = 0; k <= M; ++k) {
        sol.x[static_cast<std::size_t>(k)] = u.segment(x_at(k), N);
    }
    for (int k = 0; k < M; ++k) {
        sol.w[static_cast<std::size_t>(k)] = u.segment(w_at(k), m);
    }
    return sol;
}

DynamicsEstimate dense_vec_mstep(const std::vector<Vector>& x,
                                 const std::vector<Vector>& w,
                                 const Dataset& dataset,
                                 const ModelSpec& spec) {
    const auto& [N, d, m, p] = spec.dims;
    const int M = dataset.grid.M;
    const double h = dataset.grid.h();
    const int cols = N + d;
    const int n = N * cols;  // theta[i*cols + j] = Theta(i, j)

    Matrix H = spec.alpha * Matrix::Identity(n, n);
    Vector b = Vector::Zero(n);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) b[i * cols + j] += spec.alpha * spec.A0(i, j);
        for (int j = 0; j < d; ++j) {
            b[i * cols + N + j] += spec.alpha * spec.B0(i, j);
        }
    }

    for (int k = 0; k < M; ++k) {
        Vector z(cols);
        z.head(N) = x[static_cast<std::size_t>(k)];
        z.tail(d) = dataset.v[static_cast<std::size_t>(k)];
        const Vector g = (x[static_cast<std::size_t>(k) + 1] -
                          x[static_cast<std::size_t>(k)]) /
                             h -
                         spec.G * w[static_cast<std::size_t>(k)];
        // Row i of the residual is g_i - theta_i . z, rows independent.
        for (int i = 0; i < N; ++i) {
            for (int a = 0; a < cols; ++a) {
                b[i * cols + a] += spec.beta * h * g[i] * z[a];
                for (int c = 0; c < cols; ++c) {
                    H(i * cols + a, i * cols + c) +=
                        spec.beta * h * z[a] * z[c];
                }
            }
        }
    }

    const Vector theta = H.ldlt().solve(b);
    DynamicsEstimate dyn;
    dyn.A = Matrix(N, N);
    dyn.B = Matrix(N, d);
    for (int i = 0; i < N; ++i) {
        for (int j = 0; j < N; ++j) dyn.A(i, j) = theta[i * cols + j];
        for (int j = 0; j < d; ++j) dyn.B(i, j) = theta[i * cols + N + j];
    }
    return dyn;
}

std::vector<Vector> rts_smoother(const DynamicsEstimate& dyn,
                                 const Dataset& dataset,
                                 const ModelSpec& spec) {
    const int N = spec.dims.N;
    const int M = dataset.grid.M;
    const double h = dataset.grid.h();
    const Matrix F = Matrix::Identity(N, N) + h * dyn.A;
    const Matrix Sigma = h * spec.G * spec.Q * spec.G.transpose();
    const Matrix Robs = spec.R / h;
    const Matrix I = Matrix::Identity(N, N);

    std::vector<Vector> m_filt(static_cast<std::size_t>(M) + 1);
    std::vector<Matrix> P_filt(static_cast<std::size_t>(M) + 1);
    std::vector<Vector> m_pred(static_cast<std::size_t>(M) + 1);
    std::vector<Matrix> P_pred(static_cast<std::size_t>(M) + 1);

    m_pred[0] = spec.x0;
    P_pred[0] = spec.Pi0;
    for (int k = 0; k <= M; ++k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        if (k < M) {
            // y_k observes x_k; update then predict.
            const Matrix S =
                spec.C * P_pred[ks] * spec.C.transpose() + Robs;
            const Matrix K =
                S.ldlt().solve(spec.C * P_pred[ks]).transpose();
            m_filt[ks] =
                m_pred[ks] + K * (dataset.y[ks] - spec.C * m_pred[ks]);
            const Matrix IKC = I - K * spec.C;
            P_filt[ks] = IKC * P_pred[ks] * IKC.transpose() +
                         K * Robs * K.transpose();
            m_pred[ks + 1] = F * m_filt[ks] + h * dyn.B * dataset.v[ks];
            P_pred[ks + 1] = F * P_filt[ks] * F.transpose() + Sigma;
        } else {
            m_filt[ks] = m_pred[ks];
            P_filt[ks] = P_pred[ks];
        }
    }

    std::vector<Vector> smoothed(static_cast<std::size_t>(M) + 1);
    smoothed[static_cast<std::size_t>(M)] = m_filt[static_cast<std::size_t>(M)];
    Vector next = smoothed[static_cast<std::size_t>(M)];
    for (int k = M - 1; k >= 0; --k) {
        const std::size_t ks = static_cast<std::size_t>(k);
        const Matrix Gk =
            P_pred[ks + 1].ldlt().solve(F * P_filt[ks]).transpose();
        smoothed[ks] = m_filt[ks] + Gk * (next - m_pred[ks + 1]);
        next = smoothed[ks];
    }
    return smoothed;
}

namespace {

Matrix randn(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix X(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) X(i, j) = gauss(rng);
    }
    return X;
}

Matrix random_spd(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> shift(0.3, 1.0);
    const Matrix X = randn(rng, k, k);
    return X * X.transpose() / k + shift(rng) * Matrix::Identity(k, k);
}

}  // namespace

RandomInstance random_instance(std::uint64_t seed, const InstanceSizes& sizes) {
    std::mt19937_64 rng(seed);
    const int N = sizes.N, d = sizes.d, m = sizes.m, p = sizes.p;

    RandomInstance inst;
    inst.spec.dims = Dims{N, d, m, p};
    inst.spec.C = randn(rng, p, N);
    inst.spec.G = randn(rng, N, m);
    inst.spec.Q = random_spd(rng, m);
    inst.spec.R = random_spd(rng, p);
    inst.spec.Pi0 = random_spd(rng, N);
    inst.spec.x0 = randn(rng, N, 1);
    // Mildly stable true dynamics; priors in its vicinity.
    inst.A_true = 0.5 / std::sqrt(double(N)) * randn(rng, N, N) -
                  Matrix::Identity(N, N);
    inst.B_true = randn(rng, N, d);
    inst.spec.A0 = inst.A_true + 0.3 * randn(rng, N, N);
    inst.spec.B0 = inst.B_true + 0.3 * randn(rng, N, d);
    inst.spec.alpha = 1.0;
    inst.spec.beta = 10.0;
    inst.spec = validate_spec(inst.spec);

    inst.grid = make_grid(sizes.T, sizes.M);
    std::uniform_real_distribution<double> amp(0.5, 1.5), freq(0.2, 1.5);
    ControlParams params;
    params.components = {{amp(rng), freq(rng)}, {amp(rng), freq(rng)}};
    const auto v =
        make_control(ControlKind::multisine, params, inst.grid, d);
    std::uniform_int_distribution<std::uint64_t> sub_seed;
    inst.dataset =
        simulate_sde(inst.A_true, inst.B_true, inst.spec, inst.grid, v,
                     sub_seed(rng), 0.05)
            .dataset;
    return inst;
}

Iterate random_iterate(std::uint64_t seed, const RandomInstance& inst) {
    std::mt19937_64 rng(seed);
    const auto& [N, d, m, p] = inst.spec.dims;
    const std::size_t M = static_cast<std::size_t>(inst.grid.M);

    Iterate z;
    z.dyn.A = inst.spec.A0 + 0.5 * randn(rng, N, N);
    z.dyn.B = inst.spec.B0 + 0.5 * randn(rng, N, d);
    z.traj.x.resize(M + 1);
    z.traj.w.resize(M);
    for (auto& xk : z.traj.x) xk = randn(rng, N, 1);
    for (auto& wk : z.traj.w) wk = randn(rng, m, 1);
    z.traj.q = residual_q(z.dyn.A, z.dyn.B, z.traj.x, z.traj.w,
                          inst.dataset.v, inst.spec, inst.grid);
    return z;
}

namespace {

double guarded_rel(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double seq_rel_err(const std::vector<Vector>& a, const std::vector<Vector>& b) {
    double scale = 1.0, diff = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        scale = std::max(scale, b[k].cwiseAbs().maxCoeff());
        diff = std::max(diff, (a[k] - b[k]).cwiseAbs().maxCoeff());
    }
    return diff / scale;
}

InstanceSizes clamped_sizes(const ModelSpec& spec, const TimeGrid& grid,
                            int cap_M) {
    InstanceSizes s;
    s.N = spec.dims.N;
    s.d = spec.dims.d;
    s.m = spec.dims.m;
    s.p = spec.dims.p;
    s.M = std::min(grid.M, cap_M);
    s.T = grid.T;
    return s;
}

SuiteResult gradient_suite(const ModelSpec& spec, const TimeGrid& grid,
                           const VerifyOptions& options) {
    SuiteResult result{"gradient_vs_finite_differences", false, 0.0, 1e-6,
                       options.seed, 20};
    const InstanceSizes sizes = clamped_sizes(spec, grid, 16);
    const double step = 1e-6;
    for (int i = 0; i < result.instances; ++i) {
        const std::uint64_t seed = options.seed + 1000 + i;
        const RandomInstance inst = random_instance(seed, sizes);
        const Iterate z = random_iterate(seed ^ 0x9e3779b97f4a7c15ULL, inst);
        GradientJ g = gradient_J(z, inst.dataset, inst.spec);
        if (options.inject_gradient_sign_error) g.dB = -g.dB;

        std::mt19937_64 rng(seed + 7);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::size_t M = static_cast<std::size_t>(inst.grid.M);
        for (int dir = 0; dir < 20; ++dir) {
            Iterate dz = z;
            double pair = 0.0;
            auto perturb_mat = [&](Matrix& target, const Matrix& grad) {
                Matrix D(grad.rows(), grad.cols());
                for (Eigen::Index r = 0; r < D.rows(); ++r) {
                    for (Eigen::Index c = 0; c < D.cols(); ++c) {
                        D(r, c) = gauss(rng);
                    }
                }
                pair += (grad.array() * D.array()).sum();
                target = D;
            };
            Matrix dA, dB;
            perturb_mat(dA, g.dA);
            perturb_mat(dB, g.dB);
            std::vector<Vector> dx(M + 1), dw(M);
            for (std::size_t k = 0; k <= M; ++k) {
                dx[k] = Vector::NullaryExpr(inst.spec.dims.N,
                                            [&](Eigen::Index) { return gauss(rng); });
                pair += g.dx[k].dot(dx[k]);
            }
            for (std::size_t k = 0; k < M; ++k) {
                dw[k] = Vector::NullaryExpr(inst.spec.dims.m,
                                            [&](Eigen::Index) { return gauss(rng); });
                pair += g.dw[k].dot(dw[k]);
            }

            auto shifted = [&](double s) {
                Iterate zs = z;
                zs.dyn.A += s * dA;
                zs.dyn.B += s * dB;
                for (std::size_t k = 0; k <= M; ++k) zs.traj.x[k] += s * dx[k];
                for (std::size_t k = 0; k < M; ++k) zs.traj.w[k] += s * dw[k];
                return evaluate_J(zs, inst.dataset, inst.spec);
            };
            const double fd = (shifted(step) - shifted(-step)) / (2.0 * step);
            result.worst_error = std::max(result.worst_error,
                                          guarded_rel(pair, fd));
        }
    }
    result.passed = result.worst_error <= result.threshold;
    return result;
}

SuiteResult estep_suite(const ModelSpec& spec, const TimeGrid& grid,
                        const VerifyOptions& options) {
    SuiteResult result{"estep_vs_dense_kkt", false, 0.0, 1e-10,
                       options.seed, 10};
    const InstanceSizes sizes = clamped_sizes(spec, grid, 50);
    for (int i = 0; i < result.instances; ++i) {
        const std::uint64_t seed = options.seed + 2000 + i;
        const RandomInstance inst = random_instance(seed, sizes);
        // Solve at a perturbed model, not the data-generating one.
        std::mt19937_64 rng(seed + 13);
        DynamicsEstimate dyn{inst.spec.A0, inst.spec.B0};
        const EStepSolution sol = solve_estep(dyn, inst.dataset, inst.spec);
        const DenseKktSolution oracle =
            dense_kkt_estep(dyn, inst.dataset, inst.spec);
        result.worst_error =
            std::max({result.worst_error, seq_rel_err(sol.traj.x, oracle.x),
                      seq_rel_err(sol.traj.w, oracle.w)});
    }
    result.passed = result.worst_error <= result.threshold;
    return result;
}

SuiteResult mstep_suite(const ModelSpec& spec, const TimeGrid& grid,
                        const VerifyOptions& options) {
    SuiteResult result{"mstep_vs_dense_normal_equations", false, 0.0, 1e-10,
                       options.seed, 10};
    const InstanceSizes sizes = clamped_sizes(spec, grid, 32);
    for (int i = 0; i < result.instances; ++i) {
        const std::uint64_t seed = options.seed + 3000 + i;
        const RandomInstance inst = random_instance(seed, sizes);
        const Iterate z = random_iterate(seed ^ 0x2545f4914f6cdd1dULL, inst);
        const DynamicsEstimate fast =
            solve_mstep(z.traj.x, z.traj.w, inst.dataset, inst.spec);
        const DynamicsEstimate oracle =
            dense_vec_mstep(z.traj.x, z.traj.w, inst.dataset, inst.spec);
        const double scale = std::max({1.0, oracle.A.cwiseAbs().maxCoeff(),
                                       oracle.B.cwiseAbs().maxCoeff()});
        const double diff =
            std::max((fast.A - oracle.A).cwiseAbs().maxCoeff(),
                     (fast.B - oracle.B).cwiseAbs().maxCoeff());
        result.worst_error = std::max(result.worst_error, diff / scale);
    }
    result.passed = result.worst_error <= result.threshold;
    return result;
}

SuiteResult descent_suite(const ModelSpec& spec, const TimeGrid& grid,
                          const VerifyOptions& options) {
    SuiteResult result{"descent_identity", false, 0.0, 1e-9,
                       options.seed, 10};
    const InstanceSizes sizes = clamped_sizes(spec, grid, 40);
    for (int i = 0; i < result.instances; ++i) {
        const std::uint64_t seed = options.seed + 4000 + i;
        const RandomInstance inst = random_instance(seed, sizes);
        FitOptions fopt;
        fopt.max_iters = 25;
        fopt.tol_step = 0.0;
        fopt.tol_stat = 0.0;
        fopt.check_descent = true;
        const FitReport report = fit(inst.dataset, inst.spec, fopt);
        for (int s = 0; s < report.iterations; ++s) {
            const std::size_t k = static_cast<std::size_t>(s);
            const double Jn = report.J_history[k];
            result.worst_error =
                std::max(result.worst_error,
                         report.descent_gap_errors[k] / (1.0 + std::abs(Jn)));
        }
    }
    result.passed = result.worst_error <= result.threshold;
    return result;
}

SuiteResult smoother_suite(const VerifyOptions& options) {
    SuiteResult result{"large_beta_smoother_consistency", false, 0.0, 1e-4,
                       options.seed, 1};
    ModelSpec spec;
    spec.dims = Dims{1, 1, 1, 1};
    spec.C = spec.G = spec.Q = spec.R = spec.Pi0 = Matrix::Constant(1, 1, 1.0);
    spec.x0 = Vector::Constant(1, 0.5);
    spec.A0 = Matrix::Constant(1, 1, -1.0);
    spec.B0 = Matrix::Constant(1, 1, 1.0);
    spec.alpha = 1.0;
    spec.beta = 1e8;
    spec = validate_spec(spec);
    const TimeGrid grid = make_grid(1.0, 50);
    ControlParams params;
    params.amp = 1.0;
    params.freq = 0.7;
    const auto v = make_control(ControlKind::sine, params, grid, 1);
    const SimResult sim = simulate_sde(spec.A0, spec.B0, spec, grid, v,
                                       options.seed + 5000, 0.1);

    const DynamicsEstimate dyn{spec.A0, spec.B0};
    const EStepSolution sol = solve_estep(dyn, sim.dataset, spec);
    const auto smoothed = rts_smoother(dyn, sim.dataset, spec);
    result.worst_error = seq_rel_err(sol.traj.x, smoothed);
    result.passed = result.worst_error <= result.threshold;
    return result;
}

}  // namespace

std::vector<SuiteResult> run_verification(const ModelSpec& spec,
                                          const TimeGrid& grid,
                                          const VerifyOptions& options) {
    std::vector<SuiteResult> results;
    results.push_back(gradient_suite(spec, grid, options));
    results.push_back(estep_suite(spec, grid, options));
    results.push_back(mstep_suite(spec, grid, options));
    results.push_back(descent_suite(spec, grid, options));
    results.push_back(smoother_suite(options));
    return results;
}

}  // namespace sid
