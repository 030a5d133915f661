#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sid/model.hpp"

namespace sid {

enum class ControlKind { zero, step, sine, multisine };

// Parameters for make_control. sine/step use (amp, freq); multisine sums the
// (amp, freq) pairs in components.
struct ControlParams {
    double amp = 1.0;
    double freq = 1.0;
    std::vector<std::pair<double, double>> components;  // (amp_i, freq_i)
};

ControlKind control_kind_from_string(const std::string& s);
std::string to_string(ControlKind kind);

// Piecewise-constant control, one length-d vector per interval, evaluated at
// interval left endpoints. sine: v_k = amp * sin(2*pi*freq*t_k) * ones(d).
std::vector<Vector> make_control(ControlKind kind, const ControlParams& params,
                                 const TimeGrid& grid, int d);

struct SimResult {
    Dataset dataset;
    std::vector<Vector> x_true;  // M+1 node states
    std::vector<Vector> w_true;  // M interval noise rates
    std::uint64_t seed = 0;
};

// Euler-Maruyama on the grid:
//   x_{k+1} = x_k + h (A_true x_k + B_true v_k) + G dW_k,
//   dW_k ~ N(0, noise_scale^2 h Q),  x_0 ~ N(x0, noise_scale^2 Pi0),
//   y_k   = C x_k + noise_scale eta_k,  eta_k ~ N(0, R/h).
// w_true stores the rate dW_k / h, so x_true satisfies
//   x_{k+1} = x_k + h (A_true x_k + B_true v_k + G w_true_k)
// exactly. Deterministic given seed.
SimResult simulate_sde(const Matrix& A_true, const Matrix& B_true,
                       const ModelSpec& spec, const TimeGrid& grid,
                       const std::vector<Vector>& v, std::uint64_t seed,
                       double noise_scale);

}  // namespace sid
