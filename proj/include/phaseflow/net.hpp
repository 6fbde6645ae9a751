#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaseflow/common.hpp"

namespace phaseflow::net {

enum class Activation { Tanh, Elu, Swish, PenalizedTanh };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

struct ActivationValue {
    double value;
    double d1;
    double d2;
};

/// Value and first two derivatives at z. PenalizedTanh uses slope a on the
/// negative branch (a * tanh(z) for z <= 0).
ActivationValue activation_eval(Activation kind, double z, double ptanh_slope = 0.25);

/// Densely connected feedforward network parameters. All weights and biases
/// live in one flat buffer laid out [W_0, b_0, W_1, b_1, ...] with W_i of
/// shape (n_{i+1} x n_i) row-major; W_i/b_i map layer i activations to layer
/// i+1 preactivations. Hidden layers share one activation, the output layer
/// is linear.
class MlpParams {
public:
    MlpParams() = default;
    MlpParams(std::vector<std::size_t> layer_sizes, Activation act, double ptanh_slope = 0.25);

    /// Truncated-normal initialization: std 1/sqrt(fan_in), cut at 2 std,
    /// biases zero. Weight entries are drawn row-major, layer by layer.
    static MlpParams random_init(std::vector<std::size_t> layer_sizes, Activation act,
                                 std::uint64_t seed, double ptanh_slope = 0.25);

    const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
    std::size_t num_layers() const { return sizes_.empty() ? 0 : sizes_.size() - 1; }
    std::size_t input_dim() const { return sizes_.front(); }
    std::size_t output_dim() const { return sizes_.back(); }
    Activation activation() const { return act_; }
    double ptanh_slope() const { return ptanh_slope_; }

    std::size_t weight_rows(std::size_t i) const { return sizes_[i + 1]; }
    std::size_t weight_cols(std::size_t i) const { return sizes_[i]; }
    double* weight(std::size_t i) { return theta_.data() + w_off_[i]; }
    const double* weight(std::size_t i) const { return theta_.data() + w_off_[i]; }
    double* bias(std::size_t i) { return theta_.data() + b_off_[i]; }
    const double* bias(std::size_t i) const { return theta_.data() + b_off_[i]; }

    std::size_t parameter_count() const { return theta_.size(); }
    std::vector<double>& raw() { return theta_; }
    const std::vector<double>& raw() const { return theta_; }

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> w_off_, b_off_;
    std::vector<double> theta_;
    Activation act_ = Activation::Tanh;
    double ptanh_slope_ = 0.25;
};

struct Batch {
    Matrix features; // B x M
    Matrix targets;  // B x M

    std::size_t size() const { return features.rows(); }
};

/// Scratch buffers reused across evaluations of one architecture.
struct MlpWorkspace {
    std::vector<Matrix> h;      // activations per layer, batch rows
    std::vector<Matrix> z;      // preactivations
    std::vector<Matrix> d1, d2; // activation derivatives at hidden layers
    std::vector<Matrix> tangent, pre_tangent;
    Matrix delta, delta_next, jac, jac_bar, tan_bar, tan_tmp;
    std::vector<double> zr, u, u_next;
};

void forward(const MlpParams& params, std::span<const double> x, std::span<double> y);
std::vector<double> forward(const MlpParams& params, const std::vector<double>& x);

/// Batched forward pass; outputs is resized to B x n_L.
void forward_batch(const MlpParams& params, const Matrix& features, Matrix& outputs,
                   MlpWorkspace& ws);

/// Exact chain-rule input Jacobian (n_L x n_0).
Matrix input_jacobian(const MlpParams& params, std::span<const double> x);
inline Matrix input_jacobian(const MlpParams& params, const std::vector<double>& x) {
    return input_jacobian(params, std::span<const double>(x));
}

/// loss = (1/B) sum ||f(x_i) - y_i||^2 + lambda (1/B) sum ||J(x_i)||_F^2.
/// Gradients are exact for both terms (forward-mode tangents through the
/// network, reverse accumulation of the Frobenius norm). grads uses the same
/// flat layout as MlpParams::raw(). With lambda == 0 the regularizer path is
/// skipped entirely. Throws DivergenceError when the loss is non-finite.
double loss_and_gradients(const MlpParams& params, const Batch& batch, double lambda,
                          std::vector<double>& grads, MlpWorkspace& ws);

/// Same loss, no gradient work (validation passes).
double batch_loss(const MlpParams& params, const Batch& batch, double lambda, MlpWorkspace& ws);

/// Mean squared error only, (1/B) sum ||f(x_i) - y_i||^2.
double batch_mse(const MlpParams& params, const Batch& batch, MlpWorkspace& ws);

} // namespace phaseflow::net
