#include "phaseflow/net.hpp"

#include <algorithm>
#include <cmath>

#include "phaseflow/kernels.hpp"
#include "phaseflow/rng.hpp"

namespace phaseflow::net {

namespace {
const kernels::Ops& ops() { return kernels::active(); }
} // namespace

const char* activation_name(Activation a) {
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Elu: return "elu";
    case Activation::Swish: return "swish";
    case Activation::PenalizedTanh: return "penalized_tanh";
    }
    return "?";
}

Activation activation_from_name(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "elu") return Activation::Elu;
    if (name == "swish") return Activation::Swish;
    if (name == "penalized_tanh") return Activation::PenalizedTanh;
    throw ConfigError("unknown activation: " + name);
}

ActivationValue activation_eval(Activation kind, double z, double ptanh_slope) {
    switch (kind) {
    case Activation::Tanh: {
        const double t = std::tanh(z);
        const double d1 = 1.0 - t * t;
        return {t, d1, -2.0 * t * d1};
    }
    case Activation::Elu: {
        if (z > 0.0) return {z, 1.0, 0.0};
        const double e = std::exp(z);
        return {e - 1.0, e, e};
    }
    case Activation::Swish: {
        const double s = 1.0 / (1.0 + std::exp(-z));
        const double d1 = s * (1.0 + z * (1.0 - s));
        const double d2 = s * (1.0 - s) * (2.0 + z * (1.0 - 2.0 * s));
        return {z * s, d1, d2};
    }
    case Activation::PenalizedTanh: {
        const double t = std::tanh(z);
        const double d1 = 1.0 - t * t;
        if (z > 0.0) return {t, d1, -2.0 * t * d1};
        return {ptanh_slope * t, ptanh_slope * d1, ptanh_slope * -2.0 * t * d1};
    }
    }
    throw ConfigError("activation_eval: bad kind");
}

MlpParams::MlpParams(std::vector<std::size_t> layer_sizes, Activation act, double ptanh_slope)
    : sizes_(std::move(layer_sizes)), act_(act), ptanh_slope_(ptanh_slope) {
    if (sizes_.size() < 2) throw ConfigError("MlpParams: need at least input and output layers");
    for (std::size_t n : sizes_)
        if (n < 1) throw ConfigError("MlpParams: layer sizes must be positive");
    if (act == Activation::PenalizedTanh && (ptanh_slope <= 0.0 || ptanh_slope > 1.0))
        throw ConfigError("MlpParams: penalized_tanh slope must be in (0, 1]");

    std::size_t off = 0;
    for (std::size_t i = 0; i + 1 < sizes_.size(); ++i) {
        w_off_.push_back(off);
        off += sizes_[i + 1] * sizes_[i];
        b_off_.push_back(off);
        off += sizes_[i + 1];
    }
    theta_.assign(off, 0.0);
}

MlpParams MlpParams::random_init(std::vector<std::size_t> layer_sizes, Activation act,
                                 std::uint64_t seed, double ptanh_slope) {
    MlpParams p(std::move(layer_sizes), act, ptanh_slope);
    Rng rng(seed);
    for (std::size_t i = 0; i < p.num_layers(); ++i) {
        const double std_dev = 1.0 / std::sqrt(static_cast<double>(p.weight_cols(i)));
        double* w = p.weight(i);
        const std::size_t count = p.weight_rows(i) * p.weight_cols(i);
        for (std::size_t j = 0; j < count; ++j) w[j] = std_dev * rng.truncated_normal(2.0);
    }
    return p;
}

namespace {

void ensure_layers(const MlpParams& p, std::size_t batch, MlpWorkspace& ws) {
    const std::size_t layers = p.num_layers();
    ws.h.resize(layers + 1);
    ws.z.resize(layers + 1);
    ws.d1.resize(layers);
    ws.d2.resize(layers);
    for (std::size_t l = 1; l <= layers; ++l) {
        const std::size_t n = p.layer_sizes()[l];
        ws.z[l].resize(batch, n);
        if (l < layers) {
            ws.h[l].resize(batch, n);
            ws.d1[l].resize(batch, n);
            ws.d2[l].resize(batch, n);
        }
    }
}

/// Forward pass over a batch held in ws.h[0]; fills z, h, d1, d2.
void forward_into_workspace(const MlpParams& p, MlpWorkspace& ws) {
    const std::size_t layers = p.num_layers();
    const std::size_t batch = ws.h[0].rows();
    for (std::size_t l = 1; l <= layers; ++l) {
        const std::size_t i = l - 1;
        const std::size_t n_in = p.weight_cols(i);
        const std::size_t n_out = p.weight_rows(i);
        ops().matmul_nt(ws.h[l - 1].data(), p.weight(i), ws.z[l].data(), batch, n_in, n_out,
                        false);
        ops().add_row(ws.z[l].data(), p.bias(i), batch, n_out);
        if (l < layers) {
            const double* zp = ws.z[l].data();
            double* hp = ws.h[l].data();
            double* d1p = ws.d1[l].data();
            double* d2p = ws.d2[l].data();
            const std::size_t count = batch * n_out;
            for (std::size_t j = 0; j < count; ++j) {
                const ActivationValue av = activation_eval(p.activation(), zp[j], p.ptanh_slope());
                hp[j] = av.value;
                d1p[j] = av.d1;
                d2p[j] = av.d2;
            }
        }
    }
}

/// Tangent chain for one sample: fills pre_tangent[l] = W_{l-1} T^{l-1} and
/// tangent[l] = diag(sigma') pre_tangent[l] for hidden layers, then
/// J = W_{L-1} T^{L-1}. T^0 is the identity and never materialized. The same
/// path serves input_jacobian and the regularizer so the two agree exactly.
void jacobian_chain(const MlpParams& p, const MlpWorkspace& ws, std::size_t sample,
                    std::vector<Matrix>& pre_tangent, std::vector<Matrix>& tangent, Matrix& jac) {
    const std::size_t layers = p.num_layers();
    const std::size_t m = p.input_dim();
    pre_tangent.resize(layers);
    tangent.resize(layers);
    for (std::size_t l = 1; l < layers; ++l) {
        const std::size_t i = l - 1;
        const std::size_t n_out = p.weight_rows(i);
        pre_tangent[l].resize(n_out, m);
        tangent[l].resize(n_out, m);
        if (l == 1) {
            // S^1 = W_0 I
            const double* w = p.weight(0);
            std::copy(w, w + n_out * m, pre_tangent[l].data());
        } else {
            ops().matmul_nn(p.weight(i), tangent[l - 1].data(), pre_tangent[l].data(), n_out,
                            p.weight_cols(i), m, false);
        }
        const double* d1row = ws.d1[l].row(sample);
        for (std::size_t r = 0; r < n_out; ++r) {
            const double s = d1row[r];
            const double* src = pre_tangent[l].row(r);
            double* dst = tangent[l].row(r);
            for (std::size_t c = 0; c < m; ++c) dst[c] = s * src[c];
        }
    }
    const std::size_t i = layers - 1;
    jac.resize(p.output_dim(), m);
    if (layers == 1) {
        const double* w = p.weight(0);
        std::copy(w, w + jac.size(), jac.data());
    } else {
        ops().matmul_nn(p.weight(i), tangent[layers - 1].data(), jac.data(), p.output_dim(),
                        p.weight_cols(i), m, false);
    }
}

} // namespace

void forward(const MlpParams& params, std::span<const double> x, std::span<double> y) {
    if (x.size() != params.input_dim()) throw ShapeError("forward: input dimension mismatch");
    if (y.size() != params.output_dim()) throw ShapeError("forward: output dimension mismatch");
    MlpWorkspace ws;
    ensure_layers(params, 1, ws);
    ws.h[0].resize(1, x.size());
    std::copy(x.begin(), x.end(), ws.h[0].data());
    forward_into_workspace(params, ws);
    const double* out = ws.z[params.num_layers()].data();
    std::copy(out, out + y.size(), y.begin());
}

std::vector<double> forward(const MlpParams& params, const std::vector<double>& x) {
    std::vector<double> y(params.output_dim());
    forward(params, x, y);
    return y;
}

void forward_batch(const MlpParams& params, const Matrix& features, Matrix& outputs,
                   MlpWorkspace& ws) {
    if (features.cols() != params.input_dim())
        throw ShapeError("forward_batch: feature dimension mismatch");
    ensure_layers(params, features.rows(), ws);
    ws.h[0] = features;
    forward_into_workspace(params, ws);
    outputs = ws.z[params.num_layers()];
}

Matrix input_jacobian(const MlpParams& params, std::span<const double> x) {
    if (x.size() != params.input_dim())
        throw ShapeError("input_jacobian: input dimension mismatch");
    MlpWorkspace ws;
    ensure_layers(params, 1, ws);
    ws.h[0].resize(1, x.size());
    std::copy(x.begin(), x.end(), ws.h[0].data());
    forward_into_workspace(params, ws);
    Matrix jac;
    jacobian_chain(params, ws, 0, ws.pre_tangent, ws.tangent, jac);
    return jac;
}

namespace {

double mse_and_delta(const MlpParams& p, const Batch& batch, MlpWorkspace& ws) {
    const std::size_t layers = p.num_layers();
    const std::size_t batch_n = batch.size();
    const Matrix& out = ws.z[layers];
    ws.delta.resize(batch_n, p.output_dim());
    double sum = 0.0;
    const double* op = out.data();
    const double* tp = batch.targets.data();
    double* dp = ws.delta.data();
    const std::size_t count = out.size();
    for (std::size_t j = 0; j < count; ++j) {
        const double r = op[j] - tp[j];
        dp[j] = r;
        sum += r * r;
    }
    return sum / static_cast<double>(batch_n);
}

} // namespace

double loss_and_gradients(const MlpParams& params, const Batch& batch, double lambda,
                          std::vector<double>& grads, MlpWorkspace& ws) {
    if (batch.size() == 0) throw ConfigError("loss_and_gradients: empty batch");
    if (batch.features.rows() != batch.targets.rows())
        throw ShapeError("loss_and_gradients: feature/target row mismatch");
    if (batch.features.cols() != params.input_dim() ||
        batch.targets.cols() != params.output_dim())
        throw ShapeError("loss_and_gradients: batch dimension mismatch");
    if (lambda < 0.0) throw ConfigError("loss_and_gradients: lambda must be non-negative");

    const std::size_t layers = params.num_layers();
    const std::size_t batch_n = batch.size();
    const double inv_b = 1.0 / static_cast<double>(batch_n);

    ensure_layers(params, batch_n, ws);
    ws.h[0] = batch.features;
    forward_into_workspace(params, ws);

    grads.assign(params.parameter_count(), 0.0);
    auto wgrad = [&](std::size_t i) {
        return grads.data() + (params.weight(i) - params.raw().data());
    };
    auto bgrad = [&](std::size_t i) {
        return grads.data() + (params.bias(i) - params.raw().data());
    };

    double loss = mse_and_delta(params, batch, ws);
    ops().scale(2.0 * inv_b, ws.delta.data(), ws.delta.size());

    // Reverse pass for the mean-squared-error term.
    for (std::size_t l = layers; l >= 1; --l) {
        const std::size_t i = l - 1;
        const std::size_t n_out = params.weight_rows(i);
        const std::size_t n_in = params.weight_cols(i);
        ops().matmul_tn(ws.delta.data(), ws.h[l - 1].data(), wgrad(i), n_out, batch_n, n_in,
                        true);
        double* bg = bgrad(i);
        for (std::size_t b = 0; b < batch_n; ++b) {
            const double* drow = ws.delta.row(b);
            for (std::size_t j = 0; j < n_out; ++j) bg[j] += drow[j];
        }
        if (l > 1) {
            ws.delta_next.resize(batch_n, n_in);
            ops().matmul_nn(ws.delta.data(), params.weight(i), ws.delta_next.data(), batch_n,
                            n_out, n_in, false);
            ops().hadamard(ws.delta_next.data(), ws.d1[l - 1].data(), ws.delta_next.data(),
                           ws.delta_next.size());
            std::swap(ws.delta, ws.delta_next);
        }
    }

    // Jacobian-Frobenius regularizer: forward-mode tangents per sample, then
    // reverse accumulation through the tangent chain and the preactivations.
    if (lambda > 0.0) {
        const std::size_t m = params.input_dim();
        double reg_sum = 0.0;
        for (std::size_t b = 0; b < batch_n; ++b) {
            jacobian_chain(params, ws, b, ws.pre_tangent, ws.tangent, ws.jac);
            reg_sum += ops().sumsq(ws.jac.data(), ws.jac.size());

            const double coeff = 2.0 * lambda * inv_b;
            ws.jac_bar.resize(params.output_dim(), m);
            for (std::size_t j = 0; j < ws.jac.size(); ++j)
                ws.jac_bar.data()[j] = coeff * ws.jac.data()[j];

            const std::size_t last = layers - 1;
            if (layers == 1) {
                // J = W_0: the whole gradient is jac_bar.
                ops().axpy(1.0, ws.jac_bar.data(), wgrad(0), ws.jac_bar.size());
                continue;
            }
            // dR/dW_{L-1} += Jbar (T^{L-1})^T ; Tbar = W_{L-1}^T Jbar
            ops().matmul_nt(ws.jac_bar.data(), ws.tangent[last].data(), wgrad(last),
                            params.output_dim(), m, params.weight_cols(last), true);
            ws.tan_bar.resize(params.weight_cols(last), m);
            ops().matmul_tn(params.weight(last), ws.jac_bar.data(), ws.tan_bar.data(),
                            params.weight_cols(last), params.output_dim(), m, false);

            for (std::size_t l = layers - 1; l >= 1; --l) {
                const std::size_t n_l = params.layer_sizes()[l];
                const double* d1row = ws.d1[l].row(b);
                const double* d2row = ws.d2[l].row(b);

                // Adjoint of the preactivation through diag(sigma'(z)).
                ws.zr.resize(n_l);
                for (std::size_t r = 0; r < n_l; ++r)
                    ws.zr[r] = d2row[r] * ops().dot(ws.pre_tangent[l].row(r),
                                                    ws.tan_bar.row(r), m);

                // S_hat = diag(sigma') Tbar
                ws.tan_tmp.resize(n_l, m);
                for (std::size_t r = 0; r < n_l; ++r) {
                    const double s = d1row[r];
                    const double* src = ws.tan_bar.row(r);
                    double* dst = ws.tan_tmp.row(r);
                    for (std::size_t c = 0; c < m; ++c) dst[c] = s * src[c];
                }

                // dR/dW_{l-1} += S_hat (T^{l-1})^T, with T^0 = I.
                if (l == 1) {
                    ops().axpy(1.0, ws.tan_tmp.data(), wgrad(0), ws.tan_tmp.size());
                } else {
                    ops().matmul_nt(ws.tan_tmp.data(), ws.tangent[l - 1].data(), wgrad(l - 1),
                                    n_l, m, params.weight_cols(l - 1), true);
                    ws.tan_bar.resize(params.weight_cols(l - 1), m);
                    ops().matmul_tn(params.weight(l - 1), ws.tan_tmp.data(), ws.tan_bar.data(),
                                    params.weight_cols(l - 1), n_l, m, false);
                }

                // u^l = zr + sigma' .* (W_l^T u^{l+1}); top layer has no
                // upstream term because the output layer is linear.
                if (l == layers - 1) {
                    ws.u = ws.zr;
                } else {
                    ws.u_next.resize(n_l);
                    ops().matmul_tn(params.weight(l), ws.u.data(), ws.u_next.data(), n_l,
                                    params.weight_rows(l), 1, false);
                    for (std::size_t r = 0; r < n_l; ++r)
                        ws.u_next[r] = ws.zr[r] + d1row[r] * ws.u_next[r];
                    std::swap(ws.u, ws.u_next);
                }

                // dR/dW_{l-1} += u (h^{l-1})^T, dR/db_{l-1} += u
                ops().matmul_nt(ws.u.data(), ws.h[l - 1].row(b), wgrad(l - 1), n_l, 1,
                                params.weight_cols(l - 1), true);
                ops().axpy(1.0, ws.u.data(), bgrad(l - 1), n_l);
            }
        }
        loss += lambda * reg_sum * inv_b;
    }

    if (!std::isfinite(loss)) throw DivergenceError("loss_and_gradients: non-finite loss", 0);
    return loss;
}

double batch_loss(const MlpParams& params, const Batch& batch, double lambda, MlpWorkspace& ws) {
    if (batch.size() == 0) throw ConfigError("batch_loss: empty batch");
    ensure_layers(params, batch.size(), ws);
    ws.h[0] = batch.features;
    forward_into_workspace(params, ws);
    double loss = mse_and_delta(params, batch, ws);
    if (lambda > 0.0) {
        double reg_sum = 0.0;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            jacobian_chain(params, ws, b, ws.pre_tangent, ws.tangent, ws.jac);
            reg_sum += ops().sumsq(ws.jac.data(), ws.jac.size());
        }
        loss += lambda * reg_sum / static_cast<double>(batch.size());
    }
    return loss;
}

double batch_mse(const MlpParams& params, const Batch& batch, MlpWorkspace& ws) {
    return batch_loss(params, batch, 0.0, ws);
}

} // namespace phaseflow::net
