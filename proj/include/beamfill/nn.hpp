#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "beamfill/rng.hpp"

namespace beamfill {

// Batched activations are stored feature-major with the batch as columns:
// buffer[f * batch + c] is feature f of sample c. A batch of one is laid
// out exactly like a plain vector, and per-element arithmetic follows the
// same accumulation order for every batch width, so results for a given
// sample do not depend on how it was batched.

/// View over one parameter tensor and its gradient, consumed by the
/// optimizer and the checkpoint writer.
struct ParamRef {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    std::vector<size_t> shape;
};

void zero_grads(const std::vector<ParamRef>& params);

/// Fully connected layer, y = W·x + b.
struct Dense {
    size_t in_dim = 0;
    size_t out_dim = 0;
    std::vector<double> w;   // out_dim x in_dim, row-major
    std::vector<double> b;   // out_dim
    std::vector<double> dw;  // same shapes as w / b
    std::vector<double> db;

    Dense(size_t in, size_t out);

    /// Weights ~ U(-sqrt(1/in_dim), sqrt(1/in_dim)), biases zero.
    void init(Rng& rng);

    /// x: in_dim x batch, y: out_dim x batch.
    void forward(const double* x, double* y, size_t batch) const;

    /// Computes dw/db from dy (out_dim x batch) and the forward input x,
    /// overwriting previous gradients; writes dx (in_dim x batch) unless
    /// dx is null.
    void backward(const double* x, const double* dy, double* dx, size_t batch);

    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);
};

/// Valid (no padding, stride 1) cross-correlation along the last axis.
struct Conv1d {
    size_t in_ch = 0;
    size_t out_ch = 0;
    size_t kernel = 0;
    std::vector<double> w;   // out_ch x in_ch x kernel
    std::vector<double> b;   // out_ch
    std::vector<double> dw;
    std::vector<double> db;

    Conv1d(size_t in_channels, size_t out_channels, size_t kernel_size);

    /// Weights ~ U(-s, s) with s = sqrt(1/(in_ch*kernel)), biases zero.
    void init(Rng& rng);

    size_t out_len(size_t len) const { return len - kernel + 1; }

    /// x: (in_ch*len) x batch, y: (out_ch*out_len) x batch.
    void forward(const double* x, size_t len, double* y, size_t batch) const;

    /// Computes dw/db (overwriting previous gradients); this layer sits at
    /// the front of its network so no input gradient is needed.
    void backward(const double* x, size_t len, const double* dy, size_t batch);

    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);
};

/// Single-layer LSTM over a fixed-length sequence, returning the final
/// hidden state. Gates are stacked in the order input, forget, cell
/// candidate, output: row g*hidden + h of wx/wh/b belongs to gate g.
struct Lstm {
    size_t in_dim = 0;
    size_t hidden = 0;
    std::vector<double> wx;  // 4*hidden x in_dim
    std::vector<double> wh;  // 4*hidden x hidden
    std::vector<double> b;   // 4*hidden
    std::vector<double> dwx;
    std::vector<double> dwh;
    std::vector<double> db;

    Lstm(size_t in, size_t hidden_size);

    /// Weights ~ U(-s, s) with s = sqrt(1/hidden); biases zero except the
    /// forget-gate block, which starts at 1.0.
    void init(Rng& rng);

    /// xs: steps consecutive (in_dim x batch) blocks; h_out: hidden x batch.
    /// Initial hidden and cell states are zero. With cache = true the pass
    /// stores what backward() needs.
    void forward(const double* xs, size_t steps, size_t batch, double* h_out,
                 bool cache);

    /// Backpropagation through time from a gradient on the final hidden
    /// state (hidden x batch). Computes dwx/dwh/db, overwriting previous
    /// gradients.
    void backward(const double* dh_final, size_t batch);

    void zero_grad();
    std::vector<ParamRef> params(const std::string& prefix);

   private:
    bool has_cache_ = false;
    size_t cached_steps_ = 0;
    size_t cached_batch_ = 0;
    std::vector<double> x_cache_;     // steps x in_dim x batch
    std::vector<double> h_prev_cache_;  // steps x hidden x batch, h_{t-1}
    std::vector<double> c_prev_cache_;  // steps x hidden x batch, c_{t-1}
    std::vector<double> gate_cache_;  // steps x 4*hidden x batch, post-activation
    std::vector<double> ctanh_cache_;  // steps x hidden x batch, tanh(c_t)
};

/// Inverted dropout: training mode zeroes each element with probability
/// rate and scales survivors by 1/(1-rate); inference is the identity.
struct Dropout {
    double rate = 0.0;

    explicit Dropout(double r);

    void forward(const double* x, double* y, size_t n, bool training, Rng& rng);
    /// Applies the mask of the last training forward.
    void backward(const double* dy, double* dx, size_t n) const;

   private:
    std::vector<double> mask_;  // per-element factor, 0 or 1/(1-rate)
};

void relu_forward(const double* x, double* y, size_t n);
/// dx = dy wherever the forward output y was positive, else 0.
void relu_backward(const double* y, const double* dy, double* dx, size_t n);

/// Mean over the batch of per-sample mean squared component error.
/// pred/target/grad: len x batch; grad[f,c] = 2(pred-target)/(len*batch).
/// grad may be null when only the value is wanted.
double mse_loss(const double* pred, const double* target, size_t len,
                size_t batch, double* grad);

}  // namespace beamfill
