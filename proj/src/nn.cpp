#include "beamfill/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "beamfill/errors.hpp"

namespace beamfill {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// The matrix kernels below are templated on the batch width: BSZ = 0 builds
// the generic runtime-width code, while the dispatchers route the protocol
// width through a specialization whose strides are compile-time constants
// (the vectorizer cannot prove contiguity through a runtime stride). Both
// builds share one algorithm body, and this translation unit pins
// floating-point contraction off, so every build rounds identically —
// which specialization runs can never change a result, only its speed.

// y (m x bsz) = [bias | y] + w (m x k) · x (k x bsz). Row-major, batch as
// columns. The k summation runs as four independent partial chains (term i
// feeds chain i % 4, breaking the FMA latency serialization), finished as
// (p0 + p1) + (p2 + p3). Both column paths use the same split, so every
// output cell sees one fixed summation order no matter how the batch is
// chunked — per-sample results cannot depend on the batch width.
template <size_t BSZ>
void gemm_w(const double* w, const double* x, const double* bias, double* y,
            size_t m, size_t k, size_t bsz_rt, bool acc) {
    const size_t bsz = BSZ == 0 ? bsz_rt : BSZ;
    for (size_t o = 0; o < m; ++o) {
        const double* wrow = w + o * k;
        double* yrow = y + o * bsz;
        const double start = bias ? bias[o] : 0.0;
        size_t c = 0;
        for (; c + 4 <= bsz; c += 4) {
            double p0[4] = {acc ? yrow[c + 0] : start,
                            acc ? yrow[c + 1] : start,
                            acc ? yrow[c + 2] : start,
                            acc ? yrow[c + 3] : start};
            double p1[4] = {0, 0, 0, 0};
            double p2[4] = {0, 0, 0, 0};
            double p3[4] = {0, 0, 0, 0};
            const double* xc = x + c;
            size_t i = 0;
            for (; i + 4 <= k; i += 4) {
                const double w0 = wrow[i], w1 = wrow[i + 1];
                const double w2 = wrow[i + 2], w3 = wrow[i + 3];
                const double* x0 = xc + i * bsz;
                const double* x1 = x0 + bsz;
                const double* x2 = x1 + bsz;
                const double* x3 = x2 + bsz;
                for (int j = 0; j < 4; ++j) {
                    p0[j] += w0 * x0[j];
                    p1[j] += w1 * x1[j];
                    p2[j] += w2 * x2[j];
                    p3[j] += w3 * x3[j];
                }
            }
            // No pointer indirection here: taking the partials' addresses
            // would spill them to the stack for the whole main loop.
            for (; i < k; ++i) {
                const double wv = wrow[i];
                const double* xr = xc + i * bsz;
                if (i % 4 == 0)
                    for (int j = 0; j < 4; ++j) p0[j] += wv * xr[j];
                else if (i % 4 == 1)
                    for (int j = 0; j < 4; ++j) p1[j] += wv * xr[j];
                else if (i % 4 == 2)
                    for (int j = 0; j < 4; ++j) p2[j] += wv * xr[j];
                else
                    for (int j = 0; j < 4; ++j) p3[j] += wv * xr[j];
            }
            for (int j = 0; j < 4; ++j)
                yrow[c + j] = (p0[j] + p1[j]) + (p2[j] + p3[j]);
        }
        for (; c < bsz; ++c) {
            double p0 = acc ? yrow[c] : start, p1 = 0, p2 = 0, p3 = 0;
            size_t i = 0;
            for (; i + 4 <= k; i += 4) {
                p0 += wrow[i] * x[i * bsz + c];
                p1 += wrow[i + 1] * x[(i + 1) * bsz + c];
                p2 += wrow[i + 2] * x[(i + 2) * bsz + c];
                p3 += wrow[i + 3] * x[(i + 3) * bsz + c];
            }
            for (; i < k; ++i) {
                const double xv = x[i * bsz + c];
                if (i % 4 == 0)
                    p0 += wrow[i] * xv;
                else if (i % 4 == 1)
                    p1 += wrow[i] * xv;
                else if (i % 4 == 2)
                    p2 += wrow[i] * xv;
                else
                    p3 += wrow[i] * xv;
            }
            yrow[c] = (p0 + p1) + (p2 + p3);
        }
    }
}

void gemm(const double* w, const double* x, const double* bias, double* y,
          size_t m, size_t k, size_t bsz, bool acc) {
    if (bsz == 4)
        gemm_w<4>(w, x, bias, y, m, k, bsz, acc);
    else
        gemm_w<0>(w, x, bias, y, m, k, bsz, acc);
}

// dx (k x bsz) = [0 | dx] + wᵀ · dy with w (m x k), dy (m x bsz).
// Runs as a sweep of rank-1 updates dx += w_oᵀ · dy_o with o ascending, so
// w is read row-major (sequential) and the dx block stays cache-resident
// across the whole sweep. Four w rows share each pass to cut dx traffic;
// every dx cell still accumulates its terms in ascending o order in every
// path, independent of the batch width.
template <size_t BSZ>
void gemm_t_w(const double* w, const double* dy, double* dx, size_t m,
              size_t k, size_t bsz_rt, bool acc) {
    const size_t bsz = BSZ == 0 ? bsz_rt : BSZ;
    if (!acc) std::fill(dx, dx + k * bsz, 0.0);
    size_t o = 0;
    for (; o + 4 <= m; o += 4) {
        const double* w0 = w + (o + 0) * k;
        const double* w1 = w + (o + 1) * k;
        const double* w2 = w + (o + 2) * k;
        const double* w3 = w + (o + 3) * k;
        const double* dy0 = dy + (o + 0) * bsz;
        const double* dy1 = dy + (o + 1) * bsz;
        const double* dy2 = dy + (o + 2) * bsz;
        const double* dy3 = dy + (o + 3) * bsz;
        size_t c = 0;
        for (; c + 4 <= bsz; c += 4) {
            double* dxc = dx + c;
            for (size_t i = 0; i < k; ++i) {
                double* dxr = dxc + i * bsz;
                for (int j = 0; j < 4; ++j) {
                    double v = dxr[j];
                    v += w0[i] * dy0[c + j];
                    v += w1[i] * dy1[c + j];
                    v += w2[i] * dy2[c + j];
                    v += w3[i] * dy3[c + j];
                    dxr[j] = v;
                }
            }
        }
        for (; c < bsz; ++c) {
            for (size_t i = 0; i < k; ++i) {
                double v = dx[i * bsz + c];
                v += w0[i] * dy0[c];
                v += w1[i] * dy1[c];
                v += w2[i] * dy2[c];
                v += w3[i] * dy3[c];
                dx[i * bsz + c] = v;
            }
        }
    }
    for (; o < m; ++o) {
        const double* wrow = w + o * k;
        const double* dyr = dy + o * bsz;
        for (size_t c = 0; c < bsz; ++c) {
            const double g = dyr[c];
            for (size_t i = 0; i < k; ++i) dx[i * bsz + c] += wrow[i] * g;
        }
    }
}

void gemm_t(const double* w, const double* dy, double* dx, size_t m, size_t k,
            size_t bsz, bool acc) {
    if (bsz == 4)
        gemm_t_w<4>(w, dy, dx, m, k, bsz, acc);
    else
        gemm_t_w<0>(w, dy, dx, m, k, bsz, acc);
}

// dw (m x k) = Σ_t dz_t · x_tᵀ over a stash of `steps` gradient/input
// blocks, overwriting dw. The x blocks are first re-laid one contiguous
// row per batch column, turning the update into broadcast-times-row
// passes over unit-stride memory. Rows are processed four per pass so
// each x row is fetched once for four dw rows, which stay cache-resident
// across every step — dw itself is streamed through memory exactly once.
// Per cell the sum runs in ascending (step, column) order in every path.
template <size_t BSZ>
void outer_acc_stash_w(double* dw, const double* dz, size_t dz_stride,
                       const double* x, size_t x_stride, size_t steps,
                       size_t m, size_t k, size_t bsz_rt) {
    const size_t bsz = BSZ == 0 ? bsz_rt : BSZ;
    static thread_local std::vector<double> xt;  // steps*bsz rows of k
    xt.resize(steps * bsz * k);
    for (size_t t = 0; t < steps; ++t)
        for (size_t j = 0; j < bsz; ++j) {
            double* row = xt.data() + (t * bsz + j) * k;
            const double* src = x + t * x_stride + j;
            for (size_t i = 0; i < k; ++i) row[i] = src[i * bsz];
        }
    size_t o = 0;
    for (; o + 4 <= m; o += 4) {
        double* r0 = dw + (o + 0) * k;
        double* r1 = dw + (o + 1) * k;
        double* r2 = dw + (o + 2) * k;
        double* r3 = dw + (o + 3) * k;
        std::fill(r0, r0 + 4 * k, 0.0);  // four consecutive rows
        for (size_t t = 0; t < steps; ++t)
            for (size_t j = 0; j < bsz; ++j) {
                const double* dzt = dz + t * dz_stride + j;
                const double g0 = dzt[(o + 0) * bsz];
                const double g1 = dzt[(o + 1) * bsz];
                const double g2 = dzt[(o + 2) * bsz];
                const double g3 = dzt[(o + 3) * bsz];
                const double* xj = xt.data() + (t * bsz + j) * k;
                for (size_t i = 0; i < k; ++i) {
                    r0[i] += g0 * xj[i];
                    r1[i] += g1 * xj[i];
                    r2[i] += g2 * xj[i];
                    r3[i] += g3 * xj[i];
                }
            }
    }
    for (; o < m; ++o) {
        double* dwr = dw + o * k;
        std::fill(dwr, dwr + k, 0.0);
        for (size_t t = 0; t < steps; ++t)
            for (size_t j = 0; j < bsz; ++j) {
                const double g = dz[t * dz_stride + o * bsz + j];
                const double* xj = xt.data() + (t * bsz + j) * k;
                for (size_t i = 0; i < k; ++i) dwr[i] += g * xj[i];
            }
    }
}

void outer_acc_stash(double* dw, const double* dz, size_t dz_stride,
                     const double* x, size_t x_stride, size_t steps, size_t m,
                     size_t k, size_t bsz) {
    if (bsz == 4)
        outer_acc_stash_w<4>(dw, dz, dz_stride, x, x_stride, steps, m, k, bsz);
    else
        outer_acc_stash_w<0>(dw, dz, dz_stride, x, x_stride, steps, m, k, bsz);
}

void bias_acc_stash(double* db, const double* dz, size_t dz_stride,
                    size_t steps, size_t m, size_t bsz) {
    for (size_t o = 0; o < m; ++o) {
        double a = 0.0;
        for (size_t t = 0; t < steps; ++t) {
            const double* dyr = dz + t * dz_stride + o * bsz;
            for (size_t c = 0; c < bsz; ++c) a += dyr[c];
        }
        db[o] = a;
    }
}

}  // namespace

void zero_grads(const std::vector<ParamRef>& params) {
    for (const ParamRef& p : params)
        std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

// ---------------------------------------------------------------- Dense

Dense::Dense(size_t in, size_t out)
    : in_dim(in),
      out_dim(out),
      w(in * out, 0.0),
      b(out, 0.0),
      dw(in * out, 0.0),
      db(out, 0.0) {
    if (in == 0 || out == 0) throw ShapeMismatch("dense: zero dimension");
}

void Dense::init(Rng& rng) {
    const double s = std::sqrt(1.0 / static_cast<double>(in_dim));
    for (double& v : w) v = rng.uniform(-s, s);
    std::fill(b.begin(), b.end(), 0.0);
}

void Dense::forward(const double* x, double* y, size_t batch) const {
    gemm(w.data(), x, b.data(), y, out_dim, in_dim, batch, false);
}

void Dense::backward(const double* x, const double* dy, double* dx,
                     size_t batch) {
    outer_acc_stash(dw.data(), dy, 0, x, 0, 1, out_dim, in_dim, batch);
    bias_acc_stash(db.data(), dy, 0, 1, out_dim, batch);
    if (dx != nullptr) gemm_t(w.data(), dy, dx, out_dim, in_dim, batch, false);
}

void Dense::zero_grad() {
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
}

std::vector<ParamRef> Dense::params(const std::string& prefix) {
    return {
        {prefix + ".w", &w, &dw, {out_dim, in_dim}},
        {prefix + ".b", &b, &db, {out_dim}},
    };
}

// --------------------------------------------------------------- Conv1d

Conv1d::Conv1d(size_t in_channels, size_t out_channels, size_t kernel_size)
    : in_ch(in_channels),
      out_ch(out_channels),
      kernel(kernel_size),
      w(out_channels * in_channels * kernel_size, 0.0),
      b(out_channels, 0.0),
      dw(w.size(), 0.0),
      db(out_channels, 0.0) {
    if (in_ch == 0 || out_ch == 0 || kernel == 0)
        throw ShapeMismatch("conv1d: zero dimension");
}

void Conv1d::init(Rng& rng) {
    const double s =
        std::sqrt(1.0 / static_cast<double>(in_ch * kernel));
    for (double& v : w) v = rng.uniform(-s, s);
    std::fill(b.begin(), b.end(), 0.0);
}

void Conv1d::forward(const double* x, size_t len, double* y,
                     size_t batch) const {
    if (len < kernel)
        throw ShapeMismatch("conv1d: input shorter than the kernel");
    const size_t lo = out_len(len);
    for (size_t f = 0; f < out_ch; ++f) {
        for (size_t t = 0; t < lo; ++t) {
            double* yr = y + (f * lo + t) * batch;
            for (size_t c = 0; c < batch; ++c) yr[c] = b[f];
            for (size_t ci = 0; ci < in_ch; ++ci) {
                for (size_t j = 0; j < kernel; ++j) {
                    const double wv = w[(f * in_ch + ci) * kernel + j];
                    const double* xr = x + (ci * len + t + j) * batch;
                    for (size_t c = 0; c < batch; ++c) yr[c] += wv * xr[c];
                }
            }
        }
    }
}

void Conv1d::backward(const double* x, size_t len, const double* dy,
                      size_t batch) {
    if (len < kernel)
        throw ShapeMismatch("conv1d: input shorter than the kernel");
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
    const size_t lo = out_len(len);
    for (size_t f = 0; f < out_ch; ++f) {
        for (size_t t = 0; t < lo; ++t) {
            const double* dyr = dy + (f * lo + t) * batch;
            double sum = 0;
            for (size_t c = 0; c < batch; ++c) sum += dyr[c];
            db[f] += sum;
            for (size_t ci = 0; ci < in_ch; ++ci) {
                for (size_t j = 0; j < kernel; ++j) {
                    const double* xr = x + (ci * len + t + j) * batch;
                    double acc = 0;
                    for (size_t c = 0; c < batch; ++c) acc += dyr[c] * xr[c];
                    dw[(f * in_ch + ci) * kernel + j] += acc;
                }
            }
        }
    }
}

void Conv1d::zero_grad() {
    std::fill(dw.begin(), dw.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
}

std::vector<ParamRef> Conv1d::params(const std::string& prefix) {
    return {
        {prefix + ".w", &w, &dw, {out_ch, in_ch, kernel}},
        {prefix + ".b", &b, &db, {out_ch}},
    };
}

// ----------------------------------------------------------------- Lstm

Lstm::Lstm(size_t in, size_t hidden_size)
    : in_dim(in),
      hidden(hidden_size),
      wx(4 * hidden_size * in, 0.0),
      wh(4 * hidden_size * hidden_size, 0.0),
      b(4 * hidden_size, 0.0),
      dwx(wx.size(), 0.0),
      dwh(wh.size(), 0.0),
      db(b.size(), 0.0) {
    if (in == 0 || hidden == 0) throw ShapeMismatch("lstm: zero dimension");
}

void Lstm::init(Rng& rng) {
    const double s = std::sqrt(1.0 / static_cast<double>(hidden));
    for (double& v : wx) v = rng.uniform(-s, s);
    for (double& v : wh) v = rng.uniform(-s, s);
    std::fill(b.begin(), b.end(), 0.0);
    // forget-gate block starts open so early gradients flow through time
    std::fill(b.begin() + hidden, b.begin() + 2 * hidden, 1.0);
}

void Lstm::forward(const double* xs, size_t steps, size_t batch, double* h_out,
                   bool cache) {
    if (steps == 0) throw ShapeMismatch("lstm: empty sequence");
    const size_t H = hidden;
    const size_t hb = H * batch;
    const size_t gb = 4 * hb;

    std::vector<double> z(gb);
    std::vector<double> h_prev(hb, 0.0), c_prev(hb, 0.0);
    std::vector<double> h_cur(hb), c_cur(hb);

    if (cache) {
        x_cache_.assign(xs, xs + steps * in_dim * batch);
        h_prev_cache_.resize(steps * hb);
        c_prev_cache_.resize(steps * hb);
        gate_cache_.resize(steps * gb);
        ctanh_cache_.resize(steps * hb);
    }

    for (size_t t = 0; t < steps; ++t) {
        const double* xt = xs + t * in_dim * batch;
        gemm(wx.data(), xt, b.data(), z.data(), 4 * H, in_dim, batch, false);
        // the initial hidden state is zero, so the first recurrent product
        // contributes nothing and is skipped
        if (t > 0)
            gemm(wh.data(), h_prev.data(), nullptr, z.data(), 4 * H, H, batch,
                 true);

        double* gates = cache ? gate_cache_.data() + t * gb : z.data();
        for (size_t j = 0; j < hb; ++j) {
            const double gi = sigmoid(z[j]);
            const double gf = sigmoid(z[hb + j]);
            const double gg = std::tanh(z[2 * hb + j]);
            const double go = sigmoid(z[3 * hb + j]);
            const double cc = gf * c_prev[j] + gi * gg;
            const double th = std::tanh(cc);
            c_cur[j] = cc;
            h_cur[j] = go * th;
            gates[j] = gi;
            gates[hb + j] = gf;
            gates[2 * hb + j] = gg;
            gates[3 * hb + j] = go;
            if (cache) ctanh_cache_[t * hb + j] = th;
        }
        if (cache) {
            std::memcpy(h_prev_cache_.data() + t * hb, h_prev.data(),
                        hb * sizeof(double));
            std::memcpy(c_prev_cache_.data() + t * hb, c_prev.data(),
                        hb * sizeof(double));
        }
        h_prev.swap(h_cur);
        c_prev.swap(c_cur);
    }
    std::memcpy(h_out, h_prev.data(), hb * sizeof(double));

    has_cache_ = cache;
    cached_steps_ = cache ? steps : 0;
    cached_batch_ = cache ? batch : 0;
}

void Lstm::backward(const double* dh_final, size_t batch) {
    if (!has_cache_) throw NoForwardCache("lstm: backward without forward");
    if (batch != cached_batch_)
        throw ShapeMismatch("lstm: backward batch differs from forward");
    const size_t H = hidden;
    const size_t hb = H * batch;
    const size_t gb = 4 * hb;
    const size_t steps = cached_steps_;

    std::vector<double> dh(dh_final, dh_final + hb);
    std::vector<double> dc(hb, 0.0);
    std::vector<double> dz_stash(steps * gb);

    for (size_t rt = steps; rt-- > 0;) {
        const double* gates = gate_cache_.data() + rt * gb;
        const double* th = ctanh_cache_.data() + rt * hb;
        const double* cp = c_prev_cache_.data() + rt * hb;
        double* dz = dz_stash.data() + rt * gb;
        for (size_t j = 0; j < hb; ++j) {
            const double gi = gates[j];
            const double gf = gates[hb + j];
            const double gg = gates[2 * hb + j];
            const double go = gates[3 * hb + j];
            const double t = th[j];
            const double dhj = dh[j];
            const double dcj = dc[j] + dhj * go * (1.0 - t * t);
            dz[j] = dcj * gg * gi * (1.0 - gi);
            dz[hb + j] = dcj * cp[j] * gf * (1.0 - gf);
            dz[2 * hb + j] = dcj * gi * (1.0 - gg * gg);
            dz[3 * hb + j] = dhj * t * go * (1.0 - go);
            dc[j] = dcj * gf;
        }
        // gradient flowing into the previous hidden state; nothing consumes
        // it before the first step
        if (rt > 0) gemm_t(wh.data(), dz, dh.data(), 4 * H, H, batch, false);
    }

    // single fused pass per weight matrix over the stashed gate gradients;
    // the first step's hidden state is zero, so its term of the recurrent
    // gradient is dropped
    outer_acc_stash(dwx.data(), dz_stash.data(), gb, x_cache_.data(),
                    in_dim * batch, steps, 4 * H, in_dim, batch);
    if (steps > 1)
        outer_acc_stash(dwh.data(), dz_stash.data() + gb, gb,
                        h_prev_cache_.data() + hb, hb, steps - 1, 4 * H, H,
                        batch);
    else
        std::fill(dwh.begin(), dwh.end(), 0.0);
    bias_acc_stash(db.data(), dz_stash.data(), gb, steps, 4 * H, batch);
}

void Lstm::zero_grad() {
    std::fill(dwx.begin(), dwx.end(), 0.0);
    std::fill(dwh.begin(), dwh.end(), 0.0);
    std::fill(db.begin(), db.end(), 0.0);
}

std::vector<ParamRef> Lstm::params(const std::string& prefix) {
    return {
        {prefix + ".wx", &wx, &dwx, {4 * hidden, in_dim}},
        {prefix + ".wh", &wh, &dwh, {4 * hidden, hidden}},
        {prefix + ".b", &b, &db, {4 * hidden}},
    };
}

// -------------------------------------------------------------- Dropout

Dropout::Dropout(double r) : rate(r) {
    if (!(r >= 0.0) || r >= 1.0)
        throw ConfigError("dropout rate must lie in [0, 1)");
}

void Dropout::forward(const double* x, double* y, size_t n, bool training,
                      Rng& rng) {
    if (!training || rate == 0.0) {
        if (y != x) std::memcpy(y, x, n * sizeof(double));
        mask_.assign(n, 1.0);
        return;
    }
    mask_.resize(n);
    const double keep = 1.0 / (1.0 - rate);
    for (size_t i = 0; i < n; ++i) {
        mask_[i] = rng.uniform() < rate ? 0.0 : keep;
        y[i] = x[i] * mask_[i];
    }
}

void Dropout::backward(const double* dy, double* dx, size_t n) const {
    if (mask_.size() != n)
        throw NoForwardCache("dropout: backward without matching forward");
    for (size_t i = 0; i < n; ++i) dx[i] = dy[i] * mask_[i];
}

// ------------------------------------------------------- relu and loss

void relu_forward(const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(const double* y, const double* dy, double* dx, size_t n) {
    for (size_t i = 0; i < n; ++i) dx[i] = y[i] > 0.0 ? dy[i] : 0.0;
}

double mse_loss(const double* pred, const double* target, size_t len,
                size_t batch, double* grad) {
    if (len == 0 || batch == 0) throw ShapeMismatch("mse: empty input");
    const double scale = 1.0 / (static_cast<double>(len) *
                                static_cast<double>(batch));
    double total = 0;
    for (size_t i = 0; i < len * batch; ++i) {
        const double d = pred[i] - target[i];
        total += d * d;
        if (grad != nullptr) grad[i] = 2.0 * d * scale;
    }
    return total * scale;
}

}  // namespace beamfill
