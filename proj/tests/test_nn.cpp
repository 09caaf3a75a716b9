#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "beamfill/errors.hpp"
#include "beamfill/nn.hpp"
#include "beamfill/optimizer.hpp"
#include "beamfill/rng.hpp"
#include "gradcheck.hpp"

using namespace beamfill;

namespace {
double sigmoid_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

TEST_CASE("dense forward hand values") {
    Dense d(2, 2);
    d.w = {1, 1, 1, -1};  // [[1,1],[1,-1]]
    d.b = {0, 0};
    const double x[2] = {2, 3};
    double y[2];
    d.forward(x, y, 1);
    CHECK(y[0] == 5.0);
    CHECK(y[1] == -1.0);

    // identity weights pass the input through
    Dense id(3, 3);
    id.w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    const double x3[3] = {0.5, -2.0, 7.0};
    double y3[3];
    id.forward(x3, y3, 1);
    for (int i = 0; i < 3; ++i) CHECK(y3[i] == x3[i]);

    // zero weights produce the bias
    Dense zb(3, 2);
    zb.b = {0.25, -0.5};
    double y2[2];
    zb.forward(x3, y2, 1);
    CHECK(y2[0] == 0.25);
    CHECK(y2[1] == -0.5);
}

TEST_CASE("dense batched forward matches per-sample bitwise") {
    Rng rng(100);
    Dense d(7, 5);
    d.init(rng);
    for (double& v : d.b) v = rng.uniform(-0.5, 0.5);

    const size_t kBatch = 6;  // exercises the 4-wide chunk and the remainder
    std::vector<double> xs(7 * kBatch), ys(5 * kBatch);
    for (double& v : xs) v = rng.uniform(-1, 1);
    d.forward(xs.data(), ys.data(), kBatch);

    for (size_t c = 0; c < kBatch; ++c) {
        double x1[7], y1[5];
        for (size_t f = 0; f < 7; ++f) x1[f] = xs[f * kBatch + c];
        d.forward(x1, y1, 1);
        for (size_t f = 0; f < 5; ++f) CHECK(ys[f * kBatch + c] == y1[f]);
    }
}

TEST_CASE("conv1d shape and hand values") {
    // study configuration: 4 channels, window 3, kernel 2, 6 filters
    Conv1d conv(4, 6, 2);
    CHECK(conv.out_len(3) == 2);
    CHECK(conv.out_ch * conv.out_len(3) == 12);

    // all-ones kernel over constant input sums two values plus bias
    Conv1d sum(1, 1, 2);
    sum.w = {1, 1};
    sum.b = {0.5};
    const double c = 0.3;
    const double x[4] = {c, c, c, c};
    double y[3];
    sum.forward(x, 4, y, 1);
    for (int t = 0; t < 3; ++t) CHECK(y[t] == doctest::Approx(2 * c + 0.5));

    // identity-like kernel [1, 0] reproduces the first L-1 positions
    Conv1d ident(1, 1, 2);
    ident.w = {1, 0};
    const double x2[4] = {0.1, -0.2, 0.7, 0.4};
    double y2[3];
    ident.forward(x2, 4, y2, 1);
    CHECK(y2[0] == 0.1);
    CHECK(y2[1] == -0.2);
    CHECK(y2[2] == 0.7);

    CHECK_THROWS_AS(ident.forward(x2, 1, y2, 1), ShapeMismatch);
}

TEST_CASE("lstm zero parameters give zero hidden state") {
    Lstm lstm(4, 8);
    std::vector<double> xs(3 * 4 * 1);
    for (size_t i = 0; i < xs.size(); ++i) xs[i] = 0.5 * (i % 7) - 1.0;
    std::vector<double> h(8);
    lstm.forward(xs.data(), 3, 1, h.data(), false);
    for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("lstm hidden components stay inside (-1, 1)") {
    Rng rng(5);
    Lstm lstm(4, 16);
    lstm.init(rng);
    for (double& v : lstm.b) v = rng.uniform(-2, 2);  // stress the bound

    for (int n = 0; n < 50; ++n) {
        std::vector<double> xs(5 * 4);
        for (double& v : xs) v = rng.uniform(-3, 3);
        std::vector<double> h(16);
        lstm.forward(xs.data(), 5, 1, h.data(), false);
        for (double v : h) {
            CHECK(v > -1.0);
            CHECK(v < 1.0);
        }
    }
}

TEST_CASE("lstm one-step scalar cell matches the hand formula") {
    Lstm lstm(1, 1);
    const double wxi = 0.3, wxf = -0.2, wxg = 0.5, wxo = 0.1;
    const double bi = 0.1, bf = 1.0, bg = -0.3, bo = 0.2;
    lstm.wx = {wxi, wxf, wxg, wxo};
    lstm.wh = {0.7, -0.4, 0.2, 0.9};  // irrelevant: h0 = 0
    lstm.b = {bi, bf, bg, bo};

    const double x = 0.7;
    double h1;
    lstm.forward(&x, 1, 1, &h1, false);

    const double gi = sigmoid_ref(wxi * x + bi);
    const double gg = std::tanh(wxg * x + bg);
    const double go = sigmoid_ref(wxo * x + bo);
    const double c1 = gi * gg;  // forget gate sees c0 = 0
    CHECK(h1 == doctest::Approx(go * std::tanh(c1)).epsilon(1e-15));
}

TEST_CASE("lstm batched forward matches per-sample bitwise") {
    Rng rng(31);
    Lstm lstm(4, 12);
    lstm.init(rng);

    const size_t kSteps = 3, kBatch = 5;
    std::vector<double> xs(kSteps * 4 * kBatch);
    for (double& v : xs) v = rng.uniform(-1, 1);
    std::vector<double> h(12 * kBatch);
    lstm.forward(xs.data(), kSteps, kBatch, h.data(), false);

    for (size_t c = 0; c < kBatch; ++c) {
        std::vector<double> x1(kSteps * 4), h1(12);
        for (size_t t = 0; t < kSteps; ++t)
            for (size_t f = 0; f < 4; ++f)
                x1[t * 4 + f] = xs[(t * 4 + f) * kBatch + c];
        lstm.forward(x1.data(), kSteps, 1, h1.data(), false);
        for (size_t f = 0; f < 12; ++f) CHECK(h[f * kBatch + c] == h1[f]);
    }
}

TEST_CASE("dropout modes") {
    Rng rng(9);
    Dropout drop(0.2);
    std::vector<double> x(64, 1.0), y(64);

    drop.forward(x.data(), y.data(), x.size(), false, rng);
    for (double v : y) CHECK(v == 1.0);  // inference is the identity

    Dropout none(0.0);
    drop.forward(x.data(), y.data(), x.size(), true, rng);  // advance state
    none.forward(x.data(), y.data(), x.size(), true, rng);
    for (double v : y) CHECK(v == 1.0);  // rate zero keeps everything

    CHECK_THROWS_AS(Dropout(1.0), ConfigError);
    CHECK_THROWS_AS(Dropout(-0.1), ConfigError);
}

TEST_CASE("dropout mask statistics and inverted scaling") {
    Rng rng(123);
    Dropout drop(0.2);
    const size_t kN = 1000000;
    std::vector<double> x(kN, 1.0), y(kN);
    drop.forward(x.data(), y.data(), kN, true, rng);

    size_t zeros = 0;
    for (double v : y) {
        if (v == 0.0) {
            ++zeros;
        } else {
            CHECK(v == 1.25);  // exactly 1 / (1 - 0.2)
        }
    }
    const double frac = static_cast<double>(zeros) / kN;
    CHECK(frac > 0.198);
    CHECK(frac < 0.202);

    // expectation preserved within one percent
    double mean = 0;
    for (double v : y) mean += v;
    mean /= kN;
    CHECK(std::abs(mean - 1.0) < 0.01);
}

TEST_CASE("mse value and gradient") {
    const double pred[2] = {1, 1};
    const double target[2] = {0, 0};
    double grad[2];
    CHECK(mse_loss(pred, target, 2, 1, grad) == 1.0);
    CHECK(grad[0] == 1.0);
    CHECK(grad[1] == 1.0);

    CHECK(mse_loss(pred, pred, 2, 1, nullptr) == 0.0);

    // batch mean: two identical samples score the same as one
    const double p2[4] = {1, 1, 1, 1};
    const double t2[4] = {0, 0, 0, 0};
    double g2[4];
    CHECK(mse_loss(p2, t2, 2, 2, g2) == 1.0);
    for (double g : g2) CHECK(g == 0.5);  // per-sample grad splits the mean
}

TEST_CASE("relu forward and backward") {
    const double x[5] = {-2, -0.5, 0, 0.5, 2};
    double y[5];
    relu_forward(x, y, 5);
    CHECK(y[0] == 0.0);
    CHECK(y[1] == 0.0);
    CHECK(y[2] == 0.0);
    CHECK(y[3] == 0.5);
    CHECK(y[4] == 2.0);

    const double dy[5] = {1, 1, 1, 1, 1};
    double dx[5];
    relu_backward(y, dy, dx, 5);
    CHECK(dx[0] == 0.0);
    CHECK(dx[2] == 0.0);
    CHECK(dx[3] == 1.0);
    CHECK(dx[4] == 1.0);
}

TEST_CASE("adam first step moves each weight by about lr against the sign") {
    Dense d(2, 2);
    d.w = {0.5, -0.5, 0.25, 0.75};
    d.dw = {0.2, -0.3, 0.01, -0.002};
    d.db = {0, 0};
    const std::vector<double> before = d.w;

    Adam adam(0.9, 0.999, 1e-8);
    auto params = d.params("d");
    adam.attach(params);
    adam.step(params, 0.001);

    for (size_t i = 0; i < d.w.size(); ++i) {
        const double delta = d.w[i] - before[i];
        const double g = std::vector<double>{0.2, -0.3, 0.01, -0.002}[i];
        // closed form first step: -lr * g / (|g| + eps)
        CHECK(delta == doctest::Approx(-0.001 * g / (std::abs(g) + 1e-8))
                            .epsilon(1e-12));
        CHECK(std::abs(delta) < 0.001 + 1e-9);
        CHECK(delta * g < 0);  // moves against the gradient
    }
    CHECK(d.b[0] == 0.0);  // zero gradient leaves the parameter unchanged
}

TEST_CASE("adam updates tensors independently") {
    Dense a(3, 2), b(3, 2);
    Rng rng(77);
    a.init(rng);
    b.w = a.w;
    b.b = a.b;
    std::vector<double> grads(6);
    for (double& g : grads) g = rng.uniform(-1, 1);
    a.dw = grads;
    b.dw = grads;

    // joint: both tensors in one optimizer; solo: each alone
    Dense a2 = a, b2 = b;
    Adam joint(0.9, 0.999, 1e-8);
    std::vector<ParamRef> both = a.params("a");
    for (ParamRef& p : b.params("b")) both.push_back(p);
    joint.attach(both);
    joint.step(both, 0.01);

    Adam solo1(0.9, 0.999, 1e-8), solo2(0.9, 0.999, 1e-8);
    auto pa = a2.params("a");
    auto pb = b2.params("b");
    solo1.attach(pa);
    solo1.step(pa, 0.01);
    solo2.attach(pb);
    solo2.step(pb, 0.01);

    for (size_t i = 0; i < a.w.size(); ++i) {
        CHECK(a.w[i] == a2.w[i]);
        CHECK(b.w[i] == b2.w[i]);
    }
}

TEST_CASE("learning-rate schedule") {
    TrainConfig cfg;  // 100 epochs, 0.001, decay 0.1 after epoch 50
    CHECK(lr_at(cfg, 1) == 0.001);
    CHECK(lr_at(cfg, 50) == 0.001);
    CHECK(lr_at(cfg, 51) == doctest::Approx(0.0001));
    CHECK(lr_at(cfg, 100) == doctest::Approx(0.0001));

    int jumps = 0;
    for (int e = 1; e < cfg.epochs; ++e)
        if (lr_at(cfg, e) != lr_at(cfg, e + 1)) ++jumps;
    CHECK(jumps == 1);

    CHECK_THROWS_AS(lr_at(cfg, 0), EpochOutOfRange);
    CHECK_THROWS_AS(lr_at(cfg, 101), EpochOutOfRange);

    TrainConfig bad;
    bad.decay_epoch = 200;
    CHECK_THROWS_AS(check_train_config(bad), ConfigError);
    bad = TrainConfig{};
    bad.base_lr = 0;
    CHECK_THROWS_AS(check_train_config(bad), ConfigError);
    CHECK_NOTHROW(check_train_config(TrainConfig{}));
}

TEST_CASE("gradcheck: dense layer") {
    Rng rng(2024);
    const size_t kIn = 5, kOut = 3, kBatch = 3;
    Dense d(kIn, kOut);
    d.init(rng);
    for (double& v : d.b) v = rng.uniform(-0.3, 0.3);

    std::vector<double> x(kIn * kBatch), target(kOut * kBatch);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : target) v = rng.uniform(-1, 1);

    auto loss_fn = [&]() {
        std::vector<double> y(kOut * kBatch);
        d.forward(x.data(), y.data(), kBatch);
        return mse_loss(y.data(), target.data(), kOut, kBatch, nullptr);
    };

    std::vector<double> y(kOut * kBatch), dy(kOut * kBatch),
        dx(kIn * kBatch);
    d.zero_grad();
    d.forward(x.data(), y.data(), kBatch);
    mse_loss(y.data(), target.data(), kOut, kBatch, dy.data());
    d.backward(x.data(), dy.data(), dx.data(), kBatch);

    CHECK(gradcheck::max_rel_error(d.params("d"), loss_fn) < 1e-4);
    CHECK(gradcheck::max_rel_error_input(x.data(), dx.data(), x.size(),
                                         loss_fn) < 1e-4);
}

TEST_CASE("gradcheck: conv1d layer") {
    Rng rng(2025);
    const size_t kCh = 4, kLen = 3, kFilters = 6, kKernel = 2, kBatch = 2;
    Conv1d conv(kCh, kFilters, kKernel);
    conv.init(rng);
    for (double& v : conv.b) v = rng.uniform(-0.3, 0.3);

    const size_t out_n = kFilters * conv.out_len(kLen);
    std::vector<double> x(kCh * kLen * kBatch), target(out_n * kBatch);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : target) v = rng.uniform(-1, 1);

    auto loss_fn = [&]() {
        std::vector<double> y(out_n * kBatch);
        conv.forward(x.data(), kLen, y.data(), kBatch);
        return mse_loss(y.data(), target.data(), out_n, kBatch, nullptr);
    };

    std::vector<double> y(out_n * kBatch), dy(out_n * kBatch);
    conv.zero_grad();
    conv.forward(x.data(), kLen, y.data(), kBatch);
    mse_loss(y.data(), target.data(), out_n, kBatch, dy.data());
    conv.backward(x.data(), kLen, dy.data(), kBatch);

    CHECK(gradcheck::max_rel_error(conv.params("conv"), loss_fn) < 1e-4);
}

TEST_CASE("gradcheck: lstm over a window") {
    Rng rng(2026);
    const size_t kIn = 3, kHidden = 5, kSteps = 4, kBatch = 2;
    Lstm lstm(kIn, kHidden);
    lstm.init(rng);
    for (double& v : lstm.b) v = rng.uniform(-0.5, 0.5);

    std::vector<double> xs(kSteps * kIn * kBatch), target(kHidden * kBatch);
    for (double& v : xs) v = rng.uniform(-1, 1);
    for (double& v : target) v = rng.uniform(-1, 1);

    auto loss_fn = [&]() {
        std::vector<double> h(kHidden * kBatch);
        lstm.forward(xs.data(), kSteps, kBatch, h.data(), false);
        return mse_loss(h.data(), target.data(), kHidden, kBatch, nullptr);
    };

    std::vector<double> h(kHidden * kBatch), dh(kHidden * kBatch);
    lstm.zero_grad();
    lstm.forward(xs.data(), kSteps, kBatch, h.data(), true);
    mse_loss(h.data(), target.data(), kHidden, kBatch, dh.data());
    lstm.backward(dh.data(), kBatch);

    CHECK(gradcheck::max_rel_error(lstm.params("lstm"), loss_fn) < 1e-4);
}

TEST_CASE("gradcheck: dense-relu-dense stack") {
    Rng rng(2027);
    const size_t kIn = 4, kMid = 6, kOut = 2, kBatch = 3;
    Dense d1(kIn, kMid), d2(kMid, kOut);
    d1.init(rng);
    d2.init(rng);
    for (double& v : d1.b) v = rng.uniform(-0.2, 0.2);

    std::vector<double> x(kIn * kBatch), target(kOut * kBatch);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : target) v = rng.uniform(-1, 1);

    auto loss_fn = [&]() {
        std::vector<double> a(kMid * kBatch), r(kMid * kBatch),
            y(kOut * kBatch);
        d1.forward(x.data(), a.data(), kBatch);
        relu_forward(a.data(), r.data(), a.size());
        d2.forward(r.data(), y.data(), kBatch);
        return mse_loss(y.data(), target.data(), kOut, kBatch, nullptr);
    };

    std::vector<double> a(kMid * kBatch), r(kMid * kBatch), y(kOut * kBatch);
    std::vector<double> dy(kOut * kBatch), dr(kMid * kBatch),
        da(kMid * kBatch);
    d1.zero_grad();
    d2.zero_grad();
    d1.forward(x.data(), a.data(), kBatch);
    relu_forward(a.data(), r.data(), a.size());
    d2.forward(r.data(), y.data(), kBatch);
    mse_loss(y.data(), target.data(), kOut, kBatch, dy.data());
    d2.backward(r.data(), dy.data(), dr.data(), kBatch);
    relu_backward(r.data(), dr.data(), da.data(), r.size());
    d1.backward(x.data(), da.data(), nullptr, kBatch);

    std::vector<ParamRef> all = d1.params("d1");
    for (ParamRef& p : d2.params("d2")) all.push_back(p);
    CHECK(gradcheck::max_rel_error(all, loss_fn) < 1e-4);
}

TEST_CASE("gradcheck: dropout input gradient under a fixed mask") {
    const size_t kN = 32;
    std::vector<double> x(kN), target(kN);
    Rng data_rng(555);
    for (double& v : x) v = data_rng.uniform(-1, 1);
    for (double& v : target) v = data_rng.uniform(-1, 1);

    const uint64_t kMaskSeed = 42;
    auto loss_fn = [&]() {
        Rng rng(kMaskSeed);
        Dropout drop(0.2);
        std::vector<double> y(kN);
        drop.forward(x.data(), y.data(), kN, true, rng);
        return mse_loss(y.data(), target.data(), kN, 1, nullptr);
    };

    Rng rng(kMaskSeed);
    Dropout drop(0.2);
    std::vector<double> y(kN), dy(kN), dx(kN);
    drop.forward(x.data(), y.data(), kN, true, rng);
    mse_loss(y.data(), target.data(), kN, 1, dy.data());
    drop.backward(dy.data(), dx.data(), kN);

    CHECK(gradcheck::max_rel_error_input(x.data(), dx.data(), kN, loss_fn) <
          1e-4);
}

TEST_CASE("zero upstream gradient produces zero parameter gradients") {
    Rng rng(8);
    Lstm lstm(3, 4);
    lstm.init(rng);
    std::vector<double> xs(2 * 3 * 1), h(4);
    for (double& v : xs) v = rng.uniform(-1, 1);
    lstm.zero_grad();
    lstm.forward(xs.data(), 2, 1, h.data(), true);
    const std::vector<double> dh(4, 0.0);
    lstm.backward(dh.data(), 1);
    for (double g : lstm.dwx) CHECK(g == 0.0);
    for (double g : lstm.dwh) CHECK(g == 0.0);
    for (double g : lstm.db) CHECK(g == 0.0);
}

TEST_CASE("duplicated sample leaves the batch-mean gradient unchanged") {
    Rng rng(64);
    Dense d(3, 2);
    d.init(rng);
    double x1[3];
    for (double& v : x1) v = rng.uniform(-1, 1);
    double t1[2] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};

    // single sample
    d.zero_grad();
    double y1[2], dy1[2];
    d.forward(x1, y1, 1);
    mse_loss(y1, t1, 2, 1, dy1);
    d.backward(x1, dy1, nullptr, 1);
    const std::vector<double> dw_single = d.dw;

    // the same sample twice, batch mean
    d.zero_grad();
    double x2[6], t2[4], y2[4], dy2[4];
    for (int f = 0; f < 3; ++f) x2[f * 2] = x2[f * 2 + 1] = x1[f];
    for (int f = 0; f < 2; ++f) t2[f * 2] = t2[f * 2 + 1] = t1[f];
    d.forward(x2, y2, 2);
    mse_loss(y2, t2, 2, 2, dy2);
    d.backward(x2, dy2, nullptr, 2);

    for (size_t i = 0; i < d.dw.size(); ++i)
        CHECK(d.dw[i] == doctest::Approx(dw_single[i]).epsilon(1e-14));
}

TEST_CASE("lstm backward without forward cache throws") {
    Lstm lstm(3, 4);
    const std::vector<double> dh(4, 1.0);
    CHECK_THROWS_AS(lstm.backward(dh.data(), 1), NoForwardCache);
}
