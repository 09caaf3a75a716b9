#include "beamfill/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "beamfill/errors.hpp"

namespace beamfill {

EstimatorTag parse_estimator(const std::string& name) {
    if (name == "average") return EstimatorTag::average;
    if (name == "libeamsnet") return EstimatorTag::libeamsnet;
    if (name == "missbeamnet") return EstimatorTag::missbeamnet;
    throw ConfigError("unknown estimator '" + name + "'");
}

std::string estimator_name(EstimatorTag tag) {
    switch (tag) {
        case EstimatorTag::average: return "average";
        case EstimatorTag::libeamsnet: return "libeamsnet";
        case EstimatorTag::missbeamnet: return "missbeamnet";
    }
    return "?";
}

std::vector<double> average_predict(const WindowSample& sample) {
    std::vector<double> out;
    const double n = static_cast<double>(sample.past.size());
    for (int i = 0; i < 4; ++i) {
        if (!sample.missing_mask[i]) continue;
        double sum = 0;
        for (const Vec4& row : sample.past) sum += row[i];
        out.push_back(sum / n);
    }
    return out;
}

Vec4 reconstruct_full_beams(const WindowSample& sample,
                            const std::vector<double>& predictions) {
    const size_t missing = static_cast<size_t>(mask_count(sample.missing_mask));
    if (predictions.size() != missing)
        throw ShapeMismatch("reconstruct: got " +
                            std::to_string(predictions.size()) +
                            " predictions for " + std::to_string(missing) +
                            " masked beams");
    Vec4 beams{};
    size_t ai = 0, mi = 0;
    for (int i = 0; i < 4; ++i) {
        beams[i] = sample.missing_mask[i] ? predictions[mi++]
                                          : sample.current_available[ai++];
    }
    return beams;
}

namespace {

// Validated in helpers because these sizes feed member constructors, which
// run before any constructor body could reject bad values.
size_t checked_flat(size_t window) {
    if (window < 2)
        throw ConfigError("libeamsnet window must cover the conv kernel (>= 2)");
    return 6 * (window - 1);
}

size_t checked_missing(const BeamMask& mask, const char* who) {
    const int missing = mask_count(mask);
    if (missing < 1 || missing > 2)
        throw MaskUnsupported(std::string(who) +
                              " supports 1 or 2 missing beams");
    return static_cast<size_t>(missing);
}

void check_window_fields(const WindowSample& sample, size_t window,
                         const BeamMask& mask, const char* who) {
    if (sample.past.size() != window)
        throw ModelMismatch(std::string(who) + ": sample window " +
                            std::to_string(sample.past.size()) +
                            " does not match model window " +
                            std::to_string(window));
    if (sample.missing_mask != mask)
        throw ModelMismatch(std::string(who) +
                            ": sample mask differs from the model's mask");
}

}  // namespace

// ----------------------------------------------------------- LiBeamsNet

LiBeamsNet::LiBeamsNet(size_t window, const BeamMask& missing_mask,
                       size_t fc1_width, size_t fc2_width, double dropout_rate,
                       uint64_t init_seed)
    : conv(4, 6, 2),
      drop(dropout_rate),
      fc1(checked_flat(window), fc1_width),
      fc2(fc1_width, fc2_width),
      head(fc2_width + 4 - checked_missing(missing_mask, "libeamsnet"), 4),
      window_(window),
      mask_(missing_mask),
      avail_(4 - static_cast<size_t>(mask_count(missing_mask))),
      flat_(checked_flat(window)) {
    Rng rng(init_seed);
    conv.init(rng);
    fc1.init(rng);
    fc2.init(rng);
    head.init(rng);
}

void LiBeamsNet::check_sample(const WindowSample& sample) const {
    check_window_fields(sample, window_, mask_, "libeamsnet");
}

std::vector<ParamRef> LiBeamsNet::params() {
    std::vector<ParamRef> all = conv.params("conv");
    for (ParamRef& p : fc1.params("fc1")) all.push_back(p);
    for (ParamRef& p : fc2.params("fc2")) all.push_back(p);
    for (ParamRef& p : head.params("head")) all.push_back(p);
    return all;
}

void LiBeamsNet::zero_grad() {
    conv.zero_grad();
    fc1.zero_grad();
    fc2.zero_grad();
    head.zero_grad();
}

const std::vector<double>& LiBeamsNet::forward_batch(
    const WindowSample* const* batch, size_t count, bool training,
    Rng* dropout_rng) {
    const size_t b = count;
    x_.resize(4 * window_ * b);
    for (size_t c = 0; c < b; ++c) {
        const WindowSample& s = *batch[c];
        check_sample(s);
        // beams become input channels, time runs along the conv axis
        for (size_t ch = 0; ch < 4; ++ch)
            for (size_t t = 0; t < window_; ++t)
                x_[(ch * window_ + t) * b + c] = s.past[t][ch];
    }

    r1_.resize(flat_ * b);
    d_.resize(flat_ * b);
    z1_.resize(fc1.out_dim * b);
    r2_.resize(fc1.out_dim * b);
    z2_.resize(fc2.out_dim * b);
    r3_.resize(fc2.out_dim * b);
    cat_.resize((fc2.out_dim + avail_) * b);
    out_.resize(4 * b);

    conv.forward(x_.data(), window_, d_.data(), b);  // reuse d_ as conv out
    relu_forward(d_.data(), r1_.data(), flat_ * b);
    if (training) {
        drop.forward(r1_.data(), d_.data(), flat_ * b, true, *dropout_rng);
    } else {
        std::copy(r1_.begin(), r1_.end(), d_.begin());
    }
    fc1.forward(d_.data(), z1_.data(), b);
    relu_forward(z1_.data(), r2_.data(), z1_.size());
    fc2.forward(r2_.data(), z2_.data(), b);
    relu_forward(z2_.data(), r3_.data(), z2_.size());

    std::copy(r3_.begin(), r3_.end(), cat_.begin());
    for (size_t c = 0; c < b; ++c) {
        const WindowSample& s = *batch[c];
        for (size_t a = 0; a < avail_; ++a)
            cat_[(fc2.out_dim + a) * b + c] = s.current_available[a];
    }
    head.forward(cat_.data(), out_.data(), b);
    return out_;
}

double LiBeamsNet::train_batch(const WindowSample* const* batch, size_t count,
                               Rng& dropout_rng) {
    const size_t b = count;
    forward_batch(batch, b, true, &dropout_rng);

    target_.resize(4 * b);
    for (size_t c = 0; c < b; ++c)
        for (int i = 0; i < 4; ++i)
            target_[i * b + c] = batch[c]->target_all[i];

    dy_.resize(4 * b);
    const double loss =
        mse_loss(out_.data(), target_.data(), 4, b, dy_.data());

    dcat_.resize(cat_.size());
    dz2_.resize(z2_.size());
    dr2_.resize(r2_.size());
    dz1_.resize(z1_.size());
    dd_.resize(d_.size());
    dr1_.resize(r1_.size());
    dx1_.resize(flat_ * b);

    head.backward(cat_.data(), dy_.data(), dcat_.data(), b);
    // only the learned-feature rows of the concat flow backwards
    relu_backward(r3_.data(), dcat_.data(), dz2_.data(), r3_.size());
    fc2.backward(r2_.data(), dz2_.data(), dr2_.data(), b);
    relu_backward(r2_.data(), dr2_.data(), dz1_.data(), r2_.size());
    fc1.backward(d_.data(), dz1_.data(), dd_.data(), b);
    drop.backward(dd_.data(), dr1_.data(), dd_.size());
    relu_backward(r1_.data(), dr1_.data(), dx1_.data(), r1_.size());
    conv.backward(x_.data(), window_, dx1_.data(), b);
    return loss;
}

double LiBeamsNet::eval_loss(const std::vector<WindowSample>& samples) {
    if (samples.empty()) throw EmptyInput("libeamsnet: empty evaluation set");
    // Evaluate in training-width chunks so the specialized matrix kernels
    // run; per-sample outputs are width-invariant, so only speed changes.
    const size_t chunk = 4;
    const WindowSample* ptrs[chunk];
    double total = 0;
    for (size_t start = 0; start < samples.size(); start += chunk) {
        const size_t n = std::min(chunk, samples.size() - start);
        for (size_t c = 0; c < n; ++c) ptrs[c] = &samples[start + c];
        forward_batch(ptrs, n, false, nullptr);
        for (size_t f = 0; f < 4; ++f)
            for (size_t c = 0; c < n; ++c) {
                const double d =
                    out_[f * n + c] - samples[start + c].target_all[f];
                total += d * d;
            }
    }
    return total / (4.0 * static_cast<double>(samples.size()));
}

Vec4 LiBeamsNet::forward_full(const WindowSample& sample) {
    const WindowSample* one = &sample;
    forward_batch(&one, 1, false, nullptr);
    return {out_[0], out_[1], out_[2], out_[3]};
}

std::vector<double> LiBeamsNet::predict_missing(const WindowSample& sample) {
    const Vec4 full = forward_full(sample);
    std::vector<double> out;
    for (int i = 0; i < 4; ++i)
        if (mask_[i]) out.push_back(full[i]);
    return out;
}

std::vector<std::vector<double>> LiBeamsNet::predict_missing_many(
    const std::vector<WindowSample>& samples) {
    std::vector<std::vector<double>> preds(samples.size());
    const size_t chunk = 4;
    const WindowSample* ptrs[chunk];
    for (size_t start = 0; start < samples.size(); start += chunk) {
        const size_t n = std::min(chunk, samples.size() - start);
        for (size_t c = 0; c < n; ++c) ptrs[c] = &samples[start + c];
        forward_batch(ptrs, n, false, nullptr);
        for (size_t c = 0; c < n; ++c) {
            std::vector<double>& p = preds[start + c];
            for (size_t f = 0; f < 4; ++f)
                if (mask_[f]) p.push_back(out_[f * n + c]);
        }
    }
    return preds;
}

// ----------------------------------------------------------- MissBeamNet

MissBeamNet::MissBeamNet(size_t window, const BeamMask& missing_mask,
                         size_t hidden, uint64_t init_seed)
    : lstm(4, hidden),
      head(hidden + 4 - checked_missing(missing_mask, "missbeamnet"),
           checked_missing(missing_mask, "missbeamnet")),
      window_(window),
      mask_(missing_mask),
      avail_(4 - static_cast<size_t>(mask_count(missing_mask))),
      miss_(static_cast<size_t>(mask_count(missing_mask))) {
    if (window < 1) throw ConfigError("missbeamnet window must be >= 1");
    Rng rng(init_seed);
    lstm.init(rng);
    head.init(rng);
}

void MissBeamNet::check_sample(const WindowSample& sample) const {
    check_window_fields(sample, window_, mask_, "missbeamnet");
}

std::vector<ParamRef> MissBeamNet::params() {
    std::vector<ParamRef> all = lstm.params("lstm");
    for (ParamRef& p : head.params("head")) all.push_back(p);
    return all;
}

void MissBeamNet::zero_grad() {
    lstm.zero_grad();
    head.zero_grad();
}

const std::vector<double>& MissBeamNet::forward_batch(
    const WindowSample* const* batch, size_t count, bool cache) {
    const size_t b = count;
    xs_.resize(window_ * 4 * b);
    for (size_t c = 0; c < b; ++c) {
        const WindowSample& s = *batch[c];
        check_sample(s);
        for (size_t t = 0; t < window_; ++t)
            for (size_t f = 0; f < 4; ++f)
                xs_[(t * 4 + f) * b + c] = s.past[t][f];
    }

    h_.resize(lstm.hidden * b);
    cat_.resize((lstm.hidden + avail_) * b);
    out_.resize(miss_ * b);

    lstm.forward(xs_.data(), window_, b, h_.data(), cache);
    std::copy(h_.begin(), h_.end(), cat_.begin());
    for (size_t c = 0; c < b; ++c) {
        const WindowSample& s = *batch[c];
        for (size_t a = 0; a < avail_; ++a)
            cat_[(lstm.hidden + a) * b + c] = s.current_available[a];
    }
    head.forward(cat_.data(), out_.data(), b);
    return out_;
}

double MissBeamNet::train_batch(const WindowSample* const* batch, size_t count,
                                Rng& /*dropout_rng*/) {
    const size_t b = count;
    forward_batch(batch, b, true);

    target_.resize(miss_ * b);
    for (size_t c = 0; c < b; ++c)
        for (size_t m = 0; m < miss_; ++m)
            target_[m * b + c] = batch[c]->target_missing[m];

    dy_.resize(miss_ * b);
    const double loss =
        mse_loss(out_.data(), target_.data(), miss_, b, dy_.data());

    dcat_.resize(cat_.size());
    head.backward(cat_.data(), dy_.data(), dcat_.data(), b);
    // rows beyond hidden belong to the measured beams; they carry no
    // trainable upstream, so only the hidden block propagates
    lstm.backward(dcat_.data(), b);
    return loss;
}

double MissBeamNet::eval_loss(const std::vector<WindowSample>& samples) {
    if (samples.empty()) throw EmptyInput("missbeamnet: empty evaluation set");
    // Evaluate in training-width chunks so the specialized matrix kernels
    // run; per-sample outputs are width-invariant, so only speed changes.
    const size_t chunk = 4;
    const WindowSample* ptrs[chunk];
    double total = 0;
    for (size_t start = 0; start < samples.size(); start += chunk) {
        const size_t n = std::min(chunk, samples.size() - start);
        for (size_t c = 0; c < n; ++c) ptrs[c] = &samples[start + c];
        forward_batch(ptrs, n, false);
        for (size_t m = 0; m < miss_; ++m)
            for (size_t c = 0; c < n; ++c) {
                const double d =
                    out_[m * n + c] - samples[start + c].target_missing[m];
                total += d * d;
            }
    }
    return total /
           (static_cast<double>(miss_) * static_cast<double>(samples.size()));
}

std::vector<double> MissBeamNet::predict_missing(const WindowSample& sample) {
    const WindowSample* one = &sample;
    forward_batch(&one, 1, false);
    std::vector<double> out(out_.begin(), out_.begin() + miss_);
    return out;
}

std::vector<std::vector<double>> MissBeamNet::predict_missing_many(
    const std::vector<WindowSample>& samples) {
    std::vector<std::vector<double>> preds(samples.size());
    const size_t chunk = 4;
    const WindowSample* ptrs[chunk];
    for (size_t start = 0; start < samples.size(); start += chunk) {
        const size_t n = std::min(chunk, samples.size() - start);
        for (size_t c = 0; c < n; ++c) ptrs[c] = &samples[start + c];
        forward_batch(ptrs, n, false);
        for (size_t c = 0; c < n; ++c) {
            std::vector<double>& p = preds[start + c];
            for (size_t m = 0; m < miss_; ++m) p.push_back(out_[m * n + c]);
        }
    }
    return preds;
}

// ----------------------------------------------------------------- train

LossHistory train(NeuralEstimator& net,
                  const std::vector<WindowSample>& train_samples,
                  const std::vector<WindowSample>& test_samples,
                  const TrainConfig& config) {
    check_train_config(config);
    if (train_samples.empty())
        throw EmptyTrainSet("training requires at least one sample");

    Adam adam(config.beta1, config.beta2, config.eps);
    std::vector<ParamRef> params = net.params();
    adam.attach(params);

    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));

    std::vector<size_t> order(train_samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    LossHistory history;
    history.train_loss.reserve(config.epochs);
    history.test_loss.reserve(config.epochs);

    const size_t bsz = static_cast<size_t>(config.batch_size);
    std::vector<const WindowSample*> batch(bsz);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const double lr = lr_at(config, epoch);
        shuffle_rng.shuffle(order);

        double loss_sum = 0;
        size_t batches = 0;
        for (size_t start = 0; start < order.size(); start += bsz) {
            const size_t count = std::min(bsz, order.size() - start);
            for (size_t k = 0; k < count; ++k)
                batch[k] = &train_samples[order[start + k]];
            const double loss =
                net.train_batch(batch.data(), count, dropout_rng);
            if (!std::isfinite(loss))
                throw NonFiniteLoss("non-finite loss at epoch " +
                                    std::to_string(epoch) + ", batch " +
                                    std::to_string(batches + 1));
            adam.step(params, lr);
            loss_sum += loss;
            ++batches;
        }
        history.train_loss.push_back(loss_sum / static_cast<double>(batches));
        history.test_loss.push_back(
            test_samples.empty()
                ? std::numeric_limits<double>::quiet_NaN()
                : net.eval_loss(test_samples));
    }
    return history;
}

}  // namespace beamfill
