#pragma once

#include <memory>
#include <string>
#include <vector>

#include "beamfill/dataset.hpp"
#include "beamfill/nn.hpp"
#include "beamfill/optimizer.hpp"

namespace beamfill {

enum class EstimatorTag { average, libeamsnet, missbeamnet };

EstimatorTag parse_estimator(const std::string& name);
std::string estimator_name(EstimatorTag tag);

/// Per-epoch train/test losses; both vectors have length = epochs. With an
/// empty test set the test entries are NaN and the report carries a warning.
struct LossHistory {
    std::vector<double> train_loss;
    std::vector<double> test_loss;
};

/// Average baseline: each masked beam is predicted as the mean of its own
/// N past values. Returns predictions in mask slot order.
std::vector<double> average_predict(const WindowSample& sample);

/// Measured beams fill the unmasked slots, predictions the masked ones.
/// predictions must be in mask slot order, one per masked beam.
Vec4 reconstruct_full_beams(const WindowSample& sample,
                            const std::vector<double>& predictions);

/// Common surface of the two trainable regressors.
class NeuralEstimator {
   public:
    virtual ~NeuralEstimator() = default;
    virtual EstimatorTag tag() const = 0;
    virtual size_t window() const = 0;
    virtual BeamMask mask() const = 0;
    virtual std::vector<ParamRef> params() = 0;
    virtual void zero_grad() = 0;

    /// Forward + backward over one mini-batch; returns the batch-mean loss.
    /// The parameter gradients are set to this batch's values (previous
    /// contents are overwritten, so no zeroing pass is needed between
    /// batches).
    virtual double train_batch(const WindowSample* const* batch, size_t count,
                               Rng& dropout_rng) = 0;

    /// Batched full-set loss with dropout disabled.
    virtual double eval_loss(const std::vector<WindowSample>& samples) = 0;

    /// Masked-beam predictions for one sample, dropout disabled, in mask
    /// slot order.
    virtual std::vector<double> predict_missing(const WindowSample& sample) = 0;

    /// predict_missing over a whole series, run in training-width chunks so
    /// the batched kernels do the work. Outputs are batch-width invariant,
    /// so each entry matches predict_missing(samples[i]) bit for bit.
    virtual std::vector<std::vector<double>> predict_missing_many(
        const std::vector<WindowSample>& samples) = 0;
};

/// 1-D convolutional regressor over the past window: conv (beams as input
/// channels, kernel 2 along time) -> rectifier -> flatten -> dropout ->
/// two rectified dense layers -> concat current available beams -> linear
/// dense output of all four beams.
class LiBeamsNet : public NeuralEstimator {
   public:
    LiBeamsNet(size_t window, const BeamMask& missing_mask, size_t fc1_width,
               size_t fc2_width, double dropout_rate, uint64_t init_seed);

    EstimatorTag tag() const override { return EstimatorTag::libeamsnet; }
    size_t window() const override { return window_; }
    BeamMask mask() const override { return mask_; }
    std::vector<ParamRef> params() override;
    void zero_grad() override;
    double train_batch(const WindowSample* const* batch, size_t count,
                       Rng& dropout_rng) override;
    double eval_loss(const std::vector<WindowSample>& samples) override;
    std::vector<double> predict_missing(const WindowSample& sample) override;
    std::vector<std::vector<double>> predict_missing_many(
        const std::vector<WindowSample>& samples) override;

    /// Full four-beam inference output for one sample.
    Vec4 forward_full(const WindowSample& sample);

    Conv1d conv;
    Dropout drop;
    Dense fc1;
    Dense fc2;
    Dense head;

   private:
    size_t window_;
    BeamMask mask_;
    size_t avail_;
    size_t flat_;
    void check_sample(const WindowSample& sample) const;
    /// Forward over `count` samples; activations land in the scratch
    /// buffers. Returns the output buffer (4 x count).
    const std::vector<double>& forward_batch(const WindowSample* const* batch,
                                             size_t count, bool training,
                                             Rng* dropout_rng);
    // scratch, feature-major with the batch as columns
    std::vector<double> x_, r1_, d_, z1_, r2_, z2_, r3_, cat_, out_;
    std::vector<double> dy_, dcat_, dz2_, dr2_, dz1_, dd_, dr1_, dx1_;
    std::vector<double> target_;
};

/// Recurrent regressor: the past window runs through an LSTM; the final
/// hidden state concatenated with the current available beams feeds one
/// linear dense layer that outputs only the masked beams.
class MissBeamNet : public NeuralEstimator {
   public:
    MissBeamNet(size_t window, const BeamMask& missing_mask, size_t hidden,
                uint64_t init_seed);

    EstimatorTag tag() const override { return EstimatorTag::missbeamnet; }
    size_t window() const override { return window_; }
    BeamMask mask() const override { return mask_; }
    std::vector<ParamRef> params() override;
    void zero_grad() override;
    double train_batch(const WindowSample* const* batch, size_t count,
                       Rng& dropout_rng) override;
    double eval_loss(const std::vector<WindowSample>& samples) override;
    std::vector<double> predict_missing(const WindowSample& sample) override;
    std::vector<std::vector<double>> predict_missing_many(
        const std::vector<WindowSample>& samples) override;

    Lstm lstm;
    Dense head;

   private:
    size_t window_;
    BeamMask mask_;
    size_t avail_;
    size_t miss_;
    void check_sample(const WindowSample& sample) const;
    const std::vector<double>& forward_batch(const WindowSample* const* batch,
                                             size_t count, bool cache);
    std::vector<double> xs_, h_, cat_, out_;
    std::vector<double> dy_, dcat_;
    std::vector<double> target_;
};

/// Runs the full training protocol: per-epoch reshuffle, mini-batches with
/// the remainder kept, ADAM with the step-decay schedule, per-epoch mean
/// train loss and full-test-set loss. Seeds for shuffling and dropout are
/// derived from config.seed.
LossHistory train(NeuralEstimator& net,
                  const std::vector<WindowSample>& train_samples,
                  const std::vector<WindowSample>& test_samples,
                  const TrainConfig& config);

}  // namespace beamfill
