#pragma once

#include <cstdint>
#include <vector>

#include "beamfill/nn.hpp"

namespace beamfill {

/// Training protocol knobs shared by both networks.
struct TrainConfig {
    int epochs = 100;
    double base_lr = 0.001;
    double decay_factor = 0.1;
    int decay_epoch = 50;  // last epoch still at base_lr
    int batch_size = 4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint64_t seed = 42;
};

/// Throws ConfigError when a field is out of range.
void check_train_config(const TrainConfig& cfg);

/// Learning rate for a 1-based epoch: base_lr through decay_epoch,
/// base_lr * decay_factor strictly afterwards.
double lr_at(const TrainConfig& cfg, int epoch);

/// ADAM with bias correction, applied in one fused pass per tensor.
struct Adam {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int64_t step_count = 0;

    Adam(double b1, double b2, double epsilon);

    /// Sizes the moment buffers; call once before the first step.
    void attach(const std::vector<ParamRef>& params);

    /// One update over every attached tensor at the given learning rate.
    void step(const std::vector<ParamRef>& params, double lr);

    std::vector<std::vector<double>> m;  // first moments, per tensor
    std::vector<std::vector<double>> v;  // second moments, per tensor
};

}  // namespace beamfill
