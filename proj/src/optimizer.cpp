#include "beamfill/optimizer.hpp"

#include <cmath>
#include <string>

#include "beamfill/errors.hpp"

namespace beamfill {

void check_train_config(const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (!(cfg.base_lr > 0)) throw ConfigError("train.base_lr must be > 0");
    if (!(cfg.decay_factor > 0) || cfg.decay_factor > 1.0)
        throw ConfigError("train.decay_factor must lie in (0, 1]");
    if (cfg.decay_epoch < 1 || cfg.decay_epoch > cfg.epochs)
        throw ConfigError("train.decay_epoch must lie in [1, epochs]");
    if (cfg.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(cfg.beta1 >= 0) || cfg.beta1 >= 1.0 || !(cfg.beta2 >= 0) ||
        cfg.beta2 >= 1.0)
        throw ConfigError("train.beta1/beta2 must lie in [0, 1)");
    if (!(cfg.eps > 0)) throw ConfigError("train.eps must be > 0");
}

double lr_at(const TrainConfig& cfg, int epoch) {
    if (epoch < 1 || epoch > cfg.epochs)
        throw EpochOutOfRange("epoch " + std::to_string(epoch) +
                              " outside [1, " + std::to_string(cfg.epochs) +
                              "]");
    return epoch <= cfg.decay_epoch ? cfg.base_lr
                                    : cfg.base_lr * cfg.decay_factor;
}

Adam::Adam(double b1, double b2, double epsilon)
    : beta1(b1), beta2(b2), eps(epsilon) {}

void Adam::attach(const std::vector<ParamRef>& params) {
    m.clear();
    v.clear();
    for (const ParamRef& p : params) {
        m.emplace_back(p.value->size(), 0.0);
        v.emplace_back(p.value->size(), 0.0);
    }
    step_count = 0;
}

void Adam::step(const std::vector<ParamRef>& params, double lr) {
    if (params.size() != m.size())
        throw ShapeMismatch("adam: parameter list does not match attach()");
    ++step_count;
    const double c1 = 1.0 / (1.0 - std::pow(beta1, static_cast<double>(step_count)));
    const double c2 = 1.0 / (1.0 - std::pow(beta2, static_cast<double>(step_count)));
    for (size_t k = 0; k < params.size(); ++k) {
        std::vector<double>& val = *params[k].value;
        const std::vector<double>& grad = *params[k].grad;
        std::vector<double>& mk = m[k];
        std::vector<double>& vk = v[k];
        if (val.size() != mk.size() || grad.size() != mk.size())
            throw ShapeMismatch("adam: tensor size changed since attach()");
        for (size_t i = 0; i < val.size(); ++i) {
            const double g = grad[i];
            const double mi = beta1 * mk[i] + (1.0 - beta1) * g;
            const double vi = beta2 * vk[i] + (1.0 - beta2) * g * g;
            mk[i] = mi;
            vk[i] = vi;
            val[i] -= lr * (mi * c1) / (std::sqrt(vi * c2) + eps);
        }
    }
}

}  // namespace beamfill
