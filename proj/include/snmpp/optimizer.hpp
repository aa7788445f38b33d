#pragma once

#include <span>

#include "snmpp/params.hpp"

namespace snmpp {

struct OptimizerConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 1e-2;
    int batch_size = 128;

    void validate() const {
        if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
        if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
            throw std::invalid_argument("beta1/beta2 must be in [0, 1)");
        if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    }
};

// One AdamW update with bias-corrected moments and decoupled weight decay.
// Returns false without touching the parameters if any gradient component is
// non-finite (divergence signal for the caller).
bool adamw_step(ParamStore& params, std::span<const double> grad, const OptimizerConfig& config);

}  // namespace snmpp
