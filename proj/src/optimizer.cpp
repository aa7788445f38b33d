#include "snmpp/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace snmpp {

bool adamw_step(ParamStore& params, std::span<const double> grad, const OptimizerConfig& config) {
    config.validate();
    if (grad.size() != params.size()) {
        throw std::invalid_argument("adamw_step: gradient layout does not match parameters");
    }
    for (double g : grad) {
        if (!std::isfinite(g)) {
            return false;
        }
    }

    const long t = params.step_count() + 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));

    auto& theta = params.raw();
    auto& m = params.moment1();
    auto& v = params.moment2();
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= config.learning_rate * (m_hat / (std::sqrt(v_hat) + config.epsilon) +
                                            config.weight_decay * theta[i]);
    }
    params.set_step_count(t);
    return true;
}

}  // namespace snmpp
