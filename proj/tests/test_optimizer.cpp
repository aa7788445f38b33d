#include <doctest.h>

#include <cmath>
#include <limits>

#include "snmpp/optimizer.hpp"

using namespace snmpp;

namespace {

ParamStore tiny_store() {
    ModelSpec spec;
    spec.num_types = 1;
    spec.embedding_dim = 1;
    spec.psi_hidden = {1};
    spec.phi_hidden = {1};
    return ParamStore(spec);
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("one step on f(theta) = theta^2 decreases |theta|") {
    ParamStore p = tiny_store();
    p.raw()[0] = 1.0;
    std::vector<double> g(p.size(), 0.0);
    g[0] = 2.0 * p.raw()[0];
    OptimizerConfig cfg;
    cfg.weight_decay = 0.0;
    REQUIRE(adamw_step(p, g, cfg));
    CHECK(std::fabs(p.raw()[0]) < 1.0);
    CHECK(p.step_count() == 1);
}

TEST_CASE("zero gradient with zero weight decay is a fixed point") {
    ParamStore p = tiny_store();
    p.raw()[0] = 0.75;
    p.raw()[1] = -1.25;
    std::vector<double> g(p.size(), 0.0);
    OptimizerConfig cfg;
    cfg.weight_decay = 0.0;
    REQUIRE(adamw_step(p, g, cfg));
    CHECK(p.raw()[0] == 0.75);
    CHECK(p.raw()[1] == -1.25);
}

TEST_CASE("200 steps on f(theta) = (theta-2)^2 converge") {
    ParamStore p = tiny_store();
    p.raw()[0] = 0.0;
    OptimizerConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    std::vector<double> g(p.size(), 0.0);
    for (int i = 0; i < 200; ++i) {
        g[0] = 2.0 * (p.raw()[0] - 2.0);
        REQUIRE(adamw_step(p, g, cfg));
    }
    CHECK(std::fabs(p.raw()[0] - 2.0) < 1e-2);
}

TEST_CASE("beta1 = beta2 = 0 reduces to sign-corrected steps (hand trace)") {
    // f(theta) = theta^2 from theta = 1, lr = 0.1:
    //   step 1: g = 2, m = g, v = g^2, step = 0.1 * 2/(2 + eps) -> theta = 0.9
    //   step 2: g = 1.8, step = 0.1 * 1.8/(1.8 + eps)          -> theta = 0.8
    ParamStore p = tiny_store();
    p.raw()[0] = 1.0;
    OptimizerConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.beta1 = 0.0;
    cfg.beta2 = 0.0;
    cfg.weight_decay = 0.0;
    std::vector<double> g(p.size(), 0.0);
    g[0] = 2.0 * p.raw()[0];
    REQUIRE(adamw_step(p, g, cfg));
    CHECK(p.raw()[0] == doctest::Approx(0.9).epsilon(1e-8));
    g[0] = 2.0 * p.raw()[0];
    REQUIRE(adamw_step(p, g, cfg));
    CHECK(p.raw()[0] == doctest::Approx(0.8).epsilon(1e-8));
}

TEST_CASE("first default step follows the bias-corrected closed form") {
    ParamStore p = tiny_store();
    p.raw()[0] = 0.5;
    const double g0 = -3.0;
    std::vector<double> g(p.size(), 0.0);
    g[0] = g0;
    OptimizerConfig cfg;  // defaults: lr 1e-3, betas 0.9/0.999, wd 1e-2
    REQUIRE(adamw_step(p, g, cfg));
    // With t = 1 the bias correction makes m_hat = g and v_hat = g^2.
    const double expected =
        0.5 - cfg.learning_rate * (g0 / (std::fabs(g0) + cfg.epsilon) + cfg.weight_decay * 0.5);
    CHECK(p.raw()[0] == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("decoupled weight decay shrinks parameters without gradient") {
    ParamStore p = tiny_store();
    p.raw()[0] = 2.0;
    std::vector<double> g(p.size(), 0.0);
    OptimizerConfig cfg;
    cfg.learning_rate = 0.01;
    cfg.weight_decay = 0.1;
    REQUIRE(adamw_step(p, g, cfg));
    CHECK(p.raw()[0] == doctest::Approx(2.0 * (1.0 - 0.01 * 0.1)).epsilon(1e-15));
}

TEST_CASE("non-finite gradient rejects the step and signals divergence") {
    ParamStore p = tiny_store();
    p.raw()[0] = 1.0;
    std::vector<double> g(p.size(), 0.0);
    g[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(adamw_step(p, g, OptimizerConfig{}));
    CHECK(p.raw()[0] == 1.0);
    CHECK(p.step_count() == 0);
}

}  // TEST_SUITE
