#include <doctest.h>

#include <cmath>

#include "snmpp/simulate.hpp"
#include "snmpp/train.hpp"

using namespace snmpp;

namespace {

// pp1 dynamics on a shorter horizon keeps the unit test fast.
GroundTruthProcess short_pp1(double horizon) {
    GroundTruthProcess p = pp1_process();
    p.horizon = horizon;
    return p;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("a short run improves the validation NLL and is reproducible") {
    GroundTruthProcess proc = short_pp1(15.0);
    auto train_data = sample_dataset(proc, 60, 1);
    auto val_data = sample_dataset(proc, 20, 1, 60);

    TrainConfig cfg;
    cfg.epochs = 8;
    cfg.patience = 8;
    cfg.optimizer.batch_size = 20;
    cfg.optimizer.learning_rate = 5e-3;
    cfg.seed = 7;
    cfg.threads = 2;

    ModelSpec spec;
    TrainResult r1 = train_model(spec, train_data, val_data, cfg);
    REQUIRE(!r1.history.empty());
    CHECK_FALSE(r1.diverged);
    CHECK(r1.history.back().val_nll < r1.history.front().val_nll);
    CHECK(r1.best_val_nll <= r1.history.front().val_nll);
    for (const auto& s : r1.history) {
        CHECK(std::isfinite(s.train_nll));
        CHECK(std::isfinite(s.val_nll));
    }

    TrainResult r2 = train_model(spec, train_data, val_data, cfg);
    REQUIRE(r2.history.size() == r1.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
        CHECK(r1.history[i].train_nll == r2.history[i].train_nll);
        CHECK(r1.history[i].val_nll == r2.history[i].val_nll);
    }
    for (std::size_t i = 0; i < r1.best_params.size(); ++i) {
        CHECK(r1.best_params.raw()[i] == r2.best_params.raw()[i]);
    }
}

TEST_CASE("early stopping respects the patience budget") {
    GroundTruthProcess proc = homogeneous_process({0.5}, 10.0);
    auto train_data = sample_dataset(proc, 20, 3);
    auto val_data = sample_dataset(proc, 10, 3, 20);

    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.patience = 3;
    cfg.optimizer.batch_size = 10;
    cfg.seed = 1;
    cfg.threads = 1;

    ModelSpec spec;
    spec.num_types = 1;
    TrainResult r = train_model(spec, train_data, val_data, cfg);
    CHECK(r.epochs_run <= cfg.epochs);
    // stopped no later than patience epochs after the best one
    CHECK(r.epochs_run - r.best_epoch <= cfg.patience);
}

}  // TEST_SUITE
