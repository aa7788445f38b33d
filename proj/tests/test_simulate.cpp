#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "snmpp/dataset.hpp"
#include "snmpp/scalar_math.hpp"
#include "snmpp/simulate.hpp"
#include "test_util.hpp"

using namespace snmpp;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("homogeneous thinning: mean count matches Poisson statistics") {
    GroundTruthProcess proc = homogeneous_process({0.5}, 50.0);
    double total = 0.0;
    const int n = 1000;
    for (int i = 0; i < n; ++i) {
        Rng rng = Rng::stream(606, static_cast<std::uint64_t>(i));
        EventSequence seq = thinning_sample(proc, rng);
        seq.validate(1);
        total += static_cast<double>(seq.size());
    }
    const double mean = total / n;
    CHECK(std::fabs(mean - 25.0) < 3.0 * std::sqrt(25.0 / n));
}

TEST_CASE("zero intensity produces empty sequences") {
    GroundTruthProcess proc = homogeneous_process({0.0, 0.0}, 20.0);
    Rng rng(1);
    CHECK(thinning_sample(proc, rng).empty());
}

TEST_CASE("time-rescaled inter-arrivals pass a KS test against Exp(1)") {
    GroundTruthProcess proc = homogeneous_process({0.5}, 50.0);
    std::vector<double> rescaled;
    std::uint64_t i = 0;
    while (rescaled.size() < 10000) {
        Rng rng = Rng::stream(4242, i++);
        EventSequence seq = thinning_sample(proc, rng);
        double prev = 0.0;
        for (const Event& e : seq.events) {
            rescaled.push_back(0.5 * (e.t - prev));
            prev = e.t;
        }
    }
    rescaled.resize(10000);
    std::sort(rescaled.begin(), rescaled.end());
    double d = 0.0;
    const double n = static_cast<double>(rescaled.size());
    for (std::size_t j = 0; j < rescaled.size(); ++j) {
        const double cdf = 1.0 - std::exp(-rescaled[j]);
        d = std::max(d, std::fabs(cdf - static_cast<double>(j) / n));
        d = std::max(d, std::fabs(static_cast<double>(j + 1) / n - cdf));
    }
    CHECK(d < 1.628 / std::sqrt(n));  // alpha = 0.01
}

TEST_CASE("pp1/pp2 oracle intensities match the process definitions") {
    GroundTruthProcess pp1 = pp1_process();
    GroundTruthProcess pp2 = pp2_process();
    std::vector<Event> none;
    CHECK(pp1.intensity(1, 3.0, none) == doctest::Approx(0.05).epsilon(1e-15));
    CHECK(pp1.intensity(0, 3.0, none) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(pp2.intensity(1, 3.0, none) ==
          doctest::Approx(1.0000045398899217).epsilon(1e-14));

    // single E1 at t = 2, evaluated at the peak lag 1.0
    std::vector<Event> one{{2.0, 0}};
    CHECK(pp1.intensity(1, 3.0, one) == doctest::Approx(0.65).epsilon(1e-14));
    // inhibitory peak for pp2
    CHECK(pp2.intensity(1, 3.0, one) ==
          doctest::Approx(softplus(1.0 - 1.5, 10.0)).epsilon(1e-12));
    CHECK(pp1.horizon == 50.0);
    CHECK(pp2.horizon == 40.0);

    // intensities never negative on simulated histories
    Rng rng(5);
    EventSequence seq = thinning_sample(pp2, rng);
    for (double t = 0.25; t < 40.0; t += 0.5) {
        std::vector<Event> hist(seq.events.begin(),
                                seq.events.begin() + static_cast<long>(
                                    seq.history_before(t).size()));
        CHECK(pp2.intensity(0, t, hist) >= 0.0);
        CHECK(pp2.intensity(1, t, hist) >= 0.0);
    }
}

TEST_CASE("pp1: E1->E2 cross-correlogram peaks in the [0.75, 1.25) lag bin") {
    GroundTruthProcess proc = pp1_process();
    // width-0.5 bins aligned so one bin is exactly [0.75, 1.25)
    std::vector<double> edges{0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 3.25};
    std::vector<long> counts(edges.size() - 1, 0);
    for (int i = 0; i < 1000; ++i) {
        Rng rng = Rng::stream(77, static_cast<std::uint64_t>(i));
        EventSequence seq = thinning_sample(proc, rng);
        for (std::size_t a = 0; a < seq.size(); ++a) {
            if (seq.events[a].k != 0) continue;
            for (std::size_t b = a + 1; b < seq.size(); ++b) {
                if (seq.events[b].k != 1) continue;
                const double lag = seq.events[b].t - seq.events[a].t;
                if (lag >= edges.back()) break;
                for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
                    if (lag >= edges[e] && lag < edges[e + 1]) {
                        ++counts[e];
                        break;
                    }
                }
            }
        }
    }
    const auto peak = std::max_element(counts.begin(), counts.end()) - counts.begin();
    CHECK(edges[static_cast<std::size_t>(peak)] == 0.75);
}

TEST_CASE("thinning aborts when the bound is violated") {
    GroundTruthProcess bad;
    bad.name = "bad";
    bad.num_types = 1;
    bad.horizon = 10.0;
    bad.lookahead = 10.0;
    bad.intensity = [](int, double, const std::vector<Event>&) { return 2.0; };
    bad.upper_bound = [](double, const std::vector<Event>&, double) { return 1.0; };
    Rng rng(3);
    CHECK_THROWS_AS(thinning_sample(bad, rng), std::runtime_error);
}

TEST_CASE("supply chain: structural invariants over many sequences") {
    SupplyChainConfig cfg;
    double lag_sum = 0.0;
    std::size_t lag_count = 0;
    for (int i = 0; i < 500; ++i) {
        Rng rng = Rng::stream(321, static_cast<std::uint64_t>(i));
        EventSequence seq = supply_chain_sample(cfg, rng);
        seq.validate(4);

        // replay inventory and the pending/stockout state from the events
        int inventory = cfg.initial_inventory;
        int e1_count = 0;
        bool pending = false, stocked_out = false;
        double last_e2 = -1.0;
        for (const Event& e : seq.events) {
            switch (e.k) {
                case kCustomerOrder:
                    CHECK(inventory > 0);
                    CHECK_FALSE(stocked_out);
                    --inventory;
                    ++e1_count;
                    // first replenishment fires exactly at the 5th order
                    if (e1_count == 5) {
                        REQUIRE(&e != &seq.events.back());
                        const Event& next = (&e)[1];
                        CHECK(next.k == kReplenishment);
                        CHECK(std::fabs(next.t - e.t) < 1e-6);
                    }
                    break;
                case kReplenishment:
                    CHECK_FALSE(pending);  // never ordered while a restock is pending
                    CHECK(inventory <= cfg.reorder_point);
                    pending = true;
                    last_e2 = e.t;
                    break;
                case kStockArrival: {
                    CHECK(pending);
                    const double lag = e.t - last_e2;
                    CHECK(lag >= 0.5 - 1e-12);
                    lag_sum += lag;
                    ++lag_count;
                    inventory += cfg.reorder_quantity;
                    pending = false;
                    stocked_out = false;
                    break;
                }
                case kStockout:
                    CHECK(inventory == 0);
                    CHECK_FALSE(stocked_out);  // one stockout flag per episode
                    stocked_out = true;
                    break;
                default:
                    FAIL("unexpected mark");
            }
            CHECK(inventory >= 0);
        }
    }
    REQUIRE(lag_count > 0);
    const double lag_mean = lag_sum / static_cast<double>(lag_count);
    CHECK(lag_mean > 3.8);
    CHECK(lag_mean < 4.2);
}

TEST_CASE("supply chain: demand rate gates orders between stockout and arrival") {
    SupplyChainConfig cfg;
    for (int i = 0; i < 300; ++i) {
        Rng rng = Rng::stream(555, static_cast<std::uint64_t>(i));
        EventSequence seq = supply_chain_sample(cfg, rng);
        double out_t = -1.0;
        for (const Event& e : seq.events) {
            if (e.k == kStockout) {
                out_t = e.t;
            } else if (e.k == kStockArrival) {
                out_t = -1.0;
            } else if (e.k == kCustomerOrder && out_t >= 0.0) {
                FAIL("customer order inside a stockout window at t=" << e.t);
            }
        }
    }
}

TEST_CASE("generate_dataset: determinism, counts and manifest") {
    namespace fs = std::filesystem;
    const std::string dir1 = (fs::temp_directory_path() / "snmpp_ds1").string();
    const std::string dir2 = (fs::temp_directory_path() / "snmpp_ds2").string();
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    auto f1 = generate_dataset("pp1", 20, 5, 99, dir1);
    auto f2 = generate_dataset("pp1", 20, 5, 99, dir2);
    CHECK(slurp(f1.train_path) == slurp(f2.train_path));
    CHECK(slurp(f1.val_path) == slurp(f2.val_path));
    CHECK(slurp(f1.manifest_path) == slurp(f2.manifest_path));

    auto train = load_sequences(f1.train_path, 2);
    auto val = load_sequences(f1.val_path, 2);
    CHECK(train.size() == 20);
    CHECK(val.size() == 5);

    CHECK_THROWS_AS(generate_dataset("nope", 5, 5, 1, dir1), std::invalid_argument);
    CHECK_THROWS_AS(generate_dataset("pp1", 0, 5, 1, dir1), std::invalid_argument);

    auto sc = generate_dataset("supply-chain", 8, 3, 4, dir2);
    for (const auto& seq : load_sequences(sc.train_path, 4)) {
        for (const Event& e : seq.events) {
            CHECK(e.k >= 0);
            CHECK(e.k <= 3);
        }
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

}  // TEST_SUITE
