#pragma once

#include <functional>
#include <string>
#include <vector>

#include "snmpp/events.hpp"
#include "snmpp/rng.hpp"

namespace snmpp {

// Exact intensity oracle of a data-generating process plus a dominating
// bound for Ogata thinning. The bound must dominate the total intensity on
// [t, t + lookahead] for the given history.
struct GroundTruthProcess {
    std::string name;
    int num_types = 1;
    double horizon = 0.0;
    double lookahead = 0.5;
    std::function<double(int k, double t, const std::vector<Event>&)> intensity;
    std::function<double(double t, const std::vector<Event>&, double lookahead)> upper_bound;

    double total_intensity(double t, const std::vector<Event>& history) const {
        double sum = 0.0;
        for (int k = 0; k < num_types; ++k) sum += intensity(k, t, history);
        return sum;
    }
};

// Ogata thinning sampler. Throws if a proposed point's intensity exceeds the
// dominating bound (invalid bound oracle).
EventSequence thinning_sample(const GroundTruthProcess& process, Rng& rng);

// Homogeneous Poisson over [0, horizon) with one constant rate per type.
GroundTruthProcess homogeneous_process(std::vector<double> rates, double horizon);

// Two-type synthetic processes: E1 homogeneous at rate 0.5; E2 receives a
// Gaussian-bump influence from each past E1 with peak lag 1.0 and width 0.5.
// pp1: lambda_E2 = 0.05 + sum 0.6 * exp(-(dt-1)^2 / (2*0.5^2)),  T = 50
// pp2: lambda_E2 = softplus_10(1.0 - sum 1.5 * exp(-(dt-1)^2 / (2*0.5^2))), T = 40
GroundTruthProcess pp1_process();
GroundTruthProcess pp2_process();

// Hidden-inventory generator. Candidate customer orders arrive as a Poisson
// stream whose rate is drawn per sequence from demand_rate; orders are
// suppressed while inventory is zero; a replenishment order is placed when
// inventory falls to the reorder point with no restock pending, and arrives
// after lead time max(0.5, Normal(lead_mean, 1)).
struct SupplyChainConfig {
    double horizon = 30.0;        // T_max
    int initial_inventory = 10;   // I_0
    int reorder_point = 5;        // r
    int reorder_quantity = 15;    // q
    double lead_mean = 4.0;       // mu_L
    double demand_rate_lo = 1.5;
    double demand_rate_hi = 3.5;

    void validate() const {
        if (!(initial_inventory > reorder_point) || reorder_point < 0)
            throw std::invalid_argument("supply chain: need I0 > r >= 0");
        if (reorder_quantity <= 0) throw std::invalid_argument("supply chain: q must be > 0");
        if (!(lead_mean > 0.5)) throw std::invalid_argument("supply chain: lead mean must be > 0.5");
        if (!(horizon > 0.0)) throw std::invalid_argument("supply chain: horizon must be > 0");
        if (!(demand_rate_lo <= demand_rate_hi) || !(demand_rate_lo > 0.0))
            throw std::invalid_argument("supply chain: bad demand rate range");
    }
};

// Event marks in supply-chain sequences.
enum SupplyChainMark : int {
    kCustomerOrder = 0,  // E1
    kReplenishment = 1,  // E2
    kStockArrival = 2,   // E3
    kStockout = 3,       // E_out
};

EventSequence supply_chain_sample(const SupplyChainConfig& config, Rng& rng);

// Sequence i of a dataset uses the RNG stream (seed, i), so generation is
// reproducible and order-independent.
std::vector<EventSequence> sample_dataset(const GroundTruthProcess& process, std::size_t count,
                                          std::uint64_t seed, std::size_t index_offset = 0);
std::vector<EventSequence> sample_supply_chain_dataset(const SupplyChainConfig& config,
                                                       std::size_t count, std::uint64_t seed,
                                                       std::size_t index_offset = 0);

struct DatasetFiles {
    std::string train_path;
    std::string val_path;
    std::string manifest_path;
};

// Writes train/val JSONL files plus a JSON manifest (K, generator, config,
// seed). `generator` is pp1 | pp2 | supply-chain | homogeneous.
DatasetFiles generate_dataset(const std::string& generator, std::size_t n_train,
                              std::size_t n_val, std::uint64_t seed, const std::string& out_dir,
                              const SupplyChainConfig& sc_config = {},
                              std::vector<double> homogeneous_rates = {0.5},
                              double homogeneous_horizon = 50.0);

}  // namespace snmpp
