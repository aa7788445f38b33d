#include "snmpp/simulate.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "snmpp/dataset.hpp"
#include "snmpp/scalar_math.hpp"

namespace snmpp {

EventSequence thinning_sample(const GroundTruthProcess& process, Rng& rng) {
    if (!(process.horizon > 0.0)) throw std::invalid_argument("thinning: horizon must be > 0");
    EventSequence seq;
    seq.horizon = process.horizon;
    std::vector<Event>& events = seq.events;

    double t = 0.0;
    while (t < process.horizon) {
        const double window = std::min(process.lookahead, process.horizon - t);
        const double bound = process.upper_bound(t, events, window);
        if (!(bound > 0.0)) {
            t += window;
            continue;
        }
        const double wait = rng.exponential(bound);
        if (wait > window) {
            // Bound validity expired before a candidate arrived.
            t += window;
            continue;
        }
        const double candidate = t + wait;
        if (candidate >= process.horizon) break;
        if (!(candidate > t)) continue;  // fp-degenerate wait, redraw
        t = candidate;

        const double total = process.total_intensity(t, events);
        if (total > bound * (1.0 + 1e-9)) {
            throw std::runtime_error("thinning: intensity " + std::to_string(total) +
                                     " exceeds dominating bound " + std::to_string(bound) +
                                     " at t=" + std::to_string(t));
        }
        if (rng.uniform() * bound <= total) {
            // Accept; draw the mark proportionally to the per-type intensities.
            double u = rng.uniform() * total;
            int mark = process.num_types - 1;
            double cum = 0.0;
            for (int k = 0; k < process.num_types; ++k) {
                cum += process.intensity(k, t, events);
                if (u <= cum) {
                    mark = k;
                    break;
                }
            }
            if (!events.empty() && !(t > events.back().t)) continue;
            events.push_back({t, mark});
        }
    }
    return seq;
}

GroundTruthProcess homogeneous_process(std::vector<double> rates, double horizon) {
    for (double r : rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw std::invalid_argument("homogeneous: rates must be finite and >= 0");
        }
    }
    GroundTruthProcess p;
    p.name = "homogeneous";
    p.num_types = static_cast<int>(rates.size());
    p.horizon = horizon;
    p.lookahead = horizon;
    double total = 0.0;
    for (double r : rates) total += r;
    p.intensity = [rates](int k, double, const std::vector<Event>&) {
        return rates[static_cast<std::size_t>(k)];
    };
    p.upper_bound = [total](double, const std::vector<Event>&, double) { return total; };
    return p;
}

namespace {

constexpr double kBumpPeakLag = 1.0;
constexpr double kBumpWidth = 0.5;  // Gaussian sigma

double gaussian_bump(double dt) {
    const double z = (dt - kBumpPeakLag) / kBumpWidth;
    return std::exp(-0.5 * z * z);
}

// Largest possible bump value over lags [dt_lo, dt_hi] from one source event.
double bump_max_over(double dt_lo, double dt_hi) {
    if (dt_lo <= kBumpPeakLag && kBumpPeakLag <= dt_hi) return 1.0;
    const double edge = kBumpPeakLag < dt_lo ? dt_lo : dt_hi;
    return gaussian_bump(edge);
}

double sum_e1_bumps(double t, const std::vector<Event>& history) {
    double sum = 0.0;
    for (const Event& e : history) {
        if (e.k == 0) sum += gaussian_bump(t - e.t);
    }
    return sum;
}

}  // namespace

GroundTruthProcess pp1_process() {
    GroundTruthProcess p;
    p.name = "pp1";
    p.num_types = 2;
    p.horizon = 50.0;
    p.lookahead = 0.5;
    p.intensity = [](int k, double t, const std::vector<Event>& history) {
        if (k == 0) return 0.5;
        return 0.05 + 0.6 * sum_e1_bumps(t, history);
    };
    p.upper_bound = [](double t, const std::vector<Event>& history, double window) {
        double bound = 0.5 + 0.05;
        for (const Event& e : history) {
            if (e.k == 0) bound += 0.6 * bump_max_over(t - e.t, t - e.t + window);
        }
        return bound;
    };
    return p;
}

GroundTruthProcess pp2_process() {
    GroundTruthProcess p;
    p.name = "pp2";
    p.num_types = 2;
    p.horizon = 40.0;
    p.lookahead = p.horizon;
    p.intensity = [](int k, double t, const std::vector<Event>& history) {
        if (k == 0) return 0.5;
        return softplus(1.0 - 1.5 * sum_e1_bumps(t, history), 10.0);
    };
    // The inhibitory sum only lowers lambda_E2, so softplus_10(1) dominates.
    const double e2_cap = softplus(1.0, 10.0);
    p.upper_bound = [e2_cap](double, const std::vector<Event>&, double) { return 0.5 + e2_cap; };
    return p;
}

EventSequence supply_chain_sample(const SupplyChainConfig& config, Rng& rng) {
    config.validate();
    EventSequence seq;
    seq.horizon = config.horizon;

    // Simultaneous emissions (an order that triggers a reorder and/or a
    // stockout) are nudged forward so event times stay strictly increasing.
    constexpr double kTieNudge = 1e-9;
    auto emit = [&seq](double t, int mark) {
        if (!seq.events.empty() && t <= seq.events.back().t) {
            t = seq.events.back().t + kTieNudge;
        }
        seq.events.push_back({t, mark});
        return t;
    };

    const double demand_rate = rng.uniform(config.demand_rate_lo, config.demand_rate_hi);
    double t = 0.0;
    int inventory = config.initial_inventory;
    bool stockout = false;
    bool pending = false;
    double arrival_time = 0.0;

    while (t < config.horizon) {
        const double order_time = t + rng.exponential(demand_rate);

        // Arrival-first on exact ties.
        if (pending && arrival_time <= order_time) {
            if (arrival_time >= config.horizon) break;
            t = emit(arrival_time, kStockArrival);
            inventory += config.reorder_quantity;
            pending = false;
            stockout = false;
            continue;
        }
        if (order_time >= config.horizon) break;
        t = order_time;
        if (inventory <= 0) {
            continue;  // hard gating: suppress customer orders during stockout
        }
        t = emit(t, kCustomerOrder);
        --inventory;
        if (inventory == 0 && !stockout) {
            t = emit(t, kStockout);
            stockout = true;
        }
        if (inventory <= config.reorder_point && !pending) {
            t = emit(t, kReplenishment);
            const double lead = std::max(0.5, rng.normal(config.lead_mean, 1.0));
            arrival_time = t + lead;
            pending = true;
        }
    }
    return seq;
}

std::vector<EventSequence> sample_dataset(const GroundTruthProcess& process, std::size_t count,
                                          std::uint64_t seed, std::size_t index_offset) {
    std::vector<EventSequence> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, index_offset + i);
        out.push_back(thinning_sample(process, rng));
    }
    return out;
}

std::vector<EventSequence> sample_supply_chain_dataset(const SupplyChainConfig& config,
                                                       std::size_t count, std::uint64_t seed,
                                                       std::size_t index_offset) {
    std::vector<EventSequence> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, index_offset + i);
        out.push_back(supply_chain_sample(config, rng));
    }
    return out;
}

DatasetFiles generate_dataset(const std::string& generator, std::size_t n_train,
                              std::size_t n_val, std::uint64_t seed, const std::string& out_dir,
                              const SupplyChainConfig& sc_config,
                              std::vector<double> homogeneous_rates, double homogeneous_horizon) {
    if (n_train == 0 || n_val == 0) {
        throw std::invalid_argument("generate_dataset: counts must be > 0");
    }
    std::filesystem::create_directories(out_dir);
    DatasetFiles files{out_dir + "/train.jsonl", out_dir + "/val.jsonl",
                       out_dir + "/manifest.json"};

    int num_types = 0;
    nlohmann::json config_json;
    std::vector<EventSequence> train, val;
    if (generator == "supply-chain") {
        sc_config.validate();
        train = sample_supply_chain_dataset(sc_config, n_train, seed, 0);
        val = sample_supply_chain_dataset(sc_config, n_val, seed, n_train);
        num_types = 4;
        config_json = {{"horizon", sc_config.horizon},
                       {"initial_inventory", sc_config.initial_inventory},
                       {"reorder_point", sc_config.reorder_point},
                       {"reorder_quantity", sc_config.reorder_quantity},
                       {"lead_mean", sc_config.lead_mean},
                       {"demand_rate", {sc_config.demand_rate_lo, sc_config.demand_rate_hi}}};
    } else {
        GroundTruthProcess process;
        if (generator == "pp1") {
            process = pp1_process();
        } else if (generator == "pp2") {
            process = pp2_process();
        } else if (generator == "homogeneous") {
            process = homogeneous_process(homogeneous_rates, homogeneous_horizon);
            config_json["rates"] = homogeneous_rates;
        } else {
            throw std::invalid_argument("generate_dataset: unknown generator: " + generator);
        }
        config_json["horizon"] = process.horizon;
        num_types = process.num_types;
        train = sample_dataset(process, n_train, seed, 0);
        val = sample_dataset(process, n_val, seed, n_train);
    }

    save_sequences(files.train_path, train);
    save_sequences(files.val_path, val);

    nlohmann::json manifest{{"generator", generator}, {"K", num_types},
                            {"seed", seed},          {"n_train", n_train},
                            {"n_val", n_val},        {"config", config_json},
                            {"files", {{"train", "train.jsonl"}, {"val", "val.jsonl"}}}};
    std::ofstream out(files.manifest_path, std::ios::binary);
    if (!out) throw std::runtime_error("generate_dataset: cannot write manifest");
    out << manifest.dump(2) << '\n';
    return files;
}

}  // namespace snmpp
