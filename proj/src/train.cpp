#include "snmpp/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <thread>

namespace snmpp {

namespace {

constexpr std::uint64_t kInitSalt = 0x696e6974;  // parameter init stream
constexpr std::uint64_t kValSalt = 0x76616c;     // fixed validation stream
constexpr std::uint64_t kShufSalt = 0x73687566;  // epoch shuffle streams

}  // namespace

TrainResult train_model(const ModelSpec& spec, std::span<const EventSequence> train_data,
                        std::span<const EventSequence> val_data, const TrainConfig& config,
                        const std::function<void(const EpochStats&)>& on_epoch) {
    config.validate();
    spec.validate();
    if (train_data.empty()) throw std::invalid_argument("train_model: empty training set");
    if (val_data.empty()) throw std::invalid_argument("train_model: empty validation set");

    int threads = config.threads;
    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }

    ParamStore params(spec);
    {
        Rng init_rng = Rng::stream(config.seed, kInitSalt);
        params.init(spec, init_rng);
    }

    const std::uint64_t val_seed = derive_seed(config.seed, kValSalt);

    TrainResult result;
    result.best_params = params;
    result.best_val_nll = dataset_mean_nll(val_data, params, spec, config.nll, val_seed, threads);
    result.best_epoch = 0;

    BatchWorkspace workspace(threads);
    std::vector<double> grad(params.size(), 0.0);
    std::vector<std::size_t> order(train_data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t batch_size = static_cast<std::size_t>(config.optimizer.batch_size);
    int stall = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        Rng shuffle_rng = Rng::stream(config.seed, derive_seed(kShufSalt, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = order.size(); i > 1; --i) {
            std::swap(order[i - 1], order[static_cast<std::size_t>(shuffle_rng.below(i))]);
        }
        const std::uint64_t epoch_seed =
            derive_seed(config.seed, 0xe0000000ULL + static_cast<std::uint64_t>(epoch));

        double nll_sum = 0.0;
        std::size_t nll_count = 0;
        int clamped = 0;
        bool step_ok = true;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t len = std::min(batch_size, order.size() - start);
            std::span<const std::size_t> batch{order.data() + start, len};
            LossReport rep = batch_loss_and_grad(train_data, batch, params, spec, config.nll,
                                                 epoch_seed, grad, workspace);
            clamped += rep.clamped_events;
            if (!std::isfinite(rep.total_nll) ||
                !adamw_step(params, grad, config.optimizer)) {
                step_ok = false;
                break;
            }
            nll_sum += rep.total_nll * static_cast<double>(len);
            nll_count += len;
        }
        if (!step_ok) {
            result.diverged = true;
            break;
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_nll = nll_sum / static_cast<double>(nll_count);
        stats.val_nll = dataset_mean_nll(val_data, params, spec, config.nll, val_seed, threads);
        stats.clamped_events = clamped;
        stats.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.push_back(stats);
        result.epochs_run = epoch;
        if (on_epoch) on_epoch(stats);

        if (!std::isfinite(stats.val_nll)) {
            result.diverged = true;
            break;
        }
        if (stats.val_nll < result.best_val_nll) {
            result.best_val_nll = stats.val_nll;
            result.best_epoch = epoch;
            result.best_params = params;
            stall = 0;
        } else if (++stall >= config.patience) {
            break;
        }
    }
    return result;
}

}  // namespace snmpp
