#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "snmpp/dataset.hpp"
#include "snmpp/likelihood.hpp"
#include "snmpp/model.hpp"
#include "snmpp/predict.hpp"
#include "snmpp/simulate.hpp"
#include "snmpp/train.hpp"

using nlohmann::json;
using namespace snmpp;

namespace {

// Flags take precedence over the config file, which takes precedence over
// defaults: config values are loaded into the variables first and CLI11 then
// overwrites whatever was passed explicitly.
json load_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) throw std::runtime_error(std::string("cannot open config: ") + argv[i + 1]);
            return json::parse(in);
        }
    }
    return json::object();
}

template <class T>
void from_config(const json& cfg, const char* key, T& out) {
    if (cfg.contains(key)) out = cfg.at(key).get<T>();
}

int hardware_threads() {
    const unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? static_cast<int>(n) : 1;
}

struct TrainOptions {
    std::string data_path, val_path, out_path, log_path;
    int epochs = 100;
    int patience = 15;
    int batch = 128;
    double lr = 1e-3;
    int segments = 4;
    std::string estimator = "stratified";
    std::string link = "softplus";
    double link_beta = 10.0;
    int embedding_dim = 4;
    std::vector<int> psi_hidden{16, 16};
    std::vector<int> phi_hidden{16, 16};
    double smoothness = 0.1;
    double weight_decay = 1e-2;
    std::uint64_t seed = 0;
    int threads = 0;
    int num_types = 0;  // 0 = infer from data
};

int infer_num_types(const std::vector<EventSequence>& data) {
    int k_max = -1;
    for (const auto& seq : data) {
        for (const Event& e : seq.events) k_max = std::max(k_max, e.k);
    }
    if (k_max < 0) throw std::runtime_error("cannot infer the number of event types: no events");
    return k_max + 1;
}

json recovered_report(const ParamStore& params, const ModelSpec& spec) {
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    const int K = spec.num_types;
    json base_post = json::array(), base_pre = json::array();
    for (int k = 0; k < K; ++k) {
        const double a = params.raw()[params.layout().baseline(k)];
        base_pre.push_back(a);
        base_post.push_back(spec.link.kind == LinkKind::softplus_beta
                                ? softplus(a, spec.link.beta)
                                : elu_plus_one(a));
    }
    json delay = json::array(), psi = json::array();
    for (int s = 0; s < K; ++s) {
        json drow = json::array(), prow = json::array();
        for (int t = 0; t < K; ++t) {
            drow.push_back(pv.constrained(params.layout().delay(s, t)));
            prow.push_back(ev.psi(s, t));
        }
        delay.push_back(drow);
        psi.push_back(prow);
    }
    return json{{"base_intensity_post_link", base_post},
                {"base_pre_link", base_pre},
                {"delay", delay},
                {"psi", psi}};
}

int cmd_simulate(const std::string& generator, std::size_t n_train, std::size_t n_val,
                 std::uint64_t seed, const std::string& out_dir, const SupplyChainConfig& sc,
                 const std::vector<double>& rates, double horizon) {
    if (generator != "pp1" && generator != "pp2" && generator != "supply-chain" &&
        generator != "homogeneous") {
        throw CLI::ValidationError("generator",
                                   "unknown generator '" + generator +
                                       "' (expected pp1 | pp2 | supply-chain | homogeneous)");
    }
    DatasetFiles files = generate_dataset(generator, n_train, n_val, seed, out_dir, sc, rates, horizon);
    std::cerr << "wrote " << files.train_path << " (" << n_train << " sequences), "
              << files.val_path << " (" << n_val << "), " << files.manifest_path << "\n";
    std::cout << json{{"train", files.train_path},
                      {"val", files.val_path},
                      {"manifest", files.manifest_path}}
                     .dump()
              << "\n";
    return 0;
}

int cmd_train(const TrainOptions& opt) {
    auto train_data = load_sequences(opt.data_path);
    auto val_data = opt.val_path.empty() ? std::vector<EventSequence>{} : load_sequences(opt.val_path);
    if (val_data.empty()) throw std::runtime_error("training requires a validation file (--val)");

    ModelSpec spec;
    spec.num_types = opt.num_types > 0
                         ? opt.num_types
                         : std::max(infer_num_types(train_data), infer_num_types(val_data));
    spec.embedding_dim = opt.embedding_dim;
    spec.psi_hidden = opt.psi_hidden;
    spec.phi_hidden = opt.phi_hidden;
    spec.clip_smoothness = opt.smoothness;
    spec.link.kind = link_kind_from_string(opt.link);
    spec.link.beta = opt.link_beta;

    TrainConfig cfg;
    cfg.epochs = opt.epochs;
    cfg.patience = opt.patience;
    cfg.seed = opt.seed;
    cfg.threads = opt.threads > 0 ? opt.threads : hardware_threads();
    cfg.optimizer.batch_size = opt.batch;
    cfg.optimizer.learning_rate = opt.lr;
    cfg.optimizer.weight_decay = opt.weight_decay;
    cfg.nll.segments = opt.segments;
    cfg.nll.seed = opt.seed;
    cfg.nll.estimator =
        opt.estimator == "global-gmce" ? Estimator::global_gmce : Estimator::stratified;
    if (opt.estimator != "stratified" && opt.estimator != "global-gmce") {
        throw CLI::ValidationError("estimator", "expected stratified | global-gmce");
    }

    std::ofstream log_file;
    if (!opt.log_path.empty()) {
        log_file.open(opt.log_path);
        if (!log_file) throw std::runtime_error("cannot open log file: " + opt.log_path);
    }
    auto on_epoch = [&](const EpochStats& s) {
        const json line{{"epoch", s.epoch},
                        {"train_nll", s.train_nll},
                        {"val_nll", s.val_nll},
                        {"wall_seconds", s.wall_seconds}};
        std::cout << line.dump() << "\n" << std::flush;
        if (log_file) log_file << line.dump() << "\n";
    };

    TrainResult result = train_model(spec, train_data, val_data, cfg, on_epoch);
    save_checkpoint(opt.out_path, spec, result.best_params);

    const json manifest{
        {"command", "train"},
        {"data", opt.data_path},
        {"val", opt.val_path},
        {"seed", opt.seed},
        {"epochs", opt.epochs},
        {"epochs_run", result.epochs_run},
        {"best_epoch", result.best_epoch},
        {"best_val_nll", result.best_val_nll},
        {"diverged", result.diverged},
        {"batch_size", opt.batch},
        {"learning_rate", opt.lr},
        {"weight_decay", opt.weight_decay},
        {"q", opt.segments},
        {"estimator", opt.estimator},
        {"link", opt.link},
        {"link_beta", opt.link_beta},
        {"num_types", spec.num_types},
        {"embedding_dim", spec.embedding_dim},
        {"psi_hidden", spec.psi_hidden},
        {"phi_hidden", spec.phi_hidden},
        {"smoothness", spec.clip_smoothness},
    };
    std::ofstream mf(opt.out_path + ".manifest.json");
    mf << manifest.dump(2) << "\n";

    std::cerr << "best val NLL " << result.best_val_nll << " at epoch " << result.best_epoch
              << (result.diverged ? " (stopped on divergence)" : "") << "; checkpoint "
              << opt.out_path << "\n";
    return result.diverged ? 2 : 0;
}

int cmd_eval(const std::string& data_path, const std::string& ckpt_path,
             const std::string& train_data_path, const std::string& out_path,
             const std::string& per_event_path, double multiplier, int grid, int threads) {
    auto [spec, params] = load_checkpoint(ckpt_path);
    auto data = load_sequences(data_path, spec.num_types);

    const double mean_gap = train_data_path.empty()
                                ? pooled_mean_gap(data)
                                : pooled_mean_gap(load_sequences(train_data_path, spec.num_types));

    PredictConfig pcfg;
    pcfg.multiplier = multiplier;
    pcfg.inner_grid = grid;
    pcfg.outer_grid = grid;
    EvalReport rep = evaluate(data, params, spec, pcfg, mean_gap,
                              threads > 0 ? threads : hardware_threads(),
                              !per_event_path.empty());
    if (!per_event_path.empty()) write_per_event_csv(per_event_path, rep);

    const json out{{"time_rmse", rep.time_rmse},
                   {"type_error_rate", rep.type_error_rate},
                   {"n_events", rep.n_events},
                   {"n_skipped_sequences", rep.n_skipped_sequences},
                   {"config",
                    {{"multiplier", multiplier},
                     {"grid", grid},
                     {"mean_inter_event", mean_gap},
                     {"checkpoint", ckpt_path},
                     {"data", data_path}}},
                   {"recovered", recovered_report(params, spec)}};
    std::cout << out.dump(2) << "\n";
    if (!out_path.empty()) {
        std::ofstream f(out_path);
        f << out.dump(2) << "\n";
    }
    std::cerr << "time RMSE " << rep.time_rmse << ", type error rate " << rep.type_error_rate
              << " over " << rep.n_events << " events\n";
    return 0;
}

int cmd_export_kernels(const std::string& ckpt_path, const std::string& out_csv,
                       const std::string& data_path, double dt_max, int points) {
    auto [spec, params] = load_checkpoint(ckpt_path);
    if (!data_path.empty()) {
        dt_max = 3.0 * pooled_mean_gap(load_sequences(data_path, spec.num_types));
    }
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid.push_back(dt_max * static_cast<double>(i) / (points - 1));
    }
    write_kernel_curves_csv(out_csv, export_kernel_curves(params, spec, grid));
    std::cerr << "wrote " << spec.num_types * spec.num_types << " kernel curves to " << out_csv
              << "\n";
    return 0;
}

int cmd_export_intensity(const std::string& ckpt_path, const std::string& seq_path,
                         std::size_t index, const std::string& out_csv, int points) {
    auto [spec, params] = load_checkpoint(ckpt_path);
    auto data = load_sequences(seq_path, spec.num_types);
    if (index >= data.size()) {
        throw std::runtime_error("sequence index " + std::to_string(index) +
                                 " out of range (file has " + std::to_string(data.size()) + ")");
    }
    const EventSequence& seq = data[index];
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        grid.push_back(seq.horizon * static_cast<double>(i) / points);
    }
    write_intensity_csv(out_csv, params, spec, seq, grid);
    std::cerr << "wrote intensity curves for sequence " << index << " to " << out_csv << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const json cfg = load_config(argc, argv);

        CLI::App app{"structured neural marked point process toolkit"};
        app.require_subcommand(1);
        app.fallthrough();
        std::string config_path;
        app.add_option("--config", config_path, "JSON config file (flags override it)");

        // simulate
        auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
        std::string generator, out_dir = "data";
        std::size_t n_train = 1000, n_val = 200;
        std::uint64_t seed = 0;
        SupplyChainConfig sc;
        std::vector<double> rates{0.5};
        double horizon = 50.0;
        from_config(cfg, "n_train", n_train);
        from_config(cfg, "n_val", n_val);
        from_config(cfg, "seed", seed);
        from_config(cfg, "out", out_dir);
        sim->add_option("generator", generator, "pp1 | pp2 | supply-chain | homogeneous")
            ->required();
        sim->add_option("--n-train", n_train, "training sequences");
        sim->add_option("--n-val", n_val, "validation sequences");
        sim->add_option("--seed", seed, "RNG seed");
        sim->add_option("--out", out_dir, "output directory");
        sim->add_option("--rates", rates, "per-type rates (homogeneous)");
        sim->add_option("--horizon", horizon, "time horizon (homogeneous)");
        sim->add_option("--sc-horizon", sc.horizon, "supply chain: T_max");
        sim->add_option("--sc-initial", sc.initial_inventory, "supply chain: initial inventory");
        sim->add_option("--sc-reorder-point", sc.reorder_point, "supply chain: reorder point");
        sim->add_option("--sc-reorder-qty", sc.reorder_quantity, "supply chain: reorder quantity");
        sim->add_option("--sc-lead-mean", sc.lead_mean, "supply chain: mean lead time");

        // train
        auto* tr = app.add_subcommand("train", "fit the model by stratified-MC maximum likelihood");
        TrainOptions topt;
        topt.threads = 0;
        from_config(cfg, "epochs", topt.epochs);
        from_config(cfg, "patience", topt.patience);
        from_config(cfg, "batch", topt.batch);
        from_config(cfg, "lr", topt.lr);
        from_config(cfg, "q", topt.segments);
        from_config(cfg, "estimator", topt.estimator);
        from_config(cfg, "link", topt.link);
        from_config(cfg, "link_beta", topt.link_beta);
        from_config(cfg, "embedding_dim", topt.embedding_dim);
        from_config(cfg, "psi_hidden", topt.psi_hidden);
        from_config(cfg, "phi_hidden", topt.phi_hidden);
        from_config(cfg, "smoothness", topt.smoothness);
        from_config(cfg, "weight_decay", topt.weight_decay);
        from_config(cfg, "seed", topt.seed);
        from_config(cfg, "threads", topt.threads);
        tr->add_option("--data", topt.data_path, "training JSONL")->required();
        tr->add_option("--val", topt.val_path, "validation JSONL")->required();
        tr->add_option("--out", topt.out_path, "output checkpoint")->required();
        tr->add_option("--log", topt.log_path, "epoch log JSONL file (also on stdout)");
        tr->add_option("--epochs", topt.epochs, "epoch budget");
        tr->add_option("--patience", topt.patience, "early-stopping patience");
        tr->add_option("--batch", topt.batch, "mini-batch size");
        tr->add_option("--lr", topt.lr, "learning rate");
        tr->add_option("--weight-decay", topt.weight_decay, "AdamW weight decay");
        tr->add_option("--q", topt.segments, "stratification segments per interval");
        tr->add_option("--estimator", topt.estimator, "stratified | global-gmce");
        tr->add_option("--link", topt.link, "softplus | elu-plus-one");
        tr->add_option("--link-beta", topt.link_beta, "softplus link beta");
        tr->add_option("--embedding-dim", topt.embedding_dim, "embedding dimension");
        tr->add_option("--smoothness", topt.smoothness, "soft-clip smoothness s");
        tr->add_option("--seed", topt.seed, "RNG seed");
        tr->add_option("--threads", topt.threads, "worker threads (0 = all cores)");
        tr->add_option("--num-types", topt.num_types, "event types (0 = infer)");

        // eval
        auto* ev = app.add_subcommand("eval", "next-event prediction metrics + recovered parameters");
        std::string eval_data, ckpt, eval_train_data, eval_out, per_event;
        double multiplier = 10.0;
        int grid = 256, eval_threads = 0;
        from_config(cfg, "multiplier", multiplier);
        ev->add_option("--data", eval_data, "evaluation JSONL")->required();
        ev->add_option("--checkpoint", ckpt, "model checkpoint")->required();
        ev->add_option("--train-data", eval_train_data,
                       "training JSONL for the mean inter-event time (default: eval data)");
        ev->add_option("--out", eval_out, "write the report JSON here too");
        ev->add_option("--per-event", per_event, "per-event CSV output");
        ev->add_option("--multiplier", multiplier, "truncation multiplier (5 or 10)");
        ev->add_option("--grid", grid, "integration grid points");
        ev->add_option("--threads", eval_threads, "worker threads (0 = all cores)");

        // export
        auto* ex = app.add_subcommand("export", "export curves for plotting");
        std::string ex_ckpt, ex_out, ex_data, ex_seq;
        double dt_max = 3.0;
        int points = 200, ipoints = 400;
        std::size_t seq_index = 0;
        ex->add_option("--checkpoint", ex_ckpt, "model checkpoint")->required();
        auto* exk = ex->add_subcommand("kernels", "influence kernels f(dt), CSV: src,tgt,dt,f");
        exk->add_option("--out", ex_out, "output CSV")->required();
        exk->add_option("--dt-max", dt_max, "lag grid upper end");
        exk->add_option("--data", ex_data, "dataset; grid = [0, 3 x mean inter-event time]");
        exk->add_option("--points", points, "grid points");
        auto* exi = ex->add_subcommand("intensity", "lambda_k(t) over a sequence, CSV: t,k,lambda");
        exi->add_option("--sequence", ex_seq, "JSONL file with sequences")->required();
        exi->add_option("--index", seq_index, "sequence index");
        exi->add_option("--out", ex_out, "output CSV")->required();
        exi->add_option("--points", ipoints, "grid points");
        ex->require_subcommand(1);

        CLI11_PARSE(app, argc, argv);

        if (sim->parsed()) {
            return cmd_simulate(generator, n_train, n_val, seed, out_dir, sc, rates, horizon);
        }
        if (tr->parsed()) {
            return cmd_train(topt);
        }
        if (ev->parsed()) {
            return cmd_eval(eval_data, ckpt, eval_train_data, eval_out, per_event, multiplier,
                            grid, eval_threads);
        }
        if (ex->parsed()) {
            if (exk->parsed()) return cmd_export_kernels(ex_ckpt, ex_out, ex_data, dt_max, points);
            return cmd_export_intensity(ex_ckpt, ex_seq, seq_index, ex_out, ipoints);
        }
        return 1;
    } catch (const std::exception& e) {
        std::cout << nlohmann::json{{"error", e.what()}}.dump() << "\n";
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
