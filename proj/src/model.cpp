#include "snmpp/model.hpp"

#include <charconv>
#include <fstream>

namespace snmpp {

ValueParams::ValueParams(const ParamStore& store, const ModelSpec& spec) : raw_(store.raw()) {
    (void)spec;
    view_ = raw_;
    const ParamLayout& L = store.layout();
    for (std::size_t i = L.delay_raw().offset; i < L.delay_raw().offset + L.delay_raw().size; ++i) {
        view_[i] = softplus(raw_[i], 1.0);
    }
    for (std::size_t i = L.phi_weights_raw().offset;
         i < L.phi_weights_raw().offset + L.phi_weights_raw().size; ++i) {
        view_[i] = softplus(raw_[i], 1.0);
    }
}

TapeParams::TapeParams(Tape& tape, const ParamStore& store, const ModelSpec& spec) : tape_(&tape) {
    (void)spec;
    if (tape.size() != 0) {
        throw std::logic_error("TapeParams: tape must be empty");
    }
    const auto& raw = store.raw();
    leaves_.reserve(raw.size());
    for (double v : raw) {
        leaves_.push_back({&tape, tape.leaf(v)});
    }
    views_ = leaves_;
    const ParamLayout& L = store.layout();
    for (std::size_t i = L.delay_raw().offset; i < L.delay_raw().offset + L.delay_raw().size; ++i) {
        views_[i] = softplus(leaves_[i], 1.0);
    }
    for (std::size_t i = L.phi_weights_raw().offset;
         i < L.phi_weights_raw().offset + L.phi_weights_raw().size; ++i) {
        views_[i] = softplus(leaves_[i], 1.0);
    }
}

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("export: grid must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw std::invalid_argument("export: grid must be strictly increasing");
        }
    }
}

void append_double(std::string& out, double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    out.append(buf, res.ptr);
}

}  // namespace

std::vector<KernelCurve> export_kernel_curves(const ParamStore& params, const ModelSpec& spec,
                                              std::span<const double> grid) {
    check_grid(grid);
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    std::vector<KernelCurve> curves;
    for (int src = 0; src < spec.num_types; ++src) {
        for (int tgt = 0; tgt < spec.num_types; ++tgt) {
            KernelCurve c;
            c.src = src;
            c.tgt = tgt;
            c.dt.assign(grid.begin(), grid.end());
            c.f.reserve(grid.size());
            for (double dt : grid) {
                c.f.push_back(ev.influence(src, tgt, dt));
            }
            curves.push_back(std::move(c));
        }
    }
    return curves;
}

void write_kernel_curves_csv(const std::string& path, const std::vector<KernelCurve>& curves) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export: cannot open for writing: " + path);
    out << "src,tgt,dt,f\n";
    std::string line;
    for (const auto& c : curves) {
        for (std::size_t i = 0; i < c.dt.size(); ++i) {
            line.clear();
            line += std::to_string(c.src);
            line += ',';
            line += std::to_string(c.tgt);
            line += ',';
            append_double(line, c.dt[i]);
            line += ',';
            append_double(line, c.f[i]);
            line += '\n';
            out << line;
        }
    }
    if (!out) throw std::runtime_error("export: write failed: " + path);
}

void write_intensity_csv(const std::string& path, const ParamStore& params, const ModelSpec& spec,
                         const EventSequence& seq, std::span<const double> grid) {
    check_grid(grid);
    seq.validate(spec.num_types);
    ValueParams pv(params, spec);
    ValueEvaluator ev(spec, params.layout(), pv);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("export: cannot open for writing: " + path);
    out << "t,k,lambda\n";
    std::string line;
    for (double t : grid) {
        auto hist = seq.history_before(t);
        for (int k = 0; k < spec.num_types; ++k) {
            line.clear();
            append_double(line, t);
            line += ',';
            line += std::to_string(k);
            line += ',';
            append_double(line, ev.intensity(k, t, hist));
            line += '\n';
            out << line;
        }
    }
    if (!out) throw std::runtime_error("export: write failed: " + path);
}

}  // namespace snmpp
