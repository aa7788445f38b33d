#include "snmpp/params.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace snmpp {

namespace {

// Raw phi weights are shifted so softplus(raw) starts near 0.018. With all
// weights near softplus(0) ~ 0.69 the pre-clip output lands far above the
// clip interval and the soft-clip gradient underflows to zero, freezing the
// temporal network at initialization.
constexpr double kPhiRawInitShift = -4.0;
constexpr double kDelayRawInit = -2.0;

}  // namespace

ParamLayout::ParamLayout(const ModelSpec& spec) {
    spec.validate();
    num_types_ = spec.num_types;
    m_ = spec.embedding_dim;
    const std::size_t K = static_cast<std::size_t>(num_types_);
    const std::size_t m = static_cast<std::size_t>(m_);

    std::size_t at = 0;
    embeddings_ = {at, K * m};
    at += embeddings_.size;
    baselines_ = {at, K};
    at += baselines_.size;
    delay_raw_ = {at, K * K};
    at += delay_raw_.size;

    // psi maps [e_src, e_tgt] (2m) through hidden layers to a scalar head.
    {
        int in = 2 * m_;
        std::size_t off = 0;
        for (int h : spec.psi_hidden) {
            psi_shapes_.push_back({in, h});
            psi_layer_offset_.push_back(off);
            off += static_cast<std::size_t>(h) * in + h;
            in = h;
        }
        psi_shapes_.push_back({in, 1});
        psi_layer_offset_.push_back(off);
        off += static_cast<std::size_t>(in) + 1;
        psi_weights_ = {at, off};
        at += off;
    }

    // phi maps [e_src, e_tgt, -u] (2m + 1) through hidden layers to a scalar.
    {
        int in = 2 * m_ + 1;
        std::size_t woff = 0, boff = 0;
        for (int h : spec.phi_hidden) {
            phi_shapes_.push_back({in, h});
            phi_weight_offset_.push_back(woff);
            phi_bias_offset_.push_back(boff);
            woff += static_cast<std::size_t>(h) * in;
            boff += static_cast<std::size_t>(h);
            in = h;
        }
        phi_shapes_.push_back({in, 1});
        phi_weight_offset_.push_back(woff);
        phi_bias_offset_.push_back(boff);
        woff += static_cast<std::size_t>(in);
        boff += 1;
        phi_weights_raw_ = {at, woff};
        at += woff;
        phi_biases_ = {at, boff};
        at += boff;
    }
    total_ = at;
}

void ParamStore::init(const ModelSpec& spec, Rng& rng) {
    const ParamLayout& L = layout_;
    std::fill(raw_.begin(), raw_.end(), 0.0);
    std::fill(m_.begin(), m_.end(), 0.0);
    std::fill(v_.begin(), v_.end(), 0.0);
    step_count_ = 0;

    for (std::size_t i = 0; i < L.embeddings().size; ++i) {
        raw_[L.embeddings().offset + i] = rng.uniform(-0.5, 0.5);
    }
    for (std::size_t i = 0; i < L.delay_raw().size; ++i) {
        raw_[L.delay_raw().offset + i] = kDelayRawInit;
    }
    for (std::size_t layer = 0; layer < L.psi_shapes().size(); ++layer) {
        const auto& shape = L.psi_shapes()[layer];
        const double scale = 1.0 / std::sqrt(static_cast<double>(shape.in));
        for (int o = 0; o < shape.out; ++o) {
            for (int i = 0; i < shape.in; ++i) {
                raw_[L.psi_weight(static_cast<int>(layer), o, i)] =
                    rng.uniform(-0.5, 0.5) * scale;
            }
        }
    }
    for (std::size_t layer = 0; layer < L.phi_shapes().size(); ++layer) {
        const auto& shape = L.phi_shapes()[layer];
        const double scale = 1.0 / std::sqrt(static_cast<double>(shape.in));
        for (int o = 0; o < shape.out; ++o) {
            for (int i = 0; i < shape.in; ++i) {
                raw_[L.phi_weight(static_cast<int>(layer), o, i)] =
                    rng.uniform(-0.5, 0.5) * scale + kPhiRawInitShift;
            }
        }
    }
    // baselines and all biases stay at 0
}

namespace {

void append_le_doubles(std::ofstream& out, const std::vector<double>& xs) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(xs.data()),
                  static_cast<std::streamsize>(xs.size() * 8));
    } else {
        for (double x : xs) {
            auto bits = std::bit_cast<std::uint64_t>(x);
            char buf[8];
            for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
            out.write(buf, 8);
        }
    }
}

std::vector<double> read_le_doubles(std::ifstream& in, std::size_t n) {
    std::vector<double> xs(n);
    if constexpr (std::endian::native == std::endian::little) {
        in.read(reinterpret_cast<char*>(xs.data()), static_cast<std::streamsize>(n * 8));
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            char buf[8];
            in.read(buf, 8);
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i)
                bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
            xs[j] = std::bit_cast<double>(bits);
        }
    }
    if (!in) throw std::runtime_error("checkpoint: truncated parameter payload");
    return xs;
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelSpec& spec, const ParamStore& params) {
    const ParamLayout& L = params.layout();
    nlohmann::json header{
        {"format", "snmpp-checkpoint"},
        {"version", 1},
        {"K", spec.num_types},
        {"m", spec.embedding_dim},
        {"psi_hidden", spec.psi_hidden},
        {"phi_hidden", spec.phi_hidden},
        {"clip_smoothness", spec.clip_smoothness},
        {"clip_lo", spec.clip_lo},
        {"clip_hi", spec.clip_hi},
        {"link", {{"kind", to_string(spec.link.kind)}, {"beta", spec.link.beta}}},
        {"param_count", L.total()},
        {"slices",
         {{"embeddings", {{"offset", L.embeddings().offset}, {"size", L.embeddings().size}}},
          {"baselines", {{"offset", L.baselines().offset}, {"size", L.baselines().size}}},
          {"delay_raw", {{"offset", L.delay_raw().offset}, {"size", L.delay_raw().size}}},
          {"psi_weights", {{"offset", L.psi_weights().offset}, {"size", L.psi_weights().size}}},
          {"phi_weights_raw",
           {{"offset", L.phi_weights_raw().offset}, {"size", L.phi_weights_raw().size}}},
          {"phi_biases", {{"offset", L.phi_biases().offset}, {"size", L.phi_biases().size}}}}},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
    out << header.dump() << '\n';
    append_le_doubles(out, params.raw());
    if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

std::pair<ModelSpec, ParamStore> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("checkpoint: missing header: " + path);
    nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("format", "") != "snmpp-checkpoint") {
        throw std::runtime_error("checkpoint: unrecognized format: " + path);
    }
    ModelSpec spec;
    spec.num_types = header.at("K").get<int>();
    spec.embedding_dim = header.at("m").get<int>();
    spec.psi_hidden = header.at("psi_hidden").get<std::vector<int>>();
    spec.phi_hidden = header.at("phi_hidden").get<std::vector<int>>();
    spec.clip_smoothness = header.at("clip_smoothness").get<double>();
    spec.clip_lo = header.at("clip_lo").get<double>();
    spec.clip_hi = header.at("clip_hi").get<double>();
    spec.link.kind = link_kind_from_string(header.at("link").at("kind").get<std::string>());
    spec.link.beta = header.at("link").at("beta").get<double>();
    spec.validate();

    ParamStore params(spec);
    const std::size_t n = header.at("param_count").get<std::size_t>();
    if (n != params.layout().total()) {
        throw std::runtime_error("checkpoint: parameter count does not match layout");
    }
    params.raw() = read_le_doubles(in, n);
    return {spec, std::move(params)};
}

}  // namespace snmpp
