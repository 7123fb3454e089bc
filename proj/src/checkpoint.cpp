#include "dcqn/checkpoint.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/io.hpp"

#include <bit>
#include <map>

namespace dcqn {
namespace {

constexpr std::string_view kMagic = "DCQN";

class Writer {
public:
    void u32(std::uint32_t v) { bytes(v, 4); }
    void u64(std::uint64_t v) { bytes(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_ += s;
    }
    void raw(std::string_view s) { out_ += s; }
    std::string take() { return std::move(out_); }

private:
    void bytes(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
    std::string out_;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
    std::uint64_t u64() { return bytes(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw FormatError("checkpoint is truncated");
    }
    std::uint64_t bytes(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + static_cast<std::size_t>(i)])) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

using Extras = std::map<std::string, std::uint64_t>;

struct Common {
    std::size_t features = 0;
    std::size_t horizon = 0;
    TcnConfig backbone;
    Extras extras;
    FeatureStats stats;
    ParameterSet params;
};

std::string encode(ModelKind kind, const Common& c) {
    Writer w;
    w.raw(kMagic);
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(kind));
    w.u64(c.features);
    w.u64(c.horizon);
    w.u64(c.backbone.layers);
    w.u64(c.backbone.channels);
    w.u64(c.backbone.kernel_size);
    for (auto d : c.backbone.dilations) w.u64(d);
    w.u32(static_cast<std::uint32_t>(c.extras.size()));
    for (const auto& [k, v] : c.extras) {
        w.str(k);
        w.u64(v);
    }
    w.u64(c.stats.mean.size());
    for (double v : c.stats.mean) w.f64(v);
    for (double v : c.stats.stddev) w.f64(v);
    w.u64(c.params.size());
    for (const auto& [name, t] : c.params) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(t.shape.size()));
        for (auto d : t.shape) w.u64(d);
        for (double v : t.values) w.f64(v);
    }
    return w.take();
}

void check_header(Reader& r, ModelKind expected) {
    if (r.raw(4) != kMagic) throw FormatError("not a DCQN checkpoint (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    const auto kind = static_cast<ModelKind>(r.u32());
    if (kind != ModelKind::Iqn && kind != ModelKind::Dcn) throw FormatError("unknown model kind in checkpoint");
    if (kind != expected) {
        throw FormatError("checkpoint holds a " + to_string(kind) + " model, expected " + to_string(expected));
    }
}

Common decode(std::string_view bytes, ModelKind kind) {
    Reader r(bytes);
    check_header(r, kind);
    Common c;
    c.features = r.u64();
    c.horizon = r.u64();
    c.backbone.layers = r.u64();
    c.backbone.channels = r.u64();
    c.backbone.kernel_size = r.u64();
    if (c.backbone.layers > 64) throw FormatError("implausible layer count in checkpoint");
    c.backbone.dilations.clear();
    for (std::size_t i = 0; i < c.backbone.layers; ++i) c.backbone.dilations.push_back(r.u64());
    const std::uint32_t n_extras = r.u32();
    for (std::uint32_t i = 0; i < n_extras; ++i) {
        std::string key = r.str();
        c.extras[key] = r.u64();
    }
    const std::uint64_t n_stats = r.u64();
    if (n_stats != c.features || n_stats > r.remaining() / 16) throw FormatError("feature statistics do not match the feature count");
    c.stats.mean.resize(n_stats);
    c.stats.stddev.resize(n_stats);
    for (auto& v : c.stats.mean) v = r.f64();
    for (auto& v : c.stats.stddev) v = r.f64();
    const std::uint64_t n_tensors = r.u64();
    for (std::uint64_t i = 0; i < n_tensors; ++i) {
        std::string name = r.str();
        const std::uint32_t rank = r.u32();
        std::vector<std::size_t> shape(rank);
        std::uint64_t count = 1;
        for (auto& d : shape) {
            d = r.u64();
            if (d != 0 && count > r.remaining() / d) throw FormatError("checkpoint is truncated");
            count *= d;
        }
        if (count > r.remaining() / 8) throw FormatError("checkpoint is truncated");
        if (c.params.contains(name)) throw FormatError("duplicate tensor '" + name + "' in checkpoint");
        Tensor& t = c.params.add(name, shape);
        for (auto& v : t.values) v = r.f64();
    }
    if (!r.done()) throw FormatError("trailing bytes after checkpoint tensors");
    try {
        c.backbone.validate();
    } catch (const ParameterError& e) {
        throw FormatError(std::string("invalid backbone in checkpoint: ") + e.what());
    }
    return c;
}

std::uint64_t extra(const Extras& e, const std::string& key) {
    auto it = e.find(key);
    if (it == e.end()) throw FormatError("checkpoint is missing '" + key + "'");
    return it->second;
}

// The decoded tensor table must have the layout init would produce.
void check_layout(const ParameterSet& expected, const ParameterSet& got) {
    if (expected.size() != got.size()) throw FormatError("checkpoint tensor count does not match its configuration");
    for (const auto& [name, t] : expected) {
        if (!got.contains(name)) throw FormatError("checkpoint is missing tensor '" + name + "'");
        if (got.at(name).shape != t.shape) throw FormatError("checkpoint tensor '" + name + "' has the wrong shape");
    }
}

}  // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Iqn: return "iqn";
        case ModelKind::Dcn: return "dcn";
    }
    return "unknown";
}

std::string encode_checkpoint(const QuantileModel& model) {
    Common c{model.features, model.horizon, model.config.backbone, {}, model.feature_stats, model.params};
    c.extras = {{"downscale_channels", model.config.downscale_channels},
                {"embed_terms", model.config.embed_terms},
                {"embed_channels", model.config.embed_channels},
                {"quantile_draws", model.config.quantile_draws},
                {"inversion_grid", model.config.inversion_grid}};
    return encode(ModelKind::Iqn, c);
}

std::string encode_checkpoint(const CorrelationModel& model) {
    Common c{model.features, model.horizon, model.config.backbone, {}, model.feature_stats, model.params};
    c.extras = {{"projection_channels", model.config.projection_channels}};
    return encode(ModelKind::Dcn, c);
}

ModelKind checkpoint_kind(std::string_view bytes) {
    Reader r(bytes);
    if (r.raw(4) != kMagic) throw FormatError("not a DCQN checkpoint (bad magic)");
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version));
    }
    const auto kind = static_cast<ModelKind>(r.u32());
    if (kind != ModelKind::Iqn && kind != ModelKind::Dcn) throw FormatError("unknown model kind in checkpoint");
    return kind;
}

QuantileModel decode_iqn_checkpoint(std::string_view bytes) {
    Common c = decode(bytes, ModelKind::Iqn);
    IqnConfig cfg;
    cfg.backbone = c.backbone;
    cfg.downscale_channels = extra(c.extras, "downscale_channels");
    cfg.embed_terms = extra(c.extras, "embed_terms");
    cfg.embed_channels = extra(c.extras, "embed_channels");
    cfg.quantile_draws = extra(c.extras, "quantile_draws");
    cfg.inversion_grid = extra(c.extras, "inversion_grid");
    QuantileModel model = init_iqn(cfg, c.features, c.horizon, 0);
    check_layout(model.params, c.params);
    model.params = std::move(c.params);
    model.feature_stats = std::move(c.stats);
    return model;
}

CorrelationModel decode_dcn_checkpoint(std::string_view bytes) {
    Common c = decode(bytes, ModelKind::Dcn);
    DcnConfig cfg;
    cfg.backbone = c.backbone;
    cfg.projection_channels = extra(c.extras, "projection_channels");
    CorrelationModel model = init_dcn(cfg, c.features, c.horizon, 0);
    check_layout(model.params, c.params);
    model.params = std::move(c.params);
    model.feature_stats = std::move(c.stats);
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const QuantileModel& model) {
    write_file_atomic(path, encode_checkpoint(model));
}

void save_checkpoint(const std::filesystem::path& path, const CorrelationModel& model) {
    write_file_atomic(path, encode_checkpoint(model));
}

QuantileModel load_iqn_checkpoint(const std::filesystem::path& path) {
    try {
        return decode_iqn_checkpoint(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

CorrelationModel load_dcn_checkpoint(const std::filesystem::path& path) {
    try {
        return decode_dcn_checkpoint(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace dcqn
