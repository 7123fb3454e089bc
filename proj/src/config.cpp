#include "dcqn/config.hpp"

#include "dcqn/errors.hpp"
#include "dcqn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace dcqn {
namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::uint64_t parse_count(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw UsageError("'" + key + "' expects a non-negative integer, got '" + v + "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw UsageError("'" + key + "' expects a real number, got '" + v + "'");
    }
    return out;
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    std::stringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_count(key, trim(item)));
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto count = [&t](const std::string& k, auto member) {
            t[k] = [member](RunConfig& c, const std::string& key, const std::string& v) {
                member(c) = parse_count(key, v);
            };
        };
        auto real = [&t](const std::string& k, auto member) {
            t[k] = [member](RunConfig& c, const std::string& key, const std::string& v) {
                member(c) = parse_real(key, v);
            };
        };
        t["backbone.layers"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            const auto l = parse_count(key, v);
            if (l > 32) throw UsageError("'" + key + "' must be at most 32");
            c.iqn.backbone.layers = c.dcn.backbone.layers = l;
        };
        t["backbone.channels"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.iqn.backbone.channels = c.dcn.backbone.channels = parse_count(key, v);
        };
        t["backbone.kernel_size"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.iqn.backbone.kernel_size = c.dcn.backbone.kernel_size = parse_count(key, v);
        };
        t["backbone.dilations"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.iqn.backbone.dilations = c.dcn.backbone.dilations = parse_list(key, v);
        };
        count("iqn.downscale_channels", [](RunConfig& c) -> std::size_t& { return c.iqn.downscale_channels; });
        count("iqn.embed_terms", [](RunConfig& c) -> std::size_t& { return c.iqn.embed_terms; });
        count("iqn.embed_channels", [](RunConfig& c) -> std::size_t& { return c.iqn.embed_channels; });
        count("iqn.quantile_draws", [](RunConfig& c) -> std::size_t& { return c.iqn.quantile_draws; });
        count("iqn.inversion_grid", [](RunConfig& c) -> std::size_t& { return c.iqn.inversion_grid; });
        count("dcn.projection_channels", [](RunConfig& c) -> std::size_t& { return c.dcn.projection_channels; });
        real("train.learning_rate", [](RunConfig& c) -> double& { return c.train.adam.learning_rate; });
        real("train.beta1", [](RunConfig& c) -> double& { return c.train.adam.beta1; });
        real("train.beta2", [](RunConfig& c) -> double& { return c.train.adam.beta2; });
        real("train.epsilon", [](RunConfig& c) -> double& { return c.train.adam.epsilon; });
        count("train.batch_size", [](RunConfig& c) -> std::size_t& { return c.train.batch_size; });
        count("train.patience", [](RunConfig& c) -> std::size_t& { return c.train.patience; });
        count("train.max_epochs", [](RunConfig& c) -> std::size_t& { return c.train.max_epochs; });
        count("generate.scenarios", [](RunConfig& c) -> std::size_t& { return c.scenarios; });
        real("metrics.variogram_order", [](RunConfig& c) -> double& { return c.metrics.variogram_order; });
        t["run.seed"] = [](RunConfig& c, const std::string& key, const std::string& v) {
            c.seed = c.train.seed = parse_count(key, v);
        };
        return t;
    }();
    return table;
}

std::string join(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

}  // namespace

void RunConfig::validate() const {
    try {
        iqn.backbone.validate();
        dcn.backbone.validate();
    } catch (const ParameterError& e) {
        throw UsageError(std::string("[backbone] ") + e.what());
    }
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw UsageError(std::string(name) + " must be positive");
    };
    positive(iqn.downscale_channels, "iqn.downscale_channels");
    positive(iqn.embed_channels, "iqn.embed_channels");
    positive(iqn.quantile_draws, "iqn.quantile_draws");
    if (iqn.inversion_grid < 64) throw UsageError("iqn.inversion_grid must be at least 64");
    positive(dcn.projection_channels, "dcn.projection_channels");
    positive(train.batch_size, "train.batch_size");
    positive(train.max_epochs, "train.max_epochs");
    positive(train.patience, "train.patience");
    positive(scenarios, "generate.scenarios");
    if (!(train.adam.learning_rate > 0.0)) throw UsageError("train.learning_rate must be positive");
    if (!(train.adam.beta1 >= 0.0 && train.adam.beta1 < 1.0)) throw UsageError("train.beta1 must be in [0,1)");
    if (!(train.adam.beta2 >= 0.0 && train.adam.beta2 < 1.0)) throw UsageError("train.beta2 must be in [0,1)");
    if (!(train.adam.epsilon > 0.0)) throw UsageError("train.epsilon must be positive");
    if (!(metrics.variogram_order > 0.0)) throw UsageError("metrics.variogram_order must be positive");
}

RunConfig parse_run_config(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    std::size_t line_no = 0;
    bool explicit_dilations = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw UsageError(where + "unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            static const char* known[] = {"backbone", "iqn", "dcn", "train", "generate", "metrics", "run"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known)) {
                throw UsageError(where + "unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(where + "expected key = value");
        if (section.empty()) throw UsageError(where + "key outside of a section");
        const std::string key = section + "." + trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        auto it = setters().find(key);
        if (it == setters().end()) throw UsageError(where + "unknown key '" + key + "'");
        explicit_dilations = explicit_dilations || key == "backbone.dilations";
        try {
            it->second(config, key, value);
        } catch (const UsageError& e) {
            throw UsageError(where + e.what());
        }
    }
    if (!explicit_dilations) {
        // Powers of two, one per layer.
        config.iqn.backbone.dilations = TcnConfig::with_layers(config.iqn.backbone.layers, 1).dilations;
        config.dcn.backbone.dilations = config.iqn.backbone.dilations;
    }
    config.validate();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return parse_run_config(read_file(path));
    } catch (const UsageError& e) {
        throw UsageError(path.string() + ": " + e.what());
    }
}

std::string to_string(const RunConfig& c) {
    std::ostringstream out;
    const auto& b = c.iqn.backbone;
    out << "[backbone]\nlayers = " << b.layers << "\nchannels = " << b.channels << "\nkernel_size = " << b.kernel_size
        << "\ndilations = " << join(b.dilations) << "\n\n";
    out << "[iqn]\ndownscale_channels = " << c.iqn.downscale_channels << "\nembed_terms = " << c.iqn.embed_terms
        << "\nembed_channels = " << c.iqn.embed_channels << "\nquantile_draws = " << c.iqn.quantile_draws
        << "\ninversion_grid = " << c.iqn.inversion_grid << "\n\n";
    out << "[dcn]\nprojection_channels = " << c.dcn.projection_channels << "\n\n";
    out << "[train]\nlearning_rate = " << format_real(c.train.adam.learning_rate)
        << "\nbeta1 = " << format_real(c.train.adam.beta1) << "\nbeta2 = " << format_real(c.train.adam.beta2)
        << "\nepsilon = " << format_real(c.train.adam.epsilon) << "\nbatch_size = " << c.train.batch_size
        << "\npatience = " << c.train.patience << "\nmax_epochs = " << c.train.max_epochs << "\n\n";
    out << "[generate]\nscenarios = " << c.scenarios << "\n\n";
    out << "[metrics]\nvariogram_order = " << format_real(c.metrics.variogram_order) << "\n\n";
    out << "[run]\nseed = " << c.seed << "\n";
    return out.str();
}

}  // namespace dcqn
