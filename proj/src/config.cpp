#include "stroke/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace stroke {

BuildOptions ExperimentConfig::build_options() const {
    BuildOptions opt;
    opt.input_shape = {input_channels, input_frames, input_height, input_width};
    opt.channels = channels;
    opt.hidden_fc = hidden_fc;
    opt.num_classes = num_classes;
    opt.spatial_pool_blocks = spatial_pool_blocks;
    opt.seed = seed;
    return opt;
}

NetworkSpec ExperimentConfig::network_spec() const {
    if (arch == "v1") {
        return v1_spec(build_options());
    }
    if (arch == "v2") {
        return v2_spec(build_options());
    }
    throw ConfigError("config: arch must be v1 or v2, got '" + arch + "'");
}

TrainConfig ExperimentConfig::train_config() const {
    TrainConfig t = train;
    t.seed = seed;
    return t;
}

SynthConfig ExperimentConfig::synth_config() const {
    SynthConfig s = synth;
    s.seed = seed;
    return s;
}

namespace {

struct Setter {
    std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
};

[[noreturn]] void bad_value(const std::string& ctx, const std::string& key, const std::string& value) {
    throw ConfigError("config: " + ctx + ": bad value '" + value + "' for key '" + key + "'");
}

std::int64_t to_int(const std::string& ctx, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::int64_t r = std::stoll(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return r;
    } catch (const std::exception&) {
        bad_value(ctx, key, v);
    }
}

std::uint64_t to_u64(const std::string& ctx, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::uint64_t r = std::stoull(v, &used);
        if (used != v.size() || v.find('-') != std::string::npos) {
            throw std::invalid_argument(v);
        }
        return r;
    } catch (const std::exception&) {
        bad_value(ctx, key, v);
    }
}

double to_double(const std::string& ctx, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double r = std::stod(v, &used);
        if (used != v.size()) {
            throw std::invalid_argument(v);
        }
        return r;
    } catch (const std::exception&) {
        bad_value(ctx, key, v);
    }
}

bool to_bool(const std::string& ctx, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        return false;
    }
    bad_value(ctx, key, v);
}

std::vector<std::int64_t> to_int_list(const std::string& ctx, const std::string& key, const std::string& v) {
    std::vector<std::int64_t> out;
    if (v.empty()) {
        return out;
    }
    std::string cur;
    for (const char c : v + ",") {
        if (c == ',') {
            out.push_back(to_int(ctx, key, cur));
            cur.clear();
        } else if (c != ' ') {
            cur.push_back(c);
        }
    }
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) {
        ++b;
    }
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
        --e;
    }
    return s.substr(b, e - b);
}

using Ctx = const std::string&;
using Key = const std::string&;
using Val = const std::string&;

// section.key -> setter
const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"experiment.seed", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.seed = to_u64(ctx, "seed", v); }}},

        {"model.arch", {[](ExperimentConfig& c, Ctx ctx, Val v) {
             if (v != "v1" && v != "v2") bad_value(ctx, "arch", v);
             c.arch = v;
         }}},
        {"model.input_channels", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.input_channels = to_int(ctx, "input_channels", v); }}},
        {"model.input_frames", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.input_frames = to_int(ctx, "input_frames", v); }}},
        {"model.input_height", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.input_height = to_int(ctx, "input_height", v); }}},
        {"model.input_width", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.input_width = to_int(ctx, "input_width", v); }}},
        {"model.channels", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.channels = to_int_list(ctx, "channels", v); }}},
        {"model.hidden_fc", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.hidden_fc = to_int(ctx, "hidden_fc", v); }}},
        {"model.num_classes", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.num_classes = to_int(ctx, "num_classes", v); }}},
        {"model.spatial_pool_blocks", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.spatial_pool_blocks = to_int(ctx, "spatial_pool_blocks", v); }}},

        {"train.epochs", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.epochs = to_int(ctx, "epochs", v); }}},
        {"train.lr", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.lr = to_double(ctx, "lr", v); }}},
        {"train.momentum", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.momentum = to_double(ctx, "momentum", v); }}},
        {"train.weight_decay", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.weight_decay = to_double(ctx, "weight_decay", v); }}},
        {"train.batch_size", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.batch_size = to_int(ctx, "batch_size", v); }}},
        {"train.plateau_patience", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.plateau_patience = to_int(ctx, "plateau_patience", v); }}},
        {"train.plateau_factor", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.plateau_factor = to_double(ctx, "plateau_factor", v); }}},
        {"train.min_lr", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.min_lr = to_double(ctx, "min_lr", v); }}},
        {"train.jitter", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.jitter = to_int(ctx, "jitter", v); }}},
        {"train.augment", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.train.augment = to_bool(ctx, "augment", v); }}},
        {"train.negatives_per_video", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.negatives_per_video = to_int(ctx, "negatives_per_video", v); }}},

        {"detect.fusion", {[](ExperimentConfig& c, Ctx, Val v) { c.detect.fusion = fusion_from_name(v); }}},
        {"detect.sigma", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.detect.sigma = to_double(ctx, "sigma", v); }}},
        {"detect.decision", {[](ExperimentConfig& c, Ctx, Val v) { c.detect.decision = decision_from_name(v); }}},
        {"detect.negative_class", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.detect.negative_class = static_cast<int>(to_int(ctx, "negative_class", v)); }}},
        {"detect.min_segment_len", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.detect.min_segment_len = to_int(ctx, "min_segment_len", v); }}},
        {"detect.proposal_len", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.detect.proposal_len = to_int(ctx, "proposal_len", v); }}},
        {"detect.mode", {[](ExperimentConfig& c, Ctx ctx, Val v) {
             if (v == "sliding") c.detect.proposal_mode = false;
             else if (v == "proposal") c.detect.proposal_mode = true;
             else bad_value(ctx, "mode", v);
         }}},
        {"detect.batch_windows", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.detect.batch_windows = to_int(ctx, "batch_windows", v); }}},

        {"synth.classes", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.classes = static_cast<int>(to_int(ctx, "classes", v)); }}},
        {"synth.videos_per_split", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.videos_per_split = static_cast<int>(to_int(ctx, "videos_per_split", v)); }}},
        {"synth.strokes_per_video", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.strokes_per_video = static_cast<int>(to_int(ctx, "strokes_per_video", v)); }}},
        {"synth.width", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.width = to_int(ctx, "width", v); }}},
        {"synth.height", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.height = to_int(ctx, "height", v); }}},
        {"synth.min_stroke", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.min_stroke = to_int(ctx, "min_stroke", v); }}},
        {"synth.max_stroke", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.max_stroke = to_int(ctx, "max_stroke", v); }}},
        {"synth.min_gap", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.min_gap = to_int(ctx, "min_gap", v); }}},
        {"synth.max_gap", {[](ExperimentConfig& c, Ctx ctx, Val v) { c.synth.max_gap = to_int(ctx, "max_gap", v); }}},
    };
    return table;
}

void validate(const ExperimentConfig& cfg) {
    cfg.train_config().validate();
    cfg.detect.validate();
    if (cfg.input_channels < 1 || cfg.input_frames < 1 || cfg.input_height < 1 || cfg.input_width < 1) {
        throw ConfigError("config: non-positive model input dimension");
    }
    if (cfg.num_classes < 2) {
        throw ConfigError("config: num_classes must be >= 2");
    }
    if (cfg.negatives_per_video < 0) {
        throw ConfigError("config: negatives_per_video must be >= 0");
    }
    cfg.network_spec(); // arch + channel plan + pooling cascade
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::string ctx = origin + ":" + std::to_string(line_no);
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config: " + ctx + ": unterminated section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "model" && section != "train" && section != "detect" &&
                section != "synth") {
                throw ConfigError("config: " + ctx + ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: " + ctx + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) {
            throw ConfigError("config: " + ctx + ": key '" + key + "' outside any section");
        }
        const auto it = setters().find(section + "." + key);
        if (it == setters().end()) {
            throw ConfigError("config: " + ctx + ": unknown key '" + key + "' in section [" + section + "]");
        }
        it->second.set(cfg, ctx, value);
    }
    validate(cfg);
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("config: cannot open " + path.string());
    }
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), path.filename().string());
}

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string dump_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "seed = " << c.seed << "\n";
    os << "\n[model]\n";
    os << "arch = " << c.arch << "\n";
    os << "input_channels = " << c.input_channels << "\n";
    os << "input_frames = " << c.input_frames << "\n";
    os << "input_height = " << c.input_height << "\n";
    os << "input_width = " << c.input_width << "\n";
    os << "channels = ";
    for (std::size_t i = 0; i < c.channels.size(); ++i) {
        os << (i ? "," : "") << c.channels[i];
    }
    os << "\n";
    os << "hidden_fc = " << c.hidden_fc << "\n";
    os << "num_classes = " << c.num_classes << "\n";
    os << "spatial_pool_blocks = " << c.spatial_pool_blocks << "\n";
    os << "\n[train]\n";
    os << "epochs = " << c.train.epochs << "\n";
    os << "lr = " << num(c.train.lr) << "\n";
    os << "momentum = " << num(c.train.momentum) << "\n";
    os << "weight_decay = " << num(c.train.weight_decay) << "\n";
    os << "batch_size = " << c.train.batch_size << "\n";
    os << "plateau_patience = " << c.train.plateau_patience << "\n";
    os << "plateau_factor = " << num(c.train.plateau_factor) << "\n";
    os << "min_lr = " << num(c.train.min_lr) << "\n";
    os << "jitter = " << c.train.jitter << "\n";
    os << "augment = " << (c.train.augment ? "true" : "false") << "\n";
    os << "negatives_per_video = " << c.negatives_per_video << "\n";
    os << "\n[detect]\n";
    os << "fusion = " << fusion_name(c.detect.fusion) << "\n";
    os << "sigma = " << num(c.detect.sigma) << "\n";
    os << "decision = " << decision_name(c.detect.decision) << "\n";
    os << "negative_class = " << c.detect.negative_class << "\n";
    os << "min_segment_len = " << c.detect.min_segment_len << "\n";
    os << "proposal_len = " << c.detect.proposal_len << "\n";
    os << "mode = " << (c.detect.proposal_mode ? "proposal" : "sliding") << "\n";
    os << "batch_windows = " << c.detect.batch_windows << "\n";
    os << "\n[synth]\n";
    os << "classes = " << c.synth.classes << "\n";
    os << "videos_per_split = " << c.synth.videos_per_split << "\n";
    os << "strokes_per_video = " << c.synth.strokes_per_video << "\n";
    os << "width = " << c.synth.width << "\n";
    os << "height = " << c.synth.height << "\n";
    os << "min_stroke = " << c.synth.min_stroke << "\n";
    os << "max_stroke = " << c.synth.max_stroke << "\n";
    os << "min_gap = " << c.synth.min_gap << "\n";
    os << "max_gap = " << c.synth.max_gap << "\n";
    return os.str();
}

} // namespace stroke
