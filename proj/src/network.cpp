#include "stroke/network.hpp"

#include <sstream>

namespace stroke {

LayerSpec LayerSpec::conv(std::int64_t channels, std::array<std::int64_t, 3> kernel) {
    LayerSpec l;
    l.kind = Kind::conv;
    l.channels_out = channels;
    l.kernel = kernel;
    return l;
}

LayerSpec LayerSpec::pool(std::array<std::int64_t, 3> window) {
    LayerSpec l;
    l.kind = Kind::pool;
    l.window = window;
    return l;
}

LayerSpec LayerSpec::attention() {
    LayerSpec l;
    l.kind = Kind::attention;
    return l;
}

LayerSpec LayerSpec::flatten() {
    LayerSpec l;
    l.kind = Kind::flatten;
    return l;
}

LayerSpec LayerSpec::linear(std::int64_t features) {
    LayerSpec l;
    l.kind = Kind::linear;
    l.channels_out = features;
    return l;
}

namespace {

const std::vector<std::int64_t> kDefaultPlanV1{16, 32, 64, 128, 256, 256};
const std::vector<std::int64_t> kDefaultPlanV2{16, 32, 64, 128, 256};

void append_tail(NetworkSpec& spec) {
    spec.layers.push_back(LayerSpec::flatten());
    spec.layers.push_back(LayerSpec::linear(spec.hidden_fc));
    spec.layers.push_back(LayerSpec::linear(spec.num_classes));
}

} // namespace

NetworkSpec v1_spec(const BuildOptions& opt) {
    NetworkSpec spec;
    spec.name = "v1";
    spec.input_shape = opt.input_shape;
    spec.hidden_fc = opt.hidden_fc;
    spec.num_classes = opt.num_classes;
    const auto& plan = opt.channels.empty() ? kDefaultPlanV1 : opt.channels;
    const std::int64_t n = static_cast<std::int64_t>(plan.size());
    const std::int64_t attn_blocks = std::max<std::int64_t>(0, n - 2);
    for (std::int64_t i = 0; i < n; ++i) {
        spec.layers.push_back(LayerSpec::conv(plan[static_cast<std::size_t>(i)], {3, 3, 3}));
        if (i < opt.spatial_pool_blocks) {
            spec.layers.push_back(LayerSpec::pool({1, 2, 2}));
        } else {
            spec.layers.push_back(LayerSpec::pool({2, 2, 2}));
        }
        if (i < attn_blocks) {
            spec.layers.push_back(LayerSpec::attention());
        }
    }
    append_tail(spec);
    validate_spec(spec);
    return spec;
}

NetworkSpec v2_spec(const BuildOptions& opt) {
    NetworkSpec spec;
    spec.name = "v2";
    spec.input_shape = opt.input_shape;
    spec.hidden_fc = opt.hidden_fc;
    spec.num_classes = opt.num_classes;
    const auto& plan = opt.channels.empty() ? kDefaultPlanV2 : opt.channels;
    const std::int64_t n = static_cast<std::int64_t>(plan.size());
    for (std::int64_t i = 0; i < n; ++i) {
        if (i < 2) {
            spec.layers.push_back(LayerSpec::conv(plan[static_cast<std::size_t>(i)], {3, 5, 7}));
            spec.layers.push_back(LayerSpec::pool({2, 3, 4}));
        } else {
            spec.layers.push_back(LayerSpec::conv(plan[static_cast<std::size_t>(i)], {3, 3, 3}));
            spec.layers.push_back(LayerSpec::pool({2, 2, 2}));
        }
        spec.layers.push_back(LayerSpec::attention());
    }
    append_tail(spec);
    validate_spec(spec);
    return spec;
}

void validate_spec(const NetworkSpec& spec) {
    if (spec.num_classes < 2) {
        throw ConfigError("spec " + spec.name + ": num_classes must be >= 2, got " +
                          std::to_string(spec.num_classes));
    }
    if (spec.input_shape[0] < 1 || spec.input_shape[1] < 1 || spec.input_shape[2] < 1 || spec.input_shape[3] < 1) {
        throw ConfigError("spec " + spec.name + ": non-positive input dimension");
    }
    std::size_t flattens = 0;
    std::vector<std::int64_t> linear_sizes;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
        case LayerSpec::Kind::conv:
            if (l.channels_out < 1) {
                throw ConfigError("layer " + std::to_string(i) + ": conv needs positive channels");
            }
            for (const auto k : l.kernel) {
                if (k < 1 || k % 2 == 0) {
                    throw ConfigError("layer " + std::to_string(i) + ": conv kernel must be odd in every axis");
                }
            }
            break;
        case LayerSpec::Kind::pool:
            for (const auto w : l.window) {
                if (w < 1) {
                    throw ConfigError("layer " + std::to_string(i) + ": pool window must be >= 1 in every axis");
                }
            }
            break;
        case LayerSpec::Kind::flatten:
            ++flattens;
            break;
        case LayerSpec::Kind::linear:
            linear_sizes.push_back(l.channels_out);
            break;
        case LayerSpec::Kind::attention:
            break;
        }
    }
    if (flattens != 1 || linear_sizes.size() != 2) {
        throw ConfigError("spec " + spec.name + ": expected one flatten followed by two linear layers");
    }
    if (linear_sizes[0] != spec.hidden_fc || linear_sizes[1] != spec.num_classes) {
        throw ConfigError("spec " + spec.name + ": linear sizes disagree with hidden_fc/num_classes");
    }
    infer_shapes(spec); // throws on a collapsed dimension
}

std::vector<Shape> infer_shapes(const NetworkSpec& spec) {
    std::vector<Shape> out;
    out.reserve(spec.layers.size());
    Shape cur{spec.input_shape[0], spec.input_shape[1], spec.input_shape[2], spec.input_shape[3]};
    bool flat = false;
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
        case LayerSpec::Kind::conv:
            cur[0] = l.channels_out; // same padding keeps (T,H,W)
            break;
        case LayerSpec::Kind::pool:
            for (int a = 0; a < 3; ++a) {
                cur[static_cast<std::size_t>(a + 1)] /= l.window[static_cast<std::size_t>(a)];
                if (cur[static_cast<std::size_t>(a + 1)] < 1) {
                    throw ConfigError("layer " + std::to_string(i) + ": pool window (" +
                                      std::to_string(l.window[0]) + "," + std::to_string(l.window[1]) + "," +
                                      std::to_string(l.window[2]) + ") collapses the feature map to zero");
                }
            }
            break;
        case LayerSpec::Kind::attention:
            break;
        case LayerSpec::Kind::flatten:
            cur = Shape{numel(cur)};
            flat = true;
            break;
        case LayerSpec::Kind::linear:
            if (!flat) {
                throw ConfigError("layer " + std::to_string(i) + ": linear before flatten");
            }
            cur = Shape{l.channels_out};
            break;
        }
        out.push_back(cur);
    }
    return out;
}

namespace {

const char* kind_name(LayerSpec::Kind k) {
    switch (k) {
    case LayerSpec::Kind::conv: return "conv";
    case LayerSpec::Kind::pool: return "pool";
    case LayerSpec::Kind::attention: return "attention";
    case LayerSpec::Kind::flatten: return "flatten";
    case LayerSpec::Kind::linear: return "linear";
    }
    return "?";
}

} // namespace

std::string shape_table(const NetworkSpec& spec) {
    const std::vector<Shape> shapes = infer_shapes(spec);
    std::ostringstream os;
    os << "model " << spec.name << "  input (C,T,H,W)=(" << spec.input_shape[0] << "," << spec.input_shape[1]
       << "," << spec.input_shape[2] << "," << spec.input_shape[3] << ")\n";
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        os << "  " << i << "\t" << kind_name(l.kind);
        if (l.kind == LayerSpec::Kind::conv) {
            os << " " << l.channels_out << " k=(" << l.kernel[0] << "," << l.kernel[1] << "," << l.kernel[2] << ")";
        } else if (l.kind == LayerSpec::Kind::pool) {
            os << " w=(" << l.window[0] << "," << l.window[1] << "," << l.window[2] << ")";
        } else if (l.kind == LayerSpec::Kind::linear) {
            os << " " << l.channels_out;
        }
        os << "\t-> " << shape_str(shapes[i]) << "\n";
    }
    os << "  parameters: " << count_params(spec) << "\n";
    return os.str();
}

std::int64_t count_params(const NetworkSpec& spec) {
    std::int64_t total = 0;
    std::int64_t channels = spec.input_shape[0];
    std::int64_t features = -1;
    const std::vector<Shape> shapes = infer_shapes(spec);
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        switch (l.kind) {
        case LayerSpec::Kind::conv:
            total += l.channels_out * channels * l.kernel[0] * l.kernel[1] * l.kernel[2] + l.channels_out;
            channels = l.channels_out;
            break;
        case LayerSpec::Kind::attention:
            total += channels + 1;
            break;
        case LayerSpec::Kind::flatten:
            features = numel(shapes[i]);
            break;
        case LayerSpec::Kind::linear:
            total += l.channels_out * features + l.channels_out;
            features = l.channels_out;
            break;
        case LayerSpec::Kind::pool:
            break;
        }
    }
    return total;
}

std::string spec_to_text(const NetworkSpec& spec) {
    std::ostringstream os;
    os << "name=" << spec.name << "\n";
    os << "input=" << spec.input_shape[0] << "," << spec.input_shape[1] << "," << spec.input_shape[2] << ","
       << spec.input_shape[3] << "\n";
    os << "hidden_fc=" << spec.hidden_fc << "\n";
    os << "num_classes=" << spec.num_classes << "\n";
    os << "layers=";
    for (std::size_t i = 0; i < spec.layers.size(); ++i) {
        const LayerSpec& l = spec.layers[i];
        if (i != 0) {
            os << "|";
        }
        switch (l.kind) {
        case LayerSpec::Kind::conv:
            os << "conv:" << l.channels_out << ":" << l.kernel[0] << "," << l.kernel[1] << "," << l.kernel[2];
            break;
        case LayerSpec::Kind::pool:
            os << "pool:" << l.window[0] << "," << l.window[1] << "," << l.window[2];
            break;
        case LayerSpec::Kind::attention:
            os << "attention";
            break;
        case LayerSpec::Kind::flatten:
            os << "flatten";
            break;
        case LayerSpec::Kind::linear:
            os << "linear:" << l.channels_out;
            break;
        }
    }
    os << "\n";
    return os.str();
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) {
            throw std::invalid_argument(s);
        }
        return v;
    } catch (const std::exception&) {
        throw FormatError("spec: bad integer '" + s + "' in " + what);
    }
}

std::array<std::int64_t, 3> parse_triple(const std::string& s, const std::string& what) {
    const auto parts = split_on(s, ',');
    if (parts.size() != 3) {
        throw FormatError("spec: expected three comma-separated values in " + what + ", got '" + s + "'");
    }
    return {parse_int(parts[0], what), parse_int(parts[1], what), parse_int(parts[2], what)};
}

} // namespace

NetworkSpec spec_from_text(const std::string& text) {
    NetworkSpec spec;
    bool saw_layers = false;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError("spec: expected key=value, got '" + line + "'");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "name") {
            spec.name = value;
        } else if (key == "input") {
            const auto parts = split_on(value, ',');
            if (parts.size() != 4) {
                throw FormatError("spec: input needs four values, got '" + value + "'");
            }
            for (std::size_t i = 0; i < 4; ++i) {
                spec.input_shape[i] = parse_int(parts[i], "input");
            }
        } else if (key == "hidden_fc") {
            spec.hidden_fc = parse_int(value, "hidden_fc");
        } else if (key == "num_classes") {
            spec.num_classes = parse_int(value, "num_classes");
        } else if (key == "layers") {
            saw_layers = true;
            spec.layers.clear();
            for (const std::string& item : split_on(value, '|')) {
                const auto fields = split_on(item, ':');
                if (fields[0] == "conv" && fields.size() == 3) {
                    spec.layers.push_back(
                        LayerSpec::conv(parse_int(fields[1], "conv"), parse_triple(fields[2], "conv kernel")));
                } else if (fields[0] == "pool" && fields.size() == 2) {
                    spec.layers.push_back(LayerSpec::pool(parse_triple(fields[1], "pool window")));
                } else if (fields[0] == "attention" && fields.size() == 1) {
                    spec.layers.push_back(LayerSpec::attention());
                } else if (fields[0] == "flatten" && fields.size() == 1) {
                    spec.layers.push_back(LayerSpec::flatten());
                } else if (fields[0] == "linear" && fields.size() == 2) {
                    spec.layers.push_back(LayerSpec::linear(parse_int(fields[1], "linear")));
                } else {
                    throw FormatError("spec: unknown layer '" + item + "'");
                }
            }
        } else {
            throw FormatError("spec: unknown key '" + key + "'");
        }
    }
    if (spec.name.empty() || !saw_layers) {
        throw FormatError("spec: missing name or layers");
    }
    try {
        validate_spec(spec);
    } catch (const ConfigError& e) {
        throw FormatError(std::string("spec: ") + e.what());
    }
    return spec;
}

} // namespace stroke
