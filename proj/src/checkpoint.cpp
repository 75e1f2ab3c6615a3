#include "stroke/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace stroke {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) {
        throw FormatError(std::string("checkpoint: truncated while reading ") + what);
    }
    return v;
}

} // namespace

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("checkpoint: cannot open " + path.string() + " for writing");
    }
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    const std::string spec = spec_to_text(model.spec) + "seed=" + std::to_string(model.rng_seed) + "\n";
    write_pod(os, static_cast<std::uint32_t>(spec.size()));
    os.write(spec.data(), static_cast<std::streamsize>(spec.size()));
    for (const Param& p : model.params) {
        os.write(reinterpret_cast<const char*>(p.value.ptr()),
                 static_cast<std::streamsize>(p.value.size() * sizeof(float)));
    }
    if (!os) {
        throw IoError("checkpoint: write failed for " + path.string());
    }
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("checkpoint: cannot open " + path.string());
    }
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("checkpoint: bad magic in " + path.string());
    }
    const auto version = read_pod<std::uint16_t>(is, "version");
    if (version != kVersion) {
        throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    }
    const auto spec_len = read_pod<std::uint32_t>(is, "spec length");
    std::string spec_text(spec_len, '\0');
    is.read(spec_text.data(), static_cast<std::streamsize>(spec_len));
    if (!is) {
        throw FormatError("checkpoint: truncated spec text");
    }

    // The seed rides along as an extra key=value line in the spec text.
    std::uint64_t seed = 0;
    std::string spec_only;
    {
        std::istringstream lines(spec_text);
        std::string line;
        while (std::getline(lines, line)) {
            if (line.rfind("seed=", 0) == 0) {
                try {
                    seed = std::stoull(line.substr(5));
                } catch (const std::exception&) {
                    throw FormatError("checkpoint: bad seed line '" + line + "'");
                }
            } else if (!line.empty()) {
                spec_only += line;
                spec_only += '\n';
            }
        }
    }
    const NetworkSpec spec = spec_from_text(spec_only);
    Model model = build_model<float>(spec, 0);
    model.rng_seed = seed;
    for (Param& p : model.params) {
        is.read(reinterpret_cast<char*>(p.value.ptr()), static_cast<std::streamsize>(p.value.size() * sizeof(float)));
        if (!is) {
            throw FormatError("checkpoint: truncated parameter payload");
        }
        p.velocity.fill(0.0f);
        p.grad.fill(0.0f);
    }
    char extra;
    if (is.read(&extra, 1)) {
        throw FormatError("checkpoint: trailing bytes after parameters");
    }
    return model;
}

Model load_checkpoint(const std::filesystem::path& path, const NetworkSpec& expected) {
    Model model = load_checkpoint(path);
    if (!(model.spec == expected)) {
        throw FormatError("checkpoint: spec mismatch, file holds '" + model.spec.name + "' but '" +
                          expected.name + "' was expected");
    }
    return model;
}

} // namespace stroke
