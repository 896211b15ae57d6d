#include "lunet/checkpoint.hpp"

#include <bit>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "lunet/errors.hpp"

namespace lunet {

namespace {

constexpr char kMagic[] = "LUNET1\n";
constexpr std::size_t kMagicLen = 7;

void write_f64_le(std::ostream& out, double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& in, const std::string& path) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw TruncatedFile(path + ": checkpoint ends mid-parameter at offset " +
                            std::to_string(static_cast<long long>(in.tellg())));
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

}  // namespace

void save_checkpoint(const std::string& path, const LUNet& net, const CheckpointMeta& meta) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);

    out.write(kMagic, kMagicLen);

    std::ostringstream header;
    header << "format_version=" << meta.format_version << " M=" << net.depth()
           << " D=" << net.dim() << " alpha=" << format_double(meta.alpha)
           << " gamma=" << format_double(meta.gamma) << " init_seed=" << meta.init_seed
           << " acts=";
    for (int m = 0; m < net.depth(); ++m) {
        if (m > 0) header << ',';
        header << (net.layer(m).act.is_identity() ? "identity" : "leaky_softplus");
    }
    header << '\n';
    const std::string header_str = header.str();
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

    for (int m = 0; m < net.depth(); ++m) {
        const LULayer& layer = net.layer(m);
        for (double v : layer.u.packed()) write_f64_le(out, v);
        for (double v : layer.l.packed()) write_f64_le(out, v);
        for (double v : layer.b) write_f64_le(out, v);
    }
    out.flush();
    if (!out) throw IoError("checkpoint write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);

    char magic[kMagicLen];
    if (!in.read(magic, kMagicLen)) throw TruncatedFile(path + ": shorter than the magic bytes");
    if (std::memcmp(magic, kMagic, kMagicLen) != 0) {
        throw BadMagic(path + ": not a LUNET1 checkpoint");
    }

    std::string header;
    if (!std::getline(in, header)) throw TruncatedFile(path + ": missing header line");

    CheckpointMeta meta;
    int depth = -1;
    int dim = -1;
    std::vector<std::string> act_tokens;
    for (const auto& token : split(header, ' ')) {
        if (token.empty()) continue;
        const std::size_t eq = token.find('=');
        if (eq == std::string::npos) throw BadMagic(path + ": malformed header token '" + token + "'");
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        try {
            if (key == "format_version") {
                meta.format_version = std::stoi(value);
            } else if (key == "M") {
                depth = std::stoi(value);
            } else if (key == "D") {
                dim = std::stoi(value);
            } else if (key == "alpha") {
                meta.alpha = std::stod(value);
            } else if (key == "gamma") {
                meta.gamma = std::stod(value);
            } else if (key == "init_seed") {
                meta.init_seed = std::stoull(value);
            } else if (key == "acts") {
                act_tokens = split(value, ',');
            } else {
                throw BadMagic(path + ": unknown header key '" + key + "'");
            }
        } catch (const std::invalid_argument&) {
            throw BadMagic(path + ": unparsable header value '" + token + "'");
        } catch (const std::out_of_range&) {
            throw BadMagic(path + ": header value out of range '" + token + "'");
        }
    }
    if (meta.format_version != 1) {
        throw BadMagic(path + ": unsupported format_version " +
                       std::to_string(meta.format_version));
    }
    if (depth < 1 || dim < 1) throw BadMagic(path + ": header missing M or D");
    if (static_cast<int>(act_tokens.size()) != depth) {
        throw DimMismatch(path + ": header lists " + std::to_string(act_tokens.size()) +
                          " activation kinds for M=" + std::to_string(depth));
    }

    std::vector<LULayer> layers;
    layers.reserve(depth);
    for (const auto& token : act_tokens) {
        if (token == "identity") {
            layers.emplace_back(dim, ActivationKind::identity());
        } else if (token == "leaky_softplus") {
            layers.emplace_back(dim, ActivationKind::leaky_softplus(meta.alpha));
        } else {
            throw BadMagic(path + ": unknown activation kind '" + token + "'");
        }
    }

    for (auto& layer : layers) {
        for (auto& v : layer.u.packed()) v = read_f64_le(in, path);
        for (auto& v : layer.l.packed()) v = read_f64_le(in, path);
        for (auto& v : layer.b) v = read_f64_le(in, path);
    }

    char extra;
    if (in.read(&extra, 1)) throw BadMagic(path + ": trailing bytes after parameters");

    return LoadedCheckpoint{LUNet(std::move(layers)), meta};
}

}  // namespace lunet
