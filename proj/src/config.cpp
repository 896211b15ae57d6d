#include "lunet/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "lunet/errors.hpp"

namespace lunet {

namespace {

std::string trim(const std::string& text) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
    return text.substr(begin, end - begin);
}

int parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int result = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const std::uint64_t result = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + value + "'");
    }
}

double parse_double(const std::string& value, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double result = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return result;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
    }
}

// "x,y; x,y; ..." pairs.
std::vector<std::array<double, 2>> parse_centers(const std::string& value, const std::string& key) {
    std::vector<std::array<double, 2>> centers;
    std::stringstream stream(value);
    std::string pair;
    while (std::getline(stream, pair, ';')) {
        pair = trim(pair);
        if (pair.empty()) continue;
        const std::size_t comma = pair.find(',');
        if (comma == std::string::npos) {
            throw ConfigError("key '" + key + "': center '" + pair + "' is not 'x,y'");
        }
        centers.push_back({parse_double(trim(pair.substr(0, comma)), key),
                           parse_double(trim(pair.substr(comma + 1)), key)});
    }
    if (centers.empty()) throw ConfigError("key '" + key + "': no centers given");
    return centers;
}

void apply_model_key(ExperimentConfig::Model& model, const std::string& key,
                     const std::string& value) {
    if (key == "layers") {
        model.layers = parse_int(value, key);
    } else if (key == "dim") {
        model.dim = parse_int(value, key);
    } else if (key == "alpha") {
        model.alpha = parse_double(value, key);
    } else if (key == "init") {
        if (value == "gaussian") {
            model.init = InitScheme::gaussian;
        } else if (value == "zeros") {
            model.init = InitScheme::zeros;
        } else if (value == "uniform") {
            model.init = InitScheme::uniform;
        } else {
            throw ConfigError("model.init must be gaussian, zeros or uniform, got '" + value +
                              "'");
        }
    } else if (key == "seed") {
        model.seed = parse_u64(value, key);
    } else {
        throw ConfigError("unknown key 'model." + key + "'");
    }
}

void apply_train_key(TrainConfig& train, const std::string& key, const std::string& value) {
    if (key == "epochs") {
        train.epochs = parse_int(value, key);
    } else if (key == "batch_size") {
        train.batch_size = parse_int(value, key);
    } else if (key == "lr0") {
        train.lr0 = parse_double(value, key);
    } else if (key == "lr_decay") {
        train.lr_decay = parse_double(value, key);
    } else if (key == "decay_every") {
        train.decay_every = parse_int(value, key);
    } else if (key == "momentum") {
        train.momentum = parse_double(value, key);
    } else if (key == "clip_kind") {
        if (value == "euclidean") {
            train.clip_kind = ClipKind::euclidean;
        } else if (value == "max_abs") {
            train.clip_kind = ClipKind::max_abs;
        } else if (value == "clamp") {
            train.clip_kind = ClipKind::clamp;
        } else {
            throw ConfigError("train.clip_kind must be euclidean, max_abs or clamp, got '" +
                              value + "'");
        }
    } else if (key == "clip_threshold") {
        train.clip_threshold = parse_double(value, key);
    } else if (key == "gamma") {
        train.gamma = parse_double(value, key);
    } else if (key == "seed") {
        train.seed = parse_u64(value, key);
    } else if (key == "threads") {
        train.threads = parse_int(value, key);
    } else {
        throw ConfigError("unknown key 'train." + key + "'");
    }
}

void apply_data_key(ExperimentConfig::Data& data, const std::string& key,
                    const std::string& value) {
    if (key == "kind") {
        if (value == "mixture") {
            data.kind = ExperimentConfig::DataKind::mixture;
        } else if (value == "idx") {
            data.kind = ExperimentConfig::DataKind::idx;
        } else if (value == "blobs") {
            data.kind = ExperimentConfig::DataKind::blobs;
        } else {
            throw ConfigError("data.kind must be mixture, idx or blobs, got '" + value + "'");
        }
    } else if (key == "centers") {
        data.mixture.centers = parse_centers(value, key);
    } else if (key == "sigma") {
        data.mixture.sigma = parse_double(value, key);
    } else if (key == "n_total") {
        data.mixture.n_total = parse_int(value, key);
    } else if (key == "train_fraction") {
        data.mixture.train_fraction = parse_double(value, key);
    } else if (key == "seed") {
        data.mixture.seed = parse_u64(value, key);
    } else if (key == "images") {
        data.images = value;
    } else if (key == "labels") {
        data.labels = value;
    } else if (key == "test_images") {
        data.test_images = value;
    } else if (key == "test_labels") {
        data.test_labels = value;
    } else if (key == "class") {
        data.class_filter = parse_int(value, key);
    } else if (key == "noise_seed") {
        data.pipeline.noise_seed = parse_u64(value, key);
    } else if (key == "clamp_eps") {
        data.pipeline.clamp_eps = parse_double(value, key);
    } else if (key == "scale") {
        data.pipeline.scale_denominator = parse_double(value, key);
    } else if (key == "blob_count") {
        data.blob_count = parse_int(value, key);
    } else if (key == "blob_test_count") {
        data.blob_test_count = parse_int(value, key);
    } else {
        throw ConfigError("unknown key 'data." + key + "'");
    }
}

void apply_output_key(ExperimentConfig::Output& output, const std::string& key,
                      const std::string& value) {
    if (key == "dir") {
        output.dir = value;
    } else if (key == "emit") {
        output.emit_metrics = false;
        output.emit_checkpoint = false;
        output.emit_data_csv = false;
        std::stringstream stream(value);
        std::string token;
        while (stream >> token) {
            if (token == "metrics") {
                output.emit_metrics = true;
            } else if (token == "checkpoint") {
                output.emit_checkpoint = true;
            } else if (token == "data") {
                output.emit_data_csv = true;
            } else {
                throw ConfigError("output.emit: unknown token '" + token + "'");
            }
        }
    } else {
        throw ConfigError("unknown key 'output." + key + "'");
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    if (model.layers < 2) throw ConfigError("model.layers must be >= 2");
    if (model.dim < 1) throw ConfigError("model.dim must be >= 1");
    if (!(model.alpha > 0.0 && model.alpha < 1.0)) {
        throw ConfigError("model.alpha must lie strictly in (0, 1)");
    }
    train.validate();
    switch (data.kind) {
        case DataKind::mixture:
            data.mixture.validate();
            if (model.dim != 2) throw ConfigError("mixture data requires model.dim = 2");
            break;
        case DataKind::idx:
            if (data.images.empty() || data.labels.empty()) {
                throw ConfigError("data.kind=idx requires data.images and data.labels");
            }
            break;
        case DataKind::blobs:
            if (data.blob_count < 1) throw ConfigError("data.blob_count must be >= 1");
            if (data.blob_test_count < 0) throw ConfigError("data.blob_test_count must be >= 0");
            break;
    }
    if (data.kind != DataKind::mixture) {
        if (model.dim != 784) throw ConfigError("image data requires model.dim = 784");
        if (data.class_filter < -1 || data.class_filter > 9) {
            throw ConfigError("data.class must be -1 (all) or in [0, 9]");
        }
        if (!(data.pipeline.clamp_eps > 0.0 && data.pipeline.clamp_eps < 0.5)) {
            throw ConfigError("data.clamp_eps must lie in (0, 0.5)");
        }
        if (!(data.pipeline.scale_denominator > 1.0)) {
            throw ConfigError("data.scale must be > 1");
        }
    }
    if (output.dir.empty()) throw ConfigError("output.dir must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    ExperimentConfig config;
    std::istringstream stream(text);
    std::string line;
    std::string section;
    int line_number = 0;
    while (std::getline(stream, line)) {
        ++line_number;
        const std::size_t comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = origin + ":" + std::to_string(line_number);
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "train" && section != "data" &&
                section != "output") {
                throw ConfigError(where + ": unknown section '" + section + "'");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (section.empty()) throw ConfigError(where + ": key before any [section]");

        try {
            if (section == "model") {
                apply_model_key(config.model, key, value);
            } else if (section == "train") {
                apply_train_key(config.train, key, value);
            } else if (section == "data") {
                apply_data_key(config.data, key, value);
            } else {
                apply_output_key(config.output, key, value);
            }
        } catch (const ConfigError& err) {
            throw ConfigError(where + ": " + err.what());
        }
    }
    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), path);
}

std::string format_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out.precision(17);
    out << "[model]\n";
    out << "layers = " << config.model.layers << '\n';
    out << "dim = " << config.model.dim << '\n';
    out << "alpha = " << config.model.alpha << '\n';
    const char* init = config.model.init == InitScheme::gaussian ? "gaussian"
                       : config.model.init == InitScheme::zeros  ? "zeros"
                                                                 : "uniform";
    out << "init = " << init << '\n';
    out << "seed = " << config.model.seed << '\n';

    out << "\n[train]\n";
    out << "epochs = " << config.train.epochs << '\n';
    out << "batch_size = " << config.train.batch_size << '\n';
    out << "lr0 = " << config.train.lr0 << '\n';
    out << "lr_decay = " << config.train.lr_decay << '\n';
    out << "decay_every = " << config.train.decay_every << '\n';
    out << "momentum = " << config.train.momentum << '\n';
    const char* clip = config.train.clip_kind == ClipKind::euclidean ? "euclidean"
                       : config.train.clip_kind == ClipKind::max_abs ? "max_abs"
                                                                     : "clamp";
    out << "clip_kind = " << clip << '\n';
    out << "clip_threshold = " << config.train.clip_threshold << '\n';
    out << "gamma = " << config.train.gamma << '\n';
    out << "seed = " << config.train.seed << '\n';
    out << "threads = " << config.train.threads << '\n';

    out << "\n[data]\n";
    switch (config.data.kind) {
        case ExperimentConfig::DataKind::mixture: {
            out << "kind = mixture\n";
            out << "centers = ";
            for (std::size_t i = 0; i < config.data.mixture.centers.size(); ++i) {
                if (i > 0) out << "; ";
                out << config.data.mixture.centers[i][0] << ',' << config.data.mixture.centers[i][1];
            }
            out << '\n';
            out << "sigma = " << config.data.mixture.sigma << '\n';
            out << "n_total = " << config.data.mixture.n_total << '\n';
            out << "train_fraction = " << config.data.mixture.train_fraction << '\n';
            out << "seed = " << config.data.mixture.seed << '\n';
            break;
        }
        case ExperimentConfig::DataKind::idx:
            out << "kind = idx\n";
            out << "images = " << config.data.images << '\n';
            out << "labels = " << config.data.labels << '\n';
            if (!config.data.test_images.empty()) {
                out << "test_images = " << config.data.test_images << '\n';
                out << "test_labels = " << config.data.test_labels << '\n';
            }
            break;
        case ExperimentConfig::DataKind::blobs:
            out << "kind = blobs\n";
            out << "blob_count = " << config.data.blob_count << '\n';
            out << "blob_test_count = " << config.data.blob_test_count << '\n';
            out << "seed = " << config.data.mixture.seed << '\n';
            break;
    }
    if (config.data.kind != ExperimentConfig::DataKind::mixture) {
        out << "class = " << config.data.class_filter << '\n';
        out << "noise_seed = " << config.data.pipeline.noise_seed << '\n';
        out << "clamp_eps = " << config.data.pipeline.clamp_eps << '\n';
        out << "scale = " << config.data.pipeline.scale_denominator << '\n';
    }

    out << "\n[output]\n";
    out << "dir = " << config.output.dir << '\n';
    out << "emit =";
    if (config.output.emit_metrics) out << " metrics";
    if (config.output.emit_checkpoint) out << " checkpoint";
    if (config.output.emit_data_csv) out << " data";
    out << '\n';
    return out.str();
}

void write_config_file(const std::string& path, const ExperimentConfig& config) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << format_config(config);
    if (!out.flush()) throw IoError("write failed: " + path);
}

}  // namespace lunet
