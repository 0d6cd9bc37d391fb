#include "cghc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cghc/errors.hpp"

namespace cghc {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": " + v);
    }
}

long parse_long(const std::string& v, const std::string& key) {
    try {
        size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing junk");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer value for " + key + ": " + v);
    }
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean value for " + key + ": " + v);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void apply_config_override(ExperimentConfig& cfg, const std::string& key,
                           const std::string& value) {
    const std::string k = trim(key);
    const std::string v = trim(value);

    if (k == "wavelength_m") cfg.wavelength = parse_double(v, k);
    else if (k == "pitch_m") cfg.pitch = parse_double(v, k);
    else if (k == "distances_m") {
        cfg.distances.clear();
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ','))
            cfg.distances.push_back(parse_double(trim(item), k));
        if (cfg.distances.empty())
            throw std::invalid_argument("config: distances_m must list at least one value");
    }
    else if (k == "hologram_size") cfg.hologram_size = static_cast<int>(parse_long(v, k));
    else if (k == "object_size") cfg.object_size = static_cast<int>(parse_long(v, k));
    else if (k == "jpeg_quality") cfg.jpeg_quality = static_cast<int>(parse_long(v, k));
    else if (k == "scan_mode") {
        if (v == "unidirectional") cfg.scan_mode = ScanMode::unidirectional;
        else if (v == "bidirectional") cfg.scan_mode = ScanMode::bidirectional;
        else throw std::invalid_argument("config: scan_mode must be unidirectional|bidirectional");
    }
    else if (k == "learning_rate") cfg.learning_rate = parse_double(v, k);
    else if (k == "momentum") cfg.momentum = parse_double(v, k);
    else if (k == "batch_size") cfg.batch_size = static_cast<int>(parse_long(v, k));
    else if (k == "iterations") cfg.iterations = static_cast<int>(parse_long(v, k));
    else if (k == "patch_stride") cfg.patch_stride = static_cast<int>(parse_long(v, k));
    else if (k == "augment") cfg.augment = parse_bool(v, k);
    else if (k == "val_size") cfg.val_size = static_cast<int>(parse_long(v, k));
    else if (k == "val_interval") cfg.val_interval = static_cast<int>(parse_long(v, k));
    else if (k == "arcnn_c1") cfg.arcnn_c1 = static_cast<int>(parse_long(v, k));
    else if (k == "arcnn_c2") cfg.arcnn_c2 = static_cast<int>(parse_long(v, k));
    else if (k == "arcnn_c3") cfg.arcnn_c3 = static_cast<int>(parse_long(v, k));
    else if (k == "init_std") cfg.init_std = parse_double(v, k);
    else if (k == "init_std_last") cfg.init_std_last = parse_double(v, k);
    else if (k == "identity_init") cfg.identity_init = parse_bool(v, k);
    else if (k == "seed") cfg.seed = static_cast<uint64_t>(parse_long(v, k));
    else if (k == "desk_scale") cfg.desk_scale = parse_bool(v, k);
    else if (k == "train_dir") cfg.train_dir = v;
    else if (k == "test_dir") cfg.test_dir = v;
    else if (k == "out_dir") cfg.out_dir = v;
    else throw std::invalid_argument("config: unknown key: " + k);
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError("config: line " + std::to_string(lineno) +
                              " is not key = value: " + path);
        apply_config_override(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
    return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "wavelength_m = " << fmt(cfg.wavelength) << '\n';
    os << "pitch_m = " << fmt(cfg.pitch) << '\n';
    os << "distances_m = ";
    for (size_t i = 0; i < cfg.distances.size(); ++i)
        os << (i ? "," : "") << fmt(cfg.distances[i]);
    os << '\n';
    os << "hologram_size = " << cfg.hologram_size << '\n';
    os << "object_size = " << cfg.object_size << '\n';
    os << "jpeg_quality = " << cfg.jpeg_quality << '\n';
    os << "scan_mode = "
       << (cfg.scan_mode == ScanMode::bidirectional ? "bidirectional" : "unidirectional")
       << '\n';
    os << "learning_rate = " << fmt(cfg.learning_rate) << '\n';
    os << "momentum = " << fmt(cfg.momentum) << '\n';
    os << "batch_size = " << cfg.batch_size << '\n';
    os << "iterations = " << cfg.iterations << '\n';
    os << "patch_stride = " << cfg.patch_stride << '\n';
    os << "augment = " << (cfg.augment ? 1 : 0) << '\n';
    os << "val_size = " << cfg.val_size << '\n';
    os << "val_interval = " << cfg.val_interval << '\n';
    os << "arcnn_c1 = " << cfg.arcnn_c1 << '\n';
    os << "arcnn_c2 = " << cfg.arcnn_c2 << '\n';
    os << "arcnn_c3 = " << cfg.arcnn_c3 << '\n';
    os << "init_std = " << fmt(cfg.init_std) << '\n';
    os << "init_std_last = " << fmt(cfg.init_std_last) << '\n';
    os << "identity_init = " << (cfg.identity_init ? 1 : 0) << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "desk_scale = " << (cfg.desk_scale ? 1 : 0) << '\n';
    return os.str();
}

void check_config(const ExperimentConfig& cfg) {
    if (!(cfg.wavelength > 0) || !(cfg.pitch > 0))
        throw std::invalid_argument("config: wavelength and pitch must be positive");
    if (cfg.distances.empty())
        throw std::invalid_argument("config: at least one distance required");
    for (double z : cfg.distances)
        if (!(z > 0)) throw std::invalid_argument("config: distances must be positive");
    if (cfg.hologram_px() < cfg.object_px())
        throw std::invalid_argument("config: hologram size must cover the object");
    if (cfg.object_px() < 32 || cfg.hologram_px() < 64)
        throw std::invalid_argument("config: sizes too small (need object >= 32, hologram >= 64)");
    if (cfg.jpeg_quality < 1 || cfg.jpeg_quality > 100)
        throw std::invalid_argument("config: jpeg_quality must be in [1,100]");
    if (cfg.patch_stride < 1)
        throw std::invalid_argument("config: patch_stride must be >= 1");
}

} // namespace cghc
