#include "lotenet/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "lotenet/errors.hpp"

namespace lotenet {
namespace {

std::string trim(const std::string& s) {
    const auto from = s.find_first_not_of(" \t\r\n");
    if (from == std::string::npos) return "";
    const auto to = s.find_last_not_of(" \t\r\n");
    return s.substr(from, to - from + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || end != value.data() + value.size()) bad_value(key, value);
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) bad_value(key, value);
        return out;
    } catch (const std::logic_error&) {
        bad_value(key, value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(key, value);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ",";
        out += items[i];
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

}  // namespace

void apply_config_key(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "precision") {
        if (value != "narrow" && value != "wide") bad_value(key, value);
        c.precision = value;
    } else if (key == "seed") {
        c.seed = parse_uint(key, value);
    } else if (key == "height") {
        c.model.height = parse_uint(key, value);
    } else if (key == "width") {
        c.model.width = parse_uint(key, value);
    } else if (key == "channels") {
        c.model.channels = parse_uint(key, value);
    } else if (key == "classes") {
        c.model.classes = parse_uint(key, value);
    } else if (key == "layers") {
        c.model.layers = parse_uint(key, value);
    } else if (key == "kernel") {
        c.model.kernel = parse_uint(key, value);
    } else if (key == "bond_dim") {
        c.model.bond_dim = parse_uint(key, value);
    } else if (key == "out_dim") {
        c.model.out_dim = parse_uint(key, value);
    } else if (key == "shared_weights") {
        c.model.shared_weights = parse_bool(key, value);
    } else if (key == "learning_rate") {
        c.learning_rate = parse_double(key, value);
    } else if (key == "batch_size") {
        c.batch_size = parse_uint(key, value);
    } else if (key == "patience") {
        c.patience = parse_uint(key, value);
    } else if (key == "max_epochs") {
        c.max_epochs = parse_uint(key, value);
    } else if (key == "split") {
        c.split.clear();
        for (const auto& item : split_list(value)) c.split.push_back(parse_double(key, item));
    } else if (key == "augment") {
        c.augment = parse_bool(key, value);
    } else if (key == "data_images") {
        c.data_images = value;
    } else if (key == "data_labels") {
        c.data_labels = value;
    } else if (key == "data_dir") {
        c.data_dir = value;
    } else if (key == "data_csv") {
        c.data_csv = value;
    } else if (key == "out_dir") {
        c.out_dir = value;
    } else if (key == "synth_count") {
        c.synth_count = parse_uint(key, value);
    } else if (key == "synth_size") {
        c.synth_size = parse_uint(key, value);
    } else if (key == "sweep_betas") {
        c.sweep_betas.clear();
        for (const auto& item : split_list(value))
            c.sweep_betas.push_back(parse_uint(key, item));
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string entry = trim(line);
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + entry + "'");
        apply_config_key(config, trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
    }
    return config;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config_text(text.str(), path);
}

std::string serialize_run_config(const RunConfig& c) {
    std::ostringstream out;
    out << "precision = " << c.precision << "\n";
    out << "seed = " << c.seed << "\n";
    out << "height = " << c.model.height << "\n";
    out << "width = " << c.model.width << "\n";
    out << "channels = " << c.model.channels << "\n";
    out << "classes = " << c.model.classes << "\n";
    out << "layers = " << c.model.layers << "\n";
    out << "kernel = " << c.model.kernel << "\n";
    out << "bond_dim = " << c.model.bond_dim << "\n";
    out << "out_dim = " << c.model.out_dim << "\n";
    out << "shared_weights = " << (c.model.shared_weights ? "true" : "false") << "\n";
    out << "learning_rate = " << fmt(c.learning_rate) << "\n";
    out << "batch_size = " << c.batch_size << "\n";
    out << "patience = " << c.patience << "\n";
    out << "max_epochs = " << c.max_epochs << "\n";
    std::vector<std::string> split_items;
    for (double f : c.split) split_items.push_back(fmt(f));
    out << "split = " << join(split_items) << "\n";
    out << "augment = " << (c.augment ? "true" : "false") << "\n";
    out << "data_images = " << c.data_images << "\n";
    out << "data_labels = " << c.data_labels << "\n";
    out << "data_dir = " << c.data_dir << "\n";
    out << "data_csv = " << c.data_csv << "\n";
    out << "out_dir = " << c.out_dir << "\n";
    out << "synth_count = " << c.synth_count << "\n";
    out << "synth_size = " << c.synth_size << "\n";
    std::vector<std::string> beta_items;
    for (std::size_t b : c.sweep_betas) beta_items.push_back(std::to_string(b));
    out << "sweep_betas = " << join(beta_items) << "\n";
    return out.str();
}

}  // namespace lotenet
