#include "beamfill/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "beamfill/errors.hpp"

namespace beamfill {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Pulls typed values out of a KeyValueFile, consuming recognized keys so
/// that whatever remains afterwards is by definition unknown.
class KeyReader {
   public:
    KeyReader(const KeyValueFile& kv, std::vector<std::string>* violations)
        : pending_(kv.values), violations_(violations) {}

    bool take(const std::string& key, std::string* out) {
        auto it = pending_.find(key);
        if (it == pending_.end()) return false;
        *out = it->second;
        pending_.erase(it);
        return true;
    }

    void get_string(const std::string& key, std::string* out) {
        std::string raw;
        if (take(key, &raw)) *out = raw;
    }

    void get_double(const std::string& key, double* out) {
        std::string raw;
        if (!take(key, &raw)) return;
        try {
            size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            *out = v;
        } catch (const std::exception&) {
            complain(key + ": not a number: '" + raw + "'");
        }
    }

    void get_size(const std::string& key, std::size_t* out) {
        std::string raw;
        if (!take(key, &raw)) return;
        try {
            size_t used = 0;
            const long long v = std::stoll(raw, &used);
            if (used != raw.size() || v < 0) throw std::invalid_argument(raw);
            *out = static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            complain(key + ": not a non-negative integer: '" + raw + "'");
        }
    }

    void get_int(const std::string& key, int* out) {
        std::string raw;
        if (!take(key, &raw)) return;
        try {
            size_t used = 0;
            const int v = std::stoi(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            *out = v;
        } catch (const std::exception&) {
            complain(key + ": not an integer: '" + raw + "'");
        }
    }

    void get_u64(const std::string& key, std::uint64_t* out) {
        std::string raw;
        if (!take(key, &raw)) return;
        try {
            size_t used = 0;
            const unsigned long long v = std::stoull(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            *out = v;
        } catch (const std::exception&) {
            complain(key + ": not a non-negative integer: '" + raw + "'");
        }
    }

    /// Comma list of exactly `n` doubles into out[0..n).
    void get_doubles(const std::string& key, double* out, size_t n) {
        std::string raw;
        if (!take(key, &raw)) return;
        const std::vector<std::string> items = split_list(raw);
        if (items.size() != n) {
            complain(key + ": expected " + std::to_string(n) +
                     " comma-separated values, got " +
                     std::to_string(items.size()));
            return;
        }
        for (size_t i = 0; i < n; ++i) {
            try {
                size_t used = 0;
                const double v = std::stod(items[i], &used);
                if (used != items[i].size())
                    throw std::invalid_argument(items[i]);
                out[i] = v;
            } catch (const std::exception&) {
                complain(key + ": not a number: '" + items[i] + "'");
                return;
            }
        }
    }

    void complain(const std::string& msg) {
        if (violations_) violations_->push_back(msg);
    }

    /// Everything not consumed is an unknown key.
    void finish() {
        for (const auto& [key, value] : pending_)
            complain(key + ": unknown key");
    }

   private:
    std::map<std::string, std::string> pending_;
    std::vector<std::string>* violations_;
};

void read_train(KeyReader& r, const std::string& section, TrainConfig* out) {
    r.get_int(section + ".epochs", &out->epochs);
    r.get_double(section + ".base_lr", &out->base_lr);
    r.get_double(section + ".decay_factor", &out->decay_factor);
    r.get_int(section + ".decay_epoch", &out->decay_epoch);
    r.get_int(section + ".batch_size", &out->batch_size);
}

void check_train(const TrainConfig& t, const std::string& section,
                 std::vector<std::string>* out) {
    if (t.epochs < 1) out->push_back(section + ".epochs: must be at least 1");
    if (!(t.base_lr > 0))
        out->push_back(section + ".base_lr: must be positive");
    if (!(t.decay_factor > 0) || t.decay_factor > 1)
        out->push_back(section + ".decay_factor: must be in (0, 1]");
    if (t.decay_epoch < 1 || t.decay_epoch > t.epochs)
        out->push_back(section + ".decay_epoch: must be in [1, epochs]");
    if (t.batch_size < 1)
        out->push_back(section + ".batch_size: must be at least 1");
}

}  // namespace

KeyValueFile parse_key_values(const std::string& text,
                              const std::string& origin) {
    KeyValueFile kv;
    std::string section;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = origin + ":" + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(where + ": empty section name");
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(where + ": empty key");
        if (section.empty())
            throw ConfigError(where + ": key '" + key +
                              "' appears before any [section]");
        const std::string full = section + "." + key;
        if (kv.values.count(full))
            throw ConfigError(where + ": duplicate key '" + full + "'");
        kv.values[full] = trim(line.substr(eq + 1));
    }
    return kv;
}

KeyValueFile load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_key_values(buf.str(), path);
}

DataSource parse_source(const std::string& name) {
    if (name == "synthetic") return DataSource::synthetic;
    if (name == "csv-velocity") return DataSource::csv_velocity;
    if (name == "csv-beams") return DataSource::csv_beams;
    throw ConfigError("unknown data source '" + name + "'");
}

std::string source_name(DataSource source) {
    switch (source) {
        case DataSource::synthetic: return "synthetic";
        case DataSource::csv_velocity: return "csv-velocity";
        case DataSource::csv_beams: return "csv-beams";
    }
    return "?";
}

ExperimentConfig make_config(const KeyValueFile& kv,
                             std::vector<std::string>* violations) {
    ExperimentConfig cfg;
    KeyReader r(kv, violations);

    std::string raw;
    if (r.take("dataset.source", &raw)) {
        try {
            cfg.source = parse_source(raw);
        } catch (const ConfigError& e) {
            r.complain(std::string("dataset.source: ") + e.what());
        }
    }
    r.get_string("dataset.csv_dir", &cfg.csv_dir);
    if (r.take("dataset.train_sections", &raw))
        cfg.train_sections = split_list(raw);
    if (r.take("dataset.test_sections", &raw))
        cfg.test_sections = split_list(raw);
    r.get_string("dataset.time_column", &cfg.schema.time);
    if (r.take("dataset.beam_columns", &raw)) {
        const std::vector<std::string> cols = split_list(raw);
        if (cols.size() != 4)
            r.complain("dataset.beam_columns: expected 4 names, got " +
                       std::to_string(cols.size()));
        else
            for (int i = 0; i < 4; ++i) cfg.schema.beams[i] = cols[i];
    }
    if (r.take("dataset.velocity_columns", &raw)) {
        const std::vector<std::string> cols = split_list(raw);
        if (cols.size() != 3)
            r.complain("dataset.velocity_columns: expected 3 names, got " +
                       std::to_string(cols.size()));
        else
            for (int i = 0; i < 3; ++i) cfg.schema.velocity[i] = cols[i];
    }
    if (r.take("dataset.delimiter", &raw)) {
        if (raw.size() != 1)
            r.complain("dataset.delimiter: expected a single character");
        else
            cfg.schema.delimiter = raw[0];
    }

    if (r.take("synthetic.profile", &raw)) {
        try {
            cfg.profile = parse_profile(raw);
        } catch (const Error& e) {
            r.complain(std::string("synthetic.profile: ") + e.what());
        }
    }
    r.get_size("synthetic.train_count", &cfg.train_count);
    r.get_size("synthetic.test_count", &cfg.test_count);
    r.get_double("synthetic.duration_s", &cfg.duration_s);

    r.get_double("geometry.alpha_deg", &cfg.alpha_deg);

    r.get_doubles("corruption.bias", cfg.corruption.bias.data(), 4);
    r.get_doubles("corruption.scale", cfg.corruption.scale.data(), 3);
    r.get_double("corruption.noise_std", &cfg.corruption.noise_std);

    r.get_size("window.n", &cfg.window_n);
    if (r.take("window.missing_beams", &raw)) {
        cfg.missing_mask = {false, false, false, false};
        for (const std::string& item : split_list(raw)) {
            if (item.size() == 1 && item[0] >= '1' && item[0] <= '4')
                cfg.missing_mask[item[0] - '1'] = true;
            else
                r.complain("window.missing_beams: beam ids are 1..4, got '" +
                           item + "'");
        }
    }

    if (r.take("estimators.run", &raw)) {
        cfg.run.clear();
        for (const std::string& item : split_list(raw)) {
            try {
                cfg.run.push_back(parse_estimator(item));
            } catch (const ConfigError& e) {
                r.complain(std::string("estimators.run: ") + e.what());
            }
        }
    }

    r.get_size("libeamsnet.fc1_width", &cfg.li_fc1);
    r.get_size("libeamsnet.fc2_width", &cfg.li_fc2);
    r.get_double("libeamsnet.dropout", &cfg.li_dropout);
    r.get_size("missbeamnet.hidden", &cfg.mb_hidden);

    // [train] holds the shared protocol; the per-network sections may
    // override any of its keys.
    TrainConfig shared;
    read_train(r, "train", &shared);
    cfg.li_train = shared;
    cfg.mb_train = shared;
    read_train(r, "libeamsnet", &cfg.li_train);
    read_train(r, "missbeamnet", &cfg.mb_train);

    r.get_u64("run.seed", &cfg.seed);
    r.get_string("run.out_dir", &cfg.out_dir);

    r.finish();
    return cfg;
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    namespace fs = std::filesystem;

    if (cfg.source == DataSource::synthetic) {
        if (cfg.train_count < 1)
            out.push_back("synthetic.train_count: must be at least 1");
        if (!(cfg.duration_s >= 10))
            out.push_back("synthetic.duration_s: must be at least 10 seconds");
    } else {
        if (cfg.csv_dir.empty()) {
            out.push_back("dataset.csv_dir: required for csv sources");
        } else if (!fs::is_directory(cfg.csv_dir)) {
            out.push_back("dataset.csv_dir: not a directory: '" + cfg.csv_dir +
                          "'");
        } else {
            for (const auto* role : {&cfg.train_sections, &cfg.test_sections})
                for (const std::string& name : *role) {
                    const fs::path p = fs::path(cfg.csv_dir) / (name + ".csv");
                    if (!fs::is_regular_file(p))
                        out.push_back("dataset: section file missing: '" +
                                      p.string() + "'");
                }
        }
        if (cfg.train_sections.empty())
            out.push_back(
                "dataset.train_sections: required for csv sources");
        std::set<std::string> seen;
        for (const auto* role : {&cfg.train_sections, &cfg.test_sections})
            for (const std::string& name : *role)
                if (!seen.insert(name).second)
                    out.push_back("dataset: section '" + name +
                                  "' assigned more than once");
    }

    if (!(cfg.alpha_deg > 0) || !(cfg.alpha_deg < 90))
        out.push_back("geometry.alpha_deg: must be in (0, 90)");

    for (double b : cfg.corruption.bias)
        if (!std::isfinite(b)) {
            out.push_back("corruption.bias: entries must be finite");
            break;
        }
    for (double s : cfg.corruption.scale)
        if (!std::isfinite(s) || s <= -1) {
            out.push_back(
                "corruption.scale: entries must be finite and > -1");
            break;
        }
    if (!std::isfinite(cfg.corruption.noise_std) || cfg.corruption.noise_std < 0)
        out.push_back("corruption.noise_std: must be >= 0");

    if (cfg.window_n < 2)
        out.push_back(
            "window.n: must be at least 2 (the convolution kernel spans "
            "2 steps)");
    if (mask_count(cfg.missing_mask) != 2)
        out.push_back("window.missing_beams: exactly 2 beams must be missing");

    if (cfg.run.empty())
        out.push_back("estimators.run: at least one estimator required");
    std::set<EstimatorTag> tags;
    for (EstimatorTag tag : cfg.run)
        if (!tags.insert(tag).second)
            out.push_back("estimators.run: '" + estimator_name(tag) +
                          "' listed twice");

    if (cfg.li_fc1 < 1)
        out.push_back("libeamsnet.fc1_width: must be at least 1");
    if (cfg.li_fc2 < 1)
        out.push_back("libeamsnet.fc2_width: must be at least 1");
    if (!(cfg.li_dropout >= 0) || cfg.li_dropout >= 1)
        out.push_back("libeamsnet.dropout: must be in [0, 1)");
    if (cfg.mb_hidden < 1)
        out.push_back("missbeamnet.hidden: must be at least 1");

    check_train(cfg.li_train, "libeamsnet", &out);
    check_train(cfg.mb_train, "missbeamnet", &out);

    if (cfg.out_dir.empty()) out.push_back("run.out_dir: must not be empty");
    return out;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "# resolved experiment configuration; re-running from this file\n"
           "# reproduces every numeric output bit for bit.\n"
           "# per-purpose seeds derive from run.seed: synth/corrupt are\n"
           "# indexed by section order, init/train by estimator id\n"
           "# (libeamsnet = 1, missbeamnet = 2).\n";
    out << "\n[dataset]\n";
    out << "source = " << source_name(cfg.source) << "\n";
    out << "csv_dir = " << cfg.csv_dir << "\n";
    auto join = [](const std::vector<std::string>& items) {
        std::string s;
        for (size_t i = 0; i < items.size(); ++i)
            s += (i ? "," : "") + items[i];
        return s;
    };
    out << "train_sections = " << join(cfg.train_sections) << "\n";
    out << "test_sections = " << join(cfg.test_sections) << "\n";
    out << "time_column = " << cfg.schema.time << "\n";
    out << "beam_columns = " << cfg.schema.beams[0] << "," << cfg.schema.beams[1]
        << "," << cfg.schema.beams[2] << "," << cfg.schema.beams[3] << "\n";
    out << "velocity_columns = " << cfg.schema.velocity[0] << ","
        << cfg.schema.velocity[1] << "," << cfg.schema.velocity[2] << "\n";
    out << "delimiter = " << cfg.schema.delimiter << "\n";

    out << "\n[synthetic]\n";
    const char* profile = cfg.profile == Profile::constant ? "constant"
                          : cfg.profile == Profile::turn   ? "turn"
                                                           : "sinusoidal-sway";
    out << "profile = " << profile << "\n";
    out << "train_count = " << cfg.train_count << "\n";
    out << "test_count = " << cfg.test_count << "\n";
    out << "duration_s = " << fmt_double(cfg.duration_s) << "\n";

    out << "\n[geometry]\n";
    out << "alpha_deg = " << fmt_double(cfg.alpha_deg) << "\n";

    out << "\n[corruption]\n";
    out << "bias = " << fmt_double(cfg.corruption.bias[0]) << ","
        << fmt_double(cfg.corruption.bias[1]) << ","
        << fmt_double(cfg.corruption.bias[2]) << ","
        << fmt_double(cfg.corruption.bias[3]) << "\n";
    out << "scale = " << fmt_double(cfg.corruption.scale[0]) << ","
        << fmt_double(cfg.corruption.scale[1]) << ","
        << fmt_double(cfg.corruption.scale[2]) << "\n";
    out << "noise_std = " << fmt_double(cfg.corruption.noise_std) << "\n";

    out << "\n[window]\n";
    out << "n = " << cfg.window_n << "\n";
    out << "missing_beams = ";
    bool first = true;
    for (int i = 0; i < 4; ++i)
        if (cfg.missing_mask[i]) {
            out << (first ? "" : ",") << (i + 1);
            first = false;
        }
    out << "\n";

    out << "\n[estimators]\n";
    out << "run = ";
    for (size_t i = 0; i < cfg.run.size(); ++i)
        out << (i ? "," : "") << estimator_name(cfg.run[i]);
    out << "\n";

    auto train_block = [&](const TrainConfig& t) {
        out << "epochs = " << t.epochs << "\n";
        out << "base_lr = " << fmt_double(t.base_lr) << "\n";
        out << "decay_factor = " << fmt_double(t.decay_factor) << "\n";
        out << "decay_epoch = " << t.decay_epoch << "\n";
        out << "batch_size = " << t.batch_size << "\n";
    };
    out << "\n[libeamsnet]\n";
    out << "fc1_width = " << cfg.li_fc1 << "\n";
    out << "fc2_width = " << cfg.li_fc2 << "\n";
    out << "dropout = " << fmt_double(cfg.li_dropout) << "\n";
    train_block(cfg.li_train);

    out << "\n[missbeamnet]\n";
    out << "hidden = " << cfg.mb_hidden << "\n";
    train_block(cfg.mb_train);

    out << "\n[run]\n";
    out << "seed = " << cfg.seed << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides,
                             std::vector<std::string>* violations) {
    KeyValueFile kv = load_key_values(path);
    for (const std::string& entry : overrides) {
        const size_t eq = entry.find('=');
        if (eq == std::string::npos || eq == 0) {
            if (violations)
                violations->push_back("override '" + entry +
                                      "': expected section.key=value");
            continue;
        }
        kv.values[trim(entry.substr(0, eq))] = trim(entry.substr(eq + 1));
    }
    return make_config(kv, violations);
}

}  // namespace beamfill
