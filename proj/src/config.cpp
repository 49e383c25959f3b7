#include "ddmodem/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace ddm {

namespace {

std::string trim(std::string_view s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    size_t b = s.find_last_not_of(" \t\r");
    return std::string(s.substr(a, b - a + 1));
}

struct Parser {
    std::string name;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
    }

    double num(const std::string& v) const {
        errno = 0;
        char* end = nullptr;
        double x = std::strtod(v.c_str(), &end);
        if (errno != 0 || end == v.c_str() || *end != '\0')
            fail("expected a number, got '" + v + "'");
        return x;
    }

    long long integer(const std::string& v) const {
        double x = num(v);
        auto i = static_cast<long long>(x);
        if (static_cast<double>(i) != x) fail("expected an integer, got '" + v + "'");
        return i;
    }

    uint64_t seed_value(const std::string& v) const {
        errno = 0;
        char* end = nullptr;
        unsigned long long x = std::strtoull(v.c_str(), &end, 0);
        if (errno != 0 || end == v.c_str() || *end != '\0')
            fail("expected an unsigned integer, got '" + v + "'");
        return x;
    }

    std::vector<std::string> list(const std::string& v) const {
        std::vector<std::string> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail("empty list element in '" + v + "'");
            out.push_back(item);
        }
        if (out.empty()) fail("expected a non-empty list");
        return out;
    }

    std::vector<double> num_list(const std::string& v) const {
        std::vector<double> out;
        for (auto& s : list(v)) out.push_back(num(s));
        return out;
    }

    std::vector<int> int_list(const std::string& v) const {
        std::vector<int> out;
        for (auto& s : list(v)) out.push_back(static_cast<int>(integer(s)));
        return out;
    }
};

void apply_channel_key(Parser& p, ChannelSpec& c, const std::string& key,
                       const std::string& value, bool scenario) {
    if (key == "ue_speed_mps") {
        c.ue_speed_mps = p.num(value);
    } else if (key == "num_paths") {
        c.num_paths = static_cast<int>(p.integer(value));
    } else if (key == "max_delay_grid") {
        c.max_delay_grid = static_cast<int>(p.integer(value));
    } else if (scenario) {
        p.fail("key '" + key + "' cannot be overridden per scenario");
    } else if (key == "carrier_freq_hz") {
        c.carrier_freq_hz = p.num(value);
    } else if (key == "subcarrier_spacing_hz") {
        c.subcarrier_spacing_hz = p.num(value);
    } else if (key == "num_subcarriers") {
        c.num_subcarriers = static_cast<int>(p.integer(value));
    } else if (key == "prefix_len") {
        c.prefix_len = static_cast<int>(p.integer(value));
    } else {
        p.fail("unknown key '" + key + "' in [channel]");
    }
}

void append_num(std::string& s, const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.17g;", key, v);
    s += buf;
}

void append_int(std::string& s, const char* key, long long v) {
    s += key;
    s += '=';
    s += std::to_string(v);
    s += ';';
}

void append_channel(std::string& s, const ChannelSpec& c) {
    append_num(s, "fc", c.carrier_freq_hz);
    append_num(s, "df", c.subcarrier_spacing_hz);
    append_int(s, "M", c.num_subcarriers);
    append_int(s, "Mp", c.prefix_len);
    append_num(s, "v", c.ue_speed_mps);
    append_int(s, "Np", c.num_paths);
    append_int(s, "lmax", c.max_delay_grid);
}

}  // namespace

void ExperimentConfig::validate() const {
    channel.validate();
    arch.validate();
    if (arch.num_subcarriers != channel.num_subcarriers ||
        arch.prefix_len != channel.prefix_len)
        throw ConfigError("network dimensions must match the channel frame");
    // The checkpoint prefix is derived from the output path at train time, so
    // a config declaring a cadence is complete without one.
    TrainConfig tc = train;
    if (tc.checkpoint_every > 0 && tc.checkpoint_prefix.empty()) tc.checkpoint_prefix = "ckpt";
    tc.validate(split_train);
    if (split_train < 2) throw ConfigError("train split needs at least 2 samples");
    if (split_val == 0) throw ConfigError("validation split must be non-empty");
    if (split_test == 0) throw ConfigError("test split must be non-empty");
    if (eval_snr_db.empty()) throw ConfigError("eval SNR grid must be non-empty");
    if (eval_alphabets.empty()) throw ConfigError("eval alphabet list must be non-empty");
    for (auto& a : eval_alphabets) Alphabet::from_name(a);
    if (ber.trials_per_channel <= 0)
        throw ConfigError("trials_per_channel must be positive");
    std::set<std::string> names;
    for (auto& sc : scenarios) {
        if (sc.name == "default" || !names.insert(sc.name).second)
            throw ConfigError("duplicate scenario name '" + sc.name + "'");
        sc.spec.validate();
    }
}

std::string ExperimentConfig::canonical_string() const {
    std::string s = "ddmodem.v1;";
    append_channel(s, channel);
    append_int(s, "kernel", arch.conv_kernel);
    s += "conv=";
    for (int c : arch.conv_channels) s += std::to_string(c) + ",";
    s += ";fc=";
    for (int c : arch.fc_widths) s += std::to_string(c) + ",";
    s += ";";
    append_num(s, "beta1", train.beta1);
    append_num(s, "beta2", train.beta2);
    append_num(s, "lr", train.lr);
    append_num(s, "adam_eps", train.adam_eps);
    append_int(s, "epochs", train.epochs);
    append_int(s, "batch", train.batch_size);
    append_num(s, "train_snr_db", train.train_snr_db);
    append_num(s, "alpha", train.alpha);
    append_num(s, "clip", train.grad_clip);
    append_int(s, "ckpt", train.checkpoint_every);
    append_int(s, "n_train", static_cast<long long>(split_train));
    append_int(s, "n_val", static_cast<long long>(split_val));
    append_int(s, "n_test", static_cast<long long>(split_test));
    s += "snr=";
    for (double v : eval_snr_db) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g,", v);
        s += buf;
    }
    s += ";alphabets=";
    for (auto& a : eval_alphabets) s += a + ",";
    s += ";";
    append_int(s, "trials", ber.trials_per_channel);
    append_int(s, "min_bits", static_cast<long long>(ber.min_bits));
    append_int(s, "target_errors", static_cast<long long>(ber.target_errors));
    for (auto& sc : scenarios) {
        s += "scenario." + sc.name + "{";
        append_channel(s, sc.spec);
        s += "}";
    }
    append_int(s, "seed", static_cast<long long>(seed));
    return s;
}

uint64_t ExperimentConfig::split_seed(const std::string& split) const {
    if (split == "train") return mix_seed(seed, SeedTag::split_train);
    if (split == "val") return mix_seed(seed, SeedTag::split_val);
    if (split == "test") return mix_seed(seed, SeedTag::split_test);
    throw ArgError("unknown split '" + split + "' (expected train, val, or test)");
}

uint64_t ExperimentConfig::scenario_seed(const std::string& name) const {
    if (name == "default") return split_seed("test");
    return mix_seed(seed, SeedTag::scenario, fnv1a64(name));
}

std::vector<Scenario> ExperimentConfig::all_scenarios() const {
    std::vector<Scenario> out;
    out.push_back({"default", channel});
    out.insert(out.end(), scenarios.begin(), scenarios.end());
    return out;
}

ExperimentConfig parse_config(const std::string& text, const std::string& name) {
    ExperimentConfig cfg;
    cfg.arch = ModNetArch();  // finalized after [channel]/[modnet] are read

    Parser p;
    p.name = name;
    std::string section;
    Scenario* scenario = nullptr;
    std::set<std::string> seen_keys;
    int fc_hidden = 0;
    int conv_kernel = 7;
    std::vector<int> conv_channels = {16, 16, 16};

    std::stringstream ss(text);
    std::string raw;
    while (std::getline(ss, raw)) {
        ++p.line;
        size_t hash = raw.find_first_of("#;");
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') p.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            scenario = nullptr;
            if (section.rfind("scenario.", 0) == 0) {
                std::string sc_name = trim(section.substr(9));
                if (sc_name.empty()) p.fail("scenario needs a name: [scenario.NAME]");
                cfg.scenarios.push_back({sc_name, cfg.channel});
                scenario = &cfg.scenarios.back();
            } else if (section != "channel" && section != "modnet" && section != "train" &&
                       section != "splits" && section != "eval" && section != "run") {
                p.fail("unknown section [" + section + "]");
            }
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) p.fail("expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) p.fail("empty key");
        if (value.empty()) p.fail("empty value for '" + key + "'");
        if (section.empty()) p.fail("key '" + key + "' outside any section");
        if (!seen_keys.insert(section + "/" + key).second)
            p.fail("duplicate key '" + key + "' in [" + section + "]");

        if (scenario) {
            apply_channel_key(p, scenario->spec, key, value, true);
        } else if (section == "channel") {
            if (!cfg.scenarios.empty())
                p.fail("[channel] keys must come before scenario sections");
            apply_channel_key(p, cfg.channel, key, value, false);
        } else if (section == "modnet") {
            if (key == "conv_kernel") conv_kernel = static_cast<int>(p.integer(value));
            else if (key == "conv_channels") conv_channels = p.int_list(value);
            else if (key == "fc_hidden") fc_hidden = static_cast<int>(p.integer(value));
            else p.fail("unknown key '" + key + "' in [modnet]");
        } else if (section == "train") {
            if (key == "epochs") cfg.train.epochs = static_cast<int>(p.integer(value));
            else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(p.integer(value));
            else if (key == "lr") cfg.train.lr = p.num(value);
            else if (key == "beta1") cfg.train.beta1 = p.num(value);
            else if (key == "beta2") cfg.train.beta2 = p.num(value);
            else if (key == "adam_eps") cfg.train.adam_eps = p.num(value);
            else if (key == "train_snr_db") cfg.train.train_snr_db = p.num(value);
            else if (key == "alpha") cfg.train.alpha = p.num(value);
            else if (key == "grad_clip") cfg.train.grad_clip = p.num(value);
            else if (key == "checkpoint_every")
                cfg.train.checkpoint_every = static_cast<int>(p.integer(value));
            else p.fail("unknown key '" + key + "' in [train]");
        } else if (section == "splits") {
            long long v = p.integer(value);
            if (v <= 0) p.fail("split sizes must be positive");
            if (key == "train") cfg.split_train = static_cast<size_t>(v);
            else if (key == "val") cfg.split_val = static_cast<size_t>(v);
            else if (key == "test") cfg.split_test = static_cast<size_t>(v);
            else p.fail("unknown key '" + key + "' in [splits]");
        } else if (section == "eval") {
            if (key == "snr_db") cfg.eval_snr_db = p.num_list(value);
            else if (key == "alphabets") cfg.eval_alphabets = p.list(value);
            else if (key == "trials_per_channel")
                cfg.ber.trials_per_channel = static_cast<int>(p.integer(value));
            else if (key == "min_bits")
                cfg.ber.min_bits = static_cast<uint64_t>(p.integer(value));
            else if (key == "target_errors")
                cfg.ber.target_errors = static_cast<uint64_t>(p.integer(value));
            else p.fail("unknown key '" + key + "' in [eval]");
        } else if (section == "run") {
            if (key == "seed") cfg.seed = p.seed_value(value);
            else p.fail("unknown key '" + key + "' in [run]");
        }
    }

    cfg.arch = ModNetArch::make(cfg.channel.num_subcarriers, cfg.channel.prefix_len);
    cfg.arch.conv_kernel = conv_kernel;
    cfg.arch.conv_channels = conv_channels;
    if (fc_hidden > 0)
        cfg.arch.fc_widths = {fc_hidden, fc_hidden, cfg.arch.output_count};
    cfg.train.seed = cfg.seed;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw ConfigError(name + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace ddm
