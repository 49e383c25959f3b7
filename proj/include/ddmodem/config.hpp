#pragma once

#include <string>
#include <vector>

#include "ddmodem/channel.hpp"
#include "ddmodem/linksim.hpp"
#include "ddmodem/modnet.hpp"
#include "ddmodem/training.hpp"

namespace ddm {

// A named evaluation scenario: the base channel spec with mobility/path
// statistics overridden (generalization runs), plus its resolved spec.
struct Scenario {
    std::string name;
    ChannelSpec spec;
};

struct ExperimentConfig {
    ChannelSpec channel;
    ModNetArch arch;
    TrainConfig train;
    size_t split_train = 10000;
    size_t split_val = 2000;
    size_t split_test = 20000;
    std::vector<double> eval_snr_db = {0, 5, 10, 15, 20, 25, 30};
    std::vector<std::string> eval_alphabets = {"QPSK", "16QAM"};
    BerOptions ber;
    std::vector<Scenario> scenarios;  // extra scenarios; "default" is implicit
    uint64_t seed = 0;

    void validate() const;

    // Canonical text rendering of every resolved field; its FNV hash stamps
    // all artifacts so mismatched runs are detectable.
    std::string canonical_string() const;
    uint64_t hash() const { return fnv1a64(canonical_string()); }

    // Deterministic per-split dataset seeds.
    uint64_t split_seed(const std::string& split) const;     // train | val | test
    uint64_t scenario_seed(const std::string& name) const;   // test channels per scenario

    // "default" scenario plus the configured overrides, in file order.
    std::vector<Scenario> all_scenarios() const;
};

// Parses the INI-style config. Unknown sections/keys and malformed values
// are ConfigErrors carrying file:line positions.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& name);

}  // namespace ddm
