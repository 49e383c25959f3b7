#pragma once

#include <string>
#include <vector>

#include "ddmodem/config.hpp"

namespace ddm {

// The CLI subcommands as plain functions, so tests can drive the exact same
// pipeline in-process.

struct GenerateArgs {
    std::string config;
    std::string split;  // train | val | test
    std::string out;
};
void cmd_generate_data(const GenerateArgs& args);

struct TrainArgs {
    std::string config;
    int phase = 0;  // 1 | 2
    std::string in_params;   // required for phase 2
    std::string out_params;
    bool allow_hash_mismatch = false;
};
void cmd_train(const TrainArgs& args);

struct DistillArgs {
    std::string config;
    std::string params;
    std::string val_data;
    std::string out_modem;
    bool allow_hash_mismatch = false;
};
void cmd_distill(const DistillArgs& args);

struct EvaluateArgs {
    std::string config;
    std::string modem;
    std::string metric;  // ber | rate
    std::string out;
    bool baseline_ofdm = false;
    bool allow_hash_mismatch = false;
};
void cmd_evaluate(const EvaluateArgs& args);

struct ExportArgs {
    std::string modem;
    std::vector<int> columns;
    std::string out;
};
void cmd_export_waveforms(const ExportArgs& args);

}  // namespace ddm
