#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddmodem/commands.hpp"

namespace {

int error_exit_code(const ddm::Error& e) {
    const std::string& cls = e.cls();
    if (cls == "args" || cls == "config") return 2;
    if (cls == "io") return 3;
    if (cls == "format") return 4;
    if (cls == "math") return 5;
    if (cls == "train") return 6;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delay-Doppler matrix modem toolkit"};
    app.require_subcommand(1);

    ddm::GenerateArgs gen;
    auto* c_gen = app.add_subcommand("generate-data", "sample a channel dataset split");
    c_gen->add_option("--config", gen.config, "experiment config file")->required();
    c_gen->add_option("--split", gen.split, "train, val, or test")->required();
    c_gen->add_option("--out", gen.out, "output dataset file")->required();

    ddm::TrainArgs train;
    auto* c_train = app.add_subcommand("train", "run a training phase");
    c_train->add_option("--config", train.config, "experiment config file")->required();
    c_train->add_option("--phase", train.phase, "1 or 2")->required();
    c_train->add_option("--in-params", train.in_params, "starting parameter file");
    c_train->add_option("--out-params", train.out_params, "output parameter file")->required();
    c_train->add_flag("--allow-hash-mismatch", train.allow_hash_mismatch,
                      "accept artifacts stamped by a different config");

    ddm::DistillArgs distill;
    auto* c_distill = app.add_subcommand("distill", "fuse per-channel outputs into one modem");
    c_distill->add_option("--config", distill.config, "experiment config file")->required();
    c_distill->add_option("--params", distill.params, "trained parameter file")->required();
    c_distill->add_option("--val-data", distill.val_data, "validation dataset file")->required();
    c_distill->add_option("--out-modem", distill.out_modem, "output modem file")->required();
    c_distill->add_flag("--allow-hash-mismatch", distill.allow_hash_mismatch,
                        "accept artifacts stamped by a different config");

    ddm::EvaluateArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "rate or BER curves over test channels");
    c_eval->add_option("--config", eval.config, "experiment config file")->required();
    c_eval->add_option("--modem", eval.modem, "modem file to evaluate")->required();
    c_eval->add_option("--metric", eval.metric, "ber or rate")->required();
    c_eval->add_option("--out", eval.out, "output CSV")->required();
    c_eval->add_flag("--baseline-ofdm", eval.baseline_ofdm,
                     "also evaluate the OFDM baseline on the same channels and seeds");
    c_eval->add_flag("--allow-hash-mismatch", eval.allow_hash_mismatch,
                     "accept artifacts stamped by a different config");

    ddm::ExportArgs exp;
    auto* c_exp = app.add_subcommand("export-waveforms", "dump modulator columns as CSV");
    c_exp->add_option("--modem", exp.modem, "modem file")->required();
    c_exp->add_option("--columns", exp.columns, "sub-channel indices")
        ->required()
        ->delimiter(',');
    c_exp->add_option("--out", exp.out, "output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_gen->parsed()) ddm::cmd_generate_data(gen);
        else if (c_train->parsed()) ddm::cmd_train(train);
        else if (c_distill->parsed()) ddm::cmd_distill(distill);
        else if (c_eval->parsed()) ddm::cmd_evaluate(eval);
        else if (c_exp->parsed()) ddm::cmd_export_waveforms(exp);
    } catch (const ddm::Error& e) {
        std::fprintf(stderr, "error[%s]: %s\n", e.cls().c_str(), e.what());
        return error_exit_code(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error[internal]: %s\n", e.what());
        return 1;
    }
    return 0;
}
