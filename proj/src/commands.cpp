#include "ddmodem/commands.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "ddmodem/linksim.hpp"

namespace ddm {

namespace {

void check_stamp(const Stamp& stamp, const ExperimentConfig& cfg, const std::string& what,
                 bool allow_mismatch) {
    if (stamp.config_hash == 0) return;  // unstamped artifact, nothing to check
    if (stamp.config_hash == cfg.hash()) return;
    std::string msg = what + " was produced under a different config (hash " +
                      hex16(stamp.config_hash) + ", current " + hex16(cfg.hash()) + ")";
    if (!allow_mismatch) throw ConfigError(msg + "; pass --allow-hash-mismatch to override");
    std::fprintf(stderr, "warning: %s (continuing, mismatch allowed)\n", msg.c_str());
}

size_t split_count(const ExperimentConfig& cfg, const std::string& split) {
    if (split == "train") return cfg.split_train;
    if (split == "val") return cfg.split_val;
    if (split == "test") return cfg.split_test;
    throw ArgError("unknown split '" + split + "' (expected train, val, or test)");
}

Dataset regen_split(const ExperimentConfig& cfg, const std::string& split) {
    return generate_dataset(cfg.channel, split_count(cfg, split), cfg.split_seed(split));
}

}  // namespace

void cmd_generate_data(const GenerateArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    Dataset ds = regen_split(cfg, args.split);
    save_dataset(args.out, ds, Stamp{cfg.hash(), cfg.split_seed(args.split)});
}

void cmd_train(const TrainArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    if (args.phase != 1 && args.phase != 2)
        throw ArgError("train: --phase must be 1 or 2");

    ModNetParams params = [&] {
        if (!args.in_params.empty()) {
            Stamp stamp;
            ModNetParams p = load_params(args.in_params, &stamp);
            check_stamp(stamp, cfg, args.in_params, args.allow_hash_mismatch);
            if (!(p.arch == cfg.arch))
                throw ConfigError(args.in_params +
                                  ": parameter architecture does not match the config");
            return p;
        }
        if (args.phase == 2)
            throw ArgError("train: phase 2 refines the phase-1 network; pass --in-params "
                           "with the phase-1 parameter file");
        return init_modnet(cfg.arch, cfg.seed);
    }();

    Dataset train_set = regen_split(cfg, "train");
    TrainConfig tc = cfg.train;
    tc.metrics_path = args.out_params + ".metrics";
    if (tc.checkpoint_every > 0) tc.checkpoint_prefix = args.out_params + ".ckpt";

    if (args.phase == 1) {
        train_phase1(params, train_set, tc);
    } else {
        PairedDataset pairs = pair_dataset(train_set, cfg.seed);
        train_phase2(params, pairs, tc);
    }
    save_params(args.out_params, params, Stamp{cfg.hash(), cfg.seed});
}

void cmd_distill(const DistillArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    Stamp pstamp;
    ModNetParams params = load_params(args.params, &pstamp);
    check_stamp(pstamp, cfg, args.params, args.allow_hash_mismatch);
    if (!(params.arch == cfg.arch))
        throw ConfigError(args.params + ": parameter architecture does not match the config");

    Stamp dstamp;
    Dataset val = load_dataset(args.val_data, &dstamp);
    check_stamp(dstamp, cfg, args.val_data, args.allow_hash_mismatch);
    if (val.spec.frame_len() != params.arch.input_side)
        throw ConfigError(args.val_data + ": dataset frame length does not match the network");

    Modem modem = distill_phase3(params, val);
    save_modem(args.out_modem, modem, Stamp{cfg.hash(), cfg.seed});
}

void cmd_evaluate(const EvaluateArgs& args) {
    ExperimentConfig cfg = load_config(args.config);
    if (args.metric != "ber" && args.metric != "rate")
        throw ArgError("evaluate: --metric must be 'ber' or 'rate'");
    Stamp mstamp;
    Modem modem = load_modem(args.modem, &mstamp);
    check_stamp(mstamp, cfg, args.modem, args.allow_hash_mismatch);
    if (modem.num_subcarriers() != cfg.channel.num_subcarriers ||
        modem.frame_len() != cfg.channel.frame_len())
        throw ConfigError(args.modem + ": modem dimensions do not match the config");

    Modem ofdm = make_ofdm_modem(cfg.channel.num_subcarriers, cfg.channel.prefix_len);

    EvalReport all;
    for (const Scenario& sc : cfg.all_scenarios()) {
        uint64_t seed = cfg.scenario_seed(sc.name);
        Dataset test = generate_dataset(sc.spec, cfg.split_test, seed);
        auto add = [&](EvalReport r) {
            all.rows.insert(all.rows.end(), std::make_move_iterator(r.rows.begin()),
                            std::make_move_iterator(r.rows.end()));
        };
        if (args.metric == "rate") {
            add(rate_curve(modem, test, cfg.eval_snr_db, sc.name, "modem", seed));
            if (args.baseline_ofdm)
                add(rate_curve(ofdm, test, cfg.eval_snr_db, sc.name, "ofdm", seed));
        } else {
            for (const std::string& aname : cfg.eval_alphabets) {
                Alphabet a = Alphabet::from_name(aname);
                std::string metric_tag = "ber_" + a.name;
                for (auto& c : metric_tag) c = static_cast<char>(std::tolower(c));
                auto tag_rows = [&](EvalReport r) {
                    for (auto& row : r.rows) row.metric = metric_tag;
                    add(std::move(r));
                };
                tag_rows(ber_curve(modem, test, cfg.eval_snr_db, a, cfg.ber, seed, sc.name,
                                   "modem"));
                if (args.baseline_ofdm)
                    tag_rows(ber_curve(ofdm, test, cfg.eval_snr_db, a, cfg.ber, seed, sc.name,
                                       "ofdm"));
            }
        }
    }
    write_eval_csv(args.out, all);
}

void cmd_export_waveforms(const ExportArgs& args) {
    Modem modem = load_modem(args.modem);
    if (args.columns.empty()) throw ArgError("export-waveforms: no columns requested");
    for (int c : args.columns)
        if (c < 0 || c >= modem.num_subcarriers())
            throw ArgError("export-waveforms: column " + std::to_string(c) +
                           " out of range [0, " + std::to_string(modem.num_subcarriers() - 1) +
                           "]");
    std::ofstream f(args.out);
    if (!f) throw IoError("cannot open for writing: " + args.out);
    f << "n";
    for (int c : args.columns) f << ",re_" << c << ",im_" << c;
    f << '\n';
    const int Mp = modem.prefix_len();
    char buf[64];
    for (int v = 0; v < modem.frame_len(); ++v) {
        f << (v - Mp);
        for (int c : args.columns) {
            std::snprintf(buf, sizeof buf, ",%.17g,%.17g", modem.mod(v, c).real(),
                          modem.mod(v, c).imag());
            f << buf;
        }
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + args.out);
}

}  // namespace ddm
