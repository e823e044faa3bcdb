// lexsig command-line driver.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "lexsig/config.hpp"
#include "lexsig/error.hpp"
#include "lexsig/pipeline.hpp"
#include "lexsig/synthetic.hpp"

namespace {

using lexsig::Config;
using lexsig::Error;
using lexsig::ErrorCode;

struct Common {
    std::string config;
    std::string output_dir;
    std::optional<std::int64_t> seed;
    std::optional<double> epsilon;
    bool quiet = false;
};

// `--section.key value` and `--section.key=value` pairs left over by CLI11.
void apply_overrides(Config& cfg, const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const auto& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.find('.') == std::string::npos)
            throw Error(ErrorCode::usage, "unexpected argument '" + arg + "'");
        auto eq = arg.find('=');
        if (eq != std::string::npos) {
            cfg.set_literal(arg.substr(2, eq - 2), arg.substr(eq + 1));
            continue;
        }
        if (i + 1 >= extras.size()) throw Error(ErrorCode::usage, "missing value for '" + arg + "'");
        cfg.set_literal(arg.substr(2), extras[++i]);
    }
}

Config build_config(const Common& c, const std::vector<std::string>& extras) {
    if (c.config.empty()) throw Error(ErrorCode::usage, "--config is required");
    Config cfg = Config::load(c.config);
    apply_overrides(cfg, extras);
    if (!c.output_dir.empty()) {
        lexsig::ConfigValue v;
        v.text = std::filesystem::absolute(c.output_dir).string();
        cfg.set("output.dir", v);
    }
    if (c.seed) cfg.set_literal("run.seeds", "[" + std::to_string(*c.seed) + "]");
    if (c.epsilon) {
        lexsig::ConfigValue v;
        v.kind = lexsig::ConfigValue::Kind::real;
        v.real = *c.epsilon;
        cfg.set("aoa.epsilon", v);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lexsig: distributional signatures of word learning"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", common.config, "run config (TOML-style)")->required();
        sub->add_option("--output-dir", common.output_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", common.seed, "run a single training seed (overrides run.seeds)");
        sub->add_option("--epsilon", common.epsilon, "default AoA epsilon (overrides aoa.epsilon)");
        sub->add_flag("-q,--quiet", common.quiet, "only log warnings");
        sub->allow_extras();
        sub->footer("Any config key can be overridden with --section.key VALUE.");
    };

    struct StageCmd {
        const char* name;
        const char* help;
        void (*run)(const Config&);
    };
    const StageCmd stages[] = {
        {"sample", "sample positive, negative and marginal contexts", lexsig::run_sample},
        {"score", "score every sampled context at every checkpoint", lexsig::run_score},
        {"signatures", "estimate signatures per word, checkpoint and seed", lexsig::run_signatures},
        {"aoa", "smooth trajectories and extract AoA", lexsig::run_aoa},
        {"analyze", "correlations, regressions and report figures", lexsig::run_analyze},
        {"run", "all stages in order", lexsig::run_all},
    };
    std::vector<std::pair<CLI::App*, const StageCmd*>> subs;
    for (const auto& s : stages) {
        auto* sub = app.add_subcommand(s.name, s.help);
        add_common(sub);
        subs.emplace_back(sub, &s);
    }

    lexsig::SyntheticOptions synth;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "write the synthetic corpus and fixtures");
    synth_cmd->add_option("-o,--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--vocab", synth.vocab_size, "vocabulary size")->capture_default_str();
    synth_cmd->add_option("--utterances", synth.utterances, "number of utterances")->capture_default_str();
    synth_cmd->add_option("--test-utterances", synth.test_utterances, "held-out utterances")->capture_default_str();
    synth_cmd->add_option("--targets", synth.targets, "number of target words")->capture_default_str();
    synth_cmd->add_option("--zipf", synth.zipf_exponent, "Zipf exponent")->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (synth_cmd->parsed()) {
            lexsig::write_synthetic(lexsig::generate_synthetic(synth), synth_out);
            return 0;
        }
        for (auto [sub, stage] : subs) {
            if (!sub->parsed()) continue;
            spdlog::set_level(common.quiet ? spdlog::level::warn : spdlog::level::info);
            const Config cfg = build_config(common, sub->remaining());
            stage->run(cfg);
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "lexsig: " << e.what() << '\n';
        return lexsig::exit_status(e.code());
    } catch (const std::exception& e) {
        std::cerr << "lexsig: " << e.what() << '\n';
        return 2;
    }
}
