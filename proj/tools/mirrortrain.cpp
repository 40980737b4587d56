#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mirrortrain/config.hpp"
#include "mirrortrain/log.hpp"
#include "mirrortrain/runner.hpp"
#include "mirrortrain/session_io.hpp"

namespace {

using mirrortrain::ExperimentConfig;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<int> jobs;
    std::optional<int> channel_subset;
    bool no_postprocess = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_decoder_flags) {
    cmd->add_option("--config", flags.config_path, "experiment config JSON");
    cmd->add_option("--seed", flags.seed, "master seed override");
    cmd->add_option("--out", flags.out, "output directory (default: config output_dir)");
    cmd->add_option("--jobs", flags.jobs, "worker threads across participants");
    if (with_decoder_flags) {
        cmd->add_option("--channel-subset", flags.channel_subset,
                        "keep only the k best-correlated feature channels");
        cmd->add_flag("--no-postprocess", flags.no_postprocess,
                      "disable deadband/clamp post-processing");
    }
}

ExperimentConfig resolve_config(const CommonFlags& flags) {
    ExperimentConfig config = flags.config_path.empty()
                                  ? mirrortrain::default_config()
                                  : mirrortrain::load_config(flags.config_path);
    if (flags.seed) config.master_seed = *flags.seed;
    if (flags.jobs) config.jobs = *flags.jobs;
    if (flags.channel_subset) config.decoder.channel_subset = *flags.channel_subset;
    if (flags.no_postprocess) config.decoder.post.enabled = false;
    if (!flags.out.empty()) config.output_dir = flags.out;
    config.validate();
    return config;
}

// Decoder/labeling settings for analyze/decode come from --config when given,
// otherwise from the echo the cohort was simulated with.
ExperimentConfig cohort_config(const CommonFlags& flags, const std::string& cohort) {
    if (!flags.config_path.empty()) return resolve_config(flags);
    const auto dirs = mirrortrain::list_session_dirs(cohort);
    const auto session = mirrortrain::read_session(dirs.front());
    ExperimentConfig config =
        mirrortrain::parse_config(nlohmann::ordered_json::parse(session.config_echo));
    if (flags.jobs) config.jobs = *flags.jobs;
    if (flags.channel_subset) config.decoder.channel_subset = *flags.channel_subset;
    if (flags.no_postprocess) config.decoder.post.enabled = false;
    config.validate();
    return config;
}

void print_error(const std::string& category, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = {{"category", category}, {"message", message}};
    std::fputs((j.dump() + "\n").c_str(), stderr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mirrored vs mimicked training comparison toolkit"};
    app.require_subcommand(1);

    CommonFlags sim_flags, analyze_flags, decode_flags, full_flags;
    std::string analyze_cohort_dir, decode_cohort_dir;

    auto* sim = app.add_subcommand("simulate", "generate a synthetic cohort");
    add_common(sim, sim_flags, false);

    auto* analyze = app.add_subcommand("analyze", "kinematic metrics and figures 2-3");
    analyze->add_option("cohort", analyze_cohort_dir, "cohort directory from simulate")
        ->required();
    add_common(analyze, analyze_flags, false);

    auto* decode = app.add_subcommand("decode", "train and score decoders, figure 4");
    decode->add_option("cohort", decode_cohort_dir, "cohort directory from simulate")->required();
    add_common(decode, decode_flags, true);

    auto* full = app.add_subcommand("full", "simulate + analyze + decode + combined report");
    add_common(full, full_flags, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("cli", e.what());
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (sim->parsed()) {
            const ExperimentConfig config = resolve_config(sim_flags);
            mirrortrain::cmd_simulate(config, config.output_dir);
        } else if (analyze->parsed()) {
            const std::string out =
                analyze_flags.out.empty() ? analyze_cohort_dir : analyze_flags.out;
            mirrortrain::cmd_analyze(analyze_cohort_dir, out);
        } else if (decode->parsed()) {
            const ExperimentConfig config = cohort_config(decode_flags, decode_cohort_dir);
            const std::string out = decode_flags.out.empty() ? decode_cohort_dir : decode_flags.out;
            mirrortrain::cmd_decode(decode_cohort_dir, out, config.decoder, config.labeling,
                                    config.jobs);
        } else if (full->parsed()) {
            const ExperimentConfig config = resolve_config(full_flags);
            mirrortrain::cmd_full(config, config.output_dir);
        }
        return 0;
    } catch (const mirrortrain::Error& e) {
        print_error(e.category(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
}
