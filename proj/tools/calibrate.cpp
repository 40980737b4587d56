// Developer tool: Monte-Carlo check of the tuned simulator defaults against
// their target percentages, and emitter for data/default_params.json.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mirrortrain/config.hpp"
#include "mirrortrain/runner.hpp"
#include "mirrortrain/stats.hpp"

using namespace mirrortrain;

namespace {

struct Targets {
    double coupling = 11.43;
    double drift = 7.07;
    double magnitude_mimicked = 12.89;
    double magnitude_mirrored = 6.67;
    double timing_mimicked = 0.08;
    double timing_mirrored = 0.03;
    double timing_sd_mimicked = 0.05;
    double timing_sd_mirrored = 0.06;
    double stream_rmse_mimicked = 0.19;
    double stream_rmse_mirrored = 0.16;
};

std::vector<SessionDataset> simulate_cohort(const ExperimentConfig& config) {
    std::vector<SessionDataset> sessions;
    sessions.reserve(static_cast<size_t>(config.cohort_size));
    for (int i = 1; i <= config.cohort_size; ++i)
        sessions.push_back(simulate_participant(config, i).session);
    return sessions;
}

double entry_mean(const CohortReport& report, const std::string& metric) {
    for (const auto& e : report.entries)
        if (e.metric == metric) return e.mean;
    throw Error("domain", "missing report entry " + metric);
}

double entry_p(const CohortReport& report, const std::string& metric) {
    for (const auto& e : report.entries)
        if (e.metric == metric) return e.test ? e.test->p : 1.0;
    throw Error("domain", "missing report entry " + metric);
}

void summarize(const char* name, const std::vector<double>& values, double target) {
    const double m = mean(values);
    const double sd = values.size() > 1 ? std::sqrt(sample_variance(values)) : 0.0;
    std::printf("%-32s %9.4f +- %7.4f   target %9.4f   diff %+8.4f\n", name, m, sd, target,
                m - target);
}

int run_kinematics(const ExperimentConfig& base, int seeds) {
    const Targets targets;
    std::vector<double> coupling, drift, mag_mim, mag_mir, tim_mim, tim_mir, tim_sig_mir,
        tsd_mim, tsd_mir, rmse_mim, rmse_mir;
    for (int s = 1; s <= seeds; ++s) {
        ExperimentConfig config = base;
        config.master_seed = static_cast<std::uint64_t>(s);
        const auto outcome = analyze_cohort(simulate_cohort(config));
        coupling.push_back(entry_mean(outcome.report, "coupling"));
        drift.push_back(entry_mean(outcome.report, "drift"));
        mag_mim.push_back(entry_mean(outcome.report, "magnitude_error_mimicked"));
        mag_mir.push_back(entry_mean(outcome.report, "magnitude_error_mirrored"));
        tim_mim.push_back(entry_mean(outcome.report, "timing_error_mimicked"));
        tim_mir.push_back(entry_mean(outcome.report, "timing_error_mirrored"));
        tim_sig_mir.push_back(entry_mean(outcome.report, "timing_error_signed_mirrored"));
        tsd_mim.push_back(entry_mean(outcome.report, "timing_sd_mimicked"));
        tsd_mir.push_back(entry_mean(outcome.report, "timing_sd_mirrored"));
        rmse_mim.push_back(entry_mean(outcome.report, "stream_rmse_mimicked"));
        rmse_mir.push_back(entry_mean(outcome.report, "stream_rmse_mirrored"));
        std::printf("seed %2d: coupling %7.3f drift %7.3f mag %6.2f/%6.2f tim %6.3f/%6.3f\n", s,
                    coupling.back(), drift.back(), mag_mim.back(), mag_mir.back(), tim_mim.back(),
                    tim_mir.back());
    }
    std::printf("\n");
    summarize("coupling", coupling, targets.coupling);
    summarize("drift", drift, targets.drift);
    summarize("magnitude_error_mimicked", mag_mim, targets.magnitude_mimicked);
    summarize("magnitude_error_mirrored", mag_mir, targets.magnitude_mirrored);
    summarize("timing_error_mimicked", tim_mim, targets.timing_mimicked);
    summarize("timing_error_mirrored", tim_mir, targets.timing_mirrored);
    summarize("timing_error_signed_mirrored", tim_sig_mir, 0.0);
    summarize("timing_sd_mimicked", tsd_mim, targets.timing_sd_mimicked);
    summarize("timing_sd_mirrored", tsd_mir, targets.timing_sd_mirrored);
    summarize("stream_rmse_mimicked", rmse_mim, targets.stream_rmse_mimicked);
    summarize("stream_rmse_mirrored", rmse_mir, targets.stream_rmse_mirrored);
    return 0;
}

int run_decode(const ExperimentConfig& base, int seeds) {
    std::vector<double> train_mim, train_mir, true_mim, true_mir;
    int train_mim_lower = 0, train_p_sig = 0, true_p_ns = 0, true_mir_lower = 0;
    for (int s = 1; s <= seeds; ++s) {
        ExperimentConfig config = base;
        config.master_seed = static_cast<std::uint64_t>(s);
        const auto sessions = simulate_cohort(config);
        const auto outcome = decode_cohort(sessions, config.decoder, config.labeling, config.jobs);
        const double tm = entry_mean(outcome.report, "rmse_vs_training_mimicked");
        const double tr = entry_mean(outcome.report, "rmse_vs_training_mirrored");
        const double um = entry_mean(outcome.report, "rmse_vs_true_mimicked");
        const double ur = entry_mean(outcome.report, "rmse_vs_true_mirrored");
        const double p_train = entry_p(outcome.report, "rmse_vs_training_mimicked_vs_mirrored");
        const double p_true = entry_p(outcome.report, "rmse_vs_true_mimicked_vs_mirrored");
        const double lag = entry_mean(outcome.report, "applied_lag_mimicked");
        train_mim.push_back(tm);
        train_mir.push_back(tr);
        true_mim.push_back(um);
        true_mir.push_back(ur);
        if (tm < tr) ++train_mim_lower;
        if (tm < tr && p_train < 0.05) ++train_p_sig;
        if (p_true >= 0.05) ++true_p_ns;
        if (ur < um) ++true_mir_lower;
        std::printf(
            "seed %2d: vs_train %6.3f/%6.3f (p %7.4f)  vs_true %6.3f/%6.3f (p %7.4f)  lag %4.1f\n",
            s, tm, tr, p_train, um, ur, p_true, lag);
    }
    std::printf("\nvs_training mimicked lower: %d/%d (significant: %d)\n", train_mim_lower, seeds,
                train_p_sig);
    std::printf("vs_true not significant:    %d/%d\n", true_p_ns, seeds);
    std::printf("vs_true mirrored lower:     %d/%d\n", true_mir_lower, seeds);
    summarize("rmse_vs_training_mimicked", train_mim, 0.09);
    summarize("rmse_vs_training_mirrored", train_mir, 0.15);
    summarize("rmse_vs_true_mimicked", true_mim, 0.0);
    summarize("rmse_vs_true_mirrored", true_mir, 0.0);
    return 0;
}

int run_emit(const std::filesystem::path& out) {
    const Targets t;
    nlohmann::ordered_json j;
    j["format"] = "mirrortrain-default-params/1";
    j["generated_by"] = "mirrortrain-calibrate emit";
    j["targets"] = {{"coupling_percent", t.coupling},
                    {"drift_percent", t.drift},
                    {"magnitude_error_mimicked_percent", t.magnitude_mimicked},
                    {"magnitude_error_mirrored_percent", t.magnitude_mirrored},
                    {"timing_error_mimicked_s", t.timing_mimicked},
                    {"timing_error_mirrored_s", t.timing_mirrored},
                    {"timing_sd_mimicked_s", t.timing_sd_mimicked},
                    {"timing_sd_mirrored_s", t.timing_sd_mirrored},
                    {"stream_rmse_mimicked_percent", t.stream_rmse_mimicked},
                    {"stream_rmse_mirrored_percent", t.stream_rmse_mirrored}};
    j["defaults"] = config_json(default_config());
    std::filesystem::create_directories(out.parent_path());
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + out.string());
    file << j.dump(2) << '\n';
    std::printf("wrote %s\n", out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"calibration sweeps for the simulator defaults"};
    std::string mode;
    int seeds = 5;
    std::string config_path;
    std::string out = "data/default_params.json";
    int jobs = 1;
    int cohort_size = 0;
    app.add_option("mode", mode, "kinematics | decode | emit")->required();
    app.add_option("--seeds", seeds, "number of master seeds (1..N)");
    app.add_option("--config", config_path, "config override");
    app.add_option("--out", out, "emit target path");
    app.add_option("--jobs", jobs, "worker threads");
    app.add_option("--cohort-size", cohort_size, "cohort size override");
    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig config =
            config_path.empty() ? default_config() : load_config(config_path);
        if (jobs > 0) config.jobs = jobs;
        if (cohort_size > 0) config.cohort_size = cohort_size;
        config.validate();
        if (mode == "kinematics") return run_kinematics(config, seeds);
        if (mode == "decode") return run_decode(config, seeds);
        if (mode == "emit") return run_emit(out);
        std::fprintf(stderr, "unknown mode %s\n", mode.c_str());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
