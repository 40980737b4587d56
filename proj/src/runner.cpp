#include "mirrortrain/runner.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "mirrortrain/emgsim.hpp"
#include "mirrortrain/features.hpp"
#include "mirrortrain/humansim.hpp"
#include "mirrortrain/log.hpp"
#include "mirrortrain/protocol.hpp"
#include "mirrortrain/session_io.hpp"

namespace mirrortrain {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Work-stealing loop over [0, count); numeric results must not depend on the
// execution order, so bodies only write to their own slot.
void parallel_for(int jobs, int count, const std::function<void(int)>& body) {
    jobs = std::min(jobs, count);
    if (jobs <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(jobs));
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&]() {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(mu);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

void write_json_file(const fs::path& file, const ordered_json& j) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing " + file.string());
}

std::string shared_config_echo(const std::vector<SessionDataset>& sessions) {
    if (sessions.empty()) throw Error("domain", "cohort contains no sessions");
    for (const auto& s : sessions)
        if (s.config_echo != sessions.front().config_echo)
            throw Error("domain", "sessions were generated from differing configs");
    return sessions.front().config_echo;
}

ordered_json report_with_config(const CohortReport& report, const std::string& echo) {
    ordered_json j;
    j["format"] = "mirrortrain-report/1";
    j["config"] = echo.empty() ? ordered_json() : ordered_json::parse(echo);
    const ordered_json body = cohort_report_json(report);
    j["participants"] = body.at("participants");
    j["metrics"] = body.at("metrics");
    return j;
}

const char* paradigm_label(Paradigm p) {
    return p == Paradigm::Mimicked ? "mimicked" : "mirrored";
}

std::vector<double> column(const std::vector<ParticipantAnalysis>& parts,
                           const std::function<double(const ParticipantAnalysis&)>& get) {
    std::vector<double> v;
    v.reserve(parts.size());
    for (const auto& p : parts) v.push_back(get(p));
    return v;
}

}  // namespace

std::uint64_t participant_seed(std::uint64_t master_seed, int index) {
    return RngKey(master_seed).derive(rng_tag("participant"), static_cast<std::uint64_t>(index))
        .bits(0);
}

std::string participant_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "p%02d", index);
    return buf;
}

SimulatedParticipant simulate_participant(const ExperimentConfig& config, int index) {
    const std::uint64_t seed = participant_seed(config.master_seed, index);
    const RngKey key(seed);

    VirtualSession virtual_session = generate_virtual_stream(config.movements, config.timing);
    TrueSimResult true_result =
        simulate_true_stream(virtual_session, config.movements, config.imperfection, key);
    KinematicStream contra = simulate_contralateral_stream(
        virtual_session, config.movements, config.imperfection, true_result.log, key);
    EmgBlock emg = synthesize_emg(true_result.motion, config.emg, key);

    SimulatedParticipant out;
    out.session.participant_id = participant_name(index);
    out.session.seed = seed;
    out.session.timing = virtual_session.timing;
    out.session.movements = config.movements;
    out.session.trials = virtual_session.trials;
    out.session.virtual_stream = std::move(virtual_session.stream);
    out.session.true_stream = std::move(true_result.stream);
    out.session.contra_stream = std::move(contra);
    out.session.emg = std::move(emg);
    out.session.baseline_begin = 0.0;
    out.session.baseline_end = config.timing.initial_rest;
    out.session.config_echo = config.canonical_echo();
    out.session.validate();
    out.log = std::move(true_result.log);
    return out;
}

ParadigmDecode decode_paradigm(const SessionDataset& session, const FeatureMatrix& features,
                               Paradigm paradigm, const DecoderConfig& decoder,
                               const LabelingConfig& labeling) {
    ParadigmDecode out;
    out.paradigm = paradigm;
    out.dataset = build_dataset(session, paradigm, features, RngKey(session.seed),
                                labeling.max_lag_frames);

    FitOptions opts;
    opts.lambda_scale = decoder.lambda_scale;
    opts.channel_subset = decoder.channel_subset;
    opts.post = decoder.post;
    out.model = fit(out.dataset, session, opts);

    const Eigen::MatrixXd decoded = infer(out.model, out.dataset.features);
    out.vs_training = evaluate(decoded, out.dataset, session, EvalReference::TrainingLabels);
    out.vs_true = evaluate(decoded, out.dataset, session, EvalReference::TrueKinematics);
    return out;
}

AnalyzeOutcome analyze_cohort(const std::vector<SessionDataset>& sessions) {
    if (sessions.size() < 2) throw Error("domain", "cohort needs at least two sessions");
    AnalyzeOutcome out;
    out.participants.resize(sessions.size());
    for (size_t i = 0; i < sessions.size(); ++i)
        out.participants[i] = analyze_session(sessions[i]);

    for (const auto& p : out.participants) out.report.participants.push_back(p.participant_id);
    const auto& parts = out.participants;
    auto add = [&](CohortEntry entry) { out.report.entries.push_back(std::move(entry)); };

    add(cohort_one_sample("coupling", column(parts, [](const auto& p) {
                              return p.coupling.median;
                          }),
                          0.0, true));
    add(cohort_one_sample("drift", column(parts, [](const auto& p) { return p.drift.median; }),
                          0.0, true));

    const auto mag_mim =
        column(parts, [](const auto& p) { return p.vs_virtual.magnitude_median_abs; });
    const auto mag_mir =
        column(parts, [](const auto& p) { return p.vs_contralateral.magnitude_median_abs; });
    add(cohort_describe("magnitude_error_mimicked", mag_mim));
    add(cohort_describe("magnitude_error_mirrored", mag_mir));
    add(cohort_paired("magnitude_error_mimicked_vs_mirrored", mag_mim, mag_mir, true));

    const auto tim_mim =
        column(parts, [](const auto& p) { return p.vs_virtual.timing_median_abs; });
    const auto tim_mir =
        column(parts, [](const auto& p) { return p.vs_contralateral.timing_median_abs; });
    add(cohort_describe("timing_error_mimicked", tim_mim));
    add(cohort_describe("timing_error_mirrored", tim_mir));
    add(cohort_paired("timing_error_mimicked_vs_mirrored", tim_mim, tim_mir, true));

    add(cohort_describe("timing_error_signed_mimicked", column(parts, [](const auto& p) {
                            return p.vs_virtual.timing_median_signed;
                        })));
    add(cohort_describe("timing_error_signed_mirrored", column(parts, [](const auto& p) {
                            return p.vs_contralateral.timing_median_signed;
                        })));

    const auto mag_sd_mim =
        column(parts, [](const auto& p) { return p.vs_virtual.magnitude_variance.sd; });
    const auto mag_sd_mir =
        column(parts, [](const auto& p) { return p.vs_contralateral.magnitude_variance.sd; });
    add(cohort_describe("magnitude_sd_mimicked", mag_sd_mim));
    add(cohort_describe("magnitude_sd_mirrored", mag_sd_mir));
    add(cohort_paired("magnitude_sd_mimicked_vs_mirrored", mag_sd_mim, mag_sd_mir, true));

    const auto tim_sd_mim =
        column(parts, [](const auto& p) { return p.vs_virtual.timing_variance.sd; });
    const auto tim_sd_mir =
        column(parts, [](const auto& p) { return p.vs_contralateral.timing_variance.sd; });
    add(cohort_describe("timing_sd_mimicked", tim_sd_mim));
    add(cohort_describe("timing_sd_mirrored", tim_sd_mir));
    add(cohort_paired("timing_sd_mimicked_vs_mirrored", tim_sd_mim, tim_sd_mir, true));

    const auto rmse_mim = column(parts, [](const auto& p) { return p.vs_virtual.rmse_percent; });
    const auto rmse_mir =
        column(parts, [](const auto& p) { return p.vs_contralateral.rmse_percent; });
    add(cohort_describe("stream_rmse_mimicked", rmse_mim));
    add(cohort_describe("stream_rmse_mirrored", rmse_mir));
    add(cohort_paired("stream_rmse_mimicked_vs_mirrored", rmse_mim, rmse_mir, true));

    return out;
}

DecodeOutcome decode_cohort(const std::vector<SessionDataset>& sessions,
                            const DecoderConfig& decoder, const LabelingConfig& labeling,
                            int jobs, const fs::path& model_dir, const std::string& config_echo) {
    if (sessions.size() < 2) throw Error("domain", "cohort needs at least two sessions");
    if (!model_dir.empty()) fs::create_directories(model_dir);
    DecodeOutcome out;
    out.entries.resize(sessions.size() * 2);
    parallel_for(jobs, static_cast<int>(sessions.size()), [&](int i) {
        const auto& session = sessions[static_cast<size_t>(i)];
        const FeatureMatrix features =
            extract_features(session.emg, session.virtual_stream.frame_count());
        for (const Paradigm paradigm : {Paradigm::Mimicked, Paradigm::Mirrored}) {
            const auto result = decode_paradigm(session, features, paradigm, decoder, labeling);
            DecodeEntry entry;
            entry.participant = session.participant_id;
            entry.paradigm = paradigm;
            entry.applied_lag = result.dataset.applied_lag;
            entry.rmse_vs_training = result.vs_training.rmse_percent;
            entry.rmse_vs_true = result.vs_true.rmse_percent;
            out.entries[static_cast<size_t>(i) * 2 +
                        (paradigm == Paradigm::Mimicked ? 0 : 1)] = entry;
            if (!model_dir.empty()) {
                const fs::path file =
                    model_dir / (session.participant_id + "_" +
                                 std::string(paradigm_label(paradigm)) + ".model.json");
                write_model(result.model, file, config_echo);
            }
        }
    });

    std::vector<double> train_mim, train_mir, true_mim, true_mir, lag_mim;
    for (const auto& e : out.entries) {
        if (e.paradigm == Paradigm::Mimicked) {
            train_mim.push_back(e.rmse_vs_training);
            true_mim.push_back(e.rmse_vs_true);
            lag_mim.push_back(e.applied_lag);
        } else {
            train_mir.push_back(e.rmse_vs_training);
            true_mir.push_back(e.rmse_vs_true);
        }
    }
    for (const auto& s : sessions) out.report.participants.push_back(s.participant_id);

    auto add = [&](CohortEntry entry) { out.report.entries.push_back(std::move(entry)); };
    add(cohort_describe("rmse_vs_training_mimicked", train_mim));
    add(cohort_describe("rmse_vs_training_mirrored", train_mir));
    add(cohort_paired("rmse_vs_training_mimicked_vs_mirrored", train_mim, train_mir, true));
    add(cohort_describe("rmse_vs_true_mimicked", true_mim));
    add(cohort_describe("rmse_vs_true_mirrored", true_mir));
    add(cohort_paired("rmse_vs_true_mimicked_vs_mirrored", true_mim, true_mir, true));
    add(cohort_describe("applied_lag_mimicked", lag_mim));
    return out;
}

std::vector<fs::path> list_session_dirs(const fs::path& cohort) {
    const fs::path root = cohort / "sessions";
    if (!fs::is_directory(root)) throw IoError("no sessions directory under " + cohort.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "session.json"))
            dirs.push_back(entry.path());
    if (dirs.empty()) throw IoError("no sessions found under " + root.string());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

namespace {

std::vector<SessionDataset> read_cohort(const fs::path& cohort) {
    const auto dirs = list_session_dirs(cohort);
    std::vector<SessionDataset> sessions;
    sessions.reserve(dirs.size());
    for (const auto& dir : dirs) sessions.push_back(read_session(dir));
    return sessions;
}

void write_analysis_outputs(const AnalyzeOutcome& outcome, const std::string& echo,
                            const fs::path& out) {
    std::vector<FigRow> fig2;
    for (const auto& p : outcome.participants) {
        fig2.push_back({"coupling", "true", p.participant_id, p.coupling.median});
        fig2.push_back({"drift", "true", p.participant_id, p.drift.median});
    }
    write_fig_csv(out / "fig2.csv", fig2);

    std::vector<FigRow> fig3;
    for (const auto& p : outcome.participants) {
        const auto push = [&](const char* metric, const char* paradigm, double value) {
            fig3.push_back({metric, paradigm, p.participant_id, value});
        };
        const auto& mim = p.vs_virtual;
        const auto& mir = p.vs_contralateral;
        push("magnitude_error", "mimicked", mim.magnitude_median_abs);
        push("magnitude_error", "mirrored", mir.magnitude_median_abs);
        push("timing_error", "mimicked", mim.timing_median_abs);
        push("timing_error", "mirrored", mir.timing_median_abs);
        push("timing_error_signed", "mimicked", mim.timing_median_signed);
        push("timing_error_signed", "mirrored", mir.timing_median_signed);
        push("magnitude_sd", "mimicked", mim.magnitude_variance.sd);
        push("magnitude_sd", "mirrored", mir.magnitude_variance.sd);
        push("timing_sd", "mimicked", mim.timing_variance.sd);
        push("timing_sd", "mirrored", mir.timing_variance.sd);
        push("stream_rmse", "mimicked", mim.rmse_percent);
        push("stream_rmse", "mirrored", mir.rmse_percent);
    }
    write_fig_csv(out / "fig3.csv", fig3);
    write_json_file(out / "report.json", report_with_config(outcome.report, echo));
}

void write_decode_outputs(const DecodeOutcome& outcome, const std::string& echo,
                          const fs::path& out) {
    std::vector<FigRow> fig4;
    for (const auto& e : outcome.entries) {
        fig4.push_back(
            {"rmse_vs_training", paradigm_label(e.paradigm), e.participant, e.rmse_vs_training});
        fig4.push_back({"rmse_vs_true", paradigm_label(e.paradigm), e.participant, e.rmse_vs_true});
    }
    write_fig_csv(out / "fig4.csv", fig4);
    write_json_file(out / "decode_report.json", report_with_config(outcome.report, echo));
}

}  // namespace

void cmd_simulate(const ExperimentConfig& config, const fs::path& out) {
    config.validate();
    fs::create_directories(out / "sessions");
    {
        std::ofstream echo(out / "config_echo.json", std::ios::binary | std::ios::trunc);
        if (!echo) throw IoError("cannot write " + (out / "config_echo.json").string());
        echo << config.canonical_echo() << '\n';
    }
    parallel_for(config.jobs, config.cohort_size, [&](int i) {
        const int index = i + 1;
        const auto participant = simulate_participant(config, index);
        const fs::path dir = out / "sessions" / participant.session.participant_id;
        fs::create_directories(dir);
        write_session(participant.session, &participant.log, dir);
        log::info("wrote session " + dir.string());
    });
}

AnalyzeOutcome cmd_analyze(const fs::path& cohort, const fs::path& out, int jobs) {
    const auto sessions = read_cohort(cohort);
    (void)jobs;  // analysis is cheap; kept single-threaded for simplicity
    AnalyzeOutcome outcome = analyze_cohort(sessions);
    fs::create_directories(out);
    write_analysis_outputs(outcome, shared_config_echo(sessions), out);
    return outcome;
}

DecodeOutcome cmd_decode(const fs::path& cohort, const fs::path& out, const DecoderConfig& decoder,
                         const LabelingConfig& labeling, int jobs) {
    const auto sessions = read_cohort(cohort);
    fs::create_directories(out);
    const std::string echo = shared_config_echo(sessions);
    DecodeOutcome outcome =
        decode_cohort(sessions, decoder, labeling, jobs, out / "models", echo);
    write_decode_outputs(outcome, echo, out);
    return outcome;
}

void cmd_full(const ExperimentConfig& config, const fs::path& out) {
    cmd_simulate(config, out);
    const auto sessions = read_cohort(out);
    const std::string echo = shared_config_echo(sessions);

    AnalyzeOutcome analysis = analyze_cohort(sessions);
    write_analysis_outputs(analysis, echo, out);

    DecodeOutcome decode = decode_cohort(sessions, config.decoder, config.labeling, config.jobs,
                                         out / "models", echo);
    write_decode_outputs(decode, echo, out);

    ordered_json combined;
    combined["format"] = "mirrortrain-full-report/1";
    combined["config"] = ordered_json::parse(echo);
    const ordered_json kin = cohort_report_json(analysis.report);
    const ordered_json dec = cohort_report_json(decode.report);
    combined["participants"] = kin.at("participants");
    combined["kinematics"] = kin.at("metrics");
    combined["decoding"] = dec.at("metrics");
    combined["figures"] = {{"fig2", "fig2.csv"}, {"fig3", "fig3.csv"}, {"fig4", "fig4.csv"}};
    write_json_file(out / "report.json", combined);
}

}  // namespace mirrortrain
