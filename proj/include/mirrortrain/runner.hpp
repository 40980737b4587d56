#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mirrortrain/analysis.hpp"
#include "mirrortrain/config.hpp"
#include "mirrortrain/decoder.hpp"
#include "mirrortrain/labeling.hpp"

namespace mirrortrain {

// Participant indices are 1-based; the per-participant seed is split off the
// master seed so cohort members are independent and order-insensitive.
std::uint64_t participant_seed(std::uint64_t master_seed, int index);
std::string participant_name(int index);

struct SimulatedParticipant {
    SessionDataset session;
    GroundTruthLog log;
};

SimulatedParticipant simulate_participant(const ExperimentConfig& config, int index);

struct ParadigmDecode {
    Paradigm paradigm = Paradigm::Mimicked;
    LabeledDataset dataset;
    DecoderModel model;
    EvalResult vs_training;
    EvalResult vs_true;
};

// Fit + decode one paradigm of one session. `features` is shared between the
// paradigms, so callers extract it once.
ParadigmDecode decode_paradigm(const SessionDataset& session, const FeatureMatrix& features,
                               Paradigm paradigm, const DecoderConfig& decoder,
                               const LabelingConfig& labeling);

struct AnalyzeOutcome {
    std::vector<ParticipantAnalysis> participants;
    CohortReport report;
};

struct DecodeEntry {
    std::string participant;
    Paradigm paradigm = Paradigm::Mimicked;
    int applied_lag = 0;
    double rmse_vs_training = 0.0;  // percent of span
    double rmse_vs_true = 0.0;
};

struct DecodeOutcome {
    std::vector<DecodeEntry> entries;
    CohortReport report;
};

// In-memory pipeline stages; the cmd_* wrappers add the on-disk layout.
// decode_cohort serializes each fitted model into model_dir when given one,
// saving a second fit pass.
AnalyzeOutcome analyze_cohort(const std::vector<SessionDataset>& sessions);
DecodeOutcome decode_cohort(const std::vector<SessionDataset>& sessions,
                            const DecoderConfig& decoder, const LabelingConfig& labeling,
                            int jobs = 1, const std::filesystem::path& model_dir = {},
                            const std::string& config_echo = {});

void cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out);
AnalyzeOutcome cmd_analyze(const std::filesystem::path& cohort, const std::filesystem::path& out,
                           int jobs = 1);
DecodeOutcome cmd_decode(const std::filesystem::path& cohort, const std::filesystem::path& out,
                         const DecoderConfig& decoder, const LabelingConfig& labeling,
                         int jobs = 1);
void cmd_full(const ExperimentConfig& config, const std::filesystem::path& out);

// Session directories under <cohort>/sessions, sorted by name.
std::vector<std::filesystem::path> list_session_dirs(const std::filesystem::path& cohort);

}  // namespace mirrortrain
