#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirrortrain/decoder.hpp"
#include "mirrortrain/emgsim.hpp"
#include "mirrortrain/humansim.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

struct LabelingConfig {
    int max_lag_frames = 15;
};

struct DecoderConfig {
    double lambda_scale = 1e-4;
    int channel_subset = 0;  // 0 keeps every channel
    PostProcessConfig post;
};

// One experiment: a cohort of simulated participants plus every knob the
// pipeline honors. Defaults are the tuned values recorded in
// data/default_params.json.
struct ExperimentConfig {
    int cohort_size = 7;
    std::uint64_t master_seed = 7401;
    std::string output_dir = "out";
    int jobs = 1;
    TrialTimingParams timing;
    std::vector<MovementSpec> movements;
    ImperfectionParams imperfection;
    EmgModelParams emg;
    DecoderConfig decoder;
    LabelingConfig labeling;

    void validate() const;
    // Canonical JSON text; parsing it back yields an identical config.
    std::string canonical_echo() const;
};

ExperimentConfig default_config();

// Strict parser: unknown keys anywhere raise ConfigError naming the path.
ExperimentConfig parse_config(const nlohmann::ordered_json& j);
ExperimentConfig load_config(const std::filesystem::path& file);
nlohmann::ordered_json config_json(const ExperimentConfig& config);

}  // namespace mirrortrain
