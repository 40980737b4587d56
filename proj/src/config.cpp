#include "mirrortrain/config.hpp"

#include <fstream>
#include <set>

#include "mirrortrain/protocol.hpp"

namespace mirrortrain {

using ordered_json = nlohmann::ordered_json;

namespace {

// Tuned to reproduce the reference percentages; regenerate with the
// calibrate tool (recorded in data/default_params.json).
constexpr double kCouplingUniform = 0.308;
constexpr double kDriftStepSigma = 0.105;
constexpr double kDriftClamp = 0.2311;
constexpr double kReactionDelayMean = 0.0833;
constexpr double kReactionDelaySd = 0.035;
constexpr double kMagnitudeGainMean = 0.7422;
constexpr double kMagnitudeGainSd = 0.029;
constexpr double kTrackerNoiseSigma = 0.0;
constexpr double kMirrorTimingJitterSd = 0.06;
constexpr double kMirrorMagnitudeSd = 0.4025;
constexpr double kMirrorRestOffsetSigma = 0.005;

std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const ordered_json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    if (!j.is_object())
        throw ConfigError((path.empty() ? std::string("config") : path) + " must be an object");
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (item.key() == a) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("unknown config key: " + join_path(path, item.key()));
    }
}

template <typename T>
void assign(const ordered_json& j, const std::string& path, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(join_path(path, key) + " has the wrong type");
    }
}

Eigen::MatrixXd parse_matrix(const ordered_json& j, const std::string& path, Eigen::Index rows,
                             Eigen::Index cols) {
    if (!j.is_array() || j.size() != static_cast<size_t>(rows))
        throw ConfigError(path + " must be an array of " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<size_t>(r));
        if (!row.is_array() || row.size() != static_cast<size_t>(cols))
            throw ConfigError(path + " rows must hold " + std::to_string(cols) + " numbers");
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row.at(static_cast<size_t>(c));
            if (!v.is_number()) throw ConfigError(path + " entries must be numbers");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

ordered_json matrix_json(const Eigen::MatrixXd& m) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

void parse_timing(const ordered_json& j, TrialTimingParams& timing) {
    check_keys(j, "timing",
               {"ramp_up", "hold", "ramp_down", "iti", "initial_rest", "trials_per_movement"});
    assign(j, "timing", "ramp_up", timing.ramp_up);
    assign(j, "timing", "hold", timing.hold);
    assign(j, "timing", "ramp_down", timing.ramp_down);
    assign(j, "timing", "iti", timing.iti);
    assign(j, "timing", "initial_rest", timing.initial_rest);
    assign(j, "timing", "trials_per_movement", timing.trials_per_movement);
}

void parse_imperfection(const ordered_json& j, ImperfectionParams& p) {
    check_keys(j, "imperfection",
               {"coupling_uniform", "coupling_matrix", "drift_step_sigma", "drift_clamp",
                "reaction_delay_mean", "reaction_delay_sd", "magnitude_gain_mean",
                "magnitude_gain_sd", "tracker_noise_sigma", "mirror_timing_jitter_sd",
                "mirror_magnitude_sd", "mirror_rest_offset_sigma"});
    if (j.contains("coupling_uniform") && j.contains("coupling_matrix"))
        throw ConfigError("imperfection: give either coupling_uniform or coupling_matrix");
    if (j.contains("coupling_uniform")) {
        double off = 0.0;
        assign(j, "imperfection", "coupling_uniform", off);
        p.coupling_matrix = uniform_coupling(off);
    }
    if (j.contains("coupling_matrix"))
        p.coupling_matrix = parse_matrix(j.at("coupling_matrix"), "imperfection.coupling_matrix",
                                         kNumDofs, kNumDofs);
    assign(j, "imperfection", "drift_step_sigma", p.drift_step_sigma);
    assign(j, "imperfection", "drift_clamp", p.drift_clamp);
    assign(j, "imperfection", "reaction_delay_mean", p.reaction_delay_mean);
    assign(j, "imperfection", "reaction_delay_sd", p.reaction_delay_sd);
    assign(j, "imperfection", "magnitude_gain_mean", p.magnitude_gain_mean);
    assign(j, "imperfection", "magnitude_gain_sd", p.magnitude_gain_sd);
    assign(j, "imperfection", "tracker_noise_sigma", p.tracker_noise_sigma);
    assign(j, "imperfection", "mirror_timing_jitter_sd", p.mirror_timing_jitter_sd);
    assign(j, "imperfection", "mirror_magnitude_sd", p.mirror_magnitude_sd);
    assign(j, "imperfection", "mirror_rest_offset_sigma", p.mirror_rest_offset_sigma);
}

void parse_emg(const ordered_json& j, EmgModelParams& p) {
    check_keys(j, "emg",
               {"baseline_noise", "activation_gain", "synergy_strong", "synergy_weak",
                "synergy_matrix"});
    const bool shorthand = j.contains("synergy_strong") || j.contains("synergy_weak");
    if (shorthand && j.contains("synergy_matrix"))
        throw ConfigError("emg: give either synergy_strong/synergy_weak or synergy_matrix");
    if (j.contains("synergy_matrix")) {
        p.synergy_matrix =
            parse_matrix(j.at("synergy_matrix"), "emg.synergy_matrix", kEmgChannels, 2 * kNumDofs);
    } else if (shorthand) {
        double strong = 1.0;
        double weak = 0.05;
        assign(j, "emg", "synergy_strong", strong);
        assign(j, "emg", "synergy_weak", weak);
        p.synergy_matrix = default_synergy_matrix(strong, weak);
    }
    assign(j, "emg", "baseline_noise", p.baseline_noise);
    assign(j, "emg", "activation_gain", p.activation_gain);
}

void parse_decoder(const ordered_json& j, DecoderConfig& d) {
    check_keys(j, "decoder", {"lambda_scale", "channel_subset", "postprocess"});
    assign(j, "decoder", "lambda_scale", d.lambda_scale);
    assign(j, "decoder", "channel_subset", d.channel_subset);
    if (j.contains("postprocess")) {
        const auto& pj = j.at("postprocess");
        check_keys(pj, "decoder.postprocess", {"enabled", "deadband", "clamp"});
        assign(pj, "decoder.postprocess", "enabled", d.post.enabled);
        assign(pj, "decoder.postprocess", "deadband", d.post.deadband);
        assign(pj, "decoder.postprocess", "clamp", d.post.clamp);
    }
}

std::vector<MovementSpec> parse_movements(const ordered_json& j) {
    if (!j.is_array() || j.empty()) throw ConfigError("movements must be a non-empty array");
    std::vector<MovementSpec> movements;
    for (size_t i = 0; i < j.size(); ++i) {
        const std::string path = "movements[" + std::to_string(i) + "]";
        const auto& mj = j.at(i);
        check_keys(mj, path, {"name", "targets", "peak_amplitude"});
        MovementSpec m;
        assign(mj, path, "name", m.name);
        assign(mj, path, "peak_amplitude", m.peak_amplitude);
        if (!mj.contains("targets") || !mj.at("targets").is_array())
            throw ConfigError(path + ".targets must be an array");
        for (size_t t = 0; t < mj.at("targets").size(); ++t) {
            const std::string tpath = path + ".targets[" + std::to_string(t) + "]";
            const auto& tj = mj.at("targets").at(t);
            check_keys(tj, tpath, {"dof", "direction"});
            TargetDof target;
            assign(tj, tpath, "dof", target.dof);
            assign(tj, tpath, "direction", target.direction);
            m.targets.push_back(target);
        }
        movements.push_back(std::move(m));
    }
    return movements;
}

}  // namespace

ExperimentConfig default_config() {
    ExperimentConfig c;
    c.movements = default_movement_catalog();
    c.imperfection.coupling_matrix = uniform_coupling(kCouplingUniform);
    c.imperfection.drift_step_sigma = kDriftStepSigma;
    c.imperfection.drift_clamp = kDriftClamp;
    c.imperfection.reaction_delay_mean = kReactionDelayMean;
    c.imperfection.reaction_delay_sd = kReactionDelaySd;
    c.imperfection.magnitude_gain_mean = kMagnitudeGainMean;
    c.imperfection.magnitude_gain_sd = kMagnitudeGainSd;
    c.imperfection.tracker_noise_sigma = kTrackerNoiseSigma;
    c.imperfection.mirror_timing_jitter_sd = kMirrorTimingJitterSd;
    c.imperfection.mirror_magnitude_sd = kMirrorMagnitudeSd;
    c.imperfection.mirror_rest_offset_sigma = kMirrorRestOffsetSigma;
    c.emg.synergy_matrix = default_synergy_matrix();
    return c;
}

void ExperimentConfig::validate() const {
    if (cohort_size < 2) throw ConfigError("cohort_size must be at least 2");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
    timing.validate();
    imperfection.validate();
    emg.validate();
    if (movements.empty()) throw ConfigError("movements must not be empty");
    std::set<std::string> names;
    for (const auto& m : movements) {
        if (m.name.empty()) throw ConfigError("movement names must not be empty");
        if (!names.insert(m.name).second)
            throw ConfigError("duplicate movement name: " + m.name);
        if (m.targets.empty())
            throw ConfigError("movement " + m.name + " needs at least one target DOF");
        for (const auto& t : m.targets) {
            if (t.dof < 0 || t.dof >= kNumDofs)
                throw ConfigError("movement " + m.name + " targets an invalid DOF");
            if (t.direction != 1 && t.direction != -1)
                throw ConfigError("movement " + m.name + " direction must be +1 or -1");
        }
        if (!(m.peak_amplitude > 0.0) || m.peak_amplitude > 1.0)
            throw ConfigError("movement " + m.name + " peak_amplitude must be in (0, 1]");
    }
    if (!(decoder.lambda_scale > 0.0)) throw ConfigError("decoder.lambda_scale must be positive");
    if (decoder.channel_subset < 0 || decoder.channel_subset > kNumFeatures)
        throw ConfigError("decoder.channel_subset must be in [0, 528]");
    if (decoder.post.deadband < 0.0 || decoder.post.deadband >= 1.0)
        throw ConfigError("decoder.postprocess.deadband must be in [0, 1)");
    if (!(decoder.post.clamp > 0.0)) throw ConfigError("decoder.postprocess.clamp must be positive");
    if (labeling.max_lag_frames < 0 || labeling.max_lag_frames > 150)
        throw ConfigError("labeling.max_lag_frames must be in [0, 150]");
}

ExperimentConfig parse_config(const ordered_json& j) {
    check_keys(j, "",
               {"cohort_size", "master_seed", "output_dir", "jobs", "timing", "movements",
                "imperfection", "emg", "decoder", "labeling"});
    ExperimentConfig c = default_config();
    assign(j, "", "cohort_size", c.cohort_size);
    assign(j, "", "master_seed", c.master_seed);
    assign(j, "", "output_dir", c.output_dir);
    assign(j, "", "jobs", c.jobs);
    if (j.contains("timing")) parse_timing(j.at("timing"), c.timing);
    if (j.contains("movements")) c.movements = parse_movements(j.at("movements"));
    if (j.contains("imperfection")) parse_imperfection(j.at("imperfection"), c.imperfection);
    if (j.contains("emg")) parse_emg(j.at("emg"), c.emg);
    if (j.contains("decoder")) parse_decoder(j.at("decoder"), c.decoder);
    if (j.contains("labeling")) {
        check_keys(j.at("labeling"), "labeling", {"max_lag_frames"});
        assign(j.at("labeling"), "labeling", "max_lag_frames", c.labeling.max_lag_frames);
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open config file " + file.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(file.string() + ": " + e.what());
    }
    ExperimentConfig c = parse_config(j);
    c.validate();
    return c;
}

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j;
    j["cohort_size"] = c.cohort_size;
    j["master_seed"] = c.master_seed;
    j["output_dir"] = c.output_dir;
    j["jobs"] = c.jobs;
    j["timing"] = {{"ramp_up", c.timing.ramp_up},
                   {"hold", c.timing.hold},
                   {"ramp_down", c.timing.ramp_down},
                   {"iti", c.timing.iti},
                   {"initial_rest", c.timing.initial_rest},
                   {"trials_per_movement", c.timing.trials_per_movement}};
    ordered_json movements = ordered_json::array();
    for (const auto& m : c.movements) {
        ordered_json targets = ordered_json::array();
        for (const auto& t : m.targets)
            targets.push_back({{"dof", t.dof}, {"direction", t.direction}});
        movements.push_back({{"name", m.name},
                             {"targets", std::move(targets)},
                             {"peak_amplitude", m.peak_amplitude}});
    }
    j["movements"] = std::move(movements);
    j["imperfection"] = {
        {"coupling_matrix", matrix_json(c.imperfection.coupling_matrix)},
        {"drift_step_sigma", c.imperfection.drift_step_sigma},
        {"drift_clamp", c.imperfection.drift_clamp},
        {"reaction_delay_mean", c.imperfection.reaction_delay_mean},
        {"reaction_delay_sd", c.imperfection.reaction_delay_sd},
        {"magnitude_gain_mean", c.imperfection.magnitude_gain_mean},
        {"magnitude_gain_sd", c.imperfection.magnitude_gain_sd},
        {"tracker_noise_sigma", c.imperfection.tracker_noise_sigma},
        {"mirror_timing_jitter_sd", c.imperfection.mirror_timing_jitter_sd},
        {"mirror_magnitude_sd", c.imperfection.mirror_magnitude_sd},
        {"mirror_rest_offset_sigma", c.imperfection.mirror_rest_offset_sigma}};
    j["emg"] = {{"baseline_noise", c.emg.baseline_noise},
                {"activation_gain", c.emg.activation_gain},
                {"synergy_matrix", matrix_json(c.emg.synergy_matrix)}};
    j["decoder"] = {{"lambda_scale", c.decoder.lambda_scale},
                    {"channel_subset", c.decoder.channel_subset},
                    {"postprocess",
                     {{"enabled", c.decoder.post.enabled},
                      {"deadband", c.decoder.post.deadband},
                      {"clamp", c.decoder.post.clamp}}}};
    j["labeling"] = {{"max_lag_frames", c.labeling.max_lag_frames}};
    return j;
}

std::string ExperimentConfig::canonical_echo() const { return config_json(*this).dump(2); }

}  // namespace mirrortrain
