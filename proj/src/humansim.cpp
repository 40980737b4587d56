#include "mirrortrain/humansim.hpp"

#include <algorithm>
#include <cmath>

namespace mirrortrain {

void ImperfectionParams::validate() const {
    for (int r = 0; r < kNumDofs; ++r) {
        if (coupling_matrix(r, r) != 1.0)
            throw ConfigError("coupling_matrix diagonal must be 1");
        for (int c = 0; c < kNumDofs; ++c) {
            if (r == c) continue;
            const double v = coupling_matrix(r, c);
            if (!(v >= 0.0 && v < 1.0))
                throw ConfigError("coupling_matrix off-diagonal entries must lie in [0, 1)");
        }
    }
    const double sigmas[] = {drift_step_sigma, reaction_delay_sd,   magnitude_gain_sd,
                             tracker_noise_sigma, mirror_timing_jitter_sd, mirror_magnitude_sd,
                             mirror_rest_offset_sigma};
    for (double s : sigmas)
        if (!(s >= 0.0)) throw ConfigError("imperfection sigmas must be >= 0");
    if (!(reaction_delay_mean >= 0.0)) throw ConfigError("reaction_delay_mean must be >= 0");
    if (!(drift_clamp >= 0.0)) throw ConfigError("drift_clamp must be >= 0");
}

Eigen::Matrix<double, kNumDofs, kNumDofs> uniform_coupling(double off_diagonal) {
    Eigen::Matrix<double, kNumDofs, kNumDofs> m;
    m.setConstant(off_diagonal);
    m.diagonal().setOnes();
    return m;
}

namespace {

// Per-DOF profile coefficient of one trial: sum over targets of the coupling
// row times direction, times the trial gain. coeff[dof] * profile(t) is the
// modeled trajectory before drift and noise.
std::array<double, kNumDofs> trial_coefficients(const MovementSpec& movement,
                                                const Eigen::Matrix<double, kNumDofs, kNumDofs>& coupling,
                                                double gain) {
    std::array<double, kNumDofs> coeff{};
    for (const auto& target : movement.targets)
        for (int j = 0; j < kNumDofs; ++j)
            coeff[static_cast<size_t>(j)] += coupling(target.dof, j) * target.direction;
    for (auto& c : coeff) c *= gain;
    return coeff;
}

// Drift offsets per trial: a per-DOF random walk stepped once per intertrial
// interval and clamped. Trial 0 carries offset zero so the 30-s baseline stays
// at the nominal rest posture.
std::vector<std::array<double, kNumDofs>> drift_offsets(const RngKey& key, size_t trial_count,
                                                        double step_sigma, double clamp) {
    std::vector<std::array<double, kNumDofs>> offsets(trial_count);
    if (trial_count == 0) return offsets;
    offsets[0] = {};
    for (size_t k = 1; k < trial_count; ++k) {
        const RngKey step = key.derive(rng_tag("drift"), k);
        for (int d = 0; d < kNumDofs; ++d) {
            const double next = offsets[k - 1][static_cast<size_t>(d)] +
                                step_sigma * step.gaussian(static_cast<uint64_t>(d));
            offsets[k][static_cast<size_t>(d)] = std::clamp(next, -clamp, clamp);
        }
    }
    return offsets;
}

// Adds one trial's modeled trajectory into `acc` over the trial window plus
// the following intertrial interval (a delayed profile spills into it).
void add_trial_profile(Eigen::MatrixXd& acc, const TrialRecord& trial,
                       const TrialTimingParams& timing, const std::array<double, kNumDofs>& coeff,
                       double delay, double peak) {
    const auto range = frame_range(trial.iti_begin, trial.t_end + timing.iti, acc.rows());
    for (Eigen::Index i = range.begin; i < range.end; ++i) {
        const double local = static_cast<double>(i) / kFrameRate - trial.t_start - delay;
        const double p = profile_or_zero(local, timing, peak);
        if (p == 0.0) continue;
        for (int d = 0; d < kNumDofs; ++d) acc(i, d) += p * coeff[static_cast<size_t>(d)];
    }
}

// Applies per-trial rest offsets over [iti_begin, t_end) segments (which tile
// the session after the baseline), then finalizes with optional tracker noise
// and the [-1, 1] clamp.
void finalize_stream(KinematicStream& out, const Eigen::MatrixXd& acc,
                     const std::vector<TrialRecord>& trials,
                     const std::vector<std::array<double, kNumDofs>>& offsets,
                     double noise_sigma, const RngKey& noise_key) {
    const Eigen::Index n = acc.rows();
    std::vector<const std::array<double, kNumDofs>*> frame_offset(static_cast<size_t>(n), nullptr);
    for (size_t k = 0; k < trials.size(); ++k) {
        const double hi = (k + 1 < trials.size()) ? trials[k].t_end
                                                  : static_cast<double>(n) / kFrameRate;
        const auto range = frame_range(trials[k].iti_begin, hi, n);
        for (Eigen::Index i = range.begin; i < range.end; ++i)
            frame_offset[static_cast<size_t>(i)] = &offsets[k];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto* off = frame_offset[static_cast<size_t>(i)];
        for (int d = 0; d < kNumDofs; ++d) {
            double v = acc(i, d);
            if (off != nullptr) v += (*off)[static_cast<size_t>(d)];
            if (noise_sigma > 0.0)
                v += noise_sigma *
                     noise_key.gaussian(static_cast<uint64_t>(i) * kNumDofs + static_cast<uint64_t>(d));
            out.value(i, d) = static_cast<float>(std::clamp(v, -1.0, 1.0));
        }
    }
}

}  // namespace

TrueSimResult simulate_true_stream(const VirtualSession& session,
                                   const std::vector<MovementSpec>& catalog,
                                   const ImperfectionParams& params, const RngKey& key) {
    params.validate();
    const auto& trials = session.trials;
    const Eigen::Index n = session.stream.frame_count();
    const TrialTimingParams& timing = session.timing;

    TrueSimResult result;
    result.stream = KinematicStream(Source::True, n);
    result.motion = KinematicStream(Source::True, n);
    result.log.trials.resize(trials.size());

    const auto offsets = drift_offsets(key, trials.size(), params.drift_step_sigma, params.drift_clamp);

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, kNumDofs);
    for (size_t k = 0; k < trials.size(); ++k) {
        const auto& trial = trials[k];
        const auto& movement = catalog.at(static_cast<size_t>(trial.movement));
        TrialTruth& truth = result.log.trials[k];

        const double draw = key.derive(rng_tag("delay"), k).gaussian(0);
        truth.delay = std::max(0.0, params.reaction_delay_mean + params.reaction_delay_sd * draw);
        truth.gain =
            params.magnitude_gain_mean + params.magnitude_gain_sd * key.derive(rng_tag("gain"), k).gaussian(0);
        truth.truncated = truth.delay > timing.iti;
        truth.rest_offset = offsets[k];

        const auto coeff = trial_coefficients(movement, params.coupling_matrix, truth.gain);
        for (int d = 0; d < kNumDofs; ++d)
            truth.coupling_peak[static_cast<size_t>(d)] =
                std::abs(coeff[static_cast<size_t>(d)]) * movement.peak_amplitude;

        add_trial_profile(acc, trial, timing, coeff, truth.delay, movement.peak_amplitude);
    }

    finalize_stream(result.stream, acc, trials, offsets, params.tracker_noise_sigma,
                    key.derive(rng_tag("noise_true")));
    for (Eigen::Index i = 0; i < n; ++i)
        for (int d = 0; d < kNumDofs; ++d)
            result.motion.value(i, d) = static_cast<float>(std::clamp(acc(i, d), -1.0, 1.0));
    return result;
}

KinematicStream simulate_contralateral_stream(const VirtualSession& session,
                                              const std::vector<MovementSpec>& catalog,
                                              const ImperfectionParams& params, GroundTruthLog& log,
                                              const RngKey& key) {
    params.validate();
    const auto& trials = session.trials;
    if (log.trials.size() != trials.size())
        throw Error("domain", "ground-truth log does not match the trial schedule");
    const Eigen::Index n = session.stream.frame_count();
    const TrialTimingParams& timing = session.timing;

    KinematicStream stream(Source::Contralateral, n);
    std::vector<std::array<double, kNumDofs>> offsets(trials.size());

    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, kNumDofs);
    for (size_t k = 0; k < trials.size(); ++k) {
        const auto& trial = trials[k];
        const auto& movement = catalog.at(static_cast<size_t>(trial.movement));
        TrialTruth& truth = log.trials[k];

        truth.mirror_shift =
            params.mirror_timing_jitter_sd * key.derive(rng_tag("mirror_shift"), k).gaussian(0);
        truth.mirror_gain =
            1.0 + params.mirror_magnitude_sd * key.derive(rng_tag("mirror_gain"), k).gaussian(0);

        const RngKey rest = key.derive(rng_tag("mirror_rest"), k);
        for (int d = 0; d < kNumDofs; ++d) {
            const double q =
                params.mirror_rest_offset_sigma * rest.gaussian(static_cast<uint64_t>(d));
            offsets[k][static_cast<size_t>(d)] = truth.rest_offset[static_cast<size_t>(d)] + q;
            truth.contra_rest_offset[static_cast<size_t>(d)] = offsets[k][static_cast<size_t>(d)];
        }

        const auto coeff =
            trial_coefficients(movement, params.coupling_matrix, truth.gain * truth.mirror_gain);
        add_trial_profile(acc, trial, timing, coeff, truth.delay + truth.mirror_shift,
                          movement.peak_amplitude);
    }

    finalize_stream(stream, acc, trials, offsets, params.tracker_noise_sigma,
                    key.derive(rng_tag("noise_contra")));
    return stream;
}

}  // namespace mirrortrain
