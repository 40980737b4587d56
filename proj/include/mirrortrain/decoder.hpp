#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mirrortrain/labeling.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

struct PostProcessConfig {
    bool enabled = false;
    double deadband = 0.05;  // |output| below this snaps to 0
    double clamp = 1.0;      // output clipped to [-clamp, clamp]
};

// Linear-Gaussian decoder: x_t = A x_{t-1} + w, z_t = C x_t + q. Fitted by
// ordinary least squares; post-processing is applied to the output only and
// never fed back into the state.
struct DecoderModel {
    Eigen::MatrixXd A;  // 8 x 8
    Eigen::MatrixXd W;  // 8 x 8 process-noise covariance
    Eigen::MatrixXd C;  // features x 8
    Eigen::MatrixXd Q;  // features x features, diagonal loading included
    double lambda = 0.0;  // the loading that was added to Q's diagonal
    PostProcessConfig post;
    std::vector<int> channel_subset;  // retained feature indices; empty = all

    Eigen::Index feature_dim() const { return C.rows(); }
};

struct FitOptions {
    double lambda_scale = 1e-4;  // lambda = lambda_scale * mean diag(Q)
    int channel_subset = 0;      // keep top-k features by |corr| to any DOF; 0 = all
    PostProcessConfig post;
};

// Contiguous [begin, end) row ranges of a dataset; fit uses successive pairs
// inside each segment only, so ITI discontinuities between trials of the
// train split are never treated as dynamics.
std::vector<std::pair<Eigen::Index, Eigen::Index>> train_segments(const LabeledDataset& ds,
                                                                  const SessionDataset& session);

DecoderModel fit(const LabeledDataset& ds, const SessionDataset& session, const FitOptions& opts);

struct InferStats {
    Eigen::MatrixXd final_prior_P;      // a-priori covariance at the last frame
    Eigen::MatrixXd final_posterior_P;  // after the last update
    Eigen::MatrixXd steady_gain;        // K at the last frame, 8 x features
    Eigen::Index frames = 0;
};

// Standard Kalman predict/update over every frame of `features`; x0 = 0,
// P0 = W. Returns the post-processed stream; `stats`, when given, receives
// the converged covariance for fixed-point checks.
Eigen::MatrixXd infer(const DecoderModel& model, const Eigen::MatrixXd& features,
                      InferStats* stats = nullptr);

enum class EvalReference { TrainingLabels, TrueKinematics };

struct EvalResult {
    double rmse_normalized = 0.0;
    double rmse_percent = 0.0;               // percent of the full span (2.0)
    Eigen::Matrix<double, 1, kNumDofs> per_dof;  // normalized units
    Eigen::Index frames = 0;
};

// RMSE of the decoded stream against the chosen reference over the test-split
// trials (each trial window plus its preceding intertrial interval).
EvalResult evaluate(const Eigen::MatrixXd& decoded, const LabeledDataset& ds,
                    const SessionDataset& session, EvalReference reference);

// model.json with row-major full-precision hex floats; reload is bit-exact.
// `config_echo`, when non-empty, is embedded for provenance.
void write_model(const DecoderModel& model, const std::filesystem::path& file,
                 const std::string& config_echo = {});
DecoderModel read_model(const std::filesystem::path& file);

}  // namespace mirrortrain
