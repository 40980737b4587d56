#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mirrortrain/features.hpp"
#include "mirrortrain/rng.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

enum class Paradigm { Mimicked, Mirrored };

const char* paradigm_name(Paradigm p);

// Supervised frames for one paradigm. Frame i of `features`/`labels` sits at
// time (i + time_offset_frames) / 30 of the original session, so trial
// windows can be mapped back after edge frames are dropped by lag shifting.
struct LabeledDataset {
    Paradigm paradigm = Paradigm::Mimicked;
    Eigen::MatrixXd features;  // frames x 528
    Eigen::MatrixXd labels;    // frames x 8
    int applied_lag = 0;       // frames; 0 for Mirrored
    Eigen::Index time_offset_frames = 0;
    std::vector<int> train_trials;  // indices into the session's trial list
    std::vector<int> test_trials;
};

// Session-wide alignment lag between the virtual labels and the EMG features:
// the integer L in [-max_lag, max_lag] maximizing the summed-over-DOFs
// Pearson correlation between |label(t - L)| and the session-mean trace of
// the standardized features. Ties break toward smaller |L|, then negative L.
int estimate_alignment_lag(const KinematicStream& labels, const FeatureMatrix& features,
                           int max_lag = 15);

// Random 50/50 split of each movement's trials; the same key gives the same
// split, so both paradigms of a session share it.
void split_trials(const std::vector<TrialRecord>& trials, const RngKey& key,
                  std::vector<int>& train, std::vector<int>& test);

// Mimicked: Virtual labels shifted by the alignment lag, edge frames dropped
// from both features and labels. Mirrored: Contralateral labels, no shift.
LabeledDataset build_dataset(const SessionDataset& session, Paradigm paradigm,
                             const FeatureMatrix& features, const RngKey& split_key,
                             int max_lag = 15);

}  // namespace mirrortrain
