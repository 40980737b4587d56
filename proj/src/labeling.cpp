#include "mirrortrain/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mirrortrain {

const char* paradigm_name(Paradigm p) {
    return p == Paradigm::Mimicked ? "mimicked" : "mirrored";
}

namespace {

// Pearson correlation of |labels| against the mean standardized feature trace
// over the overlap window of lag L. Constant inputs yield 0 (handled by the
// caller's degenerate checks).
double lag_score(const std::vector<Eigen::VectorXd>& abs_labels, const Eigen::VectorXd& trace,
                 int lag) {
    const Eigen::Index n = trace.size();
    const Eigen::Index t_begin = std::max(0, lag);
    const Eigen::Index t_end = n + std::min(0, lag);
    const Eigen::Index len = t_end - t_begin;
    if (len < 2) throw Error("domain", "lag window leaves no overlap");

    const auto m = trace.segment(t_begin, len);
    const double m_mean = m.mean();
    const double m_var = (m.array() - m_mean).square().sum();
    double score = 0.0;
    for (const auto& a_full : abs_labels) {
        const auto a = a_full.segment(t_begin - lag, len);
        const double a_mean = a.mean();
        const double a_var = (a.array() - a_mean).square().sum();
        if (a_var == 0.0 || m_var == 0.0) continue;
        const double cov = ((a.array() - a_mean) * (m.array() - m_mean)).sum();
        score += cov / std::sqrt(a_var * m_var);
    }
    return score;
}

}  // namespace

int estimate_alignment_lag(const KinematicStream& labels, const FeatureMatrix& features,
                           int max_lag) {
    const Eigen::Index n = features.frame_count();
    if (labels.frame_count() != n)
        throw Error("domain", "labels and features are not on the same frame grid");
    if (max_lag < 0 || n <= 2 * static_cast<Eigen::Index>(max_lag))
        throw Error("domain", "lag window exceeds stream bounds");

    // Session-mean trace over standardized feature columns; constant columns
    // carry no timing information and are excluded.
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(n);
    Eigen::Index used = 0;
    for (Eigen::Index c = 0; c < features.values.cols(); ++c) {
        const auto col = features.values.col(c);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n));
        // Summation rounding leaves sd ~ 1e-16 on constant columns; anything
        // at that scale is noise, not modulation, and must not be amplified
        // to unit variance.
        if (sd <= 1e-12 * (std::abs(mean) + 1.0)) continue;
        trace += ((col.array() - mean) / sd).matrix();
        ++used;
    }
    if (used == 0) throw Error("domain", "all feature channels are constant");
    trace /= static_cast<double>(used);

    std::vector<Eigen::VectorXd> abs_labels;
    for (int d = 0; d < kNumDofs; ++d) {
        Eigen::VectorXd a(n);
        for (Eigen::Index i = 0; i < n; ++i)
            a(i) = std::abs(static_cast<double>(labels.value(i, d)));
        if (a.maxCoeff() > a.minCoeff()) abs_labels.push_back(std::move(a));
    }
    if (abs_labels.empty()) throw Error("domain", "labels are constant; lag is undefined");

    // Candidates ordered 0, -1, +1, -2, +2, ... with strict improvement, so
    // ties resolve toward smaller |L| and then toward negative L.
    int best_lag = 0;
    double best_score = lag_score(abs_labels, trace, 0);
    for (int k = 1; k <= max_lag; ++k) {
        for (const int lag : {-k, k}) {
            const double score = lag_score(abs_labels, trace, lag);
            if (score > best_score) {
                best_score = score;
                best_lag = lag;
            }
        }
    }
    return best_lag;
}

void split_trials(const std::vector<TrialRecord>& trials, const RngKey& key,
                  std::vector<int>& train, std::vector<int>& test) {
    train.clear();
    test.clear();
    std::map<int, std::vector<int>> by_movement;
    for (size_t i = 0; i < trials.size(); ++i)
        by_movement[trials[i].movement].push_back(static_cast<int>(i));

    for (auto& [movement, indices] : by_movement) {
        const RngKey shuffle = key.derive(rng_tag("split"), static_cast<uint64_t>(movement));
        std::uint64_t counter = 0;
        for (size_t i = indices.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(shuffle.bits(counter++) % i);
            std::swap(indices[i - 1], indices[j]);
        }
        const size_t n_train = (indices.size() + 1) / 2;
        for (size_t i = 0; i < indices.size(); ++i)
            (i < n_train ? train : test).push_back(indices[i]);
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

LabeledDataset build_dataset(const SessionDataset& session, Paradigm paradigm,
                             const FeatureMatrix& features, const RngKey& split_key, int max_lag) {
    const Eigen::Index n = features.frame_count();
    if (session.virtual_stream.frame_count() != n)
        throw Error("domain", "features do not cover the session frame grid");

    LabeledDataset ds;
    ds.paradigm = paradigm;
    split_trials(session.trials, split_key, ds.train_trials, ds.test_trials);

    const KinematicStream& label_stream =
        paradigm == Paradigm::Mimicked ? session.virtual_stream : session.contra_stream;
    int lag = 0;
    if (paradigm == Paradigm::Mimicked)
        lag = estimate_alignment_lag(session.virtual_stream, features, max_lag);
    ds.applied_lag = lag;

    if (static_cast<Eigen::Index>(std::abs(lag)) >= n)
        throw Error("domain", "alignment lag exceeds stream bounds");
    const Eigen::Index kept = n - static_cast<Eigen::Index>(std::abs(lag));
    const Eigen::Index feat_begin = std::max(0, lag);
    const Eigen::Index label_begin = std::max(0, -lag);

    ds.time_offset_frames = feat_begin;
    ds.features = features.values.middleRows(feat_begin, kept);
    ds.labels.resize(kept, kNumDofs);
    for (Eigen::Index i = 0; i < kept; ++i)
        for (int d = 0; d < kNumDofs; ++d)
            ds.labels(i, d) = static_cast<double>(label_stream.value(label_begin + i, d));
    return ds;
}

}  // namespace mirrortrain
