#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mirrortrain/stats.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

using RestVector = std::array<double, kNumDofs>;

// Per-DOF mean over frames with t in [begin, end).
RestVector resting_position(const KinematicStream& stream, double begin, double end);

struct CouplingMetric {
    std::vector<double> peaks;  // one per (trial, non-target DOF), trial-major order
    double median = 0.0;
};
CouplingMetric coupling_metric(const KinematicStream& stream, const SessionDataset& session);

struct DriftMetric {
    std::vector<double> per_iti;  // mean over DOFs, one per trial's preceding ITI
    double median = 0.0;
};
DriftMetric drift_metric(const KinematicStream& stream, const SessionDataset& session);

struct MagnitudeError {
    double signed_percent = 0.0;  // reference subtracted from the tracked stream
    double absolute_percent = 0.0;
};
MagnitudeError magnitude_error(const KinematicStream& true_stream,
                               const KinematicStream& ref_stream, const SessionDataset& session,
                               std::size_t trial);

struct TimingError {
    double signed_seconds = 0.0;
    double absolute_seconds = 0.0;
    bool flat = false;  // no target-DOF deviation above 1% of span; excluded upstream
};
TimingError timing_error(const KinematicStream& true_stream, const KinematicStream& ref_stream,
                         const SessionDataset& session, std::size_t trial);

double stream_rmse(const KinematicStream& true_stream, const KinematicStream& ref_stream);

struct VarianceSummary {
    std::vector<double> group_variances;  // movement catalog order, kept groups only
    std::vector<std::string> excluded_groups;
    double variance_median = 0.0;
    double sd = 0.0;  // sqrt of the median variance
};
// Groups signed per-trial errors by movement, takes the sample variance of each
// group with at least two entries, and summarizes with the median variance.
VarianceSummary variance_metrics(const SessionDataset& session, const std::vector<int>& trials,
                                 const std::vector<double>& signed_errors);

struct ReferenceComparison {
    Source reference = Source::Virtual;
    std::vector<int> trials;  // every trial, in schedule order
    std::vector<double> magnitude_signed;
    std::vector<double> magnitude_abs;
    std::vector<int> timing_trials;  // trials that survived the flat check
    std::vector<double> timing_signed;
    std::vector<double> timing_abs;
    std::vector<int> flat_trials;
    double magnitude_median_abs = 0.0;
    double magnitude_median_signed = 0.0;
    double timing_median_abs = 0.0;
    double timing_median_signed = 0.0;
    VarianceSummary magnitude_variance;
    VarianceSummary timing_variance;
    double rmse_percent = 0.0;  // whole-stream RMSE vs the tracked stream
};

struct ParticipantAnalysis {
    std::string participant_id;
    CouplingMetric coupling;
    DriftMetric drift;
    ReferenceComparison vs_virtual;
    ReferenceComparison vs_contralateral;
};
ParticipantAnalysis analyze_session(const SessionDataset& session);

struct CohortEntry {
    std::string metric;
    std::vector<double> values;  // per participant, cohort order; differences for paired
    std::vector<double> lhs;     // paired entries record both sides
    std::vector<double> rhs;
    std::vector<std::size_t> outliers_removed;  // indices into values
    std::vector<double> retained;
    double mean = 0.0;
    double sem = 0.0;
    std::string test_type;  // "one-sample", "paired", or "none"
    double mu0 = 0.0;
    std::optional<TTestResult> test;
    std::string test_error;  // set instead of test when the sample is degenerate
};

// Median -> IQR filter -> mean/SEM -> t-test. With allow_degenerate the
// zero-variance case is recorded in test_error instead of thrown.
CohortEntry cohort_one_sample(const std::string& metric, const std::vector<double>& values,
                              double mu0, bool allow_degenerate = false);
CohortEntry cohort_paired(const std::string& metric, const std::vector<double>& a,
                          const std::vector<double>& b, bool allow_degenerate = false);
// Descriptive entry without a test.
CohortEntry cohort_describe(const std::string& metric, const std::vector<double>& values);

struct CohortReport {
    std::vector<std::string> participants;
    std::vector<CohortEntry> entries;
};

nlohmann::ordered_json cohort_report_json(const CohortReport& report);

struct FigRow {
    std::string metric;
    std::string paradigm;
    std::string participant;
    double value = 0.0;
};
void write_fig_csv(const std::filesystem::path& file, const std::vector<FigRow>& rows);

}  // namespace mirrortrain
