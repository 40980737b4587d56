#include "mirrortrain/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "mirrortrain/log.hpp"
#include "mirrortrain/session_io.hpp"

namespace mirrortrain {

RestVector resting_position(const KinematicStream& stream, double begin, double end) {
    const auto range = frame_range(begin, end, stream.frame_count());
    if (range.end <= range.begin) throw Error("domain", "resting interval contains no frames");
    RestVector rest{};
    for (Eigen::Index i = range.begin; i < range.end; ++i)
        for (int d = 0; d < kNumDofs; ++d) rest[static_cast<size_t>(d)] += stream.value(i, d);
    const double count = static_cast<double>(range.end - range.begin);
    for (double& v : rest) v /= count;
    return rest;
}

namespace {

const MovementSpec& find_movement(const SessionDataset& session, int movement) {
    if (movement < 0 || static_cast<size_t>(movement) >= session.movements.size())
        throw Error("domain", "trial references an unknown movement index");
    return session.movements[static_cast<size_t>(movement)];
}

struct DofPeak {
    double dev_percent = -1.0;
    Eigen::Index frame = 0;
};

// Strict comparison keeps the earliest frame on plateaus.
DofPeak peak_deviation(const KinematicStream& stream, const FrameRange& range, int dof,
                       double rest) {
    DofPeak peak;
    peak.frame = range.begin;
    for (Eigen::Index i = range.begin; i < range.end; ++i) {
        const double dev = deviation_percent(stream.value(i, dof), rest);
        if (dev > peak.dev_percent) {
            peak.dev_percent = dev;
            peak.frame = i;
        }
    }
    return peak;
}

constexpr double kFlatFloorPercent = 1.0;  // deviations below this are noise

}  // namespace

CouplingMetric coupling_metric(const KinematicStream& stream, const SessionDataset& session) {
    CouplingMetric result;
    const Eigen::Index n = stream.frame_count();
    for (const auto& trial : session.trials) {
        const auto& movement = find_movement(session, trial.movement);
        const RestVector rest = resting_position(stream, trial.iti_begin, trial.iti_end);
        const auto range = frame_range(trial.t_start, trial.t_end, n);
        for (int d = 0; d < kNumDofs; ++d) {
            if (movement.is_target(d)) continue;
            result.peaks.push_back(
                peak_deviation(stream, range, d, rest[static_cast<size_t>(d)]).dev_percent);
        }
    }
    result.median = median(result.peaks);
    return result;
}

DriftMetric drift_metric(const KinematicStream& stream, const SessionDataset& session) {
    DriftMetric result;
    const RestVector baseline =
        resting_position(stream, session.baseline_begin, session.baseline_end);
    for (const auto& trial : session.trials) {
        const RestVector rest = resting_position(stream, trial.iti_begin, trial.iti_end);
        double acc = 0.0;
        for (int d = 0; d < kNumDofs; ++d)
            acc += deviation_percent(rest[static_cast<size_t>(d)], baseline[static_cast<size_t>(d)]);
        result.per_iti.push_back(acc / kNumDofs);
    }
    result.median = median(result.per_iti);
    return result;
}

MagnitudeError magnitude_error(const KinematicStream& true_stream,
                               const KinematicStream& ref_stream, const SessionDataset& session,
                               std::size_t trial) {
    const auto& record = session.trials.at(trial);
    const auto& movement = find_movement(session, record.movement);
    const RestVector rest_true = resting_position(true_stream, record.iti_begin, record.iti_end);
    const RestVector rest_ref = resting_position(ref_stream, record.iti_begin, record.iti_end);
    const auto range = frame_range(record.t_start, record.t_end, true_stream.frame_count());

    MagnitudeError error;
    for (const auto& target : movement.targets) {
        const auto d = static_cast<size_t>(target.dof);
        const double dev_true =
            peak_deviation(true_stream, range, target.dof, rest_true[d]).dev_percent;
        const double dev_ref =
            peak_deviation(ref_stream, range, target.dof, rest_ref[d]).dev_percent;
        error.signed_percent += dev_true - dev_ref;
        error.absolute_percent += std::abs(dev_true - dev_ref);
    }
    const auto count = static_cast<double>(movement.targets.size());
    error.signed_percent /= count;
    error.absolute_percent /= count;
    return error;
}

TimingError timing_error(const KinematicStream& true_stream, const KinematicStream& ref_stream,
                         const SessionDataset& session, std::size_t trial) {
    const auto& record = session.trials.at(trial);
    const auto& movement = find_movement(session, record.movement);
    const RestVector rest_true = resting_position(true_stream, record.iti_begin, record.iti_end);
    const RestVector rest_ref = resting_position(ref_stream, record.iti_begin, record.iti_end);
    const auto range = frame_range(record.t_start, record.t_end, true_stream.frame_count());

    TimingError error;
    int live_dofs = 0;
    for (const auto& target : movement.targets) {
        const auto d = static_cast<size_t>(target.dof);
        const DofPeak peak_true = peak_deviation(true_stream, range, target.dof, rest_true[d]);
        const DofPeak peak_ref = peak_deviation(ref_stream, range, target.dof, rest_ref[d]);
        if (peak_true.dev_percent <= kFlatFloorPercent || peak_ref.dev_percent <= kFlatFloorPercent)
            continue;  // a flat stream has no meaningful peak time
        const double diff =
            static_cast<double>(peak_true.frame - peak_ref.frame) / kFrameRate;
        error.signed_seconds += diff;
        error.absolute_seconds += std::abs(diff);
        ++live_dofs;
    }
    if (live_dofs == 0) {
        error.flat = true;
        error.signed_seconds = 0.0;
        error.absolute_seconds = 0.0;
        return error;
    }
    error.signed_seconds /= live_dofs;
    error.absolute_seconds /= live_dofs;
    return error;
}

double stream_rmse(const KinematicStream& true_stream, const KinematicStream& ref_stream) {
    if (true_stream.frame_count() != ref_stream.frame_count())
        throw Error("domain", "streams do not share a frame grid");
    const Eigen::Index n = true_stream.frame_count();
    if (n == 0) throw Error("domain", "empty stream");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (int d = 0; d < kNumDofs; ++d) {
            const double e = static_cast<double>(true_stream.value(i, d)) -
                             static_cast<double>(ref_stream.value(i, d));
            acc += e * e;
        }
    return std::sqrt(acc / static_cast<double>(n * kNumDofs)) * 100.0 / 2.0;
}

VarianceSummary variance_metrics(const SessionDataset& session, const std::vector<int>& trials,
                                 const std::vector<double>& signed_errors) {
    if (trials.size() != signed_errors.size())
        throw Error("domain", "trial and error lists differ in length");
    std::map<int, std::vector<double>> groups;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const auto& record = session.trials.at(static_cast<size_t>(trials[i]));
        groups[record.movement].push_back(signed_errors[i]);
    }

    VarianceSummary summary;
    for (std::size_t m = 0; m < session.movements.size(); ++m) {
        const auto it = groups.find(static_cast<int>(m));
        if (it == groups.end()) continue;
        const std::string& name = session.movements[m].name;
        if (it->second.size() < 2) {
            log::info("movement " + name + " has a single usable trial; excluded from variance");
            summary.excluded_groups.push_back(name);
            continue;
        }
        summary.group_variances.push_back(sample_variance(it->second));
    }
    if (summary.group_variances.empty())
        throw NumericError("no movement has enough trials for a variance estimate");
    summary.variance_median = median(summary.group_variances);
    summary.sd = std::sqrt(summary.variance_median);
    return summary;
}

namespace {

ReferenceComparison compare_streams(const SessionDataset& session, const KinematicStream& ref) {
    ReferenceComparison cmp;
    cmp.reference = ref.source();
    for (std::size_t i = 0; i < session.trials.size(); ++i) {
        const auto error = magnitude_error(session.true_stream, ref, session, i);
        cmp.trials.push_back(static_cast<int>(i));
        cmp.magnitude_signed.push_back(error.signed_percent);
        cmp.magnitude_abs.push_back(error.absolute_percent);

        const auto timing = timing_error(session.true_stream, ref, session, i);
        if (timing.flat) {
            cmp.flat_trials.push_back(static_cast<int>(i));
        } else {
            cmp.timing_trials.push_back(static_cast<int>(i));
            cmp.timing_signed.push_back(timing.signed_seconds);
            cmp.timing_abs.push_back(timing.absolute_seconds);
        }
    }
    if (cmp.timing_signed.empty())
        throw NumericError("every trial was flat; timing errors are undefined");

    cmp.magnitude_median_abs = median(cmp.magnitude_abs);
    cmp.magnitude_median_signed = median(cmp.magnitude_signed);
    cmp.timing_median_abs = median(cmp.timing_abs);
    cmp.timing_median_signed = median(cmp.timing_signed);
    cmp.magnitude_variance = variance_metrics(session, cmp.trials, cmp.magnitude_signed);
    cmp.timing_variance = variance_metrics(session, cmp.timing_trials, cmp.timing_signed);
    cmp.rmse_percent = stream_rmse(session.true_stream, ref);
    return cmp;
}

}  // namespace

ParticipantAnalysis analyze_session(const SessionDataset& session) {
    ParticipantAnalysis out;
    out.participant_id = session.participant_id;
    out.coupling = coupling_metric(session.true_stream, session);
    out.drift = drift_metric(session.true_stream, session);
    out.vs_virtual = compare_streams(session, session.virtual_stream);
    out.vs_contralateral = compare_streams(session, session.contra_stream);
    return out;
}

namespace {

CohortEntry describe_values(const std::string& metric, const std::vector<double>& values) {
    if (values.size() < 2) throw Error("domain", "cohort needs at least two values");
    CohortEntry entry;
    entry.metric = metric;
    entry.values = values;
    const auto filtered = iqr_outlier_filter(values);
    entry.outliers_removed = filtered.removed;
    entry.retained = filtered.kept;
    if (entry.retained.size() < 2)
        throw Error("domain", "too few cohort values after outlier removal");
    entry.mean = mean(entry.retained);
    entry.sem =
        std::sqrt(sample_variance(entry.retained) / static_cast<double>(entry.retained.size()));
    entry.test_type = "none";
    return entry;
}

void attach_test(CohortEntry& entry, double mu0, bool allow_degenerate) {
    entry.mu0 = mu0;
    try {
        entry.test = one_sample_ttest(entry.retained, mu0);
    } catch (const NumericError& e) {
        if (!allow_degenerate) throw;
        entry.test_error = e.what();
        log::error("metric " + entry.metric + ": " + e.what());
    }
}

}  // namespace

CohortEntry cohort_describe(const std::string& metric, const std::vector<double>& values) {
    return describe_values(metric, values);
}

CohortEntry cohort_one_sample(const std::string& metric, const std::vector<double>& values,
                              double mu0, bool allow_degenerate) {
    CohortEntry entry = describe_values(metric, values);
    entry.test_type = "one-sample";
    attach_test(entry, mu0, allow_degenerate);
    return entry;
}

CohortEntry cohort_paired(const std::string& metric, const std::vector<double>& a,
                          const std::vector<double>& b, bool allow_degenerate) {
    if (a.size() != b.size()) throw Error("domain", "paired cohorts differ in length");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    CohortEntry entry = describe_values(metric, diff);
    entry.lhs = a;
    entry.rhs = b;
    entry.test_type = "paired";
    attach_test(entry, 0.0, allow_degenerate);
    return entry;
}

nlohmann::ordered_json cohort_report_json(const CohortReport& report) {
    nlohmann::ordered_json j;
    j["participants"] = report.participants;
    auto metrics = nlohmann::ordered_json::array();
    for (const auto& entry : report.entries) {
        nlohmann::ordered_json e;
        e["metric"] = entry.metric;
        e["values"] = entry.values;
        if (!entry.lhs.empty()) {
            e["lhs"] = entry.lhs;
            e["rhs"] = entry.rhs;
        }
        e["outliers_removed"] = entry.outliers_removed;
        e["retained"] = entry.retained;
        e["mean"] = entry.mean;
        e["sem"] = entry.sem;
        e["test_type"] = entry.test_type;
        if (entry.test_type == "one-sample") e["mu0"] = entry.mu0;
        if (entry.test.has_value()) {
            e["test"] = {{"t", entry.test->t},   {"df", entry.test->df},
                         {"p", entry.test->p},   {"n", entry.test->n},
                         {"mean", entry.test->mean}, {"sem", entry.test->sem}};
        } else {
            e["test"] = nullptr;
        }
        if (!entry.test_error.empty()) e["test_error"] = entry.test_error;
        metrics.push_back(std::move(e));
    }
    j["metrics"] = std::move(metrics);
    return j;
}

void write_fig_csv(const std::filesystem::path& file, const std::vector<FigRow>& rows) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << "metric,paradigm,participant,value\n";
    std::string line;
    for (const auto& row : rows) {
        line.clear();
        line += row.metric;
        line += ',';
        line += row.paradigm;
        line += ',';
        line += row.participant;
        line += ',';
        append_sig9(line, row.value);
        line += '\n';
        out << line;
    }
    if (!out) throw IoError("failed writing " + file.string());
}

}  // namespace mirrortrain
