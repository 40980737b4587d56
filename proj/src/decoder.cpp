#include "mirrortrain/decoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace mirrortrain {

using ordered_json = nlohmann::ordered_json;

namespace {

// Maps one trial's window (preceding ITI + trial) to dataset row indices.
std::pair<Eigen::Index, Eigen::Index> trial_rows(const TrialRecord& trial, const LabeledDataset& ds,
                                                 Eigen::Index session_frames) {
    const auto orig = frame_range(trial.iti_begin, trial.t_end, session_frames);
    const Eigen::Index begin = std::max<Eigen::Index>(orig.begin - ds.time_offset_frames, 0);
    const Eigen::Index end =
        std::min<Eigen::Index>(orig.end - ds.time_offset_frames, ds.features.rows());
    return {begin, std::max(begin, end)};
}

Eigen::MatrixXd solve_normal_equations(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& cross,
                                       const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible())
        throw NumericError(std::string(what) + " regression is rank-deficient");
    // gram is symmetric: solve gram * X^T = cross^T, i.e. X = cross * gram^-1.
    return lu.solve(cross.transpose()).transpose();
}

}  // namespace

std::vector<std::pair<Eigen::Index, Eigen::Index>> train_segments(const LabeledDataset& ds,
                                                                  const SessionDataset& session) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> segments;
    const Eigen::Index n = session.virtual_stream.frame_count();
    for (int trial : ds.train_trials) {
        const auto rows = trial_rows(session.trials.at(static_cast<size_t>(trial)), ds, n);
        if (rows.second > rows.first) segments.push_back(rows);
    }
    return segments;
}

DecoderModel fit(const LabeledDataset& ds, const SessionDataset& session, const FitOptions& opts) {
    const auto segments = train_segments(ds, session);
    Eigen::Index frame_total = 0;
    for (const auto& seg : segments) frame_total += seg.second - seg.first;
    if (frame_total < 2) throw Error("domain", "training split has too few frames");
    if (!ds.features.allFinite()) throw NumericError("training features contain non-finite values");
    if (!ds.labels.allFinite()) throw NumericError("training labels contain non-finite values");

    // Gather training rows (contiguous per segment, segments in time order).
    Eigen::MatrixXd X(frame_total, kNumDofs);
    Eigen::MatrixXd Z(frame_total, ds.features.cols());
    Eigen::Index at = 0;
    for (const auto& seg : segments) {
        const Eigen::Index len = seg.second - seg.first;
        X.middleRows(at, len) = ds.labels.middleRows(seg.first, len);
        Z.middleRows(at, len) = ds.features.middleRows(seg.first, len);
        at += len;
    }

    DecoderModel model;
    model.post = opts.post;

    // Optional top-k channel retention by maximal |correlation| to any DOF.
    if (opts.channel_subset > 0 && opts.channel_subset < Z.cols()) {
        const Eigen::RowVectorXd z_mean = Z.colwise().mean();
        const Eigen::RowVectorXd x_mean = X.colwise().mean();
        Eigen::MatrixXd Zc = Z.rowwise() - z_mean;
        Eigen::MatrixXd Xc = X.rowwise() - x_mean;
        const Eigen::RowVectorXd z_norm = Zc.colwise().norm();
        const Eigen::RowVectorXd x_norm = Xc.colwise().norm();
        const Eigen::MatrixXd cross = Zc.transpose() * Xc;  // features x dofs

        std::vector<std::pair<double, int>> scored;
        scored.reserve(static_cast<size_t>(Z.cols()));
        for (Eigen::Index c = 0; c < Z.cols(); ++c) {
            double best = 0.0;
            for (int d = 0; d < kNumDofs; ++d) {
                const double denom = z_norm(c) * x_norm(d);
                if (denom > 0.0) best = std::max(best, std::abs(cross(c, d)) / denom);
            }
            scored.emplace_back(-best, static_cast<int>(c));  // sort: best score, then low index
        }
        std::sort(scored.begin(), scored.end());
        scored.resize(static_cast<size_t>(opts.channel_subset));
        model.channel_subset.reserve(scored.size());
        for (const auto& [neg, idx] : scored) model.channel_subset.push_back(idx);
        std::sort(model.channel_subset.begin(), model.channel_subset.end());

        Eigen::MatrixXd Zk(Z.rows(), static_cast<Eigen::Index>(model.channel_subset.size()));
        for (size_t c = 0; c < model.channel_subset.size(); ++c)
            Zk.col(static_cast<Eigen::Index>(c)) = Z.col(model.channel_subset[c]);
        Z = std::move(Zk);
    }

    // State transition from within-segment successive pairs.
    Eigen::MatrixXd s00 = Eigen::MatrixXd::Zero(kNumDofs, kNumDofs);
    Eigen::MatrixXd s10 = Eigen::MatrixXd::Zero(kNumDofs, kNumDofs);
    Eigen::Index pair_count = 0;
    {
        Eigen::Index base = 0;
        for (const auto& seg : segments) {
            const Eigen::Index len = seg.second - seg.first;
            if (len >= 2) {
                const auto prev = X.middleRows(base, len - 1);
                const auto next = X.middleRows(base + 1, len - 1);
                s00.noalias() += prev.transpose() * prev;
                s10.noalias() += next.transpose() * prev;
                pair_count += len - 1;
            }
            base += len;
        }
    }
    if (pair_count < kNumDofs) throw Error("domain", "too few frame pairs to fit dynamics");
    model.A = solve_normal_equations(s00, s10, "state-transition");

    Eigen::MatrixXd resid_w(pair_count, kNumDofs);
    {
        Eigen::Index base = 0, at_w = 0;
        for (const auto& seg : segments) {
            const Eigen::Index len = seg.second - seg.first;
            if (len >= 2) {
                resid_w.middleRows(at_w, len - 1) =
                    X.middleRows(base + 1, len - 1) - X.middleRows(base, len - 1) * model.A.transpose();
                at_w += len - 1;
            }
            base += len;
        }
    }
    model.W = resid_w.transpose() * resid_w / static_cast<double>(pair_count);

    // Observation model over all training frames.
    const Eigen::MatrixXd sxx = X.transpose() * X;
    const Eigen::MatrixXd szx = Z.transpose() * X;
    model.C = solve_normal_equations(sxx, szx, "observation");

    Eigen::MatrixXd resid_q = Z - X * model.C.transpose();
    Eigen::MatrixXd q0 = Eigen::MatrixXd::Zero(Z.cols(), Z.cols());
    q0.selfadjointView<Eigen::Lower>().rankUpdate(resid_q.transpose(),
                                                  1.0 / static_cast<double>(frame_total));
    q0.triangularView<Eigen::StrictlyUpper>() = q0.transpose();

    model.lambda = opts.lambda_scale * q0.diagonal().mean();
    model.Q = q0 + model.lambda * Eigen::MatrixXd::Identity(q0.rows(), q0.cols());

    if (Eigen::LLT<Eigen::MatrixXd>(model.Q).info() != Eigen::Success)
        throw NumericError("observation covariance is not positive definite");
    return model;
}

Eigen::MatrixXd infer(const DecoderModel& model, const Eigen::MatrixXd& features,
                      InferStats* stats) {
    const Eigen::Index f = model.feature_dim();
    const Eigen::Index T = features.rows();
    if (T == 0) throw Error("domain", "no frames to decode");

    // The model may have been fit on a channel subset of the full matrix.
    Eigen::MatrixXd subset;
    const Eigen::MatrixXd* Z = &features;
    if (!model.channel_subset.empty() &&
        features.cols() != static_cast<Eigen::Index>(model.channel_subset.size())) {
        subset.resize(T, static_cast<Eigen::Index>(model.channel_subset.size()));
        for (size_t c = 0; c < model.channel_subset.size(); ++c)
            subset.col(static_cast<Eigen::Index>(c)) = features.col(model.channel_subset[c]);
        Z = &subset;
    }
    if (Z->cols() != f) throw Error("domain", "feature dimension does not match the model");

    Eigen::LLT<Eigen::MatrixXd> q_llt(model.Q);
    if (q_llt.info() != Eigen::Success)
        throw NumericError("innovation covariance is not invertible");
    const Eigen::MatrixXd Binv = q_llt.solve(model.C);          // Q^-1 C, f x 8
    const Eigen::MatrixXd G = model.C.transpose() * Binv;       // C' Q^-1 C, 8 x 8
    const Eigen::MatrixXd I8 = Eigen::MatrixXd::Identity(kNumDofs, kNumDofs);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(kNumDofs);
    Eigen::MatrixXd P = model.W;
    Eigen::MatrixXd prior_P = P;
    Eigen::PartialPivLU<Eigen::MatrixXd> m_lu;

    Eigen::MatrixXd out(T, kNumDofs);
    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::VectorXd x_pred = model.A * x;
        prior_P = model.A * P * model.A.transpose() + model.W;

        // K = P (I + G P)^-1 C' Q^-1 by the push-through identity; only 8x8
        // systems are solved per frame.
        const Eigen::VectorXd nu = Z->row(t).transpose() - model.C * x_pred;
        const Eigen::VectorXd u = Binv.transpose() * nu;
        m_lu.compute(I8 + G * prior_P);
        x = x_pred + prior_P * m_lu.solve(u);
        P = prior_P - prior_P * m_lu.solve(G * prior_P);
        P = ((P + P.transpose()) * 0.5).eval();

        if (!x.allFinite() || x.cwiseAbs().maxCoeff() >= 10.0)
            throw NumericError("state estimate diverged during inference");
        out.row(t) = x.transpose();
    }

    if (stats != nullptr) {
        stats->final_prior_P = prior_P;
        stats->final_posterior_P = P;
        stats->steady_gain = prior_P * m_lu.solve(Binv.transpose());
        stats->frames = T;
    }

    if (model.post.enabled) {
        for (Eigen::Index t = 0; t < T; ++t)
            for (int d = 0; d < kNumDofs; ++d) {
                double v = out(t, d);
                if (std::abs(v) < model.post.deadband) v = 0.0;
                out(t, d) = std::clamp(v, -model.post.clamp, model.post.clamp);
            }
    }
    return out;
}

EvalResult evaluate(const Eigen::MatrixXd& decoded, const LabeledDataset& ds,
                    const SessionDataset& session, EvalReference reference) {
    if (decoded.rows() != ds.features.rows())
        throw Error("domain", "decoded stream does not match the dataset");
    if (ds.test_trials.empty()) throw Error("domain", "test split is empty");

    const Eigen::Index n = session.virtual_stream.frame_count();
    Eigen::Matrix<double, 1, kNumDofs> sq_sum = Eigen::Matrix<double, 1, kNumDofs>::Zero();
    Eigen::Index frames = 0;
    for (int trial : ds.test_trials) {
        const auto rows = trial_rows(session.trials.at(static_cast<size_t>(trial)), ds, n);
        for (Eigen::Index r = rows.first; r < rows.second; ++r) {
            for (int d = 0; d < kNumDofs; ++d) {
                const double ref =
                    reference == EvalReference::TrainingLabels
                        ? ds.labels(r, d)
                        : static_cast<double>(
                              session.true_stream.value(r + ds.time_offset_frames, d));
                const double e = decoded(r, d) - ref;
                sq_sum(d) += e * e;
            }
            ++frames;
        }
    }
    if (frames == 0) throw Error("domain", "test split contains no frames");

    EvalResult result;
    result.frames = frames;
    result.per_dof = (sq_sum / static_cast<double>(frames)).cwiseSqrt();
    result.rmse_normalized = std::sqrt(sq_sum.sum() / static_cast<double>(frames * kNumDofs));
    result.rmse_percent = result.rmse_normalized * 100.0 / 2.0;
    return result;
}

namespace {

std::string hex_float(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
    return std::string(buf, res.ptr);
}

double parse_hex_float(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IoError("bad hex float in model file: " + s);
    return v;
}

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    ordered_json data = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(hex_float(m(r, c)));
    return ordered_json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<size_t>(rows * cols))
        throw IoError("model matrix shape mismatch");
    Eigen::MatrixXd m(rows, cols);
    size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_hex_float(data.at(i++).get<std::string>());
    return m;
}

}  // namespace

void write_model(const DecoderModel& model, const std::filesystem::path& file,
                 const std::string& config_echo) {
    ordered_json j;
    j["format"] = "mirrortrain-model/1";
    j["A"] = matrix_to_json(model.A);
    j["W"] = matrix_to_json(model.W);
    j["C"] = matrix_to_json(model.C);
    j["Q"] = matrix_to_json(model.Q);
    j["lambda"] = hex_float(model.lambda);
    j["post"] = ordered_json{{"enabled", model.post.enabled},
                             {"deadband", model.post.deadband},
                             {"clamp", model.post.clamp}};
    j["channel_subset"] = model.channel_subset;
    j["config"] = config_echo.empty() ? ordered_json() : ordered_json::parse(config_echo);

    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out << j.dump() << '\n';
    if (!out) throw IoError("failed writing " + file.string());
}

DecoderModel read_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    ordered_json j;
    try {
        j = ordered_json::parse(in);
        DecoderModel model;
        if (j.at("format").get<std::string>() != "mirrortrain-model/1")
            throw IoError(file.string() + ": unknown model format");
        model.A = matrix_from_json(j.at("A"));
        model.W = matrix_from_json(j.at("W"));
        model.C = matrix_from_json(j.at("C"));
        model.Q = matrix_from_json(j.at("Q"));
        model.lambda = parse_hex_float(j.at("lambda").get<std::string>());
        model.post.enabled = j.at("post").at("enabled").get<bool>();
        model.post.deadband = j.at("post").at("deadband").get<double>();
        model.post.clamp = j.at("post").at("clamp").get<double>();
        model.channel_subset = j.at("channel_subset").get<std::vector<int>>();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    }
}

}  // namespace mirrortrain
