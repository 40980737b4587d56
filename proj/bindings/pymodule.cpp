#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "mirrortrain/analysis.hpp"
#include "mirrortrain/config.hpp"
#include "mirrortrain/features.hpp"
#include "mirrortrain/runner.hpp"
#include "mirrortrain/stats.hpp"

namespace py = pybind11;
using namespace mirrortrain;

namespace {

ExperimentConfig config_from_json(const std::string& text) {
    ExperimentConfig config = parse_config(nlohmann::ordered_json::parse(text));
    config.validate();
    return config;
}

py::array_t<float> stream_array(const KinematicStream& stream) {
    py::array_t<float> out({stream.frame_count(), static_cast<Eigen::Index>(kNumDofs)});
    auto view = out.mutable_unchecked<2>();
    for (Eigen::Index i = 0; i < stream.frame_count(); ++i)
        for (int d = 0; d < kNumDofs; ++d) view(i, d) = stream.value(i, d);
    return out;
}

py::array_t<float> emg_array(const EmgBlock& emg) {
    py::array_t<float> out(
        {static_cast<Eigen::Index>(emg.sample_count()), static_cast<Eigen::Index>(emg.channels)});
    auto view = out.mutable_unchecked<2>();
    for (Eigen::Index s = 0; s < emg.sample_count(); ++s)
        for (int c = 0; c < emg.channels; ++c) view(s, c) = emg.at(s, c);
    return out;
}

py::list trials_list(const SessionDataset& session) {
    py::list trials;
    for (const auto& t : session.trials) {
        py::dict d;
        d["movement"] = session.movements.at(static_cast<size_t>(t.movement)).name;
        d["movement_index"] = t.movement;
        d["trial_index"] = t.trial_index;
        d["t_start"] = t.t_start;
        d["t_end"] = t.t_end;
        d["iti_begin"] = t.iti_begin;
        d["iti_end"] = t.iti_end;
        trials.append(std::move(d));
    }
    return trials;
}

py::dict session_dict(const SessionDataset& session) {
    py::dict d;
    d["participant_id"] = session.participant_id;
    d["seed"] = session.seed;
    d["virtual"] = stream_array(session.virtual_stream);
    d["true"] = stream_array(session.true_stream);
    d["contralateral"] = stream_array(session.contra_stream);
    d["emg"] = emg_array(session.emg);
    d["trials"] = trials_list(session);
    d["baseline"] = py::make_tuple(session.baseline_begin, session.baseline_end);
    return d;
}

std::vector<SessionDataset> cohort_sessions(const ExperimentConfig& config) {
    std::vector<SessionDataset> sessions;
    for (int i = 1; i <= config.cohort_size; ++i)
        sessions.push_back(simulate_participant(config, i).session);
    return sessions;
}

}  // namespace

PYBIND11_MODULE(_mirrortrain, m) {
    m.doc() = "synthetic mirrored-vs-mimicked myoelectric training toolkit";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            PyErr_SetString(PyExc_ValueError,
                            (e.category() + ": " + std::string(e.what())).c_str());
        }
    });

    m.def("default_config", [] { return default_config().canonical_echo(); },
          "canonical JSON text of the tuned default configuration");

    m.def(
        "simulate_session",
        [](const std::string& config_json, int index) {
            return session_dict(simulate_participant(config_from_json(config_json), index).session);
        },
        py::arg("config_json"), py::arg("index"),
        "simulate one participant; returns streams as numpy arrays");

    m.def(
        "analyze",
        [](const std::string& config_json) {
            const ExperimentConfig config = config_from_json(config_json);
            const auto outcome = analyze_cohort(cohort_sessions(config));
            return cohort_report_json(outcome.report).dump(2);
        },
        py::arg("config_json"), "simulate a cohort in memory and return the kinematic report JSON");

    m.def(
        "decode",
        [](const std::string& config_json) {
            const ExperimentConfig config = config_from_json(config_json);
            const auto outcome =
                decode_cohort(cohort_sessions(config), config.decoder, config.labeling,
                              config.jobs);
            return cohort_report_json(outcome.report).dump(2);
        },
        py::arg("config_json"),
        "simulate a cohort, train both paradigms per participant, return the decode report JSON");

    m.def(
        "run_full",
        [](const std::string& config_json, const std::string& out_dir) {
            ExperimentConfig config = config_from_json(config_json);
            config.output_dir = out_dir;
            cmd_full(config, out_dir);
        },
        py::arg("config_json"), py::arg("out_dir"),
        "full pipeline to disk: sessions, figures, models, combined report");

    m.def(
        "extract_features",
        [](py::array_t<float, py::array::c_style | py::array::forcecast> emg, int frame_count,
           double window) {
            const auto view = emg.unchecked<2>();
            EmgBlock block;
            block.channels = static_cast<int>(view.shape(1));
            block.samples.resize(static_cast<size_t>(view.shape(0) * view.shape(1)));
            for (py::ssize_t s = 0; s < view.shape(0); ++s)
                for (py::ssize_t c = 0; c < view.shape(1); ++c)
                    block.samples[static_cast<size_t>(s) * static_cast<size_t>(view.shape(1)) +
                                  static_cast<size_t>(c)] = view(s, c);
            return extract_features(block, frame_count, window).values;
        },
        py::arg("emg"), py::arg("frame_count"), py::arg("window") = 0.300,
        "mean-absolute-value features (frames x 528) from sample-major EMG");

    m.def(
        "t_test_one_sample",
        [](const std::vector<double>& values, double mu0) {
            const auto r = one_sample_ttest(values, mu0);
            return py::make_tuple(r.t, r.df, r.p);
        },
        py::arg("values"), py::arg("mu0") = 0.0);

    m.def(
        "t_test_paired",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = paired_ttest(a, b);
            return py::make_tuple(r.t, r.df, r.p);
        },
        py::arg("a"), py::arg("b"));

    m.def(
        "iqr_outlier_filter",
        [](const std::vector<double>& values) {
            const auto r = iqr_outlier_filter(values);
            return py::make_tuple(r.kept, r.removed);
        },
        py::arg("values"));

    m.def("deviation_percent", &deviation_percent, py::arg("pos"), py::arg("rest"));
}
