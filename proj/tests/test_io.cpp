#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mirrortrain/emgsim.hpp"
#include "mirrortrain/error.hpp"
#include "mirrortrain/humansim.hpp"
#include "mirrortrain/protocol.hpp"
#include "mirrortrain/session_io.hpp"

using namespace mirrortrain;

namespace {

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::filesystem::path fresh_dir(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// A short but fully populated recording: two movements, two trials each,
// mild imperfections, real synthesized EMG.
struct SmallRecording {
    SessionDataset session;
    GroundTruthLog log;
};

SmallRecording small_recording(std::uint64_t seed = 42) {
    const std::vector<MovementSpec> catalog = {
        MovementSpec{"index_flexion", {{2, +1}}, 1.0},
        MovementSpec{"wrist_extension", {{6, -1}}, 1.0}};
    TrialTimingParams timing;
    timing.trials_per_movement = 2;
    timing.initial_rest = 2.0;

    const VirtualSession virt = generate_virtual_stream(catalog, timing);

    ImperfectionParams params;
    params.coupling_matrix = uniform_coupling(0.1);
    params.drift_step_sigma = 0.01;
    params.drift_clamp = 0.1;
    params.reaction_delay_mean = 0.05;
    params.reaction_delay_sd = 0.01;
    params.magnitude_gain_mean = 1.0;
    params.magnitude_gain_sd = 0.05;
    params.mirror_timing_jitter_sd = 0.02;
    params.mirror_magnitude_sd = 0.1;
    params.mirror_rest_offset_sigma = 0.002;
    params.validate();

    const RngKey key(seed);
    TrueSimResult truth = simulate_true_stream(virt, catalog, params, key);
    const KinematicStream contra =
        simulate_contralateral_stream(virt, catalog, params, truth.log, key);

    EmgModelParams emg_params;
    emg_params.synergy_matrix = default_synergy_matrix();

    SmallRecording rec;
    rec.session.participant_id = "p01";
    rec.session.seed = seed;
    rec.session.timing = timing;
    rec.session.movements = catalog;
    rec.session.trials = virt.trials;
    rec.session.virtual_stream = virt.stream;
    rec.session.true_stream = truth.stream;
    rec.session.contra_stream = contra;
    rec.session.emg = synthesize_emg(truth.motion, emg_params, key.derive(rng_tag("emg")));
    rec.session.baseline_begin = 0.0;
    rec.session.baseline_end = timing.initial_rest;
    rec.session.config_echo = R"({"probe":1})";
    rec.log = truth.log;
    rec.session.validate();
    return rec;
}

}  // namespace

TEST_CASE("nine significant digits round-trip binary32 exactly") {
    const RngKey key(77);
    int checked = 0;
    for (std::uint64_t c = 0; checked < 2000; ++c) {
        const auto bits = static_cast<std::uint32_t>(key.bits(c));
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) continue;
        ++checked;
        const std::string text = format_sig9(static_cast<double>(f));
        const float back = std::strtof(text.c_str(), nullptr);
        CHECK(back == f);
    }
    CHECK(format_sig9(0.0) == "0");
    CHECK(format_sig9(1.5) == "1.5");
    CHECK(format_sig9(-0.25) == "-0.25");
    // The 30 Hz timestamp grid survives the 9-digit truncation at the
    // reader's relative tolerance, even hours into a session.
    for (int i = 0; i < 100000; i += 997) {
        const double t = static_cast<double>(i) / kFrameRate;
        const double back = std::strtod(format_sig9(t).c_str(), nullptr);
        CHECK(std::abs(back - t) < 1e-6 * std::max(1.0, t));
    }
}

TEST_CASE("kinematics CSV round-trips bit-exactly") {
    const auto dir = fresh_dir("mirrortrain_io_kin");
    KinematicStream stream(Source::True, 200);
    const RngKey key(5);
    std::uint64_t c = 0;
    for (Eigen::Index i = 0; i < 200; ++i)
        for (int d = 0; d < kNumDofs; ++d)
            stream.value(i, d) = static_cast<float>(0.4 * key.gaussian(c++));

    const auto file = dir / "kin_true.csv";
    write_kinematics_csv(stream, file);
    const KinematicStream back = read_kinematics_csv(file, Source::True);
    CHECK(back.source() == Source::True);
    REQUIRE(back.frame_count() == 200);
    CHECK(back.matrix() == stream.matrix());

    // Writing the reloaded stream reproduces the same bytes.
    const auto file2 = dir / "again.csv";
    write_kinematics_csv(back, file2);
    CHECK(slurp(file) == slurp(file2));

    const std::string text = slurp(file);
    CHECK(text.rfind("t,dof0,dof1,dof2,dof3,dof4,dof5,dof6,dof7\n", 0) == 0);

    SUBCASE("malformed files are rejected") {
        spit(dir / "bad.csv", "time,stuff\n0,1\n");
        CHECK_THROWS_AS((void)read_kinematics_csv(dir / "bad.csv", Source::True), IoError);

        spit(dir / "short.csv", "t,dof0,dof1,dof2,dof3,dof4,dof5,dof6,dof7\n0,1,2,3\n");
        CHECK_THROWS_AS((void)read_kinematics_csv(dir / "short.csv", Source::True), IoError);

        spit(dir / "grid.csv",
             "t,dof0,dof1,dof2,dof3,dof4,dof5,dof6,dof7\n0.5,0,0,0,0,0,0,0,0\n");
        CHECK_THROWS_AS((void)read_kinematics_csv(dir / "grid.csv", Source::True), IoError);

        CHECK_THROWS_AS((void)read_kinematics_csv(dir / "missing.csv", Source::True), IoError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("EMG blocks round-trip bit-exactly") {
    const auto dir = fresh_dir("mirrortrain_io_emg");
    EmgBlock emg;
    emg.channels = 32;
    emg.sample_rate = 1000;
    const RngKey key(6);
    emg.samples.resize(32 * 50);
    for (size_t i = 0; i < emg.samples.size(); ++i)
        emg.samples[i] = static_cast<float>(key.gaussian(i));

    const auto file = dir / "emg.bin";
    write_emg(emg, file);
    const EmgBlock back = read_emg(file);
    CHECK(back.channels == emg.channels);
    CHECK(back.sample_rate == emg.sample_rate);
    CHECK(back.sample_count() == 50);
    CHECK(back.samples == emg.samples);

    SUBCASE("header and size corruption are caught") {
        std::string raw = slurp(file);

        std::string bad_magic = raw;
        bad_magic[0] = 'X';
        spit(dir / "magic.bin", bad_magic);
        CHECK_THROWS_AS((void)read_emg(dir / "magic.bin"), IoError);

        spit(dir / "trunc.bin", raw.substr(0, raw.size() - 5));
        CHECK_THROWS_AS((void)read_emg(dir / "trunc.bin"), IoError);

        std::string no_channels = raw;
        std::memset(no_channels.data() + 4, 0, 4);
        spit(dir / "chan.bin", no_channels);
        CHECK_THROWS_AS((void)read_emg(dir / "chan.bin"), IoError);

        spit(dir / "tiny.bin", "EMG1");
        CHECK_THROWS_AS((void)read_emg(dir / "tiny.bin"), IoError);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("session directories round-trip completely") {
    const auto dir = fresh_dir("mirrortrain_io_session");
    const SmallRecording rec = small_recording();

    write_session(rec.session, &rec.log, dir / "a");
    const SessionDataset back = read_session(dir / "a");

    CHECK(back.participant_id == rec.session.participant_id);
    CHECK(back.seed == rec.session.seed);
    CHECK(back.baseline_begin == rec.session.baseline_begin);
    CHECK(back.baseline_end == rec.session.baseline_end);
    CHECK(back.timing.ramp_up == rec.session.timing.ramp_up);
    CHECK(back.timing.hold == rec.session.timing.hold);
    CHECK(back.timing.ramp_down == rec.session.timing.ramp_down);
    CHECK(back.timing.iti == rec.session.timing.iti);
    CHECK(back.timing.initial_rest == rec.session.timing.initial_rest);
    CHECK(back.timing.trials_per_movement == rec.session.timing.trials_per_movement);

    REQUIRE(back.movements.size() == rec.session.movements.size());
    for (size_t m = 0; m < back.movements.size(); ++m) {
        CHECK(back.movements[m].name == rec.session.movements[m].name);
        CHECK(back.movements[m].peak_amplitude == rec.session.movements[m].peak_amplitude);
        REQUIRE(back.movements[m].targets.size() == rec.session.movements[m].targets.size());
        for (size_t t = 0; t < back.movements[m].targets.size(); ++t) {
            CHECK(back.movements[m].targets[t].dof == rec.session.movements[m].targets[t].dof);
            CHECK(back.movements[m].targets[t].direction ==
                  rec.session.movements[m].targets[t].direction);
        }
    }

    REQUIRE(back.trials.size() == rec.session.trials.size());
    for (size_t t = 0; t < back.trials.size(); ++t) {
        CHECK(back.trials[t].movement == rec.session.trials[t].movement);
        CHECK(back.trials[t].trial_index == rec.session.trials[t].trial_index);
        CHECK(back.trials[t].t_start == rec.session.trials[t].t_start);
        CHECK(back.trials[t].t_end == rec.session.trials[t].t_end);
        CHECK(back.trials[t].iti_begin == rec.session.trials[t].iti_begin);
        CHECK(back.trials[t].iti_end == rec.session.trials[t].iti_end);
    }

    CHECK(back.virtual_stream.matrix() == rec.session.virtual_stream.matrix());
    CHECK(back.true_stream.matrix() == rec.session.true_stream.matrix());
    CHECK(back.contra_stream.matrix() == rec.session.contra_stream.matrix());
    CHECK(back.emg.samples == rec.session.emg.samples);

    // The config echo is stored canonically, so it reads back as the
    // pretty-printed form of the same document.
    CHECK(back.config_echo == nlohmann::ordered_json::parse(rec.session.config_echo).dump(2));

    SUBCASE("writing is deterministic and reload-stable") {
        write_session(rec.session, &rec.log, dir / "b");
        for (const char* name : {"session.json", "kin_virtual.csv", "kin_true.csv",
                                 "kin_contralateral.csv", "emg.bin", "ground_truth.json"})
            CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));

        // A reloaded session writes the same bytes except for the config echo,
        // which was canonicalized on the first read.
        write_session(back, nullptr, dir / "c");
        for (const char* name :
             {"kin_virtual.csv", "kin_true.csv", "kin_contralateral.csv", "emg.bin"})
            CHECK(slurp(dir / "a" / name) == slurp(dir / "c" / name));
        SessionDataset again = read_session(dir / "c");
        CHECK(again.config_echo == back.config_echo);
        write_session(again, nullptr, dir / "d");
        CHECK(slurp(dir / "c" / "session.json") == slurp(dir / "d" / "session.json"));
    }

    SUBCASE("EMG is optional") {
        SessionDataset lean = rec.session;
        lean.emg = EmgBlock{};
        lean.emg.samples.clear();
        write_session(lean, nullptr, dir / "lean");
        CHECK_FALSE(std::filesystem::exists(dir / "lean" / "emg.bin"));
        const SessionDataset lean_back = read_session(dir / "lean");
        CHECK(lean_back.emg.samples.empty());
        CHECK_FALSE(read_ground_truth(dir / "lean").has_value());
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("ground truth logs round-trip exactly") {
    const auto dir = fresh_dir("mirrortrain_io_gt");
    const SmallRecording rec = small_recording(43);
    write_session(rec.session, &rec.log, dir);

    const auto back = read_ground_truth(dir);
    REQUIRE(back.has_value());
    REQUIRE(back->trials.size() == rec.log.trials.size());
    for (size_t t = 0; t < back->trials.size(); ++t) {
        const TrialTruth& a = back->trials[t];
        const TrialTruth& b = rec.log.trials[t];
        CHECK(a.delay == b.delay);
        CHECK(a.gain == b.gain);
        CHECK(a.mirror_shift == b.mirror_shift);
        CHECK(a.mirror_gain == b.mirror_gain);
        CHECK(a.truncated == b.truncated);
        for (int d = 0; d < kNumDofs; ++d) {
            const auto i = static_cast<size_t>(d);
            CHECK(a.coupling_peak[i] == b.coupling_peak[i]);
            CHECK(a.rest_offset[i] == b.rest_offset[i]);
            CHECK(a.contra_rest_offset[i] == b.contra_rest_offset[i]);
        }
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("session reading rejects inconsistent directories") {
    const auto dir = fresh_dir("mirrortrain_io_bad");
    const SmallRecording rec = small_recording(44);

    SUBCASE("missing directory") {
        CHECK_THROWS_AS((void)read_session(dir / "nowhere"), IoError);
    }
    SUBCASE("wrong format marker") {
        write_session(rec.session, nullptr, dir / "s");
        std::string meta = slurp(dir / "s" / "session.json");
        const auto pos = meta.find("mirrortrain-session/1");
        REQUIRE(pos != std::string::npos);
        meta.replace(pos, std::strlen("mirrortrain-session/1"), "someone-elses-format/3");
        spit(dir / "s" / "session.json", meta);
        CHECK_THROWS_AS((void)read_session(dir / "s"), IoError);
    }
    SUBCASE("unparseable metadata") {
        write_session(rec.session, nullptr, dir / "s");
        spit(dir / "s" / "session.json", "{not json");
        CHECK_THROWS_AS((void)read_session(dir / "s"), IoError);
    }
    SUBCASE("missing required keys") {
        write_session(rec.session, nullptr, dir / "s");
        spit(dir / "s" / "session.json", R"({"format":"mirrortrain-session/1"})");
        CHECK_THROWS_AS((void)read_session(dir / "s"), IoError);
    }
    SUBCASE("streams on different grids") {
        write_session(rec.session, nullptr, dir / "s");
        KinematicStream shorter(Source::True, rec.session.true_stream.frame_count() - 1);
        for (Eigen::Index i = 0; i < shorter.frame_count(); ++i)
            for (int d = 0; d < kNumDofs; ++d)
                shorter.value(i, d) = rec.session.true_stream.value(i, d);
        write_kinematics_csv(shorter, dir / "s" / "kin_true.csv");
        CHECK_THROWS_WITH_AS((void)read_session(dir / "s"),
                             "kinematic streams must share one frame grid", Error);
    }
    SUBCASE("EMG length disagrees with the schedule") {
        SessionDataset tampered = rec.session;
        tampered.emg.samples.resize(tampered.emg.samples.size() - 32 * 10);
        write_session(rec.session, nullptr, dir / "s");
        write_emg(tampered.emg, dir / "s" / "emg.bin");
        CHECK_THROWS_WITH_AS((void)read_session(dir / "s"),
                             "EMG sample count does not match session duration", Error);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("session validation catches overlapping trials") {
    SessionDataset s = small_recording(45).session;
    s.trials[1].t_start = s.trials[0].t_end - 0.5;
    CHECK_THROWS_WITH_AS(s.validate(), "trials overlap or are unsorted", Error);
}
