#include "mirrortrain/session_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <system_error>

#include <json.hpp>

namespace mirrortrain {

using ordered_json = nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little,
              "the on-disk formats are little-endian; big-endian hosts are unsupported");

std::string format_sig9(double value) {
    std::string out;
    append_sig9(out, value);
    return out;
}

void append_sig9(std::string& out, double value) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 9);
    out.append(buf, res.ptr);
}

namespace {

std::string read_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot open " + file.string());
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + file.string());
    return content;
}

void write_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("failed writing " + file.string());
}

ordered_json timing_to_json(const TrialTimingParams& t) {
    return ordered_json{{"ramp_up", t.ramp_up},
                        {"hold", t.hold},
                        {"ramp_down", t.ramp_down},
                        {"iti", t.iti},
                        {"initial_rest", t.initial_rest},
                        {"trials_per_movement", t.trials_per_movement}};
}

TrialTimingParams timing_from_json(const ordered_json& j) {
    TrialTimingParams t;
    t.ramp_up = j.at("ramp_up").get<double>();
    t.hold = j.at("hold").get<double>();
    t.ramp_down = j.at("ramp_down").get<double>();
    t.iti = j.at("iti").get<double>();
    t.initial_rest = j.at("initial_rest").get<double>();
    t.trials_per_movement = j.at("trials_per_movement").get<int>();
    return t;
}

ordered_json movement_to_json(const MovementSpec& m) {
    ordered_json targets = ordered_json::array();
    for (const auto& t : m.targets)
        targets.push_back(ordered_json{{"dof", t.dof}, {"direction", t.direction}});
    return ordered_json{{"name", m.name}, {"targets", std::move(targets)},
                        {"peak_amplitude", m.peak_amplitude}};
}

MovementSpec movement_from_json(const ordered_json& j) {
    MovementSpec m;
    m.name = j.at("name").get<std::string>();
    for (const auto& t : j.at("targets"))
        m.targets.push_back({t.at("dof").get<int>(), t.at("direction").get<int>()});
    m.peak_amplitude = j.at("peak_amplitude").get<double>();
    return m;
}

template <size_t N>
ordered_json array_to_json(const std::array<double, N>& a) {
    ordered_json out = ordered_json::array();
    for (double v : a) out.push_back(v);
    return out;
}

template <size_t N>
std::array<double, N> array_from_json(const ordered_json& j) {
    if (j.size() != N) throw IoError("expected array of length " + std::to_string(N));
    std::array<double, N> out{};
    for (size_t i = 0; i < N; ++i) out[i] = j.at(i).get<double>();
    return out;
}

}  // namespace

void write_emg(const EmgBlock& emg, const std::filesystem::path& file) {
    std::string out;
    out.reserve(20 + emg.samples.size() * 4);
    out.append("EMG1", 4);
    const auto put_u32 = [&](std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
    put_u32(static_cast<std::uint32_t>(emg.channels));
    put_u32(static_cast<std::uint32_t>(emg.sample_rate));
    const std::uint64_t count = static_cast<std::uint64_t>(emg.sample_count());
    out.append(reinterpret_cast<const char*>(&count), 8);
    out.append(reinterpret_cast<const char*>(emg.samples.data()), emg.samples.size() * 4);
    write_file(file, out);
}

EmgBlock read_emg(const std::filesystem::path& file) {
    const std::string data = read_file(file);
    if (data.size() < 20 || data.compare(0, 4, "EMG1") != 0)
        throw IoError(file.string() + " is not an EMG1 file");
    EmgBlock emg;
    std::uint32_t channels = 0, rate = 0;
    std::uint64_t count = 0;
    std::memcpy(&channels, data.data() + 4, 4);
    std::memcpy(&rate, data.data() + 8, 4);
    std::memcpy(&count, data.data() + 12, 8);
    emg.channels = static_cast<int>(channels);
    emg.sample_rate = static_cast<int>(rate);
    if (channels == 0 || channels > 4096) throw IoError("implausible EMG channel count");
    const std::uint64_t values = count * channels;
    if (data.size() != 20 + values * 4) throw IoError(file.string() + " payload size mismatch");
    emg.samples.resize(values);
    std::memcpy(emg.samples.data(), data.data() + 20, values * 4);
    return emg;
}

void write_kinematics_csv(const KinematicStream& stream, const std::filesystem::path& file) {
    std::string out;
    out.reserve(static_cast<size_t>(stream.frame_count()) * 100 + 64);
    out += "t";
    for (int d = 0; d < kNumDofs; ++d) {
        out += ",dof";
        out += static_cast<char>('0' + d);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < stream.frame_count(); ++i) {
        append_sig9(out, stream.t(i));
        for (int d = 0; d < kNumDofs; ++d) {
            out += ',';
            append_sig9(out, static_cast<double>(stream.value(i, d)));
        }
        out += '\n';
    }
    write_file(file, out);
}

KinematicStream read_kinematics_csv(const std::filesystem::path& file, Source source) {
    const std::string data = read_file(file);
    size_t pos = data.find('\n');
    if (pos == std::string::npos) throw IoError(file.string() + " has no header");
    if (data.compare(0, pos, "t,dof0,dof1,dof2,dof3,dof4,dof5,dof6,dof7") != 0)
        throw IoError(file.string() + " has an unexpected header");
    ++pos;

    std::vector<std::array<float, kNumDofs>> rows;
    rows.reserve(16384);
    const char* const end = data.data() + data.size();
    const char* p = data.data() + pos;
    while (p < end) {
        const char* line_end = static_cast<const char*>(std::memchr(p, '\n', static_cast<size_t>(end - p)));
        if (line_end == nullptr) line_end = end;
        if (line_end == p) { ++p; continue; }

        double t = 0;
        auto res = std::from_chars(p, line_end, t);
        if (res.ec != std::errc()) throw IoError(file.string() + ": bad time value");
        p = res.ptr;
        std::array<float, kNumDofs> row{};
        for (int d = 0; d < kNumDofs; ++d) {
            if (p >= line_end || *p != ',') throw IoError(file.string() + ": expected 8 DOF columns");
            ++p;
            float v = 0;
            res = std::from_chars(p, line_end, v);
            if (res.ec != std::errc()) throw IoError(file.string() + ": bad angle value");
            p = res.ptr;
            row[static_cast<size_t>(d)] = v;
        }
        if (p != line_end) throw IoError(file.string() + ": trailing characters on a row");
        const double expected_t = static_cast<double>(rows.size()) / kFrameRate;
        // Relative tolerance: the 9-significant-digit writer keeps 5e-9
        // relative accuracy however long the session runs.
        if (std::abs(t - expected_t) > 1e-6 * std::max(1.0, expected_t))
            throw IoError(file.string() + ": frame timestamps are not a 30 Hz grid");
        rows.push_back(row);
        p = line_end + 1;
    }

    KinematicStream stream(source, static_cast<Eigen::Index>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (int d = 0; d < kNumDofs; ++d)
            stream.value(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<size_t>(d)];
    return stream;
}

void write_session(const SessionDataset& session, const GroundTruthLog* log,
                   const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    ordered_json meta;
    meta["format"] = "mirrortrain-session/1";
    meta["participant_id"] = session.participant_id;
    meta["seed"] = session.seed;
    meta["baseline"] = ordered_json{{"begin", session.baseline_begin}, {"end", session.baseline_end}};
    meta["timing"] = timing_to_json(session.timing);
    ordered_json movements = ordered_json::array();
    for (const auto& m : session.movements) movements.push_back(movement_to_json(m));
    meta["movements"] = std::move(movements);
    ordered_json trials = ordered_json::array();
    for (const auto& tr : session.trials)
        trials.push_back(ordered_json{{"movement", tr.movement},
                                      {"trial_index", tr.trial_index},
                                      {"t_start", tr.t_start},
                                      {"t_end", tr.t_end},
                                      {"iti_begin", tr.iti_begin},
                                      {"iti_end", tr.iti_end}});
    meta["trials"] = std::move(trials);
    meta["config"] =
        session.config_echo.empty() ? ordered_json() : ordered_json::parse(session.config_echo);
    write_file(dir / "session.json", meta.dump(2) + "\n");

    write_kinematics_csv(session.virtual_stream, dir / "kin_virtual.csv");
    write_kinematics_csv(session.true_stream, dir / "kin_true.csv");
    write_kinematics_csv(session.contra_stream, dir / "kin_contralateral.csv");
    if (!session.emg.samples.empty()) write_emg(session.emg, dir / "emg.bin");

    if (log != nullptr) {
        ordered_json gt;
        gt["format"] = "mirrortrain-ground-truth/1";
        ordered_json entries = ordered_json::array();
        for (const auto& t : log->trials)
            entries.push_back(ordered_json{{"delay", t.delay},
                                           {"gain", t.gain},
                                           {"mirror_shift", t.mirror_shift},
                                           {"mirror_gain", t.mirror_gain},
                                           {"truncated", t.truncated},
                                           {"coupling_peak", array_to_json(t.coupling_peak)},
                                           {"rest_offset", array_to_json(t.rest_offset)},
                                           {"contra_rest_offset", array_to_json(t.contra_rest_offset)}});
        gt["trials"] = std::move(entries);
        write_file(dir / "ground_truth.json", gt.dump(2) + "\n");
    }
}

SessionDataset read_session(const std::filesystem::path& dir) {
    ordered_json meta;
    try {
        meta = ordered_json::parse(read_file(dir / "session.json"));
    } catch (const nlohmann::json::exception& e) {
        throw IoError((dir / "session.json").string() + ": " + e.what());
    }
    try {
        if (meta.at("format").get<std::string>() != "mirrortrain-session/1")
            throw IoError(dir.string() + ": unknown session format");

        SessionDataset session;
        session.participant_id = meta.at("participant_id").get<std::string>();
        session.seed = meta.at("seed").get<std::uint64_t>();
        session.baseline_begin = meta.at("baseline").at("begin").get<double>();
        session.baseline_end = meta.at("baseline").at("end").get<double>();
        session.timing = timing_from_json(meta.at("timing"));
        for (const auto& m : meta.at("movements")) session.movements.push_back(movement_from_json(m));
        for (const auto& t : meta.at("trials")) {
            TrialRecord tr;
            tr.movement = t.at("movement").get<int>();
            tr.trial_index = t.at("trial_index").get<int>();
            tr.t_start = t.at("t_start").get<double>();
            tr.t_end = t.at("t_end").get<double>();
            tr.iti_begin = t.at("iti_begin").get<double>();
            tr.iti_end = t.at("iti_end").get<double>();
            session.trials.push_back(tr);
        }
        if (!meta.at("config").is_null()) session.config_echo = meta.at("config").dump(2);

        session.virtual_stream = read_kinematics_csv(dir / "kin_virtual.csv", Source::Virtual);
        session.true_stream = read_kinematics_csv(dir / "kin_true.csv", Source::True);
        session.contra_stream = read_kinematics_csv(dir / "kin_contralateral.csv", Source::Contralateral);
        if (std::filesystem::exists(dir / "emg.bin")) session.emg = read_emg(dir / "emg.bin");
        session.validate();
        return session;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(dir.string() + ": malformed session.json: " + e.what());
    }
}

std::optional<GroundTruthLog> read_ground_truth(const std::filesystem::path& dir) {
    const auto file = dir / "ground_truth.json";
    if (!std::filesystem::exists(file)) return std::nullopt;
    try {
        const ordered_json gt = ordered_json::parse(read_file(file));
        if (gt.at("format").get<std::string>() != "mirrortrain-ground-truth/1")
            throw IoError(file.string() + ": unknown ground-truth format");
        GroundTruthLog log;
        for (const auto& t : gt.at("trials")) {
            TrialTruth truth;
            truth.delay = t.at("delay").get<double>();
            truth.gain = t.at("gain").get<double>();
            truth.mirror_shift = t.at("mirror_shift").get<double>();
            truth.mirror_gain = t.at("mirror_gain").get<double>();
            truth.truncated = t.at("truncated").get<bool>();
            truth.coupling_peak = array_from_json<kNumDofs>(t.at("coupling_peak"));
            truth.rest_offset = array_from_json<kNumDofs>(t.at("rest_offset"));
            truth.contra_rest_offset = array_from_json<kNumDofs>(t.at("contra_rest_offset"));
            log.trials.push_back(truth);
        }
        return log;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(file.string() + ": " + e.what());
    }
}

}  // namespace mirrortrain
