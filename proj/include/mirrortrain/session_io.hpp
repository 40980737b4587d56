#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "mirrortrain/humansim.hpp"
#include "mirrortrain/types.hpp"

namespace mirrortrain {

// Locale-independent shortest-faithful text forms. Nine significant digits
// round-trip binary32 exactly, which is why kinematic streams are float32.
std::string format_sig9(double value);
void append_sig9(std::string& out, double value);

// A session directory holds session.json, kin_virtual.csv, kin_true.csv,
// kin_contralateral.csv, emg.bin and optionally ground_truth.json. Writing
// the same dataset twice produces byte-identical files.
void write_session(const SessionDataset& session, const GroundTruthLog* log,
                   const std::filesystem::path& dir);

SessionDataset read_session(const std::filesystem::path& dir);

std::optional<GroundTruthLog> read_ground_truth(const std::filesystem::path& dir);

// emg.bin: magic "EMG1", u32 channel count, u32 sample rate, u64 sample
// count, then float32 samples in sample-major order, all little-endian.
void write_emg(const EmgBlock& emg, const std::filesystem::path& file);
EmgBlock read_emg(const std::filesystem::path& file);

// kin_<source>.csv: header "t,dof0,...,dof7", 9 significant digits per value.
void write_kinematics_csv(const KinematicStream& stream, const std::filesystem::path& file);
KinematicStream read_kinematics_csv(const std::filesystem::path& file, Source source);

}  // namespace mirrortrain
