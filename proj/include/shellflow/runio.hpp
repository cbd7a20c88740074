#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "shellflow/config.hpp"
#include "shellflow/noise.hpp"
#include "shellflow/solver.hpp"

namespace shellflow {

inline constexpr const char* kVersionTag = "shellflow 0.1.0";

/// Trajectory CSV: header "t,re_u1,im_u1,..."; '.' decimal, ',' separator,
/// %.17g fields so identical runs are byte-identical.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& file);

/// Binary path dump: magic "SFNB", u32 version, f64 hurst, f64 horizon,
/// u64 m (grid cells), u64 dim, then (m+1) x dim row-major little-endian
/// f64 values.
void write_path_binary(const HilbertPath& path, const std::filesystem::path& file);
HilbertPath read_path_binary(const std::filesystem::path& file);

/// CSV mirror of the binary dump: header "t,w1,w2,...".
void write_path_csv(const HilbertPath& path, const std::filesystem::path& file);

/// FNV-1a 64-bit digest of a file, hex-encoded.
std::string file_digest(const std::filesystem::path& file);

/// runs/<UTC stamp>-<seed>/ under the output root (SHELLFLOW_OUT overrides
/// the default "runs").
std::filesystem::path make_run_dir(std::uint64_t seed);

/// manifest.json: config snapshot, seed, version tag, per-file digests,
/// wall-clock, pass/fail summary. Emitted exactly once per run.
void write_manifest(const std::filesystem::path& run_dir, const Config& cfg,
                    std::uint64_t seed, bool pass, double wall_ms,
                    const std::vector<std::filesystem::path>& outputs,
                    const std::string& extra_json = "{}");

}  // namespace shellflow
