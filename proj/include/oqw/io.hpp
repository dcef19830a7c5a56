// oqw/io.hpp: deterministic text output (CSV, JSON) and small file helpers.
// Every emitted file starts with a "# config-hash: <hex>" comment so outputs
// can be traced back to the resolved configuration that produced them.
#pragma once

#include "oqw/observables.hpp"
#include "oqw/table.hpp"
#include "oqw/traj.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace oqw {

// Shortest-width 17-significant-digit decimal; round-trips every double.
std::string fmt_g17(double v);

// FNV-1a 64-bit over bytes, and its fixed-width hex rendering.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

// ---------------------------------------------------------------------------
// CSV writers (all return the full file contents)
// ---------------------------------------------------------------------------

// One row per (snapshot, node): index, node, trace, then Re/Im of every block
// entry in row-major order. time_axis selects a real "time" first column
// instead of an integer "step" column.
std::string snapshots_csv(const std::vector<WalkState>& snaps, const std::string& config_hash,
                          bool time_axis);

// One row per recorded time: time, mu, var, coherence_x, total_trace, then
// p1..pM when the series kept per-node occupation.
std::string moments_csv(const MomentSeries& ms, const std::string& config_hash);

// One row per recorded step of a single trajectory: step, node, label, trace,
// then Re/Im of the conditional block.
std::string trajectory_csv(const TrajectoryRecord& r, const std::string& config_hash);

// Histogram rows: step, node, count.
std::string ensemble_csv(const EnsembleStats& s, const std::string& config_hash);

// Summary rows: step, mean, var, n_traj.
std::string ensemble_stats_csv(const EnsembleStats& s, const std::string& config_hash);

// ---------------------------------------------------------------------------
// JSON table exchange
// ---------------------------------------------------------------------------

// Matrices serialize as flat row-major lists of [re, im] pairs; numbers are
// emitted so they parse back bit-identically.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols);

nlohmann::json table_to_json(const TransitionTable& t, const std::string& normalization,
                             const std::string& config_hash);
TransitionTable table_from_json(const nlohmann::json& j);

nlohmann::json rates_to_json(const AsymptoticRates& r);

// ---------------------------------------------------------------------------
// Filesystem helpers
// ---------------------------------------------------------------------------

void ensure_dir(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace oqw
