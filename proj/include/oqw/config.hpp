// oqw/config.hpp: JSON run configuration. Parsing is strict (unknown keys are
// fatal, errors name the offending key), defaults are filled into a resolved
// JSON document whose FNV-1a hash tags every output file.
#pragma once

#include "oqw/models.hpp"
#include "oqw/ode.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>

namespace oqw {

enum class RunMode { discrete, continuous, trajectories, derive, analyze };
const char* mode_name(RunMode m);
RunMode mode_from_name(const std::string& s);

struct ModelChoice {
  enum class Kind { circle, chain, microscopic, table };
  Kind kind = Kind::circle;
  CircleParams circle;
  ChainParams chain;
  MicroscopicModel micro;      // kind == microscopic
  double micro_delta = 0.05;
  TransitionTable table;       // kind == table
  std::string table_path;      // empty when the table was inline
};

struct RunConfig {
  RunMode mode = RunMode::discrete;
  bool mode_given = false;

  ModelChoice model;
  TableNormalization normalization = TableNormalization::truncated;

  int initial_node = 0;  // resolved to the middle node when absent
  std::string initial_state = "maximally-mixed";

  long n_steps = 1000;
  long record_every = 10;
  double t_final = 50.0;
  double dt = 0.01;
  Scheme scheme = Scheme::rk4;
  int n_traj = 100;
  std::uint64_t base_seed = 1;
  int record_trajectories = 3;

  double window_fraction = 0.5;
  double oracle_t_final = 2000.0;
  double oracle_dt = 0.01;

  std::string out_dir = "out";
  std::string prefix;  // defaults to the mode name
  bool write_snapshots = true;

  nlohmann::json resolved;  // fully-defaulted config document
  std::string config_hash;  // hex64(fnv1a64(resolved.dump()))
};

// Strict parse of a config document. A {"type":"table","path":...} model is
// loaded from disk here, relative to the working directory.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);

// Applies "dotted.path=value" onto the raw document; the value is parsed as
// JSON when possible and taken as a string otherwise. Missing intermediate
// objects are created.
void apply_override(nlohmann::json& j, const std::string& assignment);

// Everything a run mode needs, built from the parsed config: the transition
// table (derived through the reduction pipeline for model-based configs) and,
// when the config describes a model rather than a bare table, the
// continuous-time generator.
struct AssembledRun {
  int dim = 0;
  int nodes = 0;
  TransitionTable table;
  bool has_generator = false;
  GeneratorSpec generator;
  bool has_ring_rates = false;  // closed-form transport rates apply
  double gamma = 0.0, lambda = 0.0, n_mean = 0.0;
};
AssembledRun assemble_run(const RunConfig& cfg);

}  // namespace oqw
