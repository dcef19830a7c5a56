// oqw: command-line front end. One subcommand per run mode; every mode reads
// a JSON config, applies overrides, and writes its outputs plus the resolved
// config under the output directory.
#include "oqw/config.hpp"
#include "oqw/io.hpp"
#include "oqw/observables.hpp"
#include "oqw/ode.hpp"
#include "oqw/table.hpp"
#include "oqw/traj.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace {

using oqw::RunConfig;

struct CliArgs {
  std::string config_path;
  std::string out_dir;
  std::string seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CliArgs& args) {
  sub->add_option("--config", args.config_path, "JSON run configuration")->required();
  sub->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
  sub->add_option("--seed", args.seed, "base RNG seed (overrides run.base_seed)")
      ->check(CLI::Number);
  sub->add_option("--override", args.overrides,
                  "dotted.path=value applied to the config (repeatable)");
}

std::string out_path(const RunConfig& cfg, const std::string& suffix) {
  return (std::filesystem::path(cfg.out_dir) / (cfg.prefix + suffix)).string();
}

void write_and_note(const std::string& path, const std::string& content) {
  oqw::write_text_file(path, content);
  std::printf("wrote %s\n", path.c_str());
}

void gate_table(const oqw::TransitionTable& t) {
  const auto bad = oqw::validate_table(t);
  if (bad.empty()) return;
  double worst = 0.0;
  for (const auto& [node, defect] : bad) worst = std::max(worst, defect);
  throw std::runtime_error("transition table failed normalization at " +
                           std::to_string(bad.size()) + " node(s), worst defect " +
                           oqw::fmt_g17(worst) + " (tolerance " +
                           oqw::fmt_g17(oqw::default_norm_tol(t)) + ")");
}

oqw::WalkState initial_state(const RunConfig& cfg, const oqw::AssembledRun& a) {
  const oqw::Matrix rho0 = oqw::initial_state_named(cfg.initial_state, a.dim);
  return oqw::make_point_state(a.table.graph, cfg.initial_node, rho0);
}

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

void run_discrete(const RunConfig& cfg, const oqw::AssembledRun& a) {
  gate_table(a.table);
  const oqw::WalkState s0 = initial_state(cfg, a);
  oqw::MomentSeries ms;
  ms.keep_occupation = true;
  std::vector<oqw::WalkState> snaps;
  oqw::run_observe(a.table, s0, cfg.n_steps, cfg.record_every,
                   [&](long step, const oqw::WalkState& s) {
                     ms.push(static_cast<double>(step), s);
                     if (cfg.write_snapshots) snaps.push_back(s);
                   });
  write_and_note(out_path(cfg, "-moments.csv"), oqw::moments_csv(ms, cfg.config_hash));
  if (cfg.write_snapshots)
    write_and_note(out_path(cfg, "-snapshots.csv"),
                   oqw::snapshots_csv(snaps, cfg.config_hash, false));
  std::printf("final: step=%ld mu=%.10g var=%.10g total_trace=%.12g\n", cfg.n_steps,
              ms.mu.back(), ms.var.back(), ms.total_trace.back());
}

void run_continuous(const RunConfig& cfg, const oqw::AssembledRun& a) {
  if (!a.has_generator)
    throw std::runtime_error("continuous mode needs a model, not a bare table");
  const oqw::WalkState s0 = initial_state(cfg, a);
  oqw::IntegratorConfig ic{cfg.dt, cfg.scheme, cfg.t_final, cfg.record_every};
  oqw::MomentSeries ms;
  ms.keep_occupation = true;
  std::vector<oqw::WalkState> snaps;
  const oqw::IntegrationReport rep =
      oqw::integrate_observe(a.generator, s0, ic, [&](double t, const oqw::WalkState& s) {
        ms.push(t, s);
        if (cfg.write_snapshots) snaps.push_back(s);
      });
  write_and_note(out_path(cfg, "-moments.csv"), oqw::moments_csv(ms, cfg.config_hash));
  if (cfg.write_snapshots)
    write_and_note(out_path(cfg, "-snapshots.csv"),
                   oqw::snapshots_csv(snaps, cfg.config_hash, true));
  std::printf("integration: max_trace_dev=%.3g min_block_eigenvalue=%.3g\n", rep.max_trace_dev,
              rep.min_block_eigenvalue);
  std::printf("final: t=%.10g mu=%.10g var=%.10g coherence_x=%.10g\n", ms.times.back(),
              ms.mu.back(), ms.var.back(), ms.coherence_x.back());
}

void run_trajectories(const RunConfig& cfg, const oqw::AssembledRun& a) {
  gate_table(a.table);
  const oqw::Matrix rho0 = oqw::initial_state_named(cfg.initial_state, a.dim);
  const oqw::EnsembleStats st = oqw::run_ensemble(a.table, cfg.initial_node, rho0, cfg.n_steps,
                                                  cfg.n_traj, cfg.base_seed, cfg.record_every);
  write_and_note(out_path(cfg, "-ensemble.csv"), oqw::ensemble_csv(st, cfg.config_hash));
  write_and_note(out_path(cfg, "-ensemble-stats.csv"),
                 oqw::ensemble_stats_csv(st, cfg.config_hash));
  const int keep = std::min<long>(cfg.record_trajectories, cfg.n_traj);
  for (int k = 0; k < keep; ++k) {
    // Same seeds as the first ensemble members, so these paths are the ones
    // the histogram already counted.
    const oqw::TrajectoryRecord tr = oqw::run_trajectory(
        a.table, cfg.initial_node, rho0, cfg.n_steps,
        cfg.base_seed + static_cast<std::uint64_t>(k), cfg.record_every);
    write_and_note(out_path(cfg, "-trajectory-" + std::to_string(k) + ".csv"),
                   oqw::trajectory_csv(tr, cfg.config_hash));
  }
  const double total = static_cast<double>(st.moves_up + st.moves_down + st.stays);
  std::printf("ensemble: n_traj=%d steps=%ld up=%.4f down=%.4f stay=%.4f max_prob_defect=%.3g\n",
              st.n_traj, cfg.n_steps, st.moves_up / total, st.moves_down / total,
              st.stays / total, st.max_prob_defect);
  std::printf("final: mean=%.10g var=%.10g\n", st.mean.back(), st.var.back());
}

void run_derive(const RunConfig& cfg, const oqw::AssembledRun& a) {
  const nlohmann::json j = oqw::table_to_json(
      a.table, oqw::normalization_name(cfg.normalization), cfg.config_hash);
  write_and_note(out_path(cfg, "-table.json"), j.dump(2) + "\n");
  const double worst = j.at("defects").at("max").get<double>();
  const auto bad = oqw::validate_table(a.table);
  std::printf("table: %d nodes, dim %d, max defect %.3g (tolerance %.3g) -> %s\n", a.nodes, a.dim,
              worst, oqw::default_norm_tol(a.table),
              bad.empty() ? "valid" : "NORMALIZATION VIOLATIONS");
}

void run_analyze(const RunConfig& cfg, const oqw::AssembledRun& a) {
  if (!a.has_generator || !a.has_ring_rates)
    throw std::runtime_error("analyze mode needs the circle-example model");
  const oqw::WalkState s0 = initial_state(cfg, a);
  oqw::IntegratorConfig ic{cfg.dt, cfg.scheme, cfg.t_final, cfg.record_every};
  oqw::MomentSeries ms;
  oqw::WalkState last;
  oqw::integrate_observe(a.generator, s0, ic, [&](double t, const oqw::WalkState& s) {
    ms.push(t, s);
    last = s;
  });
  const bool wrapped = oqw::edge_mass(last, std::min(10, a.nodes / 2)) > 1e-9;
  const double f_mu = oqw::fit_asymptotic_slope(ms.times, ms.mu, cfg.window_fraction);
  const double f_var = oqw::fit_asymptotic_slope(ms.times, ms.var, cfg.window_fraction);

  const oqw::AsymptoticRates ar = oqw::analytic_rates(a.gamma, a.lambda, a.n_mean);
  const oqw::CollectiveSeries oc =
      oqw::collective_oracle(a.gamma, a.lambda, a.n_mean, cfg.oracle_t_final, cfg.oracle_dt,
                             static_cast<double>(cfg.initial_node));
  const double o_mu = oqw::fit_asymptotic_slope(oc.times, oc.mu, cfg.window_fraction);
  const double o_var = oqw::fit_asymptotic_slope(oc.times, oc.var, cfg.window_fraction);

  nlohmann::json out;
  out["config_hash"] = cfg.config_hash;
  out["analytic"] = oqw::rates_to_json(ar);
  out["v_sigma2_alt_series"] = oqw::variance_rate_alt_series(a.gamma, a.lambda, a.n_mean);
  out["fitted"] = {{"v_mu", f_mu},
                   {"v_sigma2", f_var},
                   {"window_fraction", cfg.window_fraction},
                   {"wrapped", wrapped}};
  out["oracle"] = {{"v_mu", o_mu},
                   {"v_sigma2", o_var},
                   {"t_final", cfg.oracle_t_final},
                   {"dt", cfg.oracle_dt}};
  write_and_note(out_path(cfg, "-rates.json"), out.dump(2) + "\n");
  write_and_note(out_path(cfg, "-moments.csv"), oqw::moments_csv(ms, cfg.config_hash));
  if (wrapped)
    std::printf("warning: walk reached the index boundary; fitted slopes are unreliable\n");
  std::printf("rates: fitted v_mu=%.8g v_sigma2=%.8g | analytic v_mu=%.8g v_sigma2=%.8g\n", f_mu,
              f_var, ar.v_mu, ar.v_sigma2);
  std::printf("oracle: v_mu=%.8g v_sigma2=%.8g\n", o_mu, o_var);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open quantum walk simulator"};
  app.require_subcommand(1);
  CliArgs args;
  struct SubDef {
    const char* name;
    const char* help;
    oqw::RunMode mode;
  };
  const SubDef defs[] = {
      {"discrete", "iterate the transition table", oqw::RunMode::discrete},
      {"continuous", "integrate the continuous-time generator", oqw::RunMode::continuous},
      {"trajectories", "sample stochastic trajectories", oqw::RunMode::trajectories},
      {"derive", "emit the derived transition table as JSON", oqw::RunMode::derive},
      {"analyze", "fit transport rates and compare with closed forms", oqw::RunMode::analyze},
  };
  for (const SubDef& d : defs) add_common(app.add_subcommand(d.name, d.help), args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const CLI::App* sub = app.get_subcommands().front();
    oqw::RunMode mode = oqw::RunMode::discrete;
    for (const SubDef& d : defs)
      if (sub->get_name() == d.name) mode = d.mode;

    nlohmann::json j = nlohmann::json::parse(oqw::read_text_file(args.config_path), nullptr, false);
    if (j.is_discarded())
      throw std::invalid_argument("config: '" + args.config_path + "' is not valid JSON");
    for (const std::string& ov : args.overrides) oqw::apply_override(j, ov);
    if (!args.out_dir.empty()) {
      if (!j.contains("output") || !j["output"].is_object()) j["output"] = nlohmann::json::object();
      j["output"]["dir"] = args.out_dir;
    }
    if (!args.seed.empty()) {
      if (!j.contains("run") || !j["run"].is_object()) j["run"] = nlohmann::json::object();
      j["run"]["base_seed"] = std::stoull(args.seed);
    }
    if (j.contains("mode")) {
      const std::string given = j["mode"].is_string() ? j["mode"].get<std::string>() : j["mode"].dump();
      if (given != oqw::mode_name(mode))
        throw std::invalid_argument("config: mode '" + given + "' does not match subcommand '" +
                                    oqw::mode_name(mode) + "'");
    } else {
      j["mode"] = oqw::mode_name(mode);
    }

    const RunConfig cfg = oqw::parse_config(j);
    const oqw::AssembledRun a = oqw::assemble_run(cfg);
    oqw::ensure_dir(cfg.out_dir);
    std::printf("mode: %s | model: %d nodes, dim %d | config-hash: %s\n",
                oqw::mode_name(cfg.mode), a.nodes, a.dim, cfg.config_hash.c_str());
    // The hash covers exactly these bytes (minus the trailing newline).
    oqw::write_text_file(out_path(cfg, "-resolved-config.json"), cfg.resolved.dump() + "\n");
    std::printf("wrote %s\n", out_path(cfg, "-resolved-config.json").c_str());

    switch (cfg.mode) {
      case oqw::RunMode::discrete: run_discrete(cfg, a); break;
      case oqw::RunMode::continuous: run_continuous(cfg, a); break;
      case oqw::RunMode::trajectories: run_trajectories(cfg, a); break;
      case oqw::RunMode::derive: run_derive(cfg, a); break;
      case oqw::RunMode::analyze: run_analyze(cfg, a); break;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
