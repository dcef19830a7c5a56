#include "oqw/config.hpp"

#include "oqw/io.hpp"

#include <stdexcept>

namespace oqw {

const char* mode_name(RunMode m) {
  switch (m) {
    case RunMode::discrete: return "discrete";
    case RunMode::continuous: return "continuous";
    case RunMode::trajectories: return "trajectories";
    case RunMode::derive: return "derive";
    case RunMode::analyze: return "analyze";
  }
  return "discrete";
}

RunMode mode_from_name(const std::string& s) {
  if (s == "discrete") return RunMode::discrete;
  if (s == "continuous") return RunMode::continuous;
  if (s == "trajectories") return RunMode::trajectories;
  if (s == "derive") return RunMode::derive;
  if (s == "analyze") return RunMode::analyze;
  throw std::invalid_argument("config: unknown mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// Strict JSON access helpers
// ---------------------------------------------------------------------------

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("config: " + msg); }

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) fail("unknown key '" + (path.empty() ? it.key() : path + "." + it.key()) + "'");
  }
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &it.value();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path + " must be a number");
  return v.get<double>();
}

long as_integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path + " must be an integer");
  return v.get<long>();
}

bool as_boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path + " must be true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path + " must be a string");
  return v.get<std::string>();
}

// ---------------------------------------------------------------------------
// Model parsing
// ---------------------------------------------------------------------------

void parse_circle_params(const json& p, CircleParams& c) {
  check_keys(p, "params",
             {"nodes", "omega0", "gamma_se", "lambda", "field_dir", "n_mean", "delta"});
  if (const json* v = find(p, "nodes")) c.nodes = static_cast<int>(as_integer(*v, "params.nodes"));
  if (const json* v = find(p, "omega0")) c.omega0 = as_number(*v, "params.omega0");
  if (const json* v = find(p, "gamma_se")) c.gamma_se = as_number(*v, "params.gamma_se");
  if (const json* v = find(p, "lambda")) c.lambda = as_number(*v, "params.lambda");
  if (const json* v = find(p, "n_mean")) c.n_mean = as_number(*v, "params.n_mean");
  if (const json* v = find(p, "delta")) c.delta = as_number(*v, "params.delta");
  if (const json* v = find(p, "field_dir")) {
    if (!v->is_array() || v->size() != 3) fail("params.field_dir must be an array of 3 numbers");
    for (int i = 0; i < 3; ++i) c.field_dir[i] = as_number((*v)[i], "params.field_dir");
  }
}

void parse_chain_params(const json& p, ChainParams& c) {
  check_keys(p, "params",
             {"nodes", "eps0", "delta0", "gamma_se", "alpha", "beta", "n_mean", "delta"});
  if (const json* v = find(p, "nodes")) c.nodes = static_cast<int>(as_integer(*v, "params.nodes"));
  if (const json* v = find(p, "eps0")) c.eps0 = as_number(*v, "params.eps0");
  if (const json* v = find(p, "delta0")) c.delta0 = as_number(*v, "params.delta0");
  if (const json* v = find(p, "gamma_se")) c.gamma_se = as_number(*v, "params.gamma_se");
  if (const json* v = find(p, "alpha")) c.alpha = as_number(*v, "params.alpha");
  if (const json* v = find(p, "beta")) c.beta = as_number(*v, "params.beta");
  if (const json* v = find(p, "n_mean")) c.n_mean = as_number(*v, "params.n_mean");
  if (const json* v = find(p, "delta")) c.delta = as_number(*v, "params.delta");
}

BathSpec parse_bath(const json& b) {
  check_keys(b, "model.bath",
             {"gamma_se", "zero_temperature", "inv_temperature", "n_mean", "reference_frequency",
              "gamma_se_edges"});
  BathSpec s;
  if (const json* v = find(b, "gamma_se")) s.gamma_se = as_number(*v, "model.bath.gamma_se");
  if (const json* v = find(b, "zero_temperature"))
    s.zero_temperature = as_boolean(*v, "model.bath.zero_temperature");
  if (const json* v = find(b, "inv_temperature"))
    s.inv_temperature = as_number(*v, "model.bath.inv_temperature");
  if (const json* v = find(b, "n_mean")) s.n_mean = as_number(*v, "model.bath.n_mean");
  if (const json* v = find(b, "reference_frequency"))
    s.reference_frequency = as_number(*v, "model.bath.reference_frequency");
  if (const json* v = find(b, "gamma_se_edges")) {
    if (!v->is_array()) fail("model.bath.gamma_se_edges must be an array");
    for (const json& e : *v) {
      check_keys(e, "model.bath.gamma_se_edges", {"a", "b", "gamma_se"});
      const int a = static_cast<int>(as_integer(e.at("a"), "model.bath.gamma_se_edges.a"));
      const int bb = static_cast<int>(as_integer(e.at("b"), "model.bath.gamma_se_edges.b"));
      s.gamma_se_edges[{std::min(a, bb), std::max(a, bb)}] =
          as_number(e.at("gamma_se"), "model.bath.gamma_se_edges.gamma_se");
    }
  }
  validate_bath(s);
  return s;
}

std::vector<Matrix> parse_matrix_list(const json& v, const std::string& path, int count, int dim) {
  if (!v.is_array() || v.empty()) fail(path + " must be a non-empty array of matrices");
  if (v.size() != 1 && static_cast<int>(v.size()) != count)
    fail(path + " must hold 1 or " + std::to_string(count) + " matrices");
  std::vector<Matrix> out;
  out.reserve(count);
  for (const json& m : v) out.push_back(matrix_from_json(m, dim, dim));
  if (out.size() == 1) out.assign(count, out[0]);
  return out;
}

void parse_micro(const json& m, ModelChoice& out) {
  check_keys(m, "model",
             {"type", "topology", "nodes", "edges", "dim", "node_hamiltonians", "coins",
              "residual_hamiltonians", "bath", "delta"});
  const json* jd = find(m, "dim");
  if (!jd) fail("model.dim is required for a microscopic model");
  const int dim = static_cast<int>(as_integer(*jd, "model.dim"));
  if (dim < 1) fail("model.dim must be positive");

  const json* jn = find(m, "nodes");
  if (!jn) fail("model.nodes is required for a microscopic model");
  const int nodes = static_cast<int>(as_integer(*jn, "model.nodes"));

  const json* jt = find(m, "topology");
  const std::string topo = jt ? as_string(*jt, "model.topology") : "custom";
  if (topo == "circle") {
    out.micro.graph = make_circle(nodes);
  } else if (topo == "chain") {
    out.micro.graph = make_chain(nodes);
  } else if (topo == "custom") {
    const json* je = find(m, "edges");
    if (!je) fail("model.edges is required for a custom topology");
    if (!je->is_array()) fail("model.edges must be an array of [from, to] pairs");
    std::vector<std::pair<int, int>> pairs;
    for (const json& e : *je) {
      if (!e.is_array() || e.size() != 2) fail("model.edges entries must be [from, to] pairs");
      pairs.emplace_back(static_cast<int>(as_integer(e[0], "model.edges")),
                         static_cast<int>(as_integer(e[1], "model.edges")));
    }
    out.micro.graph = make_custom(nodes, pairs);
  } else {
    fail("model.topology must be circle, chain, or custom");
  }

  const json* jh = find(m, "node_hamiltonians");
  if (!jh) fail("model.node_hamiltonians is required for a microscopic model");
  out.micro.node_hamiltonians = parse_matrix_list(*jh, "model.node_hamiltonians", nodes, dim);
  if (const json* jr = find(m, "residual_hamiltonians"))
    out.micro.residual_hamiltonians =
        parse_matrix_list(*jr, "model.residual_hamiltonians", nodes, dim);

  const json* jc = find(m, "coins");
  if (!jc) fail("model.coins is required for a microscopic model");
  if (!jc->is_array()) fail("model.coins must be an array");
  for (const json& c : *jc) {
    check_keys(c, "model.coins", {"from", "to", "matrix"});
    const int from = static_cast<int>(as_integer(c.at("from"), "model.coins.from"));
    const int to = static_cast<int>(as_integer(c.at("to"), "model.coins.to"));
    out.micro.coins[{from, to}] = matrix_from_json(c.at("matrix"), dim, dim);
  }

  const json* jb = find(m, "bath");
  if (!jb) fail("model.bath is required for a microscopic model");
  out.micro.bath = parse_bath(*jb);

  const json* jdl = find(m, "delta");
  if (!jdl) fail("model.delta is required for a microscopic model");
  out.micro_delta = as_number(*jdl, "model.delta");
  if (!(out.micro_delta > 0.0)) fail("model.delta must be positive");
}

void parse_table_model(const json& m, ModelChoice& out) {
  check_keys(m, "model", {"type", "path", "inline"});
  const json* jp = find(m, "path");
  const json* ji = find(m, "inline");
  if ((jp != nullptr) == (ji != nullptr))
    fail("model needs exactly one of 'path' or 'inline' for type table");
  if (jp) {
    out.table_path = as_string(*jp, "model.path");
    std::string text;
    try {
      text = read_text_file(out.table_path);
    } catch (const std::exception&) {
      fail("model.path: cannot read '" + out.table_path + "'");
    }
    json tj = json::parse(text, nullptr, false);
    if (tj.is_discarded()) fail("model.path: '" + out.table_path + "' is not valid JSON");
    out.table = table_from_json(tj);
  } else {
    out.table = table_from_json(*ji);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// parse_config
// ---------------------------------------------------------------------------

RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) fail("top level must be an object");
  check_keys(j, "",
             {"mode", "model", "params", "normalization", "initial", "run", "analyze", "output"});
  RunConfig cfg;

  if (const json* v = find(j, "mode")) {
    cfg.mode = mode_from_name(as_string(*v, "mode"));
    cfg.mode_given = true;
  }

  // --- model -------------------------------------------------------------
  json model_echo = "circle-example";
  if (const json* jm = find(j, "model")) {
    if (jm->is_string()) {
      const std::string name = jm->get<std::string>();
      if (name == "circle-example") {
        cfg.model.kind = ModelChoice::Kind::circle;
      } else if (name == "chain-example") {
        cfg.model.kind = ModelChoice::Kind::chain;
      } else {
        fail("unknown model preset '" + name + "' (use circle-example or chain-example)");
      }
      model_echo = name;
    } else if (jm->is_object()) {
      const json* jt = find(*jm, "type");
      if (!jt) fail("model.type is required for an object model");
      const std::string type = as_string(*jt, "model.type");
      if (type == "microscopic") {
        cfg.model.kind = ModelChoice::Kind::microscopic;
        parse_micro(*jm, cfg.model);
      } else if (type == "table") {
        cfg.model.kind = ModelChoice::Kind::table;
        parse_table_model(*jm, cfg.model);
      } else {
        fail("model.type must be 'microscopic' or 'table'");
      }
      model_echo = *jm;
    } else {
      fail("model must be a string or an object");
    }
  }

  // --- params (presets only) ----------------------------------------------
  if (const json* p = find(j, "params")) {
    if (!p->is_object()) fail("params must be an object");
    if (cfg.model.kind == ModelChoice::Kind::circle) {
      parse_circle_params(*p, cfg.model.circle);
    } else if (cfg.model.kind == ModelChoice::Kind::chain) {
      parse_chain_params(*p, cfg.model.chain);
    } else if (!p->empty()) {
      fail("params only apply to the named model presets");
    }
  }

  // --- normalization -------------------------------------------------------
  if (const json* v = find(j, "normalization")) {
    const std::string n = as_string(*v, "normalization");
    if (n == "truncated") {
      cfg.normalization = TableNormalization::truncated;
    } else if (n == "exact") {
      cfg.normalization = TableNormalization::exact;
    } else {
      fail("normalization must be 'truncated' or 'exact'");
    }
  }

  const int nodes = cfg.model.kind == ModelChoice::Kind::circle ? cfg.model.circle.nodes
                    : cfg.model.kind == ModelChoice::Kind::chain ? cfg.model.chain.nodes
                    : cfg.model.kind == ModelChoice::Kind::microscopic
                        ? cfg.model.micro.graph.node_count
                        : cfg.model.table.graph.node_count;

  // --- initial --------------------------------------------------------------
  if (const json* v = find(j, "initial")) {
    check_keys(*v, "initial", {"node", "state"});
    if (const json* n = find(*v, "node"))
      cfg.initial_node = static_cast<int>(as_integer(*n, "initial.node"));
    if (const json* s = find(*v, "state")) cfg.initial_state = as_string(*s, "initial.state");
  }
  if (cfg.initial_node == 0) cfg.initial_node = (nodes + 1) / 2;
  if (cfg.initial_node < 1 || cfg.initial_node > nodes)
    fail("initial.node out of range (1.." + std::to_string(nodes) + ")");
  if (cfg.initial_state != "maximally-mixed" && cfg.initial_state != "ground" &&
      cfg.initial_state != "excited" && cfg.initial_state != "minus" &&
      cfg.initial_state != "plus")
    fail("initial.state must be one of maximally-mixed, ground, excited, minus, plus");

  // --- run -------------------------------------------------------------------
  if (const json* v = find(j, "run")) {
    check_keys(*v, "run",
               {"n_steps", "record_every", "t_final", "dt", "scheme", "n_traj", "base_seed",
                "record_trajectories"});
    if (const json* x = find(*v, "n_steps")) cfg.n_steps = as_integer(*x, "run.n_steps");
    if (const json* x = find(*v, "record_every"))
      cfg.record_every = as_integer(*x, "run.record_every");
    if (const json* x = find(*v, "t_final")) cfg.t_final = as_number(*x, "run.t_final");
    if (const json* x = find(*v, "dt")) cfg.dt = as_number(*x, "run.dt");
    if (const json* x = find(*v, "scheme")) {
      const std::string s = as_string(*x, "run.scheme");
      if (s == "euler") {
        cfg.scheme = Scheme::euler;
      } else if (s == "rk4") {
        cfg.scheme = Scheme::rk4;
      } else {
        fail("run.scheme must be 'euler' or 'rk4'");
      }
    }
    if (const json* x = find(*v, "n_traj"))
      cfg.n_traj = static_cast<int>(as_integer(*x, "run.n_traj"));
    if (const json* x = find(*v, "base_seed")) {
      if (x->is_number_unsigned()) {
        cfg.base_seed = x->get<std::uint64_t>();
      } else {
        const long s = as_integer(*x, "run.base_seed");
        if (s < 0) fail("run.base_seed must be non-negative");
        cfg.base_seed = static_cast<std::uint64_t>(s);
      }
    }
    if (const json* x = find(*v, "record_trajectories"))
      cfg.record_trajectories = static_cast<int>(as_integer(*x, "run.record_trajectories"));
  }
  if (cfg.n_steps < 0) fail("run.n_steps must be non-negative");
  if (cfg.record_every < 1) fail("run.record_every must be positive");
  if (!(cfg.t_final >= 0.0)) fail("run.t_final must be non-negative");
  if (!(cfg.dt > 0.0)) fail("run.dt must be positive");
  if (cfg.n_traj < 1) fail("run.n_traj must be positive");
  if (cfg.record_trajectories < 0) fail("run.record_trajectories must be non-negative");

  // --- analyze ----------------------------------------------------------------
  if (const json* v = find(j, "analyze")) {
    check_keys(*v, "analyze", {"window_fraction", "oracle_t_final", "oracle_dt"});
    if (const json* x = find(*v, "window_fraction"))
      cfg.window_fraction = as_number(*x, "analyze.window_fraction");
    if (const json* x = find(*v, "oracle_t_final"))
      cfg.oracle_t_final = as_number(*x, "analyze.oracle_t_final");
    if (const json* x = find(*v, "oracle_dt")) cfg.oracle_dt = as_number(*x, "analyze.oracle_dt");
  }
  if (!(cfg.window_fraction > 0.0 && cfg.window_fraction <= 1.0))
    fail("analyze.window_fraction must be in (0, 1]");
  if (!(cfg.oracle_t_final > 0.0)) fail("analyze.oracle_t_final must be positive");
  if (!(cfg.oracle_dt > 0.0)) fail("analyze.oracle_dt must be positive");

  // --- output ----------------------------------------------------------------
  if (const json* v = find(j, "output")) {
    check_keys(*v, "output", {"dir", "prefix", "write_snapshots"});
    if (const json* x = find(*v, "dir")) cfg.out_dir = as_string(*x, "output.dir");
    if (const json* x = find(*v, "prefix")) cfg.prefix = as_string(*x, "output.prefix");
    if (const json* x = find(*v, "write_snapshots"))
      cfg.write_snapshots = as_boolean(*x, "output.write_snapshots");
  }
  if (cfg.prefix.empty()) cfg.prefix = mode_name(cfg.mode);

  // --- resolved document and its hash ------------------------------------------
  json r;
  r["mode"] = mode_name(cfg.mode);
  r["model"] = model_echo;
  if (cfg.model.kind == ModelChoice::Kind::circle) {
    const CircleParams& c = cfg.model.circle;
    r["params"] = {{"nodes", c.nodes},   {"omega0", c.omega0}, {"gamma_se", c.gamma_se},
                   {"lambda", c.lambda}, {"field_dir", c.field_dir}, {"n_mean", c.n_mean},
                   {"delta", c.delta}};
  } else if (cfg.model.kind == ModelChoice::Kind::chain) {
    const ChainParams& c = cfg.model.chain;
    r["params"] = {{"nodes", c.nodes}, {"eps0", c.eps0},   {"delta0", c.delta0},
                   {"gamma_se", c.gamma_se}, {"alpha", c.alpha}, {"beta", c.beta},
                   {"n_mean", c.n_mean},     {"delta", c.delta}};
  }
  r["normalization"] = normalization_name(cfg.normalization);
  r["initial"] = {{"node", cfg.initial_node}, {"state", cfg.initial_state}};
  r["run"] = {{"n_steps", cfg.n_steps},
              {"record_every", cfg.record_every},
              {"t_final", cfg.t_final},
              {"dt", cfg.dt},
              {"scheme", scheme_name(cfg.scheme)},
              {"n_traj", cfg.n_traj},
              {"base_seed", cfg.base_seed},
              {"record_trajectories", cfg.record_trajectories}};
  r["analyze"] = {{"window_fraction", cfg.window_fraction},
                  {"oracle_t_final", cfg.oracle_t_final},
                  {"oracle_dt", cfg.oracle_dt}};
  r["output"] = {{"dir", cfg.out_dir},
                 {"prefix", cfg.prefix},
                 {"write_snapshots", cfg.write_snapshots}};
  cfg.resolved = r;
  cfg.config_hash = hex64(fnv1a64(r.dump()));
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail("invalid JSON");
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Overrides
// ---------------------------------------------------------------------------

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw std::invalid_argument("override: expected key=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;

  json* cur = &j;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = path.find('.', pos);
    const std::string key =
        dot == std::string::npos ? path.substr(pos) : path.substr(pos, dot - pos);
    if (key.empty())
      throw std::invalid_argument("override: empty key segment in '" + assignment + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = std::move(parsed);
      return;
    }
    if (!cur->contains(key) || !(*cur)[key].is_object()) (*cur)[key] = json::object();
    cur = &(*cur)[key];
    pos = dot + 1;
  }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

AssembledRun assemble_run(const RunConfig& cfg) {
  AssembledRun a;
  const bool exact = cfg.normalization == TableNormalization::exact;
  switch (cfg.model.kind) {
    case ModelChoice::Kind::circle: {
      const BuiltModel bm = build_circle_model(cfg.model.circle, cfg.normalization);
      a.generator = build_generator(bm.model);
      a.has_generator = true;
      a.table = exact ? discretize_exact(a.generator, cfg.model.circle.delta)
                      : discretize(a.generator, cfg.model.circle.delta);
      a.has_ring_rates = true;
      a.gamma = cfg.model.circle.gamma_se;
      a.lambda = cfg.model.circle.lambda;
      a.n_mean = cfg.model.circle.n_mean;
      break;
    }
    case ModelChoice::Kind::chain: {
      const BuiltModel bm = build_chain_model(cfg.model.chain, cfg.normalization);
      a.generator = build_generator(bm.model);
      a.has_generator = true;
      a.table = exact ? discretize_exact(a.generator, cfg.model.chain.delta)
                      : discretize(a.generator, cfg.model.chain.delta);
      break;
    }
    case ModelChoice::Kind::microscopic: {
      a.generator = build_generator(cfg.model.micro);
      a.has_generator = true;
      a.table = exact ? discretize_exact(a.generator, cfg.model.micro_delta)
                      : discretize(a.generator, cfg.model.micro_delta);
      break;
    }
    case ModelChoice::Kind::table:
      a.table = cfg.model.table;
      break;
  }
  a.dim = a.table.dim;
  a.nodes = a.table.graph.node_count;
  return a;
}

}  // namespace oqw
