#include "oqw/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace oqw {

// ---------------------------------------------------------------------------
// Formatting primitives
// ---------------------------------------------------------------------------

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

namespace {

std::string entry_columns(int dim) {
  std::string s;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      s += ",re" + std::to_string(r) + std::to_string(c);
      s += ",im" + std::to_string(r) + std::to_string(c);
    }
  return s;
}

void append_entries(std::string& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out += ',';
      out += fmt_g17(m(r, c).real());
      out += ',';
      out += fmt_g17(m(r, c).imag());
    }
}

std::string hash_header(const std::string& config_hash) {
  return "# config-hash: " + config_hash + "\n";
}

}  // namespace

std::string snapshots_csv(const std::vector<WalkState>& snaps, const std::string& config_hash,
                          bool time_axis) {
  if (snaps.empty()) throw std::invalid_argument("snapshots_csv: no snapshots");
  const int dim = snaps.front().dim;
  std::string out = hash_header(config_hash);
  out += std::string("# columns: ") + (time_axis ? "time" : "step") + ",node,trace" +
         entry_columns(dim) + "\n";
  for (const WalkState& s : snaps) {
    const std::string idx =
        time_axis ? fmt_g17(s.time) : std::to_string(static_cast<long long>(std::llround(s.time)));
    for (std::size_t n = 0; n < s.blocks.size(); ++n) {
      out += idx;
      out += ',' + std::to_string(n + 1);
      out += ',';
      out += fmt_g17(s.blocks[n].trace().real());
      append_entries(out, s.blocks[n]);
      out += '\n';
    }
  }
  return out;
}

std::string moments_csv(const MomentSeries& ms, const std::string& config_hash) {
  std::string out = hash_header(config_hash);
  out += "# columns: time,mu,var,coherence_x,total_trace";
  const std::size_t m = ms.keep_occupation && !ms.occupation.empty() ? ms.occupation[0].size() : 0;
  for (std::size_t i = 1; i <= m; ++i) out += ",p" + std::to_string(i);
  out += '\n';
  for (std::size_t k = 0; k < ms.times.size(); ++k) {
    out += fmt_g17(ms.times[k]);
    out += ',' + fmt_g17(ms.mu[k]);
    out += ',' + fmt_g17(ms.var[k]);
    out += ',' + fmt_g17(ms.coherence_x[k]);
    out += ',' + fmt_g17(ms.total_trace[k]);
    if (m) {
      for (double p : ms.occupation[k]) out += ',' + fmt_g17(p);
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const TrajectoryRecord& r, const std::string& config_hash) {
  std::string out = hash_header(config_hash);
  const int dim = r.points.empty() ? 0 : static_cast<int>(r.points.front().state.rows());
  out += "# columns: step,node,label,trace" + entry_columns(dim) + "\n";
  for (const TrajPoint& p : r.points) {
    out += std::to_string(p.step);
    out += ',' + std::to_string(p.node);
    out += ',' + p.label;
    out += ',';
    out += fmt_g17(p.state.trace().real());
    append_entries(out, p.state);
    out += '\n';
  }
  return out;
}

std::string ensemble_csv(const EnsembleStats& s, const std::string& config_hash) {
  std::string out = hash_header(config_hash);
  out += "# columns: step,node,count\n";
  for (std::size_t r = 0; r < s.record_steps.size(); ++r)
    for (std::size_t n = 0; n < s.histogram[r].size(); ++n) {
      out += std::to_string(s.record_steps[r]);
      out += ',' + std::to_string(n + 1);
      out += ',' + std::to_string(s.histogram[r][n]);
      out += '\n';
    }
  return out;
}

std::string ensemble_stats_csv(const EnsembleStats& s, const std::string& config_hash) {
  std::string out = hash_header(config_hash);
  out += "# columns: step,mean,var,n_traj\n";
  for (std::size_t r = 0; r < s.record_steps.size(); ++r) {
    out += std::to_string(s.record_steps[r]);
    out += ',' + fmt_g17(s.mean[r]);
    out += ',' + fmt_g17(s.var[r]);
    out += ',' + std::to_string(s.n_traj);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON table exchange
// ---------------------------------------------------------------------------

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json flat = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      flat.push_back({m(r, c).real(), m(r, c).imag()});
  return flat;
}

Matrix matrix_from_json(const nlohmann::json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
    throw std::invalid_argument("matrix_from_json: expected a flat list of rows*cols entries");
  Matrix m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++k) {
      const nlohmann::json& e = j[k];
      if (!e.is_array() || e.size() != 2)
        throw std::invalid_argument("matrix_from_json: each entry must be [re, im]");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  return m;
}

nlohmann::json table_to_json(const TransitionTable& t, const std::string& normalization,
                             const std::string& config_hash) {
  nlohmann::json j;
  j["config_hash"] = config_hash;
  j["dim"] = t.dim;
  j["nodes"] = t.graph.node_count;
  j["topology"] = topology_name(t.graph.tag);
  j["delta"] = t.delta;
  j["max_rate"] = t.max_rate;
  j["normalization"] = normalization;

  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t e = 0; e < t.graph.edges.size(); ++e) {
    nlohmann::json ops = nlohmann::json::array();
    for (const LabeledOp& lo : t.edge_ops[e])
      ops.push_back({{"label", lo.label}, {"matrix", matrix_to_json(lo.op)}});
    edges.push_back({{"from", t.graph.edges[e].first},
                     {"to", t.graph.edges[e].second},
                     {"ops", std::move(ops)}});
  }
  j["edges"] = std::move(edges);

  nlohmann::json loops = nlohmann::json::array();
  for (int n = 0; n < t.graph.node_count; ++n)
    loops.push_back({{"node", n + 1}, {"matrix", matrix_to_json(t.loop_ops[n])}});
  j["loops"] = std::move(loops);

  const std::vector<double> defects = normalization_defects(t);
  double worst = 0.0;
  for (double d : defects) worst = std::max(worst, d);
  j["defects"] = {{"per_node", defects}, {"max", worst}, {"tolerance", default_norm_tol(t)}};
  return j;
}

TransitionTable table_from_json(const nlohmann::json& j) {
  TransitionTable t;
  t.dim = j.at("dim").get<int>();
  const int nodes = j.at("nodes").get<int>();
  const std::string topo = j.at("topology").get<std::string>();
  const nlohmann::json& edges = j.at("edges");

  if (topo == "circle") {
    t.graph = make_circle(nodes);
  } else if (topo == "chain") {
    t.graph = make_chain(nodes);
  } else if (topo == "custom") {
    std::vector<std::pair<int, int>> pairs;
    for (const auto& e : edges)
      pairs.emplace_back(e.at("from").get<int>(), e.at("to").get<int>());
    t.graph = make_custom(nodes, pairs);
  } else {
    throw std::invalid_argument("table_from_json: unknown topology '" + topo + "'");
  }

  t.delta = j.value("delta", 0.0);
  t.max_rate = j.value("max_rate", 0.0);
  t.edge_ops.resize(t.graph.edges.size());
  for (const auto& e : edges) {
    const int idx = edge_index(t.graph, e.at("from").get<int>(), e.at("to").get<int>());
    if (idx < 0)
      throw std::invalid_argument("table_from_json: edge entry does not match the topology");
    for (const auto& op : e.at("ops"))
      t.edge_ops[idx].push_back(
          {matrix_from_json(op.at("matrix"), t.dim, t.dim), op.at("label").get<std::string>()});
  }

  t.loop_ops.assign(t.graph.node_count, Matrix());
  const nlohmann::json& loops = j.at("loops");
  if (static_cast<int>(loops.size()) != t.graph.node_count)
    throw std::invalid_argument("table_from_json: need one loop operator per node");
  for (const auto& l : loops) {
    const int n = l.at("node").get<int>();
    if (n < 1 || n > t.graph.node_count)
      throw std::invalid_argument("table_from_json: loop node out of range");
    t.loop_ops[n - 1] = matrix_from_json(l.at("matrix"), t.dim, t.dim);
  }
  for (const Matrix& l : t.loop_ops)
    if (l.rows() != t.dim)
      throw std::invalid_argument("table_from_json: a node is missing its loop operator");
  return t;
}

nlohmann::json rates_to_json(const AsymptoticRates& r) {
  return {{"gamma", r.gamma},       {"lambda", r.lambda},     {"n_mean", r.n_mean},
          {"omega_sq", r.omega_sq}, {"v_mu", r.v_mu},         {"v_sigma2", r.v_sigma2},
          {"z_steady", r.z_steady}, {"x_steady", r.x_steady}};
}

// ---------------------------------------------------------------------------
// Filesystem helpers
// ---------------------------------------------------------------------------

void ensure_dir(const std::string& path) {
  if (path.empty()) return;
  std::filesystem::create_directories(path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_text_file: cannot open " + path);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw std::runtime_error("write_text_file: failed writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_text_file: cannot open " + path);
  std::string s((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return s;
}

}  // namespace oqw
