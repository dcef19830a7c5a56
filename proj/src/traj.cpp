#include "oqw/traj.hpp"

#include "oqw/linalg.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace oqw {

// ---------------------------------------------------------------------------
// Sampling kernel (templated so dimension-2 tables run on stack matrices)
// ---------------------------------------------------------------------------

namespace {

template <class Mat>
const Mat& loop_of(const CompiledTable& c, int j);
template <>
const Eigen::Matrix2cd& loop_of<Eigen::Matrix2cd>(const CompiledTable& c, int j) {
  return c.loops2[j];
}
template <>
const Matrix& loop_of<Matrix>(const CompiledTable& c, int j) {
  return c.loops[j];
}

template <class Mat>
const Mat& op_of(const CompiledTable::Branch& b);
template <>
const Eigen::Matrix2cd& op_of<Eigen::Matrix2cd>(const CompiledTable::Branch& b) {
  return b.op2;
}
template <>
const Matrix& op_of<Matrix>(const CompiledTable::Branch& b) {
  return b.op;
}

// Re tr(B rho B^dag) without forming the full candidate: with T = B rho the
// trace is sum_ik T_ik conj(B_ik).
template <class Mat>
double branch_prob(const Mat& op, const Mat& rho, Mat& tmp) {
  tmp.noalias() = op * rho;
  return tmp.cwiseProduct(op.conjugate()).sum().real();
}

struct StepOutcome {
  int node0 = 0;   // 0-indexed landing node
  int slot = -1;   // -1 loop, else index into the outgoing branch list
  double psum = 0.0;
};

template <class Mat>
StepOutcome kernel_step(const CompiledTable& c, int j, Mat& rho, SplitMix64& rng,
                        std::vector<double>& probs, Mat& tmp) {
  const auto& out = c.outgoing[j];
  const int nb = 1 + static_cast<int>(out.size());
  probs.resize(nb);
  probs[0] = std::max(0.0, branch_prob(loop_of<Mat>(c, j), rho, tmp));
  for (int k = 1; k < nb; ++k)
    probs[k] = std::max(0.0, branch_prob(op_of<Mat>(out[k - 1]), rho, tmp));
  double psum = 0.0;
  for (double p : probs) psum += p;
  if (psum < 1e-15)
    throw std::runtime_error("unravel_step: all outcome probabilities vanish");

  const double u = rng.next_double() * psum;
  int sel = nb - 1;
  double cum = 0.0;
  for (int k = 0; k < nb; ++k) {
    cum += probs[k];
    if (u < cum) {
      sel = k;
      break;
    }
  }
  if (probs[sel] <= 0.0)
    sel = static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());

  const Mat& op = sel == 0 ? loop_of<Mat>(c, j) : op_of<Mat>(out[sel - 1]);
  tmp.noalias() = op * rho;
  rho.noalias() = tmp * op.adjoint();
  const double tr = rho.trace().real();
  if (!(tr > 0.0))
    throw std::runtime_error("unravel_step: selected branch has non-positive weight");
  rho /= tr;

  StepOutcome o;
  o.node0 = sel == 0 ? j : out[sel - 1].target - 1;
  o.slot = sel - 1;
  o.psum = psum;
  return o;
}

// Nearest-neighbor move direction; the wrap step M -> 1 counts as up and
// 1 -> M as down so ring motion is classified like chain motion.
int move_sign(int nodes, int from0, int to0) {
  if (to0 == from0) return 0;
  const int d = to0 - from0;
  if (d == 1 || d == 1 - nodes) return 1;
  if (d == -1 || d == nodes - 1) return -1;
  return d > 0 ? 1 : -1;
}

Matrix normalized_initial(const CompiledTable& c, int start, const Matrix& rho0,
                          const char* who) {
  if (start < 1 || start > c.nodes)
    throw std::invalid_argument(std::string(who) + ": start node out of range");
  if (rho0.rows() != c.dim || rho0.cols() != c.dim)
    throw std::invalid_argument(std::string(who) + ": initial block dimension mismatch");
  if (!is_hermitian(rho0))
    throw std::invalid_argument(std::string(who) + ": initial block must be Hermitian");
  const double tr = rho0.trace().real();
  if (!(tr > 0.0))
    throw std::invalid_argument(std::string(who) + ": initial block must have positive trace");
  return rho0 / tr;
}

std::vector<long> make_record_steps(long n_steps, long record_every, const char* who) {
  if (n_steps < 0) throw std::invalid_argument(std::string(who) + ": n_steps must be non-negative");
  if (record_every <= 0)
    throw std::invalid_argument(std::string(who) + ": record_every must be positive");
  std::vector<long> steps{0};
  for (long k = record_every; k <= n_steps; k += record_every) steps.push_back(k);
  if (steps.back() != n_steps) steps.push_back(n_steps);
  return steps;
}

std::string branch_label(const CompiledTable& c, int from0, const StepOutcome& o) {
  if (o.slot < 0) return "stay";
  const auto& br = c.outgoing[from0][o.slot];
  std::string s = "to " + std::to_string(br.target);
  if (!br.label.empty()) s += " " + br.label;
  return s;
}

template <class Mat>
TrajectoryRecord walk_record(const CompiledTable& c, int start, const Matrix& rho0n, long n_steps,
                             std::uint64_t seed, long record_every) {
  const std::vector<long> rec = make_record_steps(n_steps, record_every, "run_trajectory");
  TrajectoryRecord r;
  r.seed = seed;
  SplitMix64 rng(seed);
  Mat rho = rho0n, tmp;
  std::vector<double> probs;
  int j = start - 1;
  r.points.push_back({0, start, -1, "start", Matrix(rho0n)});
  std::size_t ri = 1;
  for (long k = 1; k <= n_steps; ++k) {
    const int prev = j;
    const StepOutcome o = kernel_step(c, j, rho, rng, probs, tmp);
    j = o.node0;
    const int s = move_sign(c.nodes, prev, j);
    (s > 0 ? r.moves_up : s < 0 ? r.moves_down : r.stays) += 1;
    r.max_prob_defect = std::max(r.max_prob_defect, std::abs(o.psum - 1.0));
    if (ri < rec.size() && rec[ri] == k) {
      r.points.push_back({k, j + 1, o.slot, branch_label(c, prev, o), Matrix(rho)});
      ++ri;
    }
  }
  return r;
}

template <class Mat>
void walk_count(const CompiledTable& c, int start, const Matrix& rho0n, long n_steps,
                std::uint64_t seed, const std::vector<long>& rec,
                std::vector<std::vector<long>>& hist, long& up, long& down, long& stays,
                double& defect) {
  SplitMix64 rng(seed);
  Mat rho = rho0n, tmp;
  std::vector<double> probs;
  int j = start - 1;
  hist[0][j] += 1;
  std::size_t ri = 1;
  for (long k = 1; k <= n_steps; ++k) {
    const int prev = j;
    const StepOutcome o = kernel_step(c, j, rho, rng, probs, tmp);
    j = o.node0;
    const int s = move_sign(c.nodes, prev, j);
    (s > 0 ? up : s < 0 ? down : stays) += 1;
    defect = std::max(defect, std::abs(o.psum - 1.0));
    if (ri < rec.size() && rec[ri] == k) {
      hist[ri][j] += 1;
      ++ri;
    }
  }
}

int worker_count(int n_traj) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* env = std::getenv("OQW_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) hw = static_cast<unsigned>(std::min<long>(v, 1024));
  }
  return static_cast<int>(std::min<long>(hw, std::max(1, n_traj)));
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

UnravelOutcome unravel_step(const CompiledTable& c, int node, const Matrix& rho,
                            SplitMix64& rng) {
  if (node < 1 || node > c.nodes)
    throw std::invalid_argument("unravel_step: node out of range");
  if (rho.rows() != c.dim || rho.cols() != c.dim)
    throw std::invalid_argument("unravel_step: block dimension mismatch");
  Matrix state = rho, tmp;
  std::vector<double> probs;
  const StepOutcome o = kernel_step(c, node - 1, state, rng, probs, tmp);
  UnravelOutcome out;
  out.node = o.node0 + 1;
  out.state = std::move(state);
  out.op_slot = o.slot;
  out.prob_sum = o.psum;
  return out;
}

TrajectoryRecord run_trajectory(const TransitionTable& t, int start, const Matrix& rho0,
                                long n_steps, std::uint64_t seed, long record_every) {
  const CompiledTable c = compile(t);
  const Matrix rho0n = normalized_initial(c, start, rho0, "run_trajectory");
  if (c.dim == 2) return walk_record<Eigen::Matrix2cd>(c, start, rho0n, n_steps, seed, record_every);
  return walk_record<Matrix>(c, start, rho0n, n_steps, seed, record_every);
}

EnsembleStats run_ensemble(const TransitionTable& t, int start, const Matrix& rho0, long n_steps,
                           int n_traj, std::uint64_t base_seed, long record_every) {
  if (n_traj <= 0) throw std::invalid_argument("run_ensemble: n_traj must be positive");
  const CompiledTable c = compile(t);
  const Matrix rho0n = normalized_initial(c, start, rho0, "run_ensemble");
  const std::vector<long> rec = make_record_steps(n_steps, record_every, "run_ensemble");

  const int workers = worker_count(n_traj);
  struct Local {
    std::vector<std::vector<long>> hist;
    long up = 0, down = 0, stays = 0;
    double defect = 0.0;
    std::exception_ptr err;
  };
  std::vector<Local> locals(workers);
  for (Local& l : locals)
    l.hist.assign(rec.size(), std::vector<long>(c.nodes, 0));

  const auto job = [&](int w) {
    Local& l = locals[w];
    try {
      for (int idx = w; idx < n_traj; idx += workers) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(idx);
        if (c.dim == 2)
          walk_count<Eigen::Matrix2cd>(c, start, rho0n, n_steps, seed, rec, l.hist, l.up, l.down,
                                       l.stays, l.defect);
        else
          walk_count<Matrix>(c, start, rho0n, n_steps, seed, rec, l.hist, l.up, l.down, l.stays,
                             l.defect);
      }
    } catch (...) {
      l.err = std::current_exception();
    }
  };
  if (workers == 1) {
    job(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(job, w);
    for (std::thread& th : pool) th.join();
  }
  for (const Local& l : locals)
    if (l.err) std::rethrow_exception(l.err);

  EnsembleStats s;
  s.n_traj = n_traj;
  s.record_steps = rec;
  s.histogram.assign(rec.size(), std::vector<long>(c.nodes, 0));
  for (const Local& l : locals) {
    for (std::size_t r = 0; r < rec.size(); ++r)
      for (int n = 0; n < c.nodes; ++n) s.histogram[r][n] += l.hist[r][n];
    s.moves_up += l.up;
    s.moves_down += l.down;
    s.stays += l.stays;
    s.max_prob_defect = std::max(s.max_prob_defect, l.defect);
  }
  s.mean.resize(rec.size());
  s.var.resize(rec.size());
  for (std::size_t r = 0; r < rec.size(); ++r) {
    double m1 = 0.0, m2 = 0.0;
    for (int n = 0; n < c.nodes; ++n) {
      const double x = static_cast<double>(n + 1);
      const double w = static_cast<double>(s.histogram[r][n]);
      m1 += x * w;
      m2 += x * x * w;
    }
    m1 /= n_traj;
    m2 /= n_traj;
    s.mean[r] = m1;
    s.var[r] = m2 - m1 * m1;
  }
  return s;
}

}  // namespace oqw
