#include "oqw/ode.hpp"

#include "oqw/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oqw {

const char* scheme_name(Scheme s) { return s == Scheme::euler ? "euler" : "rk4"; }

// ---------------------------------------------------------------------------
// Compiled generator view (templated on the block matrix type so dimension-2
// models run on fixed-size stack matrices)
// ---------------------------------------------------------------------------

namespace {

template <class Mat>
struct CompiledGen {
  int nodes = 0;
  std::vector<Mat> ham, halfloss;
  std::vector<char> has_ham;
  struct Chan {
    int src = 0, dst = 0;  // 0-indexed
    Mat op;                // sqrt(rate) * L, so the gain is op rho op^dag
  };
  std::vector<Chan> chans;
};

template <class Mat>
CompiledGen<Mat> compile_gen(const GeneratorSpec& g) {
  CompiledGen<Mat> c;
  c.nodes = g.graph.node_count;
  c.ham.resize(c.nodes);
  c.halfloss.resize(c.nodes);
  c.has_ham.resize(c.nodes);
  for (int i = 0; i < c.nodes; ++i) {
    c.ham[i] = g.hamiltonians[i];
    c.halfloss[i] = 0.5 * g.loss[i];
    c.has_ham[i] = max_abs(g.hamiltonians[i]) > 0.0;
  }
  c.chans.reserve(g.channels.size());
  for (const JumpChannel& ch : g.channels) {
    typename CompiledGen<Mat>::Chan cc;
    cc.src = ch.source - 1;
    cc.dst = ch.target - 1;
    cc.op = std::sqrt(ch.rate) * ch.op;
    c.chans.push_back(std::move(cc));
  }
  return c;
}

// Blocks are Hermitian throughout, so the commutator and anticommutator each
// need one product plus its adjoint.
template <class Mat>
void rhs_kernel(const CompiledGen<Mat>& c, const std::vector<Mat>& in, std::vector<Mat>& out) {
  Mat a, gain;
  const Complex minus_i(0.0, -1.0);
  for (int i = 0; i < c.nodes; ++i) {
    const Mat& rho = in[i];
    a.noalias() = c.halfloss[i] * rho;
    out[i] = -a - a.adjoint();
    if (c.has_ham[i]) {
      a.noalias() = c.ham[i] * rho;
      out[i] += minus_i * a + (minus_i * a).adjoint();
    }
  }
  for (const auto& ch : c.chans) {
    a.noalias() = ch.op * in[ch.src];
    gain.noalias() = a * ch.op.adjoint();
    out[ch.dst] += gain;
  }
}

template <class Mat>
void add_scaled(std::vector<Mat>& y, double coef, const std::vector<Mat>& k) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += coef * k[i];
}

template <class Mat>
void set_shifted(std::vector<Mat>& dst, const std::vector<Mat>& y, double coef,
                 const std::vector<Mat>& k) {
  for (std::size_t i = 0; i < y.size(); ++i) dst[i] = y[i] + coef * k[i];
}

double min_eig_hermitian(const Matrix& a) {
  if (a.rows() == 2) {
    const double tr = a(0, 0).real() + a(1, 1).real();
    const double d = a(0, 0).real() - a(1, 1).real();
    return 0.5 * (tr - std::sqrt(d * d + 4.0 * std::norm(a(0, 1))));
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <class Mat>
IntegrationReport drive(const GeneratorSpec& g, const WalkState& s0, const IntegratorConfig& cfg,
                        const std::function<void(double, const WalkState&)>& observe,
                        long n_steps) {
  const auto c = compile_gen<Mat>(g);
  std::vector<Mat> y(c.nodes), k1(c.nodes), k2(c.nodes), k3(c.nodes), k4(c.nodes), tmp(c.nodes);
  for (int i = 0; i < c.nodes; ++i) y[i] = s0.blocks[i];

  WalkState snap = s0;
  const double trace0 = total_trace(s0);
  IntegrationReport rep;
  rep.min_block_eigenvalue = std::numeric_limits<double>::infinity();

  const auto record = [&](long step) {
    for (int i = 0; i < c.nodes; ++i) snap.blocks[i] = y[i];
    snap.time = static_cast<double>(step) * cfg.dt;
    const double dev = std::abs(total_trace(snap) - trace0);
    rep.max_trace_dev = std::max(rep.max_trace_dev, dev);
    if (dev > 1e-8)
      throw std::runtime_error("integrate: total trace drifted by " + std::to_string(dev));
    for (const Matrix& b : snap.blocks)
      rep.min_block_eigenvalue = std::min(rep.min_block_eigenvalue, min_eig_hermitian(b));
    if (rep.min_block_eigenvalue < -1e-7)
      throw std::runtime_error("integrate: a block eigenvalue fell below -1e-7");
    observe(snap.time, snap);
  };

  record(0);
  for (long step = 1; step <= n_steps; ++step) {
    rhs_kernel(c, y, k1);
    if (cfg.scheme == Scheme::euler) {
      add_scaled(y, cfg.dt, k1);
    } else {
      set_shifted(tmp, y, 0.5 * cfg.dt, k1);
      rhs_kernel(c, tmp, k2);
      set_shifted(tmp, y, 0.5 * cfg.dt, k2);
      rhs_kernel(c, tmp, k3);
      set_shifted(tmp, y, cfg.dt, k3);
      rhs_kernel(c, tmp, k4);
      const double w = cfg.dt / 6.0;
      for (int i = 0; i < c.nodes; ++i)
        y[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (step % cfg.record_every == 0 || step == n_steps) record(step);
  }
  return rep;
}

void check_layout(const GeneratorSpec& g, const WalkState& s) {
  if (s.dim != g.dim || static_cast<int>(s.blocks.size()) != g.graph.node_count)
    throw std::invalid_argument("integrate: state does not match generator layout");
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

double max_loss_rate(const GeneratorSpec& g) {
  double m = 0.0;
  for (const Matrix& l : g.loss) {
    if (l.size() == 0) continue;
    const Eigen::SelfAdjointEigenSolver<Matrix> es(l, Eigen::EigenvaluesOnly);
    m = std::max(m, es.eigenvalues().maxCoeff());
  }
  return m;
}

std::vector<Matrix> rhs(const GeneratorSpec& g, const WalkState& s) {
  check_layout(g, s);
  const auto c = compile_gen<Matrix>(g);
  std::vector<Matrix> out(c.nodes);
  rhs_kernel(c, s.blocks, out);
  return out;
}

IntegrationReport integrate_observe(
    const GeneratorSpec& g, const WalkState& s0, const IntegratorConfig& cfg,
    const std::function<void(double, const WalkState&)>& observe) {
  check_layout(g, s0);
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (cfg.t_final < 0.0) throw std::invalid_argument("integrate: t_final must be non-negative");
  if (cfg.record_every <= 0)
    throw std::invalid_argument("integrate: record_every must be positive");
  const long n_steps = std::llround(cfg.t_final / cfg.dt);
  if (std::abs(static_cast<double>(n_steps) * cfg.dt - cfg.t_final) >
      1e-9 * std::max(1.0, cfg.t_final))
    throw std::invalid_argument("integrate: t_final must be a whole number of dt steps");
  const double limit = cfg.scheme == Scheme::euler ? 0.1 : 0.5;
  const double stiff = cfg.dt * max_loss_rate(g);
  if (stiff > limit + 1e-12)
    throw std::invalid_argument("integrate: dt * max_loss_rate = " + std::to_string(stiff) +
                                " exceeds the " + std::string(scheme_name(cfg.scheme)) +
                                " limit " + std::to_string(limit));
  if (g.dim == 2) return drive<Eigen::Matrix2cd>(g, s0, cfg, observe, n_steps);
  return drive<Matrix>(g, s0, cfg, observe, n_steps);
}

std::vector<WalkState> integrate(const GeneratorSpec& g, const WalkState& s0,
                                 const IntegratorConfig& cfg, IntegrationReport* report) {
  std::vector<WalkState> snaps;
  const IntegrationReport rep = integrate_observe(
      g, s0, cfg, [&snaps](double, const WalkState& s) { snaps.push_back(s); });
  if (report) *report = rep;
  return snaps;
}

}  // namespace oqw
