#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "consim/controller.hpp"
#include "consim/digraph.hpp"
#include "consim/errors.hpp"
#include "consim/plant.hpp"
#include "consim/refgen.hpp"

namespace consim {

struct Scenario {
  DirectedGraph graph{1};
  std::vector<AgentModel> agents;
  std::vector<RefDesign> refs;
  std::vector<ControllerGains> gains;
  std::vector<std::vector<double>> x0;
  std::vector<std::vector<double>> xi0;  // per agent; ignored for constant references
  double dt{1e-3};
  double t_end{50.0};
  int sample_stride{10};
  std::uint64_t seed{0};
  std::string name{"scenario"};
};

inline void validate_scenario(const Scenario& s) {
  const std::size_t n = s.graph.n();
  if (s.agents.size() != n || s.refs.size() != n || s.gains.size() != n || s.x0.size() != n ||
      s.xi0.size() != n)
    throw ConfigError("scenario needs one agent, reference, gain set, and initial state per node");
  if (!(s.dt > 0.0)) throw ConfigError("step size must be positive");
  if (!(s.t_end > s.dt)) throw ConfigError("horizon must exceed the step size");
  if (s.sample_stride < 1) throw ConfigError("sample stride must be at least one");
  if (!has_spanning_tree(s.graph)) throw ConfigError("graph has no directed spanning tree");
  for (std::size_t i = 0; i < n; ++i) {
    const int m = s.agents[i].m();
    const bool has_neighbors = s.graph.in_degree(i) > 0.0;
    if (s.refs[i].m != m) throw ConfigError("reference order does not match the agent order");
    if (has_neighbors != (s.refs[i].kind == RefKind::Dynamic))
      throw ConfigError("reference kind does not match the node's neighbor set");
    if (s.refs[i].kind == RefKind::Dynamic) {
      if (std::abs(s.refs[i].gamma * s.graph.in_degree(i) - s.refs[i].lambda[0]) > 1e-12)
        throw ConfigError("reference gain is not the first coefficient over the in-degree");
      if (s.xi0[i].size() != static_cast<std::size_t>(m))
        throw ConfigError("reference initial state size mismatch");
    }
    if (s.x0[i].size() != static_cast<std::size_t>(m))
      throw ConfigError("initial state size mismatch");
    s.gains[i].validate(m);
  }
}

/// Flat state layout: per agent the plant states, the reference states for
/// agents with neighbors, then per stage the Nussbaum argument, the robust
/// gain, and the parameter estimate.
struct StateLayout {
  struct Agent {
    int offset{};
    int m{};
    bool dynamic_ref{};
    std::vector<int> theta_dims;
    std::vector<int> stage_offsets;  // within the agent block
    int xi_off{};
    int size{};
  };
  std::vector<Agent> agents;
  int total{};

  int x_index(int agent, int l) const { return agents[agent].offset + l; }
  int xi_index(int agent, int l) const { return agents[agent].offset + agents[agent].xi_off + l; }
  int k_index(int agent, int s) const {
    return agents[agent].offset + agents[agent].stage_offsets[s];
  }
  int zeta_index(int agent, int s) const { return k_index(agent, s) + 1; }
  int theta_index(int agent, int s, int c) const { return k_index(agent, s) + 2 + c; }
};

inline StateLayout make_state_layout(const Scenario& sc) {
  StateLayout lay;
  lay.agents.resize(sc.agents.size());
  int off = 0;
  for (std::size_t i = 0; i < sc.agents.size(); ++i) {
    auto& a = lay.agents[i];
    a.offset = off;
    a.m = sc.agents[i].m();
    a.dynamic_ref = sc.refs[i].kind == RefKind::Dynamic;
    const SeedLayout seeds = SeedLayout::for_model(sc.agents[i]);
    a.theta_dims = seeds.theta_dims;
    a.xi_off = a.m;
    int pos = a.m + (a.dynamic_ref ? a.m : 0);
    a.stage_offsets.resize(a.m);
    for (int s = 0; s < a.m; ++s) {
      a.stage_offsets[s] = pos;
      pos += 2 + a.theta_dims[s];
    }
    a.size = pos;
    off += pos;
  }
  lay.total = off;
  return lay;
}

/// Initial flat state: configured plant and reference states, zero
/// controller states.
inline std::vector<double> pack_state(const Scenario& sc) {
  const StateLayout lay = make_state_layout(sc);
  std::vector<double> y(lay.total, 0.0);
  for (std::size_t i = 0; i < sc.agents.size(); ++i) {
    const auto& a = lay.agents[i];
    for (int l = 0; l < a.m; ++l) y[lay.x_index(i, l)] = sc.x0[i][l];
    if (a.dynamic_ref)
      for (int l = 0; l < a.m; ++l) y[lay.xi_index(i, l)] = sc.xi0[i][l];
  }
  return y;
}

namespace detail {

inline CascadeInput cascade_input_at(const Scenario& sc, const StateLayout& lay,
                                     std::span<const double> y, double t, std::size_t agent) {
  const auto& a = lay.agents[agent];
  CascadeInput in;
  in.model = &sc.agents[agent];
  in.ref = &sc.refs[agent];
  in.gains = &sc.gains[agent];
  in.t = t;
  in.x.assign(y.begin() + lay.x_index(agent, 0), y.begin() + lay.x_index(agent, 0) + a.m);
  if (a.dynamic_ref) {
    in.xi.assign(y.begin() + lay.xi_index(agent, 0), y.begin() + lay.xi_index(agent, 0) + a.m);
  } else {
    in.xi.assign(a.m, 0.0);
    in.xi[0] = sc.refs[agent].gamma;
  }
  in.stages.resize(a.m);
  for (int s = 0; s < a.m; ++s) {
    in.stages[s].k = y[lay.k_index(agent, s)];
    in.stages[s].zeta = y[lay.zeta_index(agent, s)];
    in.stages[s].theta_hat.resize(a.theta_dims[s]);
    for (int c = 0; c < a.theta_dims[s]; ++c)
      in.stages[s].theta_hat[c] = y[lay.theta_index(agent, s, c)];
  }
  in.eps_derivs = eps_derivatives(sc.gains[agent].epsilon, t, a.m);
  double sum = 0.0;
  for (std::size_t j = 0; j < sc.agents.size(); ++j)
    sum += sc.graph.weight(agent, j) * y[lay.x_index(j, 0)];
  in.neighbor_sum = sum;
  return in;
}

}  // namespace detail

inline std::vector<double> closed_loop_derivative(const Scenario& sc, const StateLayout& lay,
                                                  std::span<const double> y, double t) {
  std::vector<double> dy(lay.total, 0.0);
  for (std::size_t i = 0; i < sc.agents.size(); ++i) {
    const auto& a = lay.agents[i];
    CascadeResult res;
    try {
      res = evaluate_cascade(detail::cascade_input_at(sc, lay, y, t, i));
    } catch (const NonFinite& e) {
      throw NonFinite("agent " + std::to_string(i + 1) + ": " + e.what());
    }
    const std::span<const double> x = y.subspan(lay.x_index(i, 0), a.m);
    const std::vector<double> dx = agent_derivative(sc.agents[i], x, res.u, t);
    for (int l = 0; l < a.m; ++l) dy[lay.x_index(i, l)] = dx[l];
    if (a.dynamic_ref) {
      double sum = 0.0;
      for (std::size_t j = 0; j < sc.agents.size(); ++j)
        sum += sc.graph.weight(i, j) * y[lay.x_index(j, 0)];
      const std::span<const double> xi = y.subspan(lay.xi_index(i, 0), a.m);
      const std::vector<double> dxi = ref_derivative(sc.refs[i], xi, sum);
      for (int l = 0; l < a.m; ++l) dy[lay.xi_index(i, l)] = dxi[l];
    }
    for (int s = 0; s < a.m; ++s) {
      dy[lay.k_index(i, s)] = res.stages[s].k_dot;
      dy[lay.zeta_index(i, s)] = res.stages[s].zeta_dot;
      for (int c = 0; c < a.theta_dims[s]; ++c)
        dy[lay.theta_index(i, s, c)] = res.stages[s].theta_dot[c];
    }
  }
  return dy;
}

/// Classical four-stage Runge-Kutta update.
template <class F>
std::vector<double> rk4_step(F&& f, std::span<const double> y, double t, double dt) {
  const std::size_t n = y.size();
  const std::vector<double> k1 = f(y, t);
  std::vector<double> work(n);
  for (std::size_t i = 0; i < n; ++i) work[i] = y[i] + 0.5 * dt * k1[i];
  const std::vector<double> k2 = f(std::span<const double>(work), t + 0.5 * dt);
  for (std::size_t i = 0; i < n; ++i) work[i] = y[i] + 0.5 * dt * k2[i];
  const std::vector<double> k3 = f(std::span<const double>(work), t + 0.5 * dt);
  for (std::size_t i = 0; i < n; ++i) work[i] = y[i] + dt * k3[i];
  const std::vector<double> k4 = f(std::span<const double>(work), t + dt);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(out[i])) throw NonFinite("integration state is not finite");
  }
  return out;
}

struct Trajectory {
  std::vector<double> t;
  struct AgentSeries {
    std::vector<std::vector<double>> x;                       // [state][sample]
    std::vector<double> xi1, u;
    std::vector<std::vector<double>> z, k, zeta;              // [stage][sample]
    std::vector<std::vector<std::vector<double>>> theta_hat;  // [stage][component][sample]
  };
  std::vector<AgentSeries> agents;
  std::vector<double> spread;
};

inline Trajectory run_scenario(const Scenario& sc) {
  validate_scenario(sc);
  const StateLayout lay = make_state_layout(sc);
  std::vector<double> y = pack_state(sc);
  const int steps = static_cast<int>(std::lround(sc.t_end / sc.dt));

  Trajectory tr;
  tr.agents.resize(sc.agents.size());
  for (std::size_t i = 0; i < sc.agents.size(); ++i) {
    auto& a = tr.agents[i];
    const int m = sc.agents[i].m();
    a.x.resize(m);
    a.z.resize(m);
    a.k.resize(m);
    a.zeta.resize(m);
    a.theta_hat.resize(m);
    for (int s = 0; s < m; ++s) a.theta_hat[s].resize(lay.agents[i].theta_dims[s]);
  }

  const auto record = [&](double t) {
    tr.t.push_back(t);
    double lo = y[lay.x_index(0, 0)], hi = lo;
    for (std::size_t i = 0; i < sc.agents.size(); ++i) {
      auto& a = tr.agents[i];
      const int m = sc.agents[i].m();
      const CascadeResult res = evaluate_cascade(detail::cascade_input_at(sc, lay, y, t, i));
      for (int l = 0; l < m; ++l) a.x[l].push_back(y[lay.x_index(i, l)]);
      a.xi1.push_back(lay.agents[i].dynamic_ref ? y[lay.xi_index(i, 0)] : sc.refs[i].gamma);
      a.u.push_back(res.u);
      for (int s = 0; s < m; ++s) {
        a.z[s].push_back(res.stages[s].z);
        a.k[s].push_back(y[lay.k_index(i, s)]);
        a.zeta[s].push_back(y[lay.zeta_index(i, s)]);
        for (int c = 0; c < lay.agents[i].theta_dims[s]; ++c)
          a.theta_hat[s][c].push_back(y[lay.theta_index(i, s, c)]);
      }
      const double out = y[lay.x_index(i, 0)];
      lo = std::min(lo, out);
      hi = std::max(hi, out);
    }
    tr.spread.push_back(hi - lo);
  };

  const auto f = [&](std::span<const double> state, double t) {
    return closed_loop_derivative(sc, lay, state, t);
  };

  record(0.0);
  for (int step = 1; step <= steps; ++step) {
    const double t = (step - 1) * sc.dt;
    try {
      y = rk4_step(f, y, t, sc.dt);
    } catch (const NonFinite& e) {
      throw NonFinite(std::string(e.what()) + " (t=" + std::to_string(t) + ")");
    }
    if (step % sc.sample_stride == 0 || step == steps) record(step * sc.dt);
  }
  return tr;
}

struct Metrics {
  double spread_final{};
  std::vector<double> spread_series;
  std::map<std::string, double> sup_norms;
  std::vector<std::vector<double>> z_l2;  // [agent][stage]
};

inline Metrics metrics(const Trajectory& tr) {
  if (tr.t.empty()) throw DimensionMismatch("empty trajectory");
  Metrics m;
  m.spread_series = tr.spread;
  m.spread_final = tr.spread.back();
  const auto sup = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
  };
  double sx = 0, sxi = 0, su = 0, sk = 0, szeta = 0, stheta = 0;
  m.z_l2.resize(tr.agents.size());
  for (std::size_t i = 0; i < tr.agents.size(); ++i) {
    const auto& a = tr.agents[i];
    for (const auto& series : a.x) sx = std::max(sx, sup(series));
    sxi = std::max(sxi, sup(a.xi1));
    su = std::max(su, sup(a.u));
    for (const auto& series : a.k) sk = std::max(sk, sup(series));
    for (const auto& series : a.zeta) szeta = std::max(szeta, sup(series));
    for (const auto& stage : a.theta_hat)
      for (const auto& series : stage) stheta = std::max(stheta, sup(series));
    m.z_l2[i].resize(a.z.size(), 0.0);
    for (std::size_t s = 0; s < a.z.size(); ++s) {
      double acc = 0.0;
      for (std::size_t j = 1; j < tr.t.size(); ++j) {
        const double za = a.z[s][j - 1], zb = a.z[s][j];
        acc += 0.5 * (za * za + zb * zb) * (tr.t[j] - tr.t[j - 1]);
      }
      m.z_l2[i][s] = acc;
    }
  }
  m.sup_norms = {{"x", sx},    {"xi1", sxi},     {"u", su},
                 {"k", sk},    {"zeta", szeta},  {"theta_hat", stheta}};
  return m;
}

inline double lyapunov_v1(double z1, std::span<const double> theta_err, double zeta,
                          double tau_bar, double rho1, double mu1) {
  double v = 0.5 * z1 * z1;
  double te = 0.0;
  for (double e : theta_err) te += e * e;
  v += te / (2.0 * rho1);
  const double d = tau_bar - zeta;
  v += d * d / (2.0 * mu1);
  return v;
}

/// Diagnostic first-stage energy series computed with the simulator's known
/// true parameters; no control role. The estimate error term is dropped for
/// agents whose first-stage estimate is empty.
inline std::vector<std::vector<double>> lyapunov_monitor(const Scenario& sc,
                                                         const Trajectory& tr) {
  std::vector<std::vector<double>> v(tr.agents.size());
  for (std::size_t i = 0; i < tr.agents.size(); ++i) {
    const auto& a = tr.agents[i];
    const std::vector<double>& theta = sc.agents[i].theta();
    const double tau_bar = sc.agents[i].disturbance(0).bound + 1.0;
    const double rho1 = sc.gains[i].rho[0];
    const double mu1 = sc.gains[i].mu[0];
    const bool with_theta = !a.theta_hat.empty() && a.theta_hat[0].size() == theta.size();
    v[i].resize(tr.t.size());
    std::vector<double> err(with_theta ? theta.size() : 0);
    for (std::size_t j = 0; j < tr.t.size(); ++j) {
      for (std::size_t c = 0; c < err.size(); ++c) err[c] = theta[c] - a.theta_hat[0][c][j];
      v[i][j] = lyapunov_v1(a.z[0][j], err, a.zeta[0][j], tau_bar, rho1, mu1);
    }
  }
  return v;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os.precision(15);
  os << "t";
  for (std::size_t i = 0; i < tr.agents.size(); ++i) {
    const std::string tag = "a" + std::to_string(i + 1);
    for (std::size_t l = 0; l < tr.agents[i].x.size(); ++l)
      os << "," << tag << "_x" << (l + 1);
    os << "," << tag << "_xi1," << tag << "_u";
    for (std::size_t s = 0; s < tr.agents[i].k.size(); ++s) os << "," << tag << "_k" << (s + 1);
    for (std::size_t s = 0; s < tr.agents[i].zeta.size(); ++s)
      os << "," << tag << "_zeta" << (s + 1);
  }
  os << ",spread\n";
  for (std::size_t j = 0; j < tr.t.size(); ++j) {
    os << tr.t[j];
    for (const auto& a : tr.agents) {
      for (const auto& series : a.x) os << "," << series[j];
      os << "," << a.xi1[j] << "," << a.u[j];
      for (const auto& series : a.k) os << "," << series[j];
      for (const auto& series : a.zeta) os << "," << series[j];
    }
    os << "," << tr.spread[j] << "\n";
  }
}

inline void write_summary(std::ostream& os, const Scenario& sc, const Trajectory& tr,
                          const Metrics& m) {
  os.precision(10);
  os << "scenario: " << sc.name << "\n";
  os << "agents: " << sc.agents.size() << "\n";
  os << "horizon_s: " << sc.t_end << "  dt_s: " << sc.dt << "\n";
  os << "samples: " << tr.t.size() << "\n";
  os << "spread_final: " << m.spread_final << "\n";
  for (const auto& [name, value] : m.sup_norms) os << "sup_" << name << ": " << value << "\n";
  for (std::size_t i = 0; i < m.z_l2.size(); ++i) {
    os << "z_l2_a" << (i + 1) << ":";
    for (double v : m.z_l2[i]) os << " " << v;
    os << "\n";
  }
  for (std::size_t i = 0; i < tr.agents.size(); ++i)
    os << "final_output_a" << (i + 1) << ": " << tr.agents[i].x[0].back() << "\n";
}

}  // namespace consim
