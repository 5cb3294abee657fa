#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "consim/dual.hpp"
#include "consim/errors.hpp"
#include "consim/plant.hpp"
#include "consim/refgen.hpp"

namespace consim {

/// Exponentially decaying smoothing signal with closed-form derivatives and
/// a finite integral bound.
struct EpsilonSignal {
  double amplitude{1.0};
  double decay{0.05};
  double bound{20.0};

  double eval(double t, int order = 0) const {
    double v = amplitude * std::exp(-decay * t);
    for (int i = 0; i < order; ++i) v *= -decay;
    return v;
  }

  void validate() const {
    if (!(amplitude > 0.0) || !(decay > 0.0)) throw ConfigError("epsilon signal must be positive and decaying");
    if (amplitude / decay > bound) throw ConfigError("epsilon integral exceeds its declared bound");
  }
};

inline std::vector<double> eps_derivatives(const EpsilonSignal& e, double t, int m) {
  std::vector<double> d(m);
  for (int o = 0; o < m; ++o) d[o] = e.eval(t, o);
  return d;
}

struct ControllerGains {
  std::vector<double> c, rho, mu;  // one entry per stage
  EpsilonSignal epsilon;

  void validate(int m) const {
    if (static_cast<int>(c.size()) != m || static_cast<int>(rho.size()) != m ||
        static_cast<int>(mu.size()) != m)
      throw DimensionMismatch("one c, rho, mu gain per stage required");
    for (int l = 0; l < m; ++l)
      if (!(c[l] > 0.0) || !(rho[l] > 0.0) || !(mu[l] > 0.0))
        throw ConfigError("controller gains must be positive");
    epsilon.validate();
  }
};

/// Adaptive state of one backstepping stage.
struct StageState {
  double k{0.0};
  std::vector<double> theta_hat;
  double zeta{0.0};
};

template <class S>
S nussbaum(const S& k) {
  using std::cos;
  return k * k * cos(k);
}

template <class S>
S robust_term(const S& zeta, const S& eta, const S& z, const S& eps) {
  using std::tanh;
  return zeta * eta * tanh(eta * z / eps);
}

struct StageRates {
  std::vector<double> theta_dot;
  double zeta_dot{}, k_dot{};
};

inline std::pair<double, double> stage1_control(double z1, std::span<const double> phi1,
                                                double xi2, const StageState& s,
                                                const ControllerGains& g, double t) {
  if (phi1.size() != s.theta_hat.size())
    throw DimensionMismatch("stage-1 regressor and estimate sizes differ");
  const double eps = g.epsilon.eval(t);
  double w = g.c[0] * z1 + s.zeta * std::tanh(z1 / eps) - xi2;
  for (std::size_t i = 0; i < phi1.size(); ++i) w += s.theta_hat[i] * phi1[i];
  return {nussbaum(s.k) * w, w};
}

inline StageRates stage1_rates(double z1, std::span<const double> phi1, double w1,
                               const ControllerGains& g, double eps_t) {
  StageRates r;
  r.theta_dot.resize(phi1.size());
  for (std::size_t i = 0; i < phi1.size(); ++i) r.theta_dot[i] = g.rho[0] * phi1[i] * z1;
  r.zeta_dot = g.mu[0] * z1 * std::tanh(z1 / eps_t);
  r.k_dot = w1 * z1;
  return r;
}

struct StageInputs {
  double z{};
  std::span<const double> phibar;
  double eta{1.0};
  double varpi_prev{};
};

inline std::pair<double, double> stage_control(int ell, const StageInputs& in,
                                               const StageState& s, const ControllerGains& g,
                                               double t) {
  if (in.phibar.size() != s.theta_hat.size())
    throw DimensionMismatch("stage regressor and estimate sizes differ");
  const double eps = g.epsilon.eval(t);
  double w = g.c[ell - 1] * in.z + robust_term(s.zeta, in.eta, in.z, eps) - in.varpi_prev;
  for (std::size_t i = 0; i < in.phibar.size(); ++i) w += s.theta_hat[i] * in.phibar[i];
  return {nussbaum(s.k) * w, w};
}

inline StageRates stage_rates(int ell, double z, std::span<const double> phibar, double eta,
                              double w, const ControllerGains& g, double eps_t) {
  StageRates r;
  r.theta_dot.resize(phibar.size());
  for (std::size_t i = 0; i < phibar.size(); ++i) r.theta_dot[i] = g.rho[ell - 1] * phibar[i] * z;
  r.zeta_dot = g.mu[ell - 1] * eta * z * std::tanh(eta * z / eps_t);
  r.k_dot = w * z;
  return r;
}

/// Global seed-variable enumeration for one agent's cascade: plant states,
/// Nussbaum arguments, robust gains, parameter estimates, the smoothing
/// signal derivatives, and the reference states.
struct SeedLayout {
  int m{}, p{};
  std::vector<int> theta_dims;
  std::vector<int> theta_offsets;
  int theta_total{};
  int n_seeds{};

  int x(int l) const { return l; }
  int k(int s) const { return m + s; }
  int zeta(int s) const { return 2 * m + s; }
  int theta(int s, int c) const { return 3 * m + theta_offsets[s] + c; }
  int eps(int order) const { return 3 * m + theta_total + order; }
  int xi(int l) const { return 4 * m + theta_total + l; }

  static SeedLayout for_model(const AgentModel& model) {
    SeedLayout lay;
    lay.m = model.m();
    lay.p = model.p();
    lay.theta_dims.resize(lay.m);
    lay.theta_offsets.resize(lay.m);
    lay.theta_dims[0] = regressor_dim(model.regressor(0));
    for (int s = 1; s < lay.m; ++s) lay.theta_dims[s] = s + lay.p;
    int off = 0;
    for (int s = 0; s < lay.m; ++s) {
      lay.theta_offsets[s] = off;
      off += lay.theta_dims[s];
    }
    lay.theta_total = off;
    lay.n_seeds = 5 * lay.m + lay.theta_total;
    return lay;
  }
};

struct CascadeInput {
  const AgentModel* model{};
  const RefDesign* ref{};
  const ControllerGains* gains{};
  std::vector<double> x;
  std::vector<double> xi;
  std::vector<StageState> stages;
  std::vector<double> eps_derivs;  // smoothing signal value and derivatives
  double neighbor_sum{};
  double t{};
};

struct StageRecord {
  double z{}, alpha{}, w{}, eta{1.0}, varpi{};
  std::vector<double> phibar;
  std::vector<double> theta_dot;
  double zeta_dot{}, k_dot{};
  std::vector<double> alpha_partials;  // per seed slot; filled on request
};

struct CascadeResult {
  double u{};
  std::vector<StageRecord> stages;
  SeedLayout layout;
};

namespace detail {

template <int D>
struct jet_type {
  using type = Dual<typename jet_type<D - 1>::type>;
};
template <>
struct jet_type<0> {
  using type = double;
};
template <int D>
using jet_t = typename jet_type<D>::type;

inline constexpr int kMaxJetDepth = 4;

template <class S>
struct StageRatesT {
  std::vector<S> theta_dot;
  S zeta_dot{}, k_dot{};
};

template <class S>
struct StageEvalT {
  S z{}, alpha{}, w{}, eta{}, varpi{};
  std::vector<S> phibar;
  StageRatesT<S> rates;
};

template <class S>
struct Carry {
  S alpha_prev{};
  std::vector<S> alpha_partials;
  std::vector<StageRatesT<S>> rates;  // stages evaluated so far
};

template <class T>
StageRatesT<T> downgrade(const StageRatesT<Dual<T>>& r) {
  StageRatesT<T> o;
  o.zeta_dot = r.zeta_dot.v;
  o.k_dot = r.k_dot.v;
  o.theta_dot.reserve(r.theta_dot.size());
  for (const auto& e : r.theta_dot) o.theta_dot.push_back(e.v);
  return o;
}

/// Evaluates stage `ell` (0-based) with every quantity expressed over the
/// global seed space in scalar type S. `carry` holds the previous virtual
/// control one derivative order down, its partials, and all earlier stages'
/// rate expressions.
template <class S>
StageEvalT<S> eval_stage(const CascadeInput& in, const SeedLayout& lay, int ell,
                         const Carry<S>* carry) {
  using std::sqrt;
  const std::size_t ns = static_cast<std::size_t>(lay.n_seeds);
  const auto cnst = [&](double v) { return make_constant<S>(v, ns); };
  const int m = lay.m;

  std::vector<S> xs(m), xis(m), epss(m);
  for (int l = 0; l < m; ++l) {
    xs[l] = make_seed<S>(in.x[l], lay.x(l), ns);
    xis[l] = make_seed<S>(in.xi[l], lay.xi(l), ns);
    epss[l] = make_seed<S>(in.eps_derivs[l], lay.eps(l), ns);
  }
  std::vector<S> th(lay.theta_dims[ell]);
  for (int c = 0; c < lay.theta_dims[ell]; ++c)
    th[c] = make_seed<S>(in.stages[ell].theta_hat[c], lay.theta(ell, c), ns);
  const S k = make_seed<S>(in.stages[ell].k, lay.k(ell), ns);
  const S zeta = make_seed<S>(in.stages[ell].zeta, lay.zeta(ell), ns);

  // Reference derivative as a seed expression; constant references are flat.
  const auto xi_dot = [&](int l) -> S {
    if (in.ref->kind == RefKind::Constant) return cnst(0.0);
    if (l + 1 < m) return xis[l + 1];
    S last = cnst(in.ref->gamma * in.neighbor_sum);
    for (int q = 0; q < m; ++q) last = last - in.ref->lambda[q] * xis[q];
    return last;
  };

  const auto phi_at = [&](int channel) {
    return eval_regressor<S>(in.model->regressor(channel),
                             std::span<const S>(xs).first(channel + 1));
  };

  StageEvalT<S> ev;
  const double c_gain = in.gains->c[ell];
  const double rho = in.gains->rho[ell];
  const double mu = in.gains->mu[ell];

  if (ell == 0) {
    ev.z = xs[0] - xis[0];
    ev.phibar = phi_at(0);
    ev.eta = cnst(1.0);
    ev.varpi = cnst(0.0);
  } else {
    ev.z = xs[ell] - carry->alpha_prev;
    std::vector<S> dadx(ell);
    for (int p = 0; p < ell; ++p) dadx[p] = carry->alpha_partials[lay.x(p)];

    ev.phibar.reserve(ell + lay.p);
    for (int p = 0; p < ell; ++p) ev.phibar.push_back(dadx[p] * xs[p + 1]);
    std::vector<S> mismatch(lay.p, cnst(0.0));
    {
      const auto phi_ell = phi_at(ell);
      for (std::size_t c = 0; c < phi_ell.size(); ++c) mismatch[c] = phi_ell[c];
      for (int p = 0; p < ell; ++p) {
        const auto phi_p = phi_at(p);
        for (std::size_t c = 0; c < phi_p.size(); ++c)
          mismatch[c] = mismatch[c] - dadx[p] * phi_p[c];
      }
    }
    for (auto& e : mismatch) ev.phibar.push_back(std::move(e));

    S sumsq = cnst(1.0);
    for (int p = 0; p < ell; ++p) sumsq = sumsq + dadx[p] * dadx[p];
    ev.eta = sqrt(sumsq);

    S varpi = cnst(0.0);
    for (int p = 0; p < ell; ++p) {
      varpi = varpi + carry->alpha_partials[lay.k(p)] * carry->rates[p].k_dot;
      for (int c = 0; c < lay.theta_dims[p]; ++c)
        varpi = varpi + carry->alpha_partials[lay.theta(p, c)] * carry->rates[p].theta_dot[c];
      varpi = varpi + carry->alpha_partials[lay.zeta(p)] * carry->rates[p].zeta_dot;
      varpi = varpi + carry->alpha_partials[lay.eps(p)] * epss[p + 1];
    }
    for (int p = 0; p <= ell; ++p)
      varpi = varpi + carry->alpha_partials[lay.xi(p)] * xi_dot(p);
    ev.varpi = varpi;
  }

  const S compensation = robust_term(zeta, ev.eta, ev.z, epss[0]);
  S w = c_gain * ev.z + compensation;
  for (std::size_t c = 0; c < ev.phibar.size(); ++c) w = w + th[c] * ev.phibar[c];
  if (ell == 0)
    w = w - xi_dot(0);
  else
    w = w - ev.varpi;
  ev.w = w;
  ev.alpha = nussbaum(k) * w;

  ev.rates.theta_dot.reserve(ev.phibar.size());
  for (std::size_t c = 0; c < ev.phibar.size(); ++c)
    ev.rates.theta_dot.push_back(rho * ev.phibar[c] * ev.z);
  using std::tanh;
  ev.rates.zeta_dot = mu * ev.eta * ev.z * tanh(ev.eta * ev.z / epss[0]);
  ev.rates.k_dot = ev.w * ev.z;
  return ev;
}

template <class S>
void record_stage(CascadeResult& out, int ell, const StageEvalT<S>& ev, bool want_partials,
                  std::size_t n_seeds) {
  StageRecord& r = out.stages[ell];
  r.z = value_of(ev.z);
  r.alpha = value_of(ev.alpha);
  r.w = value_of(ev.w);
  r.eta = value_of(ev.eta);
  r.varpi = value_of(ev.varpi);
  r.phibar.resize(ev.phibar.size());
  for (std::size_t i = 0; i < ev.phibar.size(); ++i) r.phibar[i] = value_of(ev.phibar[i]);
  r.theta_dot.resize(ev.rates.theta_dot.size());
  for (std::size_t i = 0; i < ev.rates.theta_dot.size(); ++i)
    r.theta_dot[i] = value_of(ev.rates.theta_dot[i]);
  r.zeta_dot = value_of(ev.rates.zeta_dot);
  r.k_dot = value_of(ev.rates.k_dot);
  if constexpr (is_dual<S>::value) {
    if (want_partials) {
      r.alpha_partials.resize(n_seeds);
      for (std::size_t j = 0; j < n_seeds; ++j) r.alpha_partials[j] = value_of(ev.alpha.d[j]);
    }
  }
}

template <int D>
void run_levels(const CascadeInput& in, const SeedLayout& lay, int ell,
                const Carry<jet_t<D>>& carry, CascadeResult& out, bool want_partials) {
  using S = jet_t<D>;
  const StageEvalT<S> ev = eval_stage<S>(in, lay, ell, ell == 0 ? nullptr : &carry);
  record_stage(out, ell, ev, want_partials, static_cast<std::size_t>(lay.n_seeds));
  if (ell + 1 == lay.m) return;
  if constexpr (D == 0) {
    throw UnsupportedOrder("jet depth exhausted before the final stage");
  } else {
    Carry<jet_t<D - 1>> next;
    next.alpha_prev = ev.alpha.v;
    next.alpha_partials.reserve(lay.n_seeds);
    for (int j = 0; j < lay.n_seeds; ++j) next.alpha_partials.push_back(ev.alpha.d[j]);
    next.rates.reserve(carry.rates.size() + 1);
    for (const auto& r : carry.rates) next.rates.push_back(downgrade(r));
    next.rates.push_back(downgrade(ev.rates));
    run_levels<D - 1>(in, lay, ell + 1, next, out, want_partials);
  }
}

}  // namespace detail

/// Evaluates the full backstepping cascade at one instant: tracking errors,
/// virtual controls, robust terms, adaptation rates, and the plant input.
/// Stage l is evaluated with enough nested derivative orders that stage
/// l+1 sees exact partials of the previous virtual control. When
/// `with_partials` is set, every stage additionally reports the first-order
/// partials of its virtual control over the seed space.
inline CascadeResult evaluate_cascade(const CascadeInput& in, bool with_partials = false) {
  if (in.model == nullptr || in.ref == nullptr || in.gains == nullptr)
    throw DimensionMismatch("cascade input is missing model, reference, or gains");
  const SeedLayout lay = SeedLayout::for_model(*in.model);
  const int m = lay.m;
  if (in.ref->m != m) throw DimensionMismatch("reference order does not match the agent order");
  in.gains->validate(m);
  if (static_cast<int>(in.x.size()) != m || static_cast<int>(in.xi.size()) != m ||
      static_cast<int>(in.stages.size()) != m || static_cast<int>(in.eps_derivs.size()) != m)
    throw DimensionMismatch("cascade input sizes do not match the agent order");
  for (int s = 0; s < m; ++s)
    if (static_cast<int>(in.stages[s].theta_hat.size()) != lay.theta_dims[s])
      throw DimensionMismatch("estimate dimension does not match its stage regressor");
  if (!(in.eps_derivs[0] > 0.0)) throw ConfigError("smoothing signal must be positive");

  CascadeResult out;
  out.layout = lay;
  out.stages.resize(m);
  const int depth = m - 1 + (with_partials ? 1 : 0);

  switch (depth) {
    case 0:
      detail::run_levels<0>(in, lay, 0, {}, out, with_partials);
      break;
    case 1:
      detail::run_levels<1>(in, lay, 0, {}, out, with_partials);
      break;
    case 2:
      detail::run_levels<2>(in, lay, 0, {}, out, with_partials);
      break;
    case 3:
      detail::run_levels<3>(in, lay, 0, {}, out, with_partials);
      break;
    case 4:
      detail::run_levels<4>(in, lay, 0, {}, out, with_partials);
      break;
    default:
      throw UnsupportedOrder("agent order exceeds the supported jet depth");
  }

  out.u = out.stages[m - 1].alpha;
  for (const auto& st : out.stages) {
    if (!std::isfinite(st.alpha) || !std::isfinite(st.z) || !std::isfinite(st.k_dot) ||
        !std::isfinite(st.zeta_dot))
      throw NonFinite("cascade produced a non-finite quantity");
    for (double v : st.theta_dot)
      if (!std::isfinite(v)) throw NonFinite("cascade produced a non-finite estimate rate");
  }
  return out;
}

}  // namespace consim
