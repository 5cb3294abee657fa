#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "consim/errors.hpp"

namespace consim {

/// Bounded scalar disturbance signal. Sinusoids evaluate as
/// amplitude * cos(frequency * t + phase); tables interpolate linearly and
/// hold their end values.
struct DisturbanceSignal {
  enum class Kind { Zero, Sinusoid, Table };

  Kind kind{Kind::Zero};
  double amplitude{0.0};
  double frequency{0.0};
  double phase{0.0};
  std::vector<double> table_t, table_v;
  double bound{0.0};

  static DisturbanceSignal zero() { return {}; }

  static DisturbanceSignal sinusoid(double amplitude, double frequency, double phase) {
    DisturbanceSignal s;
    s.kind = Kind::Sinusoid;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.phase = phase;
    s.bound = std::abs(amplitude);
    return s;
  }

  static DisturbanceSignal table(std::vector<double> t, std::vector<double> v, double bound) {
    if (t.size() != v.size() || t.size() < 2) throw ConfigError("disturbance table needs matching t/v samples");
    for (std::size_t i = 1; i < t.size(); ++i)
      if (!(t[i] > t[i - 1])) throw ConfigError("disturbance table times must be increasing");
    for (double x : v)
      if (std::abs(x) > bound) throw ConfigError("disturbance table value exceeds its declared bound");
    DisturbanceSignal s;
    s.kind = Kind::Table;
    s.table_t = std::move(t);
    s.table_v = std::move(v);
    s.bound = bound;
    return s;
  }

  /// Returns a copy with values multiplied by `factor`.
  DisturbanceSignal scaled(double factor) const {
    DisturbanceSignal s = *this;
    s.amplitude *= factor;
    for (double& x : s.table_v) x *= factor;
    s.bound *= std::abs(factor);
    return s;
  }
};

inline double eval_disturbance(const DisturbanceSignal& d, double t) {
  switch (d.kind) {
    case DisturbanceSignal::Kind::Zero:
      return 0.0;
    case DisturbanceSignal::Kind::Sinusoid:
      return d.amplitude * std::cos(d.frequency * t + d.phase);
    case DisturbanceSignal::Kind::Table: {
      if (t <= d.table_t.front()) return d.table_v.front();
      if (t >= d.table_t.back()) return d.table_v.back();
      std::size_t hi = 1;
      while (d.table_t[hi] < t) ++hi;
      const double t0 = d.table_t[hi - 1], t1 = d.table_t[hi];
      const double w = (t - t0) / (t1 - t0);
      return (1.0 - w) * d.table_v[hi - 1] + w * d.table_v[hi];
    }
  }
  return 0.0;
}

/// Fixed catalog of smooth regressor function vectors; no runtime
/// expression parsing.
enum class RegressorKind { Zero, CosX1, X1SinX2, Norrbin };

inline RegressorKind regressor_from_name(const std::string& name) {
  if (name == "zero") return RegressorKind::Zero;
  if (name == "cos_x1") return RegressorKind::CosX1;
  if (name == "x1_sin_x2") return RegressorKind::X1SinX2;
  if (name == "norrbin") return RegressorKind::Norrbin;
  throw ConfigError("unknown regressor '" + name + "'");
}

inline std::string regressor_name(RegressorKind k) {
  switch (k) {
    case RegressorKind::Zero: return "zero";
    case RegressorKind::CosX1: return "cos_x1";
    case RegressorKind::X1SinX2: return "x1_sin_x2";
    case RegressorKind::Norrbin: return "norrbin";
  }
  return "?";
}

/// Output dimension of the catalog entry; Zero stands for the identically
/// zero vector and reports dimension 0.
inline int regressor_dim(RegressorKind k) {
  switch (k) {
    case RegressorKind::Zero: return 0;
    case RegressorKind::CosX1: return 1;
    case RegressorKind::X1SinX2: return 1;
    case RegressorKind::Norrbin: return 2;
  }
  return 0;
}

/// Minimum number of states the catalog entry reads.
inline int regressor_arity(RegressorKind k) {
  switch (k) {
    case RegressorKind::Zero: return 0;
    case RegressorKind::CosX1: return 1;
    case RegressorKind::X1SinX2: return 2;
    case RegressorKind::Norrbin: return 2;
  }
  return 0;
}

template <class S>
std::vector<S> eval_regressor(RegressorKind k, std::span<const S> xbar) {
  using std::cos;
  using std::sin;
  switch (k) {
    case RegressorKind::Zero:
      return {};
    case RegressorKind::CosX1:
      return {cos(xbar[0])};
    case RegressorKind::X1SinX2:
      return {xbar[0] * sin(xbar[1])};
    case RegressorKind::Norrbin:
      return {xbar[1], xbar[1] * xbar[1] * xbar[1]};
  }
  return {};
}

/// Strict-feedback agent: each channel l < m reads gain * x_{l+1} plus a
/// parameterized regressor and a bounded disturbance; channel m reads the
/// input instead of a state.
class AgentModel {
 public:
  AgentModel(std::vector<double> gains, std::vector<double> theta,
             std::vector<RegressorKind> regressors, std::vector<DisturbanceSignal> disturbances)
      : gains_(std::move(gains)),
        theta_(std::move(theta)),
        regressors_(std::move(regressors)),
        disturbances_(std::move(disturbances)) {
    const std::size_t m = gains_.size();
    if (m == 0) throw ConfigError("agent needs at least one channel");
    for (double g : gains_)
      if (!std::isfinite(g) || g == 0.0) throw ConfigError("high-frequency gains must be nonzero");
    if (regressors_.size() != m || disturbances_.size() != m)
      throw DimensionMismatch("one regressor and one disturbance per channel required");
    for (std::size_t l = 0; l < m; ++l) {
      const RegressorKind k = regressors_[l];
      if (k != RegressorKind::Zero && regressor_dim(k) != static_cast<int>(theta_.size()))
        throw DimensionMismatch("regressor output must match the parameter dimension");
      if (regressor_arity(k) > static_cast<int>(l) + 1)
        throw DimensionMismatch("regressor reads states beyond its channel");
    }
  }

  int m() const { return static_cast<int>(gains_.size()); }
  int p() const { return static_cast<int>(theta_.size()); }
  double gain(int l) const { return gains_[l]; }
  const std::vector<double>& theta() const { return theta_; }
  RegressorKind regressor(int l) const { return regressors_[l]; }
  const DisturbanceSignal& disturbance(int l) const { return disturbances_[l]; }

 private:
  std::vector<double> gains_;
  std::vector<double> theta_;
  std::vector<RegressorKind> regressors_;
  std::vector<DisturbanceSignal> disturbances_;
};

inline std::vector<double> agent_derivative(const AgentModel& model, std::span<const double> x,
                                            double u, double t) {
  const int m = model.m();
  if (static_cast<int>(x.size()) != m) throw DimensionMismatch("state size does not match order");
  std::vector<double> dx(m);
  for (int l = 0; l < m; ++l) {
    double drift = 0.0;
    const auto phi = eval_regressor<double>(model.regressor(l), x.first(l + 1));
    for (std::size_t c = 0; c < phi.size(); ++c) drift += model.theta()[c] * phi[c];
    const double feed = (l + 1 < m) ? model.gain(l) * x[l + 1] : model.gain(l) * u;
    dx[l] = feed + drift + eval_disturbance(model.disturbance(l), t);
    if (!std::isfinite(dx[l])) throw NonFinite("agent derivative is not finite");
  }
  return dx;
}

/// Second-order course dynamics T y'' + y' + W y'^3 = M u + rho rewritten in
/// strict-feedback form: x1 = y, x2 = y', unit gain on channel 1, gain M/T on
/// the input channel, parameters (-1/T, -W/T), disturbance rho/T.
inline AgentModel norrbin_to_strict_feedback(double time_constant, double norrbin_coeff,
                                             double gain_constant, DisturbanceSignal rho) {
  if (time_constant == 0.0) throw ZeroTimeConstant("time constant must be nonzero");
  const double inv_t = 1.0 / time_constant;
  return AgentModel({1.0, gain_constant * inv_t}, {-inv_t, -norrbin_coeff * inv_t},
                    {RegressorKind::Zero, RegressorKind::Norrbin},
                    {DisturbanceSignal::zero(), rho.scaled(inv_t)});
}

}  // namespace consim
