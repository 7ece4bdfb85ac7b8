#include "evomt/env.hpp"

#include <cmath>

#include "evomt/errors.hpp"
#include "evomt/rng.hpp"

namespace evomt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// --- cartpole constants (standard cart-pole model) ---
constexpr double kGravity = 9.8;
constexpr double kCartMass = 1.0;
constexpr double kPoleMass = 0.1;
constexpr double kForceMag = 10.0;
constexpr double kCartDt = 0.02;
constexpr double kAngleLimit = 12.0 * 2.0 * kPi / 360.0;  // 12 degrees
constexpr double kPositionLimit = 2.4;

// --- acrobot constants ---
constexpr double kAcrobotDt = 0.2;
constexpr double kMaxVel1 = 4.0 * kPi;
constexpr double kMaxVel2 = 9.0 * kPi;

// --- pendulum constants ---
constexpr double kPendulumG = 10.0;
constexpr double kPendulumMass = 1.0;
constexpr double kPendulumLength = 1.0;
constexpr double kPendulumDt = 0.05;

double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

const char* env_name(EnvId id) {
  switch (id) {
    case EnvId::Cartpole: return "cartpole";
    case EnvId::Acrobot: return "acrobot";
    case EnvId::Pendulum: return "pendulum";
  }
  return "?";
}

double wrap_angle(double x) {
  double y = std::fmod(x + kPi, 2.0 * kPi);
  if (y < 0.0) y += 2.0 * kPi;
  return y - kPi;
}

int default_max_steps(EnvId id) {
  switch (id) {
    case EnvId::Cartpole: return 300;
    case EnvId::Acrobot: return 500;
    case EnvId::Pendulum: return 200;
  }
  return 0;
}

void validate(const EnvConfig& c) {
  if (c.max_steps <= 0) throw ConfigError("EnvConfig: max_steps must be positive");
  switch (c.env_id) {
    case EnvId::Cartpole:
      if (c.pole_length <= 0.0) throw ConfigError("EnvConfig: pole_length must be positive");
      break;
    case EnvId::Acrobot:
      if (c.joint_length <= 0.0) throw ConfigError("EnvConfig: joint_length must be positive");
      break;
    case EnvId::Pendulum:
      if (c.max_speed <= 0.0) throw ConfigError("EnvConfig: max_speed must be positive");
      if (c.max_torque <= 0.0) throw ConfigError("EnvConfig: max_torque must be positive");
      if (c.torque_bins < 3 || c.torque_bins % 2 == 0)
        throw ConfigError("EnvConfig: torque_bins must be an odd number >= 3");
      break;
  }
}

EnvConfig env_preset(const std::string& name) {
  EnvConfig c;
  const auto sep = name.find(':');
  const std::string env = name.substr(0, sep);
  const std::string variant = sep == std::string::npos ? "" : name.substr(sep + 1);
  int v = -1;
  if (variant == "A") v = 0;
  else if (variant == "B") v = 1;
  else if (variant == "C") v = 2;
  else if (variant == "D") v = 3;

  if (env == "cartpole" && v >= 0) {
    static constexpr double kPoleLengths[4] = {0.5, 0.6, 0.7, 0.4};
    c.env_id = EnvId::Cartpole;
    c.pole_length = kPoleLengths[v];
  } else if (env == "acrobot" && v >= 0) {
    static constexpr double kJointLengths[4] = {1.0, 1.2, 1.4, 1.6};
    c.env_id = EnvId::Acrobot;
    c.joint_length = kJointLengths[v];
  } else if (env == "pendulum" && v >= 0) {
    static constexpr double kMaxSpeeds[4] = {8.0, 6.0, 10.0, 8.0};
    static constexpr double kMaxTorques[4] = {2.0, 2.0, 2.0, 2.5};
    c.env_id = EnvId::Pendulum;
    c.max_speed = kMaxSpeeds[v];
    c.max_torque = kMaxTorques[v];
  } else {
    throw ConfigError("unknown environment preset '" + name + "'");
  }
  c.max_steps = default_max_steps(c.env_id);
  validate(c);
  return c;
}

int observation_dim(const EnvConfig& c) {
  switch (c.env_id) {
    case EnvId::Cartpole: return 4;
    case EnvId::Acrobot: return 6;
    case EnvId::Pendulum: return 3;
  }
  return 0;
}

int action_count(const EnvConfig& c) {
  switch (c.env_id) {
    case EnvId::Cartpole: return 2;
    case EnvId::Acrobot: return 3;
    case EnvId::Pendulum: return c.torque_bins;
  }
  return 0;
}

double pendulum_torque(const EnvConfig& c, int action) {
  const double lo = -c.max_torque;
  const double hi = c.max_torque;
  return lo + (hi - lo) * static_cast<double>(action) / static_cast<double>(c.torque_bins - 1);
}

Observation observation_of(const EnvState& s, const EnvConfig& c) {
  Observation o;
  switch (c.env_id) {
    case EnvId::Cartpole:
      o.dim = 4;
      o.data = {s.q[0], s.q[1], s.q[2], s.q[3], 0.0, 0.0};
      break;
    case EnvId::Acrobot:
      o.dim = 6;
      o.data = {std::cos(s.q[0]), std::sin(s.q[0]), std::cos(s.q[1]),
                std::sin(s.q[1]), s.q[2], s.q[3]};
      break;
    case EnvId::Pendulum:
      o.dim = 3;
      o.data = {std::cos(s.q[0]), std::sin(s.q[0]), s.q[1], 0.0, 0.0, 0.0};
      break;
  }
  return o;
}

std::pair<EnvState, Observation> reset(const EnvConfig& c, std::uint64_t seed) {
  validate(c);
  Rng rng(seed);
  EnvState s;
  switch (c.env_id) {
    case EnvId::Cartpole:
      for (auto& v : s.q) v = rng.uniform(-0.05, 0.05);
      break;
    case EnvId::Acrobot:
      for (auto& v : s.q) v = rng.uniform(-0.1, 0.1);
      break;
    case EnvId::Pendulum:
      s.q[0] = rng.uniform(-kPi, kPi);
      s.q[1] = rng.uniform(-1.0, 1.0);
      break;
  }
  return {s, observation_of(s, c)};
}

namespace {

// Two-link underactuated arm; all sizes scale with L = joint_length
// (mass ~ L, center of mass at L/2, unit link inertia).
struct AcrobotDeriv {
  double L;
  void operator()(const std::array<double, 4>& s, double torque,
                  std::array<double, 4>& ds) const {
    const double m1 = L, m2 = L, l1 = L, lc1 = L / 2.0, lc2 = L / 2.0;
    const double i1 = 1.0, i2 = 1.0, g = 9.8;
    const double th1 = s[0], th2 = s[1], dth1 = s[2], dth2 = s[3];

    const double d1 = m1 * lc1 * lc1 +
                      m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(th2)) + i1 + i2;
    const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(th2)) + i2;
    const double phi2 = m2 * lc2 * g * std::cos(th1 + th2 - kPi / 2.0);
    const double phi1 = -m2 * l1 * lc2 * dth2 * dth2 * std::sin(th2) -
                        2.0 * m2 * l1 * lc2 * dth2 * dth1 * std::sin(th2) +
                        (m1 * lc1 + m2 * l1) * g * std::cos(th1 - kPi / 2.0) + phi2;
    const double ddth2 =
        (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dth1 * dth1 * std::sin(th2) - phi2) /
        (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    const double ddth1 = -(d2 * ddth2 + phi1) / d1;
    ds = {dth1, dth2, ddth1, ddth2};
  }
};

// One classic RK4 step of size dt on a 4-component state with constant input.
template <class Deriv>
std::array<double, 4> rk4_step(const std::array<double, 4>& s, double input, double dt,
                               const Deriv& f) {
  std::array<double, 4> k1, k2, k3, k4, tmp;
  f(s, input, k1);
  for (int i = 0; i < 4; ++i) tmp[i] = s[i] + dt / 2.0 * k1[i];
  f(tmp, input, k2);
  for (int i = 0; i < 4; ++i) tmp[i] = s[i] + dt / 2.0 * k2[i];
  f(tmp, input, k3);
  for (int i = 0; i < 4; ++i) tmp[i] = s[i] + dt * k3[i];
  f(tmp, input, k4);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i)
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

struct PendulumDeriv {
  void operator()(const std::array<double, 4>& s, double u, std::array<double, 4>& ds) const {
    const double g = kPendulumG, m = kPendulumMass, l = kPendulumLength;
    ds = {s[1], 3.0 * g / (2.0 * l) * std::sin(s[0]) + 3.0 / (m * l * l) * u, 0.0, 0.0};
  }
};

}  // namespace

std::pair<EnvState, StepResult> step(const EnvState& state, int action, const EnvConfig& c) {
  if (action < 0 || action >= action_count(c))
    throw UsageError("action index out of range for " + std::string(env_name(c.env_id)));

  EnvState next = state;
  StepResult r;

  switch (c.env_id) {
    case EnvId::Cartpole: {
      const double force = action == 1 ? kForceMag : -kForceMag;
      const double total_mass = kCartMass + kPoleMass;
      const double pml = kPoleMass * c.pole_length;
      const double x = state.q[0], x_dot = state.q[1];
      const double th = state.q[2], th_dot = state.q[3];
      const double cos_th = std::cos(th), sin_th = std::sin(th);
      const double temp = (force + pml * th_dot * th_dot * sin_th) / total_mass;
      const double th_acc = (kGravity * sin_th - cos_th * temp) /
                            (c.pole_length * (4.0 / 3.0 - kPoleMass * cos_th * cos_th / total_mass));
      const double x_acc = temp - pml * th_acc * cos_th / total_mass;
      next.q[0] = x + kCartDt * x_dot;
      next.q[1] = x_dot + kCartDt * x_acc;
      next.q[2] = th + kCartDt * th_dot;
      next.q[3] = th_dot + kCartDt * th_acc;
      next.step_count = state.step_count + 1;
      r.reward = 1.0;
      const bool failed = std::fabs(next.q[2]) > kAngleLimit ||
                          std::fabs(next.q[0]) > kPositionLimit;
      r.done = failed || next.step_count >= c.max_steps;
      break;
    }
    case EnvId::Acrobot: {
      const double torque = static_cast<double>(action - 1);  // {-1, 0, +1}
      next.q = rk4_step(state.q, torque, kAcrobotDt, AcrobotDeriv{c.joint_length});
      next.q[0] = wrap_angle(next.q[0]);
      next.q[1] = wrap_angle(next.q[1]);
      next.q[2] = clamp(next.q[2], -kMaxVel1, kMaxVel1);
      next.q[3] = clamp(next.q[3], -kMaxVel2, kMaxVel2);
      next.step_count = state.step_count + 1;
      r.reward = -1.0;
      const bool goal = -std::cos(next.q[0]) - std::cos(next.q[0] + next.q[1]) > 1.0;
      r.done = goal || next.step_count >= c.max_steps;
      break;
    }
    case EnvId::Pendulum: {
      const double u = clamp(pendulum_torque(c, action), -c.max_torque, c.max_torque);
      // Cost is charged on the pre-step state, as in the standard formulation.
      const double th_wrapped = wrap_angle(state.q[0]);
      r.reward = -(th_wrapped * th_wrapped + 0.1 * state.q[1] * state.q[1] + 0.001 * u * u);
      next.q = rk4_step(state.q, u, kPendulumDt, PendulumDeriv{});
      next.q[1] = clamp(next.q[1], -c.max_speed, c.max_speed);
      next.step_count = state.step_count + 1;
      r.done = next.step_count >= c.max_steps;
      break;
    }
  }

  r.observation = observation_of(next, c);
  return {next, r};
}

}  // namespace evomt
