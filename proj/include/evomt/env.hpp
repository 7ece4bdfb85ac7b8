#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

namespace evomt {

enum class EnvId { Cartpole, Acrobot, Pendulum };

const char* env_name(EnvId id);

// One structure covers all three environments; only the fields relevant to
// env_id are read. The tunable fields mirror the experiment knobs: pole
// length for cartpole, joint length for acrobot, speed/torque caps for
// pendulum.
struct EnvConfig {
  EnvId env_id = EnvId::Cartpole;
  double pole_length = 0.5;   // cartpole: half-pole length parameter, m
  double joint_length = 1.0;  // acrobot: both link lengths, m
  double max_speed = 8.0;     // pendulum: |theta_dot| clamp, rad/s
  double max_torque = 2.0;    // pendulum: |u| bound, N*m
  int torque_bins = 5;        // pendulum: odd number of discrete torque levels
  int max_steps = 300;        // episode cap
};

// Physical state. Cartpole: (x, x_dot, theta, theta_dot); acrobot:
// (theta1, theta2, theta1_dot, theta2_dot); pendulum: (theta, theta_dot, -, -).
struct EnvState {
  std::array<double, 4> q{};
  int step_count = 0;
};

// Fixed-capacity observation vector (max dim is acrobot's 6); avoids heap
// traffic in rollout inner loops.
struct Observation {
  std::array<double, 6> data{};
  int dim = 0;
  double operator[](int i) const { return data[static_cast<std::size_t>(i)]; }
  const double* begin() const { return data.data(); }
  const double* end() const { return data.data() + dim; }
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

// Throws ConfigError on non-positive physical parameters, even torque bin
// counts, or a non-positive episode cap.
void validate(const EnvConfig& config);

// Table-driven presets keyed "<env>:<A|B|C|D>", e.g. "cartpole:B" ->
// pole_length 0.6. Throws ConfigError for unknown names.
EnvConfig env_preset(const std::string& name);

int observation_dim(const EnvConfig& config);
int action_count(const EnvConfig& config);
int default_max_steps(EnvId id);

// Draw the standard initial state (uniform component ranges per environment)
// deterministically from the seed; step_count = 0.
std::pair<EnvState, Observation> reset(const EnvConfig& config, std::uint64_t seed);

// Advance one control step. Throws UsageError on an out-of-range action.
std::pair<EnvState, StepResult> step(const EnvState& state, int action,
                                     const EnvConfig& config);

Observation observation_of(const EnvState& state, const EnvConfig& config);

// Map an angle to its representative in [-pi, pi].
double wrap_angle(double x);

// Discrete torque level for a pendulum action index (evenly spaced over
// [-max_torque, +max_torque]; bin 0 is the most negative).
double pendulum_torque(const EnvConfig& config, int action);

}  // namespace evomt
