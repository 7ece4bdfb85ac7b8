#include "evomt/policy.hpp"

#include <cmath>
#include <cstddef>

#include "evomt/errors.hpp"

namespace evomt {

void validate(const Architecture& arch) {
  if (arch.layer_sizes.size() < 3)
    throw ConfigError("Architecture: need at least one hidden layer");
  for (int s : arch.layer_sizes)
    if (s <= 0) throw ConfigError("Architecture: layer sizes must be positive");
}

Architecture default_architecture(int obs_dim, int n_actions) {
  Architecture arch;
  arch.layer_sizes = {obs_dim, 16, 16, 8, n_actions};
  arch.activation = Architecture::Activation::ReLU;
  return arch;
}

namespace {

// Runs the network, leaving the output activations in ws.a.
void forward_into_workspace(const Architecture& arch, std::span<const double> weights,
                            std::span<const double> obs, PolicyWorkspace& ws) {
  const int n_layers = arch.n_weight_layers();
  if (n_layers < 1) throw UsageError("forward: architecture has no layers");
  if (static_cast<int>(obs.size()) != arch.layer_sizes.front())
    throw UsageError("forward: observation dimension mismatch");
  if (static_cast<int>(weights.size()) != arch.parameter_count())
    throw UsageError("forward: weight vector length mismatch");

  ws.a.assign(obs.begin(), obs.end());
  std::size_t offset = 0;
  for (int l = 0; l < n_layers; ++l) {
    const int n_in = arch.layer_sizes[static_cast<std::size_t>(l)];
    const int n_out = arch.layer_sizes[static_cast<std::size_t>(l) + 1];
    const double* w = weights.data() + offset;
    const double* bias = w + static_cast<std::size_t>(n_in) * static_cast<std::size_t>(n_out);
    ws.b.resize(static_cast<std::size_t>(n_out));
    for (int o = 0; o < n_out; ++o) {
      double acc = bias[o];
      const double* row = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(n_in);
      for (int i = 0; i < n_in; ++i) acc += row[i] * ws.a[static_cast<std::size_t>(i)];
      ws.b[static_cast<std::size_t>(o)] = acc;
    }
    if (l < n_layers - 1) {
      if (arch.activation == Architecture::Activation::ReLU) {
        for (double& v : ws.b) v = v > 0.0 ? v : 0.0;
      } else {
        for (double& v : ws.b) v = std::tanh(v);
      }
    }
    ws.a.swap(ws.b);
    offset += static_cast<std::size_t>(arch.layer_param_count(l));
  }
}

}  // namespace

void forward(const Architecture& arch, std::span<const double> weights,
             std::span<const double> obs, std::vector<double>& out, PolicyWorkspace& ws) {
  forward_into_workspace(arch, weights, obs, ws);
  out = ws.a;
}

std::vector<double> forward(const Architecture& arch, std::span<const double> weights,
                            std::span<const double> obs) {
  PolicyWorkspace ws;
  std::vector<double> out;
  forward(arch, weights, obs, out, ws);
  return out;
}

int act(const Architecture& arch, std::span<const double> weights,
        std::span<const double> obs, PolicyWorkspace& ws) {
  forward_into_workspace(arch, weights, obs, ws);
  int best = 0;
  for (int i = 1; i < static_cast<int>(ws.a.size()); ++i)
    if (ws.a[static_cast<std::size_t>(i)] > ws.a[static_cast<std::size_t>(best)]) best = i;
  return best;
}

int act(const Architecture& arch, std::span<const double> weights,
        std::span<const double> obs) {
  PolicyWorkspace ws;
  return act(arch, weights, obs, ws);
}

}  // namespace evomt
