#pragma once

#include <span>
#include <vector>

namespace evomt {

// Dense feed-forward network shape: layer_sizes = (input dim, hidden dims...,
// output dim). Hidden layers use the configured activation, the output layer
// is linear. Weights are consumed from a flat vector in layer-major order,
// each layer as a row-major (out x in) matrix followed by its biases.
struct Architecture {
  enum class Activation { ReLU, Tanh };

  std::vector<int> layer_sizes;
  Activation activation = Activation::ReLU;

  int n_weight_layers() const { return static_cast<int>(layer_sizes.size()) - 1; }

  // in*out + out for weight layer l (0-based).
  int layer_param_count(int l) const {
    return layer_sizes[static_cast<std::size_t>(l)] * layer_sizes[static_cast<std::size_t>(l) + 1] +
           layer_sizes[static_cast<std::size_t>(l) + 1];
  }

  int parameter_count() const {
    int total = 0;
    for (int l = 0; l < n_weight_layers(); ++l) total += layer_param_count(l);
    return total;
  }
};

// Throws ConfigError unless there is at least one hidden layer and all sizes
// are positive.
void validate(const Architecture& arch);

// Default policy shape used by the experiments: obs -> 16 -> 16 -> 8 -> actions.
Architecture default_architecture(int obs_dim, int n_actions);

// Reusable activation buffers so rollout loops do not allocate per step.
struct PolicyWorkspace {
  std::vector<double> a;
  std::vector<double> b;
};

// Per-action values for one observation. Throws UsageError on weight- or
// observation-dimension mismatch.
void forward(const Architecture& arch, std::span<const double> weights,
             std::span<const double> obs, std::vector<double>& out, PolicyWorkspace& ws);

std::vector<double> forward(const Architecture& arch, std::span<const double> weights,
                            std::span<const double> obs);

// Greedy action: argmax of forward values, ties broken by lowest index.
int act(const Architecture& arch, std::span<const double> weights,
        std::span<const double> obs, PolicyWorkspace& ws);

int act(const Architecture& arch, std::span<const double> weights,
        std::span<const double> obs);

}  // namespace evomt
