#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tabbench/autodiff.hpp"

namespace tabbench {

using ad::Tensor;

enum class Activation { identity, relu, leaky_relu, sigmoid, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct DenseLayer {
  Tensor weight;  // in × out
  Tensor bias;    // 1 × out
  Activation activation = Activation::identity;
  double slope = 0.2;  // leaky_relu only

  Eigen::Index in_dim() const { return weight.rows(); }
  Eigen::Index out_dim() const { return weight.cols(); }
};

struct LayerSpec {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation activation = Activation::identity;
  double slope = 0.2;
};

class Mlp {
 public:
  Mlp() = default;
  // Validates that consecutive layer dimensions chain.
  explicit Mlp(std::vector<DenseLayer> layers);

  struct Forward {
    ad::Var output;
    std::vector<ad::Var> params;  // same order as parameters()
  };

  // Parameters enter the graph as variables when trainable, else as constants.
  Forward forward(ad::Graph& graph, ad::Var input, bool trainable = true) const;
  // Two-phase form of forward(): bind parameters once, apply to several inputs.
  std::vector<ad::Var> bind(ad::Graph& graph, bool trainable = true) const;
  ad::Var apply(ad::Var input, std::span<const ad::Var> params) const;
  // Plain numeric evaluation, no graph.
  Tensor infer(const Tensor& input) const;

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t parameter_count() const;
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<LayerSpec> architecture() const;

  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> flat);

  bool operator==(const Mlp& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

enum class InitScheme { uniform_kaiming };

// Weights ~ U(-sqrt(6/in), +sqrt(6/in)), biases zero. Deterministic per seed.
Mlp init_weights(std::span<const LayerSpec> layers, InitScheme scheme, std::uint64_t seed);
// dims = {in, h1, ..., out}; hidden layers share one activation.
Mlp init_weights(std::span<const std::size_t> dims, Activation hidden, Activation output, std::uint64_t seed,
                 double slope = 0.2);

// Architecture descriptor + flat float64 parameter array.
nlohmann::json mlp_to_json(const Mlp& mlp);
Mlp mlp_from_json(const nlohmann::json& doc);
// Raw little-endian float64 blob of flat_parameters().
void write_parameter_blob(const Mlp& mlp, const std::filesystem::path& path);
void read_parameter_blob(Mlp& mlp, const std::filesystem::path& path);

struct AdamOptions {
  double lr = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-5;
};

// Classic Adam with L2 weight decay folded into the gradient before the
// moment updates.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamOptions options) : options_(options) {}

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);

  std::size_t steps() const { return step_; }
  const AdamOptions& options() const { return options_; }

 private:
  AdamOptions options_;
  std::size_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

// Gradients of the parameter variables after graph.backward().
std::vector<Tensor> collect_gradients(const ad::Graph& graph, std::span<const ad::Var> params);

}  // namespace tabbench
