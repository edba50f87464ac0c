#include "tabbench/mlp.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "tabbench/error.hpp"

namespace tabbench {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "leaky_relu") return Activation::leaky_relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  fail(ErrorCode::InvalidArgument, "unknown activation '" + s + "'");
}

namespace {

ad::Var activate(ad::Var x, const DenseLayer& layer) {
  switch (layer.activation) {
    case Activation::identity: return x;
    case Activation::relu: return ad::relu(x);
    case Activation::leaky_relu: return ad::leaky_relu(x, layer.slope);
    case Activation::sigmoid: return ad::sigmoid(x);
    case Activation::tanh: return ad::tanh(x);
  }
  return x;
}

void activate_in_place(Tensor& t, const DenseLayer& layer) {
  switch (layer.activation) {
    case Activation::identity: return;
    case Activation::relu: t = t.cwiseMax(0.0); return;
    case Activation::leaky_relu: {
      const double s = layer.slope;
      t = t.unaryExpr([s](double v) { return v > 0.0 ? v : s * v; });
      return;
    }
    case Activation::sigmoid:
      t = t.unaryExpr([](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
      return;
    case Activation::tanh: t = t.array().tanh().matrix(); return;
  }
}

}  // namespace

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.cols())
      fail(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + ": bias shape does not match weight");
    if (i > 0 && layers_[i - 1].out_dim() != l.in_dim())
      fail(ErrorCode::DimensionMismatch, "layer " + std::to_string(i) + ": input dim " + std::to_string(l.in_dim()) +
                                             " does not chain from " + std::to_string(layers_[i - 1].out_dim()));
  }
}

std::vector<ad::Var> Mlp::bind(ad::Graph& graph, bool trainable) const {
  std::vector<ad::Var> params;
  params.reserve(layers_.size() * 2);
  for (const auto& layer : layers_) {
    params.push_back(trainable ? graph.variable(layer.weight) : graph.constant(layer.weight));
    params.push_back(trainable ? graph.variable(layer.bias) : graph.constant(layer.bias));
  }
  return params;
}

ad::Var Mlp::apply(ad::Var input, std::span<const ad::Var> params) const {
  if (layers_.empty()) fail(ErrorCode::InvalidArgument, "forward through an empty MLP");
  if (params.size() != layers_.size() * 2) fail(ErrorCode::ShapeMismatch, "parameter binding does not match MLP");
  if (input.cols() != layers_.front().in_dim())
    fail(ErrorCode::DimensionMismatch, "batch width " + std::to_string(input.cols()) + " != input dim " +
                                           std::to_string(layers_.front().in_dim()));
  ad::Var h = input;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    h = activate(ad::affine(h, params[2 * i], params[2 * i + 1]), layers_[i]);
  return h;
}

Mlp::Forward Mlp::forward(ad::Graph& graph, ad::Var input, bool trainable) const {
  Forward out;
  out.params = bind(graph, trainable);
  out.output = apply(input, out.params);
  return out;
}

Tensor Mlp::infer(const Tensor& input) const {
  if (layers_.empty()) fail(ErrorCode::InvalidArgument, "inference through an empty MLP");
  if (input.cols() != layers_.front().in_dim())
    fail(ErrorCode::DimensionMismatch, "batch width " + std::to_string(input.cols()) + " != input dim " +
                                           std::to_string(layers_.front().in_dim()));
  Tensor h = input;
  for (const auto& layer : layers_) {
    Tensor next = h * layer.weight;
    next.rowwise() += layer.bias.row(0);
    activate_in_place(next, layer);
    h = std::move(next);
  }
  return h;
}

std::vector<Tensor*> Mlp::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> Mlp::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().in_dim()); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().out_dim()); }

std::vector<LayerSpec> Mlp::architecture() const {
  std::vector<LayerSpec> out;
  for (const auto& l : layers_)
    out.push_back({static_cast<std::size_t>(l.in_dim()), static_cast<std::size_t>(l.out_dim()), l.activation, l.slope});
  return out;
}

std::vector<double> Mlp::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const Tensor* p : parameters()) {
    // Row-major order so the layout is independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < p->rows(); ++r)
      for (Eigen::Index c = 0; c < p->cols(); ++c) flat.push_back((*p)(r, c));
  }
  return flat;
}

void Mlp::set_flat_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    fail(ErrorCode::ShapeMismatch, "expected " + std::to_string(parameter_count()) + " parameters, got " +
                                       std::to_string(flat.size()));
  std::size_t k = 0;
  for (Tensor* p : parameters()) {
    for (Eigen::Index r = 0; r < p->rows(); ++r)
      for (Eigen::Index c = 0; c < p->cols(); ++c) (*p)(r, c) = flat[k++];
  }
}

bool Mlp::operator==(const Mlp& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.activation != b.activation || a.slope != b.slope) return false;
    if (a.weight.rows() != b.weight.rows() || a.weight.cols() != b.weight.cols()) return false;
    if (a.weight != b.weight || a.bias != b.bias) return false;
  }
  return true;
}

Mlp init_weights(std::span<const LayerSpec> specs, InitScheme /*scheme*/, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<DenseLayer> layers;
  for (const auto& s : specs) {
    if (s.in == 0 || s.out == 0) fail(ErrorCode::InvalidArgument, "layer dimensions must be positive");
    const double bound = std::sqrt(6.0 / static_cast<double>(s.in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer;
    layer.weight.resize(static_cast<Eigen::Index>(s.in), static_cast<Eigen::Index>(s.out));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = dist(rng);
    layer.bias = Tensor::Zero(1, static_cast<Eigen::Index>(s.out));
    layer.activation = s.activation;
    layer.slope = s.slope;
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

Mlp init_weights(std::span<const std::size_t> dims, Activation hidden, Activation output, std::uint64_t seed,
                 double slope) {
  if (dims.size() < 2) fail(ErrorCode::InvalidArgument, "need at least input and output dims");
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const bool last = i + 2 == dims.size();
    specs.push_back({dims[i], dims[i + 1], last ? output : hidden, slope});
  }
  return init_weights(specs, InitScheme::uniform_kaiming, seed);
}

nlohmann::json mlp_to_json(const Mlp& mlp) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& s : mlp.architecture()) {
    nlohmann::json l{{"in", s.in}, {"out", s.out}, {"activation", to_string(s.activation)}};
    if (s.activation == Activation::leaky_relu) l["slope"] = s.slope;
    layers.push_back(std::move(l));
  }
  return {{"layers", std::move(layers)}, {"parameters", mlp.flat_parameters()}};
}

Mlp mlp_from_json(const nlohmann::json& doc) {
  std::vector<LayerSpec> specs;
  try {
    for (const auto& l : doc.at("layers")) {
      LayerSpec s;
      s.in = l.at("in").get<std::size_t>();
      s.out = l.at("out").get<std::size_t>();
      s.activation = activation_from_string(l.at("activation").get<std::string>());
      s.slope = l.value("slope", 0.2);
      specs.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("malformed MLP descriptor: ") + e.what());
  }
  Mlp mlp = init_weights(specs, InitScheme::uniform_kaiming, 0);
  if (doc.contains("parameters")) mlp.set_flat_parameters(doc["parameters"].get<std::vector<double>>());
  return mlp;
}

void write_parameter_blob(const Mlp& mlp, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "parameter blobs assume a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  const auto flat = mlp.flat_parameters();
  out.write(reinterpret_cast<const char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) fail(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

void read_parameter_blob(Mlp& mlp, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::vector<double> flat(mlp.parameter_count());
  in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(flat.size() * sizeof(double)) || in.peek() != EOF)
    fail(ErrorCode::ShapeMismatch, "parameter blob '" + path.string() + "' has the wrong size");
  mlp.set_flat_parameters(flat);
}

void AdamState::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size())
    fail(ErrorCode::ShapeMismatch, "adam: " + std::to_string(params.size()) + " parameters but " +
                                       std::to_string(grads.size()) + " gradients");
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.push_back(Tensor::Zero(p->rows(), p->cols()));
      v_.push_back(Tensor::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) fail(ErrorCode::ShapeMismatch, "adam: parameter registry changed between steps");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->rows() != grads[i].rows() || params[i]->cols() != grads[i].cols() ||
        params[i]->rows() != m_[i].rows() || params[i]->cols() != m_[i].cols())
      fail(ErrorCode::ShapeMismatch, "adam: shape mismatch at parameter " + std::to_string(i));
  }

  ++step_;
  const auto& o = options_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor g = grads[i];
    if (o.weight_decay != 0.0) g += o.weight_decay * p;
    m_[i] = o.beta1 * m_[i] + (1.0 - o.beta1) * g;
    v_[i] = o.beta2 * v_[i] + (1.0 - o.beta2) * g.cwiseProduct(g);
    const auto m_hat = m_[i].array() / c1;
    const auto v_hat = v_[i].array() / c2;
    p.array() -= o.lr * m_hat / (v_hat.sqrt() + o.eps);
  }
}

std::vector<Tensor> collect_gradients(const ad::Graph& graph, std::span<const ad::Var> params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& p : params) out.push_back(graph.grad(p.id));
  return out;
}

}  // namespace tabbench
