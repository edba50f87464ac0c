#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "support.hpp"
#include "tabbench/error.hpp"
#include "tabbench/mlp.hpp"

using namespace tabbench;
namespace ad = tabbench::ad;

TEST_CASE("product rule on a scalar graph") {
  ad::Graph g;
  auto x = g.variable(Tensor::Constant(1, 1, 2.0));
  auto y = g.variable(Tensor::Constant(1, 1, 3.0));
  g.backward(x * y);
  CHECK(x.grad()(0, 0) == 3.0);
  CHECK(y.grad()(0, 0) == 2.0);
}

TEST_CASE("gradient of a sum of squares") {
  ad::Graph g;
  Tensor v(1, 3);
  v << 1, 2, 3;
  auto x = g.variable(v);
  g.backward(ad::sum(ad::square(x)));
  CHECK(x.grad()(0, 0) == 2.0);
  CHECK(x.grad()(0, 1) == 4.0);
  CHECK(x.grad()(0, 2) == 6.0);
}

TEST_CASE("backward rejects non-scalar roots and mismatched shapes") {
  ad::Graph g;
  auto x = g.variable(Tensor::Ones(2, 2));
  CHECK_THROWS_AS(g.backward(x), Error);
  auto y = g.variable(Tensor::Ones(3, 2));
  CHECK_THROWS_AS(x + y, Error);
}

TEST_CASE("node inputs always precede the node") {
  ad::Graph g;
  auto x = g.variable(Tensor::Random(3, 2));
  auto w = g.variable(Tensor::Random(2, 4));
  auto y = ad::sum(ad::sigmoid(ad::matmul(x, w)) * 2.0);
  (void)y;
  for (ad::NodeId id = 0; id < g.size(); ++id)
    for (ad::NodeId in : g.inputs(id)) CHECK(in < id);
}

TEST_CASE("every primitive matches central differences") {
  std::mt19937_64 rng(5);
  const auto a = oracle::random_matrix(3, 4, rng);
  const auto b = oracle::random_matrix(3, 4, rng, 0.5, 1.5);
  const auto row = oracle::random_matrix(1, 4, rng, 0.5, 1.5);
  const auto w = oracle::random_matrix(4, 2, rng);
  const auto bias = oracle::random_matrix(1, 2, rng);
  const auto s = oracle::random_matrix(1, 1, rng, 0.5, 1.5);

  using V = std::vector<ad::Var>;
  const std::vector<std::pair<const char*, testing::LossBuilder>> unary{
      {"neg", [](ad::Graph&, const V& v) { return ad::sum(-v[0]); }},
      {"relu", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::relu(v[0]))); }},
      {"leaky", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::leaky_relu(v[0], 0.2))); }},
      {"sigmoid", [](ad::Graph&, const V& v) { return ad::sum(ad::sigmoid(v[0])); }},
      {"tanh", [](ad::Graph&, const V& v) { return ad::sum(ad::tanh(v[0])); }},
      {"exp", [](ad::Graph&, const V& v) { return ad::mean(ad::exp(v[0])); }},
      {"abs", [](ad::Graph&, const V& v) { return ad::sum(ad::abs(v[0])); }},
      {"softmax", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::softmax_rows(v[0]))); }},
      {"sum_rows", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::sum_rows(v[0]))); }},
      {"mean_rows", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::mean_rows(v[0]))); }},
      {"sum_cols", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::sum_cols(v[0]))); }},
      {"slice", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::slice_cols(v[0], 1, 2))); }},
      {"clamp", [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::clamp(v[0], -0.5, 0.5))); }},
      {"concat",
       [](ad::Graph&, const V& v) {
         const std::array<ad::Var, 2> parts{ad::slice_cols(v[0], 2, 2), ad::square(ad::slice_cols(v[0], 0, 2))};
         return ad::sum(ad::exp(ad::concat_cols(parts)));
       }},
  };
  for (const auto& [name, f] : unary) {
    CAPTURE(name);
    CHECK(testing::gradient_error(f, {a}) < 1e-6);
  }
  CHECK(testing::gradient_error([](ad::Graph&, const V& v) { return ad::sum(ad::log(v[0])); }, {b}) < 1e-6);
  CHECK(testing::gradient_error([](ad::Graph&, const V& v) { return ad::sum(ad::sqrt(v[0])); }, {b}) < 1e-6);
  CHECK(testing::gradient_error([](ad::Graph&, const V& v) { return ad::sum(v[0] * v[1] - v[0] / v[1]); }, {a, b}) <
        1e-6);
  CHECK(testing::gradient_error(
            [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::div_row(ad::mul_row(v[0], v[1]), v[1] + 1.0))); },
            {a, row}) < 1e-6);
  CHECK(testing::gradient_error(
            [](ad::Graph&, const V& v) { return ad::sum(ad::square(ad::sub_row(ad::add_row(v[0], v[1]), v[1] * 3.0))); },
            {a, row}) < 1e-6);
  CHECK(testing::gradient_error(
            [](ad::Graph&, const V& v) {
              return ad::sum(ad::square(ad::div_by_scalar(ad::mul_by_scalar(v[0], v[1]), v[1] * v[1])));
            },
            {a, s}) < 1e-6);
  CHECK(testing::gradient_error(
            [](ad::Graph&, const V& v) { return ad::sum(ad::tanh(ad::affine(v[0], v[1], v[2]))); }, {a, w, bias}) <
        1e-6);
  CHECK(testing::gradient_error([](ad::Graph&, const V& v) { return ad::mean(ad::square(ad::matmul(v[0], v[1]))); },
                                {a, w}) < 1e-6);
}

TEST_CASE("identity layer with unit weights reproduces its input") {
  Mlp net({DenseLayer{Tensor::Identity(3, 3), Tensor::Zero(1, 3), Activation::identity}});
  const Tensor x = Tensor::Random(4, 3);
  CHECK(net.infer(x).isApprox(x));
}

TEST_CASE("sigmoid layer with zero parameters outputs one half") {
  Mlp net({DenseLayer{Tensor::Zero(2, 3), Tensor::Zero(1, 3), Activation::sigmoid}});
  CHECK(net.infer(Tensor::Zero(5, 2)).isApproxToConstant(0.5));
  Mlp relu({DenseLayer{Tensor::Identity(1, 1), Tensor::Zero(1, 1), Activation::relu}});
  CHECK(relu.infer(Tensor::Constant(1, 1, -3.0))(0, 0) == 0.0);
}

TEST_CASE("layer dimensions must chain") {
  CHECK_THROWS_AS(Mlp({DenseLayer{Tensor::Zero(2, 3), Tensor::Zero(1, 3)}, DenseLayer{Tensor::Zero(4, 1), Tensor::Zero(1, 1)}}),
                  Error);
}

TEST_CASE("initialization is bounded, deterministic and counts parameters") {
  const std::vector<std::size_t> dims{5, 16, 8, 3};
  const Mlp a = init_weights(dims, Activation::relu, Activation::sigmoid, 42);
  const Mlp b = init_weights(dims, Activation::relu, Activation::sigmoid, 42);
  const Mlp c = init_weights(dims, Activation::relu, Activation::sigmoid, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.parameter_count() == 5 * 16 + 16 + 16 * 8 + 8 + 8 * 3 + 3);
  for (const auto& layer : a.layers()) {
    const double bound = std::sqrt(6.0 / static_cast<double>(layer.in_dim()));
    CHECK(layer.weight.cwiseAbs().maxCoeff() <= bound);
    CHECK(layer.bias.isZero(0.0));
  }
}

TEST_CASE("MLP gradients match central differences") {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const std::vector<std::size_t> dims{4, 1 + seed % 16, 3 + seed, 2};
    const auto hidden = seed % 2 ? Activation::leaky_relu : Activation::tanh;
    const Mlp net = init_weights(dims, hidden, Activation::sigmoid, seed);
    const auto x = oracle::random_matrix(5, 4, rng);
    std::vector<oracle::Matrix> inputs{x};
    for (const Tensor* p : net.parameters()) inputs.push_back(*p);
    const auto err = testing::gradient_error(
        [&](ad::Graph&, const std::vector<ad::Var>& v) {
          const std::vector<ad::Var> params(v.begin() + 1, v.end());
          return ad::mean(ad::square(net.apply(v[0], params)));
        },
        inputs);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("graph forward agrees with plain inference") {
  const std::vector<std::size_t> dims{3, 7, 2};
  const Mlp net = init_weights(dims, Activation::leaky_relu, Activation::tanh, 3);
  const Tensor x = Tensor::Random(6, 3);
  ad::Graph g;
  const auto fwd = net.forward(g, g.constant(x), false);
  CHECK(fwd.output.value().isApprox(net.infer(x)));
}

TEST_CASE("parameter serialization round trips") {
  testing::TempDir dir("nn");
  const std::vector<std::size_t> dims{3, 4, 2};
  const Mlp net = init_weights(dims, Activation::relu, Activation::identity, 1);
  CHECK(mlp_from_json(mlp_to_json(net)) == net);
  write_parameter_blob(net, dir / "p.bin");
  Mlp other = init_weights(dims, Activation::relu, Activation::identity, 2);
  read_parameter_blob(other, dir / "p.bin");
  CHECK(other == net);
  auto flat = net.flat_parameters();
  flat.pop_back();
  CHECK_THROWS_AS(other.set_flat_parameters(flat), Error);
}

TEST_CASE("Adam first step moves each coordinate by the learning rate") {
  Tensor p = Tensor::Constant(1, 1, 1.0);
  std::vector<Tensor*> params{&p};
  const std::vector<Tensor> grads{Tensor::Constant(1, 1, 1.0)};
  AdamState adam({.lr = 0.1, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .weight_decay = 0.0});
  adam.step(params, grads);
  CHECK(p(0, 0) == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(adam.steps() == 1);
}

TEST_CASE("Adam leaves parameters alone with zero gradient or zero learning rate") {
  Tensor p = Tensor::Random(2, 3);
  const Tensor before = p;
  std::vector<Tensor*> params{&p};
  AdamState still({.lr = 0.1, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .weight_decay = 0.0});
  still.step(params, std::vector<Tensor>{Tensor::Zero(2, 3)});
  CHECK(p == before);
  AdamState frozen({.lr = 0.0, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8, .weight_decay = 1e-5});
  for (int i = 0; i < 5; ++i) frozen.step(params, std::vector<Tensor>{Tensor::Random(2, 3)});
  CHECK(p == before);
}

TEST_CASE("identical Adam runs follow identical trajectories") {
  auto run = [] {
    Mlp net = init_weights(std::vector<std::size_t>{2, 8, 1}, Activation::relu, Activation::identity, 4);
    AdamState adam({.lr = 1e-2});
    Tensor x(4, 2);
    x << 0, 0, 0, 1, 1, 0, 1, 1;
    Tensor y(4, 1);
    y << 0, 1, 1, 0;
    for (int it = 0; it < 50; ++it) {
      ad::Graph g;
      const auto params = net.bind(g);
      const auto loss = ad::mean(ad::square(net.apply(g.constant(x), params) - g.constant(y)));
      g.backward(loss);
      const auto grads = collect_gradients(g, params);
      const auto ptrs = net.parameters();
      adam.step(ptrs, grads);
    }
    return net.flat_parameters();
  };
  CHECK(run() == run());
}
