#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tabbench/autodiff.hpp"

namespace testing {

// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("tabbench_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

using LossBuilder = std::function<tabbench::ad::Var(tabbench::ad::Graph&, const std::vector<tabbench::ad::Var>&)>;

// Worst relative error between reverse-mode and central-difference gradients
// over every input of the builder.
inline double gradient_error(const LossBuilder& build, const std::vector<oracle::Matrix>& inputs) {
  namespace ad = tabbench::ad;
  ad::Graph g;
  std::vector<ad::Var> vars;
  for (const auto& x : inputs) vars.push_back(g.variable(x));
  const ad::Var root = build(g, vars);
  g.backward(root);

  auto value = [&](const std::vector<oracle::Matrix>& xs) {
    ad::Graph h;
    std::vector<ad::Var> cs;
    for (const auto& x : xs) cs.push_back(h.constant(x));
    return build(h, cs).scalar();
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto numeric = oracle::numeric_gradient(value, inputs, i);
    worst = std::max(worst, oracle::relative_error(vars[i].grad(), numeric));
  }
  return worst;
}

}  // namespace testing
