#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tabbench/losses.hpp"
#include "tabbench/mlp.hpp"
#include "tabbench/tabular.hpp"

namespace tabbench {

enum class GeneratorKind { gan, vae, independent };

std::string to_string(GeneratorKind k);
GeneratorKind generator_kind_from_string(const std::string& s);

// Loss switches shared by both neural trainers. The real-data statistics of
// LossConfig are computed from the training matrix at train time.
struct RegularizerSettings {
  int alpha = 0;
  int beta = 0;
  double epsilon = 1e-5;
  AdversarialForm adversarial = AdversarialForm::saturating;
};

struct GanConfig {
  std::size_t latent_dim = 32;
  std::vector<std::size_t> generator_hidden{64, 64};
  std::vector<std::size_t> discriminator_hidden{64, 64};
  std::size_t batch_size = 128;
  std::size_t epochs = 300;
  std::size_t d_steps_per_g_step = 1;
  RegularizerSettings loss;
  AdamOptions optimizer;
  std::uint64_t seed = 0;
  // 0 selects every 10% of the epochs. The final epoch is always kept.
  std::size_t checkpoint_every = 0;

  void validate() const;
  // Batch 16 000, 3 000 epochs.
  static GanConfig full_scale();
};

struct VaeConfig {
  std::size_t latent_dim = 16;
  std::vector<std::size_t> encoder_hidden{64, 64};
  std::vector<std::size_t> decoder_hidden{64, 64};
  std::size_t batch_size = 128;
  std::size_t epochs = 300;
  RegularizerSettings loss;
  AdamOptions optimizer;
  std::uint64_t seed = 0;
  std::size_t checkpoint_every = 0;

  void validate() const;
  static VaeConfig full_scale();
};

// Batch averages for one epoch. Unused components stay 0.
struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double discriminator = 0.0;
  double adversarial = 0.0;
  double reconstruction = 0.0;
  double kld = 0.0;
  double correlation = 0.0;
  double mean = 0.0;
  double total = 0.0;
};

struct Checkpoint {
  std::size_t epoch = 0;
  Mlp network;
};

// Per-column marginals of the independent baseline.
struct IndependentMarginals {
  std::vector<std::vector<double>> category_probabilities;  // empty for continuous columns
  std::vector<std::vector<double>> sorted_values;           // empty for categorical columns
};

struct TrainedGenerator {
  GeneratorKind kind = GeneratorKind::independent;
  TableSchema schema;
  Mlp network;  // generator (gan) or decoder (vae)
  std::size_t latent_dim = 0;
  IndependentMarginals marginals;
  std::vector<EpochLog> log;
  std::vector<Checkpoint> checkpoints;
  std::uint64_t seed = 0;

  // Copy whose network is the given checkpoint's snapshot.
  TrainedGenerator at_checkpoint(std::size_t index) const;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainedGenerator train_gan(const EncodedMatrix& train, const GanConfig& cfg, const EpochCallback& on_epoch = {});
TrainedGenerator train_vae(const EncodedMatrix& train, const VaeConfig& cfg, const EpochCallback& on_epoch = {});
TrainedGenerator fit_independent(const Table& train, std::uint64_t seed);

// Deterministic given (generator, n, seed). n must be >= 1.
Table sample(const TrainedGenerator& g, std::size_t n, std::uint64_t seed);

// Sigmoid on continuous blocks, softmax on each categorical block.
ad::Var apply_output_head(ad::Var logits, const std::vector<ColumnBlock>& layout);
Tensor apply_output_head(const Tensor& logits, const std::vector<ColumnBlock>& layout);

// JSON document plus a float64 parameter blob next to it (same stem, ".bin").
void save_generator(const TrainedGenerator& g, const std::filesystem::path& json_path);
TrainedGenerator load_generator(const std::filesystem::path& json_path);

}  // namespace tabbench
