#include "tabbench/generators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "tabbench/error.hpp"
#include "tabbench/random.hpp"

namespace tabbench {

namespace {

enum Stream : std::uint64_t { kGeneratorInit = 1, kDiscriminatorInit = 2, kShuffle = 3, kNoise = 4, kEncoderInit = 5 };

Tensor standard_normal(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Tensor t(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) t(r, c) = dist(rng);
  return t;
}

Tensor gather_rows(const Eigen::MatrixXd& data, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t count) {
  Tensor out(static_cast<Eigen::Index>(count), data.cols());
  for (std::size_t i = 0; i < count; ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(order[begin + i]));
  return out;
}

std::vector<std::size_t> with_ends(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

std::size_t resolve_checkpoint_every(std::size_t every, std::size_t epochs) {
  if (every > 0) return every;
  return std::max<std::size_t>(1, epochs / 10);
}

void check_finite(double v, std::size_t epoch, const char* what) {
  if (!std::isfinite(v))
    fail(ErrorCode::NonFiniteLoss, std::string(what) + " loss became non-finite at epoch " + std::to_string(epoch));
}

void check_common(const EncodedMatrix& train, std::size_t batch_size) {
  if (static_cast<std::size_t>(train.rows()) < batch_size)
    fail(ErrorCode::InsufficientData, "training matrix has " + std::to_string(train.rows()) +
                                          " rows, fewer than the batch size " + std::to_string(batch_size));
  if (train.width() == 0) fail(ErrorCode::InsufficientData, "training matrix has no columns");
}

LossConfig make_loss_config(const EncodedMatrix& train, const RegularizerSettings& s) {
  LossConfig cfg = LossConfig::from_training(train.data, s.alpha, s.beta, s.epsilon);
  cfg.adversarial = s.adversarial;
  return cfg;
}

}  // namespace

std::string to_string(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::gan: return "gan";
    case GeneratorKind::vae: return "vae";
    case GeneratorKind::independent: return "independent";
  }
  return "independent";
}

GeneratorKind generator_kind_from_string(const std::string& s) {
  if (s == "gan") return GeneratorKind::gan;
  if (s == "vae") return GeneratorKind::vae;
  if (s == "independent") return GeneratorKind::independent;
  fail(ErrorCode::InvalidArgument, "unknown generator kind '" + s + "'");
}

void GanConfig::validate() const {
  if (batch_size < 2) fail(ErrorCode::InvalidArgument, "batch_size must be >= 2");
  if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (latent_dim < 1) fail(ErrorCode::InvalidArgument, "latent_dim must be >= 1");
  if (d_steps_per_g_step < 1) fail(ErrorCode::InvalidArgument, "d_steps_per_g_step must be >= 1");
  if ((loss.alpha != 0 && loss.alpha != 1) || (loss.beta != 0 && loss.beta != 1))
    fail(ErrorCode::InvalidArgument, "alpha and beta must be 0 or 1");
}

GanConfig GanConfig::full_scale() {
  GanConfig cfg;
  cfg.batch_size = 16000;
  cfg.epochs = 3000;
  return cfg;
}

void VaeConfig::validate() const {
  if (batch_size < 2) fail(ErrorCode::InvalidArgument, "batch_size must be >= 2");
  if (epochs < 1) fail(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (latent_dim < 1) fail(ErrorCode::InvalidArgument, "latent_dim must be >= 1");
  if ((loss.alpha != 0 && loss.alpha != 1) || (loss.beta != 0 && loss.beta != 1))
    fail(ErrorCode::InvalidArgument, "alpha and beta must be 0 or 1");
}

VaeConfig VaeConfig::full_scale() {
  VaeConfig cfg;
  cfg.batch_size = 16000;
  cfg.epochs = 3000;
  return cfg;
}

TrainedGenerator TrainedGenerator::at_checkpoint(std::size_t index) const {
  if (index >= checkpoints.size()) fail(ErrorCode::NoCheckpoints, "checkpoint index out of range");
  TrainedGenerator copy = *this;
  copy.network = checkpoints[index].network;
  return copy;
}

// ---- output head ------------------------------------------------------------

ad::Var apply_output_head(ad::Var logits, const std::vector<ColumnBlock>& layout) {
  std::vector<ad::Var> parts;
  parts.reserve(layout.size());
  for (const auto& block : layout) {
    auto slice = ad::slice_cols(logits, static_cast<Eigen::Index>(block.offset), static_cast<Eigen::Index>(block.width));
    parts.push_back(block.categorical ? ad::softmax_rows(slice) : ad::sigmoid(slice));
  }
  return ad::concat_cols(parts);
}

Tensor apply_output_head(const Tensor& logits, const std::vector<ColumnBlock>& layout) {
  Tensor out = logits;
  for (const auto& block : layout) {
    auto cols = out.middleCols(static_cast<Eigen::Index>(block.offset), static_cast<Eigen::Index>(block.width));
    if (block.categorical) {
      for (Eigen::Index r = 0; r < cols.rows(); ++r) {
        const double m = cols.row(r).maxCoeff();
        cols.row(r) = (cols.row(r).array() - m).exp().matrix();
        cols.row(r) /= cols.row(r).sum();
      }
    } else {
      cols = cols.unaryExpr([](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      });
    }
  }
  return out;
}

// ---- GAN --------------------------------------------------------------------

TrainedGenerator train_gan(const EncodedMatrix& train, const GanConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  check_common(train, cfg.batch_size);
  const LossConfig loss_cfg = make_loss_config(train, cfg.loss);
  const auto m = static_cast<std::size_t>(train.width());
  const auto b = static_cast<Eigen::Index>(cfg.batch_size);
  const auto latent = static_cast<Eigen::Index>(cfg.latent_dim);

  Mlp generator = init_weights(with_ends(cfg.latent_dim, cfg.generator_hidden, m), Activation::relu,
                               Activation::identity, derive_seed(cfg.seed, kGeneratorInit));
  Mlp discriminator = init_weights(with_ends(m, cfg.discriminator_hidden, 1), Activation::leaky_relu,
                                   Activation::sigmoid, derive_seed(cfg.seed, kDiscriminatorInit), 0.2);
  AdamState g_opt(cfg.optimizer);
  AdamState d_opt(cfg.optimizer);
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, kShuffle));
  std::mt19937_64 noise_rng(derive_seed(cfg.seed, kNoise));

  TrainedGenerator result;
  result.kind = GeneratorKind::gan;
  result.schema = train.schema;
  result.latent_dim = cfg.latent_dim;
  result.seed = cfg.seed;
  const std::size_t every = resolve_checkpoint_every(cfg.checkpoint_every, cfg.epochs);

  std::vector<std::size_t> order(static_cast<std::size_t>(train.rows()));
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batches = order.size() / cfg.batch_size;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const Tensor real = gather_rows(train.data, order, bi * cfg.batch_size, cfg.batch_size);

      for (std::size_t step = 0; step < cfg.d_steps_per_g_step; ++step) {
        const Tensor fake = apply_output_head(generator.infer(standard_normal(b, latent, noise_rng)), train.layout);
        ad::Graph graph;
        auto params = discriminator.bind(graph, true);
        auto d_real = discriminator.apply(graph.constant(real), params);
        auto d_fake = discriminator.apply(graph.constant(fake), params);
        auto d_loss = discriminator_loss(d_real, d_fake);
        check_finite(d_loss.scalar(), epoch, "discriminator");
        graph.backward(d_loss);
        auto grads = collect_gradients(graph, params);
        d_opt.step(discriminator.parameters(), grads);
        log.discriminator += d_loss.scalar() / static_cast<double>(cfg.d_steps_per_g_step);
      }

      ad::Graph graph;
      auto g_params = generator.bind(graph, true);
      auto z = graph.constant(standard_normal(b, latent, noise_rng));
      auto fake = apply_output_head(generator.apply(z, g_params), train.layout);
      auto d_params = discriminator.bind(graph, false);
      auto d_fake = discriminator.apply(fake, d_params);
      auto terms = composite_generator_loss(d_fake, real, fake, loss_cfg);
      check_finite(terms.total.scalar(), epoch, "generator");
      graph.backward(terms.total);
      auto grads = collect_gradients(graph, g_params);
      g_opt.step(generator.parameters(), grads);

      log.adversarial += terms.adversarial.scalar();
      log.correlation += terms.correlation.scalar();
      log.mean += terms.mean.scalar();
      log.total += terms.total.scalar();
    }
    const double nb = static_cast<double>(batches);
    log.discriminator /= nb;
    log.adversarial /= nb;
    log.correlation /= nb;
    log.mean /= nb;
    log.total /= nb;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (epoch % every == 0 || epoch == cfg.epochs) result.checkpoints.push_back({epoch, generator});
  }
  result.network = std::move(generator);
  return result;
}

// ---- VAE --------------------------------------------------------------------

TrainedGenerator train_vae(const EncodedMatrix& train, const VaeConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  check_common(train, cfg.batch_size);
  const LossConfig loss_cfg = make_loss_config(train, cfg.loss);
  const auto m = static_cast<std::size_t>(train.width());
  const auto b = static_cast<Eigen::Index>(cfg.batch_size);
  const auto latent = static_cast<Eigen::Index>(cfg.latent_dim);

  Mlp encoder = init_weights(with_ends(m, cfg.encoder_hidden, 2 * cfg.latent_dim), Activation::relu,
                             Activation::identity, derive_seed(cfg.seed, kEncoderInit));
  Mlp decoder = init_weights(with_ends(cfg.latent_dim, cfg.decoder_hidden, m), Activation::relu,
                             Activation::identity, derive_seed(cfg.seed, kGeneratorInit));
  AdamState opt(cfg.optimizer);
  std::mt19937_64 shuffle_rng(derive_seed(cfg.seed, kShuffle));
  std::mt19937_64 noise_rng(derive_seed(cfg.seed, kNoise));

  TrainedGenerator result;
  result.kind = GeneratorKind::vae;
  result.schema = train.schema;
  result.latent_dim = cfg.latent_dim;
  result.seed = cfg.seed;
  const std::size_t every = resolve_checkpoint_every(cfg.checkpoint_every, cfg.epochs);

  std::vector<std::size_t> order(static_cast<std::size_t>(train.rows()));
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batches = order.size() / cfg.batch_size;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t bi = 0; bi < batches; ++bi) {
      const Tensor real = gather_rows(train.data, order, bi * cfg.batch_size, cfg.batch_size);
      ad::Graph graph;
      auto enc_params = encoder.bind(graph, true);
      auto dec_params = decoder.bind(graph, true);

      auto stats = encoder.apply(graph.constant(real), enc_params);
      auto mu = ad::slice_cols(stats, 0, latent);
      auto logvar = ad::slice_cols(stats, latent, latent);
      auto eps = graph.constant(standard_normal(b, latent, noise_rng));
      auto z = mu + ad::mul(ad::exp(logvar * 0.5), eps);
      auto recon = apply_output_head(decoder.apply(z, dec_params), train.layout);
      auto rec_loss = reconstruction_loss(recon, real);
      auto kld = gaussian_kld(mu, logvar);

      auto prior = graph.constant(standard_normal(b, latent, noise_rng));
      auto fake = apply_output_head(decoder.apply(prior, dec_params), train.layout);
      auto terms = vae_composite_loss(rec_loss, kld, real, fake, loss_cfg);
      check_finite(terms.total.scalar(), epoch, "vae");
      graph.backward(terms.total);

      std::vector<ad::Var> all_params = enc_params;
      all_params.insert(all_params.end(), dec_params.begin(), dec_params.end());
      auto grads = collect_gradients(graph, all_params);
      std::vector<Tensor*> targets = encoder.parameters();
      for (Tensor* p : decoder.parameters()) targets.push_back(p);
      opt.step(targets, grads);

      log.reconstruction += rec_loss.scalar();
      log.kld += kld.scalar();
      log.correlation += terms.correlation.scalar();
      log.mean += terms.mean.scalar();
      log.total += terms.total.scalar();
    }
    const double nb = static_cast<double>(batches);
    log.reconstruction /= nb;
    log.kld /= nb;
    log.correlation /= nb;
    log.mean /= nb;
    log.total /= nb;
    result.log.push_back(log);
    if (on_epoch) on_epoch(log);
    if (epoch % every == 0 || epoch == cfg.epochs) result.checkpoints.push_back({epoch, decoder});
  }
  result.network = std::move(decoder);
  return result;
}

// ---- independent baseline ---------------------------------------------------

TrainedGenerator fit_independent(const Table& train, std::uint64_t seed) {
  if (train.rows.empty()) fail(ErrorCode::EmptyTable, "cannot fit marginals on an empty table");
  TrainedGenerator result;
  result.kind = GeneratorKind::independent;
  result.schema = train.schema;
  result.seed = seed;
  const std::size_t cols = train.column_count();
  result.marginals.category_probabilities.resize(cols);
  result.marginals.sorted_values.resize(cols);
  const double n = static_cast<double>(train.row_count());
  for (std::size_t c = 0; c < cols; ++c) {
    if (train.schema[c].is_categorical()) {
      auto& probs = result.marginals.category_probabilities[c];
      for (auto count : train.category_counts(c)) probs.push_back(static_cast<double>(count) / n);
    } else {
      auto values = train.numeric_column(c);
      std::sort(values.begin(), values.end());
      result.marginals.sorted_values[c] = std::move(values);
    }
  }
  return result;
}

// ---- sampling ---------------------------------------------------------------

Table sample(const TrainedGenerator& g, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "sample count must be >= 1");
  std::mt19937_64 rng(seed);

  if (g.kind == GeneratorKind::independent) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Table out{g.schema, {}};
    out.rows.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      Row row(g.schema.size());
      for (std::size_t c = 0; c < g.schema.size(); ++c) {
        const double u = unit(rng);
        if (g.schema[c].is_categorical()) {
          const auto& probs = g.marginals.category_probabilities[c];
          double acc = 0.0;
          std::size_t pick = probs.size() - 1;
          for (std::size_t k = 0; k < probs.size(); ++k) {
            acc += probs[k];
            if (u < acc) {
              pick = k;
              break;
            }
          }
          row[c] = Category{pick};
        } else {
          const auto& values = g.marginals.sorted_values[c];
          const auto idx = std::min(values.size() - 1, static_cast<std::size_t>(u * static_cast<double>(values.size())));
          row[c] = values[idx];
        }
      }
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  const auto layout = make_layout(g.schema);
  const Tensor z = standard_normal(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g.latent_dim), rng);
  const Tensor encoded = apply_output_head(g.network.infer(z), layout);
  return decode(EncodedMatrix{encoded, layout, g.schema});
}

// ---- persistence ------------------------------------------------------------

void save_generator(const TrainedGenerator& g, const std::filesystem::path& json_path) {
  nlohmann::json doc;
  doc["kind"] = to_string(g.kind);
  doc["seed"] = g.seed;
  doc["schema"] = schema_to_json(g.schema);
  doc["latent_dim"] = g.latent_dim;
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : g.log) {
    log.push_back({{"epoch", e.epoch},
                   {"discriminator", e.discriminator},
                   {"adversarial", e.adversarial},
                   {"reconstruction", e.reconstruction},
                   {"kld", e.kld},
                   {"correlation", e.correlation},
                   {"mean", e.mean},
                   {"total", e.total}});
  }
  doc["log"] = std::move(log);
  if (g.kind == GeneratorKind::independent) {
    doc["marginals"] = {{"category_probabilities", g.marginals.category_probabilities},
                        {"sorted_values", g.marginals.sorted_values}};
  } else {
    auto arch = mlp_to_json(g.network);
    arch.erase("parameters");
    doc["network"] = std::move(arch);
    auto blob = json_path;
    blob.replace_extension(".bin");
    doc["parameter_blob"] = blob.filename().string();
    write_parameter_blob(g.network, blob);
  }
  std::ofstream out(json_path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write '" + json_path.string() + "'");
  out << doc.dump(2) << '\n';
}

TrainedGenerator load_generator(const std::filesystem::path& json_path) {
  std::ifstream in(json_path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + json_path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "invalid generator document: " + std::string(e.what()));
  }
  TrainedGenerator g;
  try {
    g.kind = generator_kind_from_string(doc.at("kind").get<std::string>());
    g.seed = doc.at("seed").get<std::uint64_t>();
    g.schema = schema_from_json(doc.at("schema"));
    g.latent_dim = doc.at("latent_dim").get<std::size_t>();
    for (const auto& e : doc.at("log")) {
      EpochLog l;
      l.epoch = e.at("epoch").get<std::size_t>();
      l.discriminator = e.at("discriminator").get<double>();
      l.adversarial = e.at("adversarial").get<double>();
      l.reconstruction = e.at("reconstruction").get<double>();
      l.kld = e.at("kld").get<double>();
      l.correlation = e.at("correlation").get<double>();
      l.mean = e.at("mean").get<double>();
      l.total = e.at("total").get<double>();
      g.log.push_back(l);
    }
    if (g.kind == GeneratorKind::independent) {
      const auto& m = doc.at("marginals");
      g.marginals.category_probabilities = m.at("category_probabilities").get<std::vector<std::vector<double>>>();
      g.marginals.sorted_values = m.at("sorted_values").get<std::vector<std::vector<double>>>();
    } else {
      g.network = mlp_from_json(doc.at("network"));
      read_parameter_blob(g.network, json_path.parent_path() / doc.at("parameter_blob").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, "malformed generator document: " + std::string(e.what()));
  }
  return g;
}

}  // namespace tabbench
