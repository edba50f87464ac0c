#include "tabbench/losses.hpp"

#include <cmath>

#include "tabbench/error.hpp"

namespace tabbench {

std::string to_string(AdversarialForm f) {
  return f == AdversarialForm::saturating ? "saturating" : "non_saturating";
}

AdversarialForm adversarial_form_from_string(const std::string& s) {
  if (s == "saturating") return AdversarialForm::saturating;
  if (s == "non_saturating") return AdversarialForm::non_saturating;
  fail(ErrorCode::InvalidArgument, "unknown adversarial form '" + s + "'");
}

void LossConfig::validate() const {
  if ((alpha != 0 && alpha != 1) || (beta != 0 && beta != 1))
    fail(ErrorCode::InvalidArgument, "alpha and beta must be 0 or 1");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(real_total_sum > 0.0)) fail(ErrorCode::InvalidArgument, "real total sum must be positive");
  const double s = real_column_sums.sum();
  if (std::abs(s - real_total_sum) > 1e-9 * std::max(1.0, std::abs(real_total_sum)))
    fail(ErrorCode::InvalidArgument, "real total sum does not equal the sum of column sums");
}

LossConfig LossConfig::from_training(const Eigen::MatrixXd& train, int alpha, int beta, double epsilon) {
  LossConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.epsilon = epsilon;
  cfg.real_column_sums = train.colwise().sum();
  cfg.real_total_sum = cfg.real_column_sums.sum();
  cfg.real_count = static_cast<std::size_t>(train.rows());
  cfg.validate();
  return cfg;
}

std::string loss_label(int alpha, int beta) {
  return "c" + std::to_string(alpha) + "m" + std::to_string(beta);
}

ad::Var discriminator_loss(ad::Var d_real, ad::Var d_fake) {
  auto real_term = ad::mean(ad::log(ad::clamp(d_real, kProbClamp, 1.0 - kProbClamp)));
  auto fake_term = ad::mean(ad::log(1.0 - ad::clamp(d_fake, kProbClamp, 1.0 - kProbClamp)));
  return -(real_term + fake_term);
}

ad::Var generator_adversarial_loss(ad::Var d_fake, AdversarialForm form) {
  auto d = ad::clamp(d_fake, kProbClamp, 1.0 - kProbClamp);
  if (form == AdversarialForm::non_saturating) return -ad::mean(ad::log(d));
  return ad::mean(ad::log(1.0 - d));
}

ad::Var correlation_loss(const Eigen::MatrixXd& real_batch, ad::Var fake_batch, double epsilon) {
  const auto& fake = fake_batch.value();
  if (real_batch.rows() != fake.rows() || real_batch.cols() != fake.cols())
    fail(ErrorCode::ShapeMismatch, "correlation_loss: real and fake batches differ in shape");
  const double b = static_cast<double>(real_batch.rows());
  const double bm = b * static_cast<double>(real_batch.cols());

  // Real z-scores are constants.
  Eigen::RowVectorXd mu = real_batch.colwise().mean();
  Eigen::MatrixXd centered = real_batch.rowwise() - mu;
  Eigen::RowVectorXd sigma = (centered.array().square().colwise().sum() / b).sqrt().matrix();
  Eigen::MatrixXd z_real = centered;
  for (Eigen::Index r = 0; r < z_real.rows(); ++r)
    z_real.row(r) = z_real.row(r).cwiseQuotient((sigma.array() + epsilon).matrix());

  ad::Graph& g = *fake_batch.graph;
  auto fake_centered = ad::sub_row(fake_batch, ad::mean_rows(fake_batch));
  auto fake_sigma = ad::sqrt(ad::mean_rows(ad::square(fake_centered)));
  auto z_fake = ad::div_row(fake_centered, fake_sigma + epsilon);
  auto agreement = ad::sum(ad::mul(g.constant(z_real), z_fake));
  return 1.0 - agreement * (1.0 / bm);
}

ad::Var mean_loss(ad::Var fake_batch, const LossConfig& cfg, MeanLossDiagnostics* diag) {
  if (cfg.real_column_sums.size() != fake_batch.cols())
    fail(ErrorCode::ShapeMismatch, "mean_loss: real profile has " + std::to_string(cfg.real_column_sums.size()) +
                                       " columns, fake batch has " + std::to_string(fake_batch.cols()));
  if (!(cfg.real_total_sum > 0.0)) fail(ErrorCode::InvalidArgument, "mean_loss: real total sum must be positive");
  ad::Graph& g = *fake_batch.graph;
  Eigen::MatrixXd real_profile = cfg.real_column_sums / cfg.real_total_sum;

  auto column_sums = ad::sum_rows(fake_batch);
  auto total = ad::sum(column_sums);
  const bool degenerate = std::abs(total.scalar()) < cfg.epsilon;
  if (diag) diag->degenerate_normalizer = degenerate;
  auto guarded = ad::guard_magnitude(total, cfg.epsilon);
  auto fake_profile = ad::div_by_scalar(column_sums, guarded);
  return ad::sum(ad::abs(fake_profile - g.constant(real_profile)));
}

GeneratorLossTerms composite_generator_loss(ad::Var d_fake, const Eigen::MatrixXd& real_batch, ad::Var fake_batch,
                                            const LossConfig& cfg) {
  if ((cfg.alpha != 0 && cfg.alpha != 1) || (cfg.beta != 0 && cfg.beta != 1))
    fail(ErrorCode::InvalidArgument, "alpha and beta must be 0 or 1");
  GeneratorLossTerms t;
  t.adversarial = generator_adversarial_loss(d_fake, cfg.adversarial);
  t.correlation = correlation_loss(real_batch, fake_batch, cfg.epsilon);
  t.mean = mean_loss(fake_batch, cfg);
  t.total = t.adversarial;
  if (cfg.alpha == 1) t.total = t.total + t.correlation;
  if (cfg.beta == 1) t.total = t.total + t.mean;
  return t;
}

VaeLossTerms vae_composite_loss(ad::Var reconstruction, ad::Var kld, const Eigen::MatrixXd& real_batch,
                                ad::Var fake_batch, const LossConfig& cfg) {
  if ((cfg.alpha != 0 && cfg.alpha != 1) || (cfg.beta != 0 && cfg.beta != 1))
    fail(ErrorCode::InvalidArgument, "alpha and beta must be 0 or 1");
  VaeLossTerms t;
  t.correlation = correlation_loss(real_batch, fake_batch, cfg.epsilon);
  t.mean = mean_loss(fake_batch, cfg);
  t.total = reconstruction + kld;
  if (cfg.alpha == 1) t.total = t.total + t.correlation;
  if (cfg.beta == 1) t.total = t.total + t.mean;
  return t;
}

ad::Var reconstruction_loss(ad::Var reconstruction, const Eigen::MatrixXd& target) {
  if (reconstruction.rows() != target.rows() || reconstruction.cols() != target.cols())
    fail(ErrorCode::ShapeMismatch, "reconstruction_loss: shape mismatch");
  auto diff = reconstruction - reconstruction.graph->constant(target);
  return ad::sum(ad::square(diff)) * (1.0 / static_cast<double>(target.rows()));
}

ad::Var gaussian_kld(ad::Var mu, ad::Var logvar) {
  // -0.5 Σ (1 + logvar - mu² - exp(logvar)), averaged over the batch.
  auto inner = (1.0 + logvar) - ad::square(mu) - ad::exp(logvar);
  return ad::sum(inner) * (-0.5 / static_cast<double>(mu.rows()));
}

}  // namespace tabbench
