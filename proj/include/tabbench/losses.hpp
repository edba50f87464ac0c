#pragma once

#include <string>

#include "tabbench/autodiff.hpp"

namespace tabbench {

// Discriminator outputs are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

enum class AdversarialForm {
  saturating,      // mean log(1 - D(G(z))), minimized by the generator
  non_saturating,  // -mean log D(G(z))
};

std::string to_string(AdversarialForm f);
AdversarialForm adversarial_form_from_string(const std::string& s);

// Switches and cached real-data statistics for the regularized objectives.
// Real column sums cover the full training set, not a batch.
struct LossConfig {
  int alpha = 0;  // correlation term switch, 0 or 1
  int beta = 0;   // mean term switch, 0 or 1
  double epsilon = 1e-5;
  Eigen::RowVectorXd real_column_sums;
  double real_total_sum = 0.0;
  std::size_t real_count = 0;
  AdversarialForm adversarial = AdversarialForm::saturating;

  // Throws InvalidArgument when a field violates its invariant.
  void validate() const;

  static LossConfig from_training(const Eigen::MatrixXd& train, int alpha, int beta, double epsilon = 1e-5);
};

// Label "c{alpha}m{beta}".
std::string loss_label(int alpha, int beta);

// -[mean log D(x) + mean log(1 - D(G(z)))]
ad::Var discriminator_loss(ad::Var d_real, ad::Var d_fake);

ad::Var generator_adversarial_loss(ad::Var d_fake, AdversarialForm form = AdversarialForm::saturating);

// 1 - (1/(B·m)) Σ_ij z_ij · z̃_ij with population batch statistics; row i of
// the real batch pairs with row i of the fake batch. Real batch is constant.
ad::Var correlation_loss(const Eigen::MatrixXd& real_batch, ad::Var fake_batch, double epsilon);

struct MeanLossDiagnostics {
  bool degenerate_normalizer = false;
};

// Σ_j |real_sums_j / real_total - fake_sums_j / fake_total|, where the fake
// sums run over the batch.
ad::Var mean_loss(ad::Var fake_batch, const LossConfig& cfg, MeanLossDiagnostics* diag = nullptr);

struct GeneratorLossTerms {
  ad::Var total;
  ad::Var adversarial;
  ad::Var correlation;
  ad::Var mean;
};

// adversarial + alpha·correlation + beta·mean. Disabled terms are still
// evaluated for logging but never enter the total.
GeneratorLossTerms composite_generator_loss(ad::Var d_fake, const Eigen::MatrixXd& real_batch, ad::Var fake_batch,
                                            const LossConfig& cfg);

struct VaeLossTerms {
  ad::Var total;
  ad::Var correlation;
  ad::Var mean;
};

VaeLossTerms vae_composite_loss(ad::Var reconstruction, ad::Var kld, const Eigen::MatrixXd& real_batch,
                                ad::Var fake_batch, const LossConfig& cfg);

// Batch mean of the per-row squared error summed over features.
ad::Var reconstruction_loss(ad::Var reconstruction, const Eigen::MatrixXd& target);
// Batch mean of KL(N(mu, exp(logvar)) || N(0, I)).
ad::Var gaussian_kld(ad::Var mu, ad::Var logvar);

}  // namespace tabbench
