#pragma once
// Desk-scale training vehicle for the diffusion kernel: a small synthetic
// dataset, the closed-form optimal denoiser for Gaussian data, a two-layer
// tanh network with hand-derived gradients of the DSM objective, and a
// deterministic full-batch gradient-descent training loop.

#include <cstdint>
#include <string>
#include <vector>

#include "scenforge/common.hpp"
#include "scenforge/edm.hpp"

namespace scenforge::toy {

using edm::Vec;

struct ToyDataset {
  enum class Kind { kGaussian, kMixture };
  Kind kind = Kind::kGaussian;
  int dim = 2;
  Vec mean;             // component 1 mean
  double stddev = 0.5;  // shared isotropic s > 0
  Vec mean2;            // component 2 mean (mixture only)
  double weight1 = 1.0;  // P(component 1); P(component 2) = 1 - weight1

  static ToyDataset gaussian(Vec mu, double s);
  static ToyDataset mixture(Vec mu1, Vec mu2, double s, double w1);
  Vec draw(Rng& rng) const;
};

// Posterior mean for y = x + n with x ~ N(μ, s²I), n ~ N(0, σ²I):
// D*(y; σ) = (s²·y + σ²·μ)/(s² + σ²).  σ = 0 returns y; σ → ∞ tends to μ.
Vec optimal_gaussian_denoiser(const Vec& mu, double s, const Vec& y, double sigma);

// Two affine maps with an elementwise tanh between: (dim + 1) inputs (the
// preconditioned sample plus the c_noise channel) → hidden → dim.  Parameters
// live in one flat vector ordered [W1 row-major, b1, W2 row-major, b2].
struct DenoiserParams {
  int dim = 2;
  int hidden = 32;
  std::vector<double> theta;

  std::size_t w1_off() const { return 0; }
  std::size_t b1_off() const { return static_cast<std::size_t>(hidden) * (dim + 1); }
  std::size_t w2_off() const { return b1_off() + static_cast<std::size_t>(hidden); }
  std::size_t b2_off() const { return w2_off() + static_cast<std::size_t>(dim) * hidden; }
  std::size_t size() const { return b2_off() + static_cast<std::size_t>(dim); }

  double& w1(int j, int i) { return theta[w1_off() + static_cast<std::size_t>(j) * (dim + 1) + i]; }
  double w1(int j, int i) const {
    return theta[w1_off() + static_cast<std::size_t>(j) * (dim + 1) + i];
  }
  double& b1(int j) { return theta[b1_off() + static_cast<std::size_t>(j)]; }
  double b1(int j) const { return theta[b1_off() + static_cast<std::size_t>(j)]; }
  double& w2(int o, int j) { return theta[w2_off() + static_cast<std::size_t>(o) * hidden + j]; }
  double w2(int o, int j) const {
    return theta[w2_off() + static_cast<std::size_t>(o) * hidden + j];
  }
  double& b2(int o) { return theta[b2_off() + static_cast<std::size_t>(o)]; }
  double b2(int o) const { return theta[b2_off() + static_cast<std::size_t>(o)]; }

  // Uniform init: layer weights ~ U(±1/√fan_in) except the output map, which
  // is drawn wider (±0.5) so an untrained network starts visibly above the
  // skip-connection baseline; biases start at zero.
  static DenoiserParams init(int dim, int hidden, Rng& rng);
};

std::string params_to_json(const DenoiserParams& p);
DenoiserParams params_from_json(const std::string& text);  // throws std::runtime_error

// F_θ(x, c_noise) = W2·tanh(W1·[x; c_noise] + b1) + b2.
Vec mlp_forward(const DenoiserParams& p, const Vec& x, double c_noise);

// The network wrapped as a kernel denoiser (conditioning ignored).
edm::Denoiser make_denoiser(DenoiserParams p);

struct LossGrad {
  double loss = 0.0;
  Vec denoised;
  std::vector<double> grad;  // d loss / d theta, same layout as theta
};

// Per-sample DSM value and its analytic gradient:
// loss = λ_σ·‖c_skip·noisy + c_out·F_θ(c_in·noisy; c_noise) − clean‖².
LossGrad forward_backward(const DenoiserParams& p, const Vec& clean, const Vec& noisy,
                          double sigma);

struct TrainOptions {
  int steps = 2000;
  int dataset_size = 512;  // (clean, σ, noise) tuples drawn once up front
  int hidden = 32;
  double lr = 0.01;
  std::uint64_t seed = 0;
  edm::SigmaSampler sigma_sampler;
};

struct TrainResult {
  DenoiserParams params;
  std::vector<double> loss_history;  // full-batch loss per step, pre-update
  std::vector<double> sigma_means;   // mean σ of the training set (constant)
};

// Deterministic full-batch gradient descent on the empirical DSM loss over a
// fixed tuple set; learning rate 0 leaves the loss curve constant.  Throws
// std::runtime_error naming the step if the loss turns non-finite.
TrainResult train(const ToyDataset& data, const TrainOptions& opt);

// "step,loss,sigma_mean" rows for external plotting.
std::string loss_csv(const TrainResult& result);

}  // namespace scenforge::toy
