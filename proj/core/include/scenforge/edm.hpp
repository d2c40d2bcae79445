#pragma once
// Diffusion math kernel: preconditioning coefficients, the wrapped denoiser
// D(y; σ) = c_skip·y + c_out·F(c_in·y; c_noise), the λ_σ-weighted denoising
// score-matching loss, the ε-prediction objective over a variance-preserving
// forward process, and a first-order (Euler) probability-flow ODE sampler.
//
// Everything here is pure given (inputs, rng), operates on flat double
// vectors, and takes the network as a callable so closed-form, toy, and test
// denoisers all plug in.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "scenforge/common.hpp"

namespace scenforge::edm {

using Vec = std::vector<double>;

struct PreconditionCoeffs {
  double c_skip = 0.0;
  double c_out = 0.0;
  double c_in = 0.0;
  double c_noise = 0.0;
};

// c_skip = 1/(σ²+1), c_out = −σ/√(σ²+1), c_in = 1/√(σ²+1),
// c_noise = 0.25·ln σ.  Identities: c_in² = c_skip and c_out² = σ²·c_skip.
// Throws std::domain_error for σ ≤ 0.
PreconditionCoeffs coeffs(double sigma);

// DSM weighting λ_σ = (1+σ²)/σ²; satisfies λ_σ·c_out(σ)² = 1.
double lambda_weight(double sigma);

// Raw network F(x, c_noise) over the preconditioned input x = c_in·y.
using RawNet = std::function<Vec(const Vec& x, double c_noise)>;

// Wrapped denoiser with optional conditioning (empty when unused).
using Denoiser = std::function<Vec(const Vec& y, double sigma, const Vec& cond)>;

// D(y; σ) = c_skip·y + c_out·F(c_in·y; c_noise).  Throws
// std::invalid_argument when F returns a different dimension than y.
Vec denoise(const RawNet& raw, const Vec& y, double sigma);
Denoiser wrap_denoiser(RawNet raw);

// Strictly decreasing noise levels ending exactly at 0 (sigmas.size() =
// steps + 1; the final entry is the σ = 0 target, not an integration level).
struct SigmaSchedule {
  std::vector<double> sigmas;

  // σ_i = (σ_max^{1/ρ} + i/(steps−1)·(σ_min^{1/ρ} − σ_max^{1/ρ}))^ρ for
  // i < steps, then 0.  Throws std::invalid_argument on bad parameters.
  static SigmaSchedule karras(int steps, double sigma_min = 0.002, double sigma_max = 80.0,
                              double rho = 7.0);
};
// {"steps": 40, "sigma_min": 0.002, "sigma_max": 80, "rho": 7}, all optional
// but steps.  Throws std::runtime_error on malformed input.
SigmaSchedule schedule_from_json(const std::string& text);

// Training noise-level sampler: ln σ ~ N(log_mean, log_std²).
struct SigmaSampler {
  double log_mean = -1.2;
  double log_std = 1.2;
  double draw(Rng& rng) const;
};
// {"log_mean": -1.2, "log_std": 1.2}, both optional.
SigmaSampler sigma_sampler_from_json(const std::string& text);

struct DsmResult {
  double mean = 0.0;
  std::vector<double> per_sample;
  double sigma_mean = 0.0;  // average σ drawn over the batch (for loss logs)
};

// Monte-Carlo DSM estimate: per sample draw σ from `sampler` and
// n ~ N(0, σ²·I), then λ_σ·‖D(y+n; σ, cond) − y‖².  Throws
// std::invalid_argument on an empty batch.
DsmResult dsm_loss(const Denoiser& denoiser, const std::vector<Vec>& batch, const Vec& cond,
                   const SigmaSampler& sampler, Rng& rng);

// Variance-preserving forward process: ᾱ_t tabulated from a linear β ramp.
struct VpSchedule {
  std::vector<double> alpha_bar;  // ᾱ_t at t = index + 1
  int steps() const { return static_cast<int>(alpha_bar.size()); }
  static VpSchedule linear(int steps = 1000, double beta_first = 1e-4, double beta_last = 0.02);
};

using EpsPredictor = std::function<Vec(const Vec& z_t, int t, const Vec& cond)>;

// ε-objective: per sample draw t ~ U{1..T} and ε ~ N(0, I), form
// z_t = √ᾱ_t·z_0 + √(1−ᾱ_t)·ε, and average ‖ε − ε_θ(z_t, t, cond)‖² over the
// batch.  The zero predictor has expectation dim(z).
double eps_loss(const EpsPredictor& eps_theta, const std::vector<Vec>& z0_batch, const Vec& cond,
                const VpSchedule& schedule, Rng& rng);

// Called after each Euler update with (step index, σ reached, state).
using StepObserver = std::function<void(int step, double sigma, const Vec& y)>;

// Probability-flow sampling: y₀ ~ N(0, σ₀²·I), then for each schedule pair
// y ← y + (σ_{i+1} − σ_i)·(y − D(y; σ_i, cond))/σ_i, returning y at σ = 0.
// Throws std::runtime_error naming the step when a non-finite value appears.
Vec sample(const Denoiser& denoiser, const SigmaSchedule& schedule, int dim, const Vec& cond,
           Rng& rng, const StepObserver& observer = {});

}  // namespace scenforge::edm
