#include "scenforge/edm.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace scenforge::edm {

PreconditionCoeffs coeffs(double sigma) {
  if (!(sigma > 0.0))
    throw std::domain_error("coeffs: sigma must be positive, got " + format_double(sigma));
  const double s2p1 = sigma * sigma + 1.0;
  PreconditionCoeffs c;
  c.c_skip = 1.0 / s2p1;
  c.c_out = -sigma / std::sqrt(s2p1);
  c.c_in = 1.0 / std::sqrt(s2p1);
  c.c_noise = 0.25 * std::log(sigma);
  return c;
}

double lambda_weight(double sigma) {
  if (!(sigma > 0.0))
    throw std::domain_error("lambda_weight: sigma must be positive, got " + format_double(sigma));
  return (1.0 + sigma * sigma) / (sigma * sigma);
}

Vec denoise(const RawNet& raw, const Vec& y, double sigma) {
  const PreconditionCoeffs c = coeffs(sigma);
  Vec x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = c.c_in * y[i];
  const Vec f = raw(x, c.c_noise);
  if (f.size() != y.size())
    throw std::invalid_argument("denoise: network returned dimension " +
                                std::to_string(f.size()) + " for input dimension " +
                                std::to_string(y.size()));
  Vec d(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) d[i] = c.c_skip * y[i] + c.c_out * f[i];
  return d;
}

Denoiser wrap_denoiser(RawNet raw) {
  return [raw = std::move(raw)](const Vec& y, double sigma, const Vec&) {
    return denoise(raw, y, sigma);
  };
}

SigmaSchedule SigmaSchedule::karras(int steps, double sigma_min, double sigma_max, double rho) {
  if (steps < 1) throw std::invalid_argument("karras: steps must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min))
    throw std::invalid_argument("karras: need 0 < sigma_min < sigma_max");
  if (!(rho > 0.0)) throw std::invalid_argument("karras: rho must be positive");
  SigmaSchedule s;
  s.sigmas.reserve(static_cast<std::size_t>(steps) + 1);
  if (steps == 1) {
    s.sigmas.push_back(sigma_max);
  } else {
    const double hi = std::pow(sigma_max, 1.0 / rho);
    const double lo = std::pow(sigma_min, 1.0 / rho);
    for (int i = 0; i < steps; ++i) {
      const double frac = static_cast<double>(i) / (steps - 1);
      s.sigmas.push_back(std::pow(hi + frac * (lo - hi), rho));
    }
  }
  s.sigmas.push_back(0.0);
  return s;
}

SigmaSchedule schedule_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    return SigmaSchedule::karras(j.at("steps").get<int>(), j.value("sigma_min", 0.002),
                                 j.value("sigma_max", 80.0), j.value("rho", 7.0));
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("schedule_from_json: ") + ex.what());
  }
}

double SigmaSampler::draw(Rng& rng) const { return std::exp(rng.normal(log_mean, log_std)); }

SigmaSampler sigma_sampler_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    SigmaSampler s;
    s.log_mean = j.value("log_mean", -1.2);
    s.log_std = j.value("log_std", 1.2);
    return s;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("sigma_sampler_from_json: ") + ex.what());
  }
}

DsmResult dsm_loss(const Denoiser& denoiser, const std::vector<Vec>& batch, const Vec& cond,
                   const SigmaSampler& sampler, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("dsm_loss: batch must be nonempty");
  DsmResult out;
  out.per_sample.reserve(batch.size());
  double sigma_sum = 0.0;
  for (const Vec& y : batch) {
    const double sigma = sampler.draw(rng);
    sigma_sum += sigma;
    Vec noisy(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) noisy[i] = y[i] + sigma * rng.normal();
    const Vec d = denoiser(noisy, sigma, cond);
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = d[i] - y[i];
      sq += r * r;
    }
    const double loss = lambda_weight(sigma) * sq;
    out.per_sample.push_back(loss);
    out.mean += loss;
  }
  out.mean /= static_cast<double>(batch.size());
  out.sigma_mean = sigma_sum / static_cast<double>(batch.size());
  return out;
}

VpSchedule VpSchedule::linear(int steps, double beta_first, double beta_last) {
  if (steps < 1) throw std::invalid_argument("VpSchedule::linear: steps must be >= 1");
  if (!(beta_first > 0.0) || !(beta_last < 1.0) || !(beta_first <= beta_last))
    throw std::invalid_argument("VpSchedule::linear: need 0 < beta_first <= beta_last < 1");
  VpSchedule s;
  s.alpha_bar.reserve(static_cast<std::size_t>(steps));
  double prod = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double beta =
        steps == 1 ? beta_first
                   : beta_first + (beta_last - beta_first) * (t - 1) / static_cast<double>(steps - 1);
    prod *= 1.0 - beta;
    s.alpha_bar.push_back(prod);
  }
  return s;
}

double eps_loss(const EpsPredictor& eps_theta, const std::vector<Vec>& z0_batch, const Vec& cond,
                const VpSchedule& schedule, Rng& rng) {
  if (z0_batch.empty()) throw std::invalid_argument("eps_loss: batch must be nonempty");
  if (schedule.steps() < 1) throw std::invalid_argument("eps_loss: empty schedule");
  double total = 0.0;
  for (const Vec& z0 : z0_batch) {
    const int t = static_cast<int>(rng.uniform_int(1, schedule.steps()));
    const double ab = schedule.alpha_bar[static_cast<std::size_t>(t - 1)];
    const double keep = std::sqrt(ab), mix = std::sqrt(1.0 - ab);
    Vec eps(z0.size()), zt(z0.size());
    for (std::size_t i = 0; i < z0.size(); ++i) {
      eps[i] = rng.normal();
      zt[i] = keep * z0[i] + mix * eps[i];
    }
    const Vec pred = eps_theta(zt, t, cond);
    if (pred.size() != z0.size())
      throw std::invalid_argument("eps_loss: predictor returned dimension " +
                                  std::to_string(pred.size()) + " for input dimension " +
                                  std::to_string(z0.size()));
    for (std::size_t i = 0; i < z0.size(); ++i) {
      const double r = eps[i] - pred[i];
      total += r * r;
    }
  }
  return total / static_cast<double>(z0_batch.size());
}

Vec sample(const Denoiser& denoiser, const SigmaSchedule& schedule, int dim, const Vec& cond,
           Rng& rng, const StepObserver& observer) {
  if (dim < 1) throw std::invalid_argument("sample: dim must be >= 1");
  if (schedule.sigmas.size() < 2 || schedule.sigmas.back() != 0.0)
    throw std::invalid_argument("sample: schedule must end at sigma = 0");
  const double sigma0 = schedule.sigmas.front();
  Vec y(static_cast<std::size_t>(dim));
  for (double& v : y) v = sigma0 * rng.normal();
  for (std::size_t i = 0; i + 1 < schedule.sigmas.size(); ++i) {
    const double sigma = schedule.sigmas[i];
    const double sigma_next = schedule.sigmas[i + 1];
    const Vec d = denoiser(y, sigma, cond);
    if (d.size() != y.size())
      throw std::invalid_argument("sample: denoiser returned dimension " +
                                  std::to_string(d.size()) + " for state dimension " +
                                  std::to_string(y.size()));
    const double scale = (sigma_next - sigma) / sigma;
    bool finite = true;
    for (std::size_t k = 0; k < y.size(); ++k) {
      y[k] += scale * (y[k] - d[k]);
      finite = finite && std::isfinite(y[k]);
    }
    if (!finite)
      throw std::runtime_error("sample: non-finite state at step " + std::to_string(i) +
                               " (sigma " + format_double(sigma) + ")");
    if (observer) observer(static_cast<int>(i), sigma_next, y);
  }
  return y;
}

}  // namespace scenforge::edm
