#include "scenforge/toy_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace scenforge::toy {

ToyDataset ToyDataset::gaussian(Vec mu, double s) {
  if (mu.empty()) throw std::invalid_argument("ToyDataset: mean must be non-empty");
  if (!(s > 0.0)) throw std::invalid_argument("ToyDataset: stddev must be positive");
  ToyDataset d;
  d.kind = Kind::kGaussian;
  d.dim = static_cast<int>(mu.size());
  d.mean = std::move(mu);
  d.stddev = s;
  d.weight1 = 1.0;
  return d;
}

ToyDataset ToyDataset::mixture(Vec mu1, Vec mu2, double s, double w1) {
  if (mu1.empty() || mu1.size() != mu2.size())
    throw std::invalid_argument("ToyDataset: mixture means must match and be non-empty");
  if (!(s > 0.0)) throw std::invalid_argument("ToyDataset: stddev must be positive");
  if (!(w1 >= 0.0 && w1 <= 1.0))
    throw std::invalid_argument("ToyDataset: weight must lie in [0, 1]");
  ToyDataset d;
  d.kind = Kind::kMixture;
  d.dim = static_cast<int>(mu1.size());
  d.mean = std::move(mu1);
  d.mean2 = std::move(mu2);
  d.stddev = s;
  d.weight1 = w1;
  return d;
}

Vec ToyDataset::draw(Rng& rng) const {
  const Vec* mu = &mean;
  if (kind == Kind::kMixture && !(rng.uniform01() < weight1)) mu = &mean2;
  Vec x(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i)
    x[static_cast<std::size_t>(i)] = (*mu)[static_cast<std::size_t>(i)] + stddev * rng.normal();
  return x;
}

Vec optimal_gaussian_denoiser(const Vec& mu, double s, const Vec& y, double sigma) {
  if (mu.size() != y.size())
    throw std::invalid_argument("optimal_gaussian_denoiser: dimension mismatch");
  if (!(s > 0.0)) throw std::invalid_argument("optimal_gaussian_denoiser: s must be positive");
  if (!(sigma >= 0.0))
    throw std::invalid_argument("optimal_gaussian_denoiser: sigma must be non-negative");
  const double s2 = s * s, g2 = sigma * sigma;
  Vec d(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) d[i] = (s2 * y[i] + g2 * mu[i]) / (s2 + g2);
  return d;
}

DenoiserParams DenoiserParams::init(int dim, int hidden, Rng& rng) {
  if (dim < 1 || hidden < 1)
    throw std::invalid_argument("DenoiserParams::init: dims must be positive");
  DenoiserParams p;
  p.dim = dim;
  p.hidden = hidden;
  p.theta.assign(p.size(), 0.0);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(dim + 1));
  for (int j = 0; j < hidden; ++j)
    for (int i = 0; i < dim + 1; ++i) p.w1(j, i) = rng.uniform(-a1, a1);
  const double a2 = 0.5;
  for (int o = 0; o < dim; ++o)
    for (int j = 0; j < hidden; ++j) p.w2(o, j) = rng.uniform(-a2, a2);
  return p;
}

std::string params_to_json(const DenoiserParams& p) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.toy_params/1";
  j["dim"] = p.dim;
  j["hidden"] = p.hidden;
  j["theta"] = p.theta;
  return j.dump() + "\n";
}

DenoiserParams params_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"] != "scenforge.toy_params/1")
      throw std::runtime_error("unknown schema");
    DenoiserParams p;
    p.dim = j.at("dim").get<int>();
    p.hidden = j.at("hidden").get<int>();
    p.theta = j.at("theta").get<std::vector<double>>();
    if (p.dim < 1 || p.hidden < 1 || p.theta.size() != p.size())
      throw std::runtime_error("parameter vector does not match the declared shape");
    return p;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("params_from_json: ") + ex.what());
  }
}

Vec mlp_forward(const DenoiserParams& p, const Vec& x, double c_noise) {
  if (static_cast<int>(x.size()) != p.dim)
    throw std::invalid_argument("mlp_forward: input dimension mismatch");
  Vec h(static_cast<std::size_t>(p.hidden));
  for (int j = 0; j < p.hidden; ++j) {
    double acc = p.b1(j);
    for (int i = 0; i < p.dim; ++i) acc += p.w1(j, i) * x[static_cast<std::size_t>(i)];
    acc += p.w1(j, p.dim) * c_noise;
    h[static_cast<std::size_t>(j)] = std::tanh(acc);
  }
  Vec f(static_cast<std::size_t>(p.dim));
  for (int o = 0; o < p.dim; ++o) {
    double acc = p.b2(o);
    for (int j = 0; j < p.hidden; ++j) acc += p.w2(o, j) * h[static_cast<std::size_t>(j)];
    f[static_cast<std::size_t>(o)] = acc;
  }
  return f;
}

edm::Denoiser make_denoiser(DenoiserParams p) {
  return [p = std::move(p)](const Vec& y, double sigma, const Vec&) {
    return edm::denoise([&p](const Vec& x, double cn) { return mlp_forward(p, x, cn); }, y,
                        sigma);
  };
}

LossGrad forward_backward(const DenoiserParams& p, const Vec& clean, const Vec& noisy,
                          double sigma) {
  if (clean.size() != noisy.size() || static_cast<int>(clean.size()) != p.dim)
    throw std::invalid_argument("forward_backward: dimension mismatch");
  const edm::PreconditionCoeffs c = edm::coeffs(sigma);
  const double lambda = edm::lambda_weight(sigma);
  const std::size_t dim = clean.size();

  // forward
  Vec in(dim + 1);
  for (std::size_t i = 0; i < dim; ++i) in[i] = c.c_in * noisy[i];
  in[dim] = c.c_noise;
  Vec h(static_cast<std::size_t>(p.hidden));
  for (int j = 0; j < p.hidden; ++j) {
    double acc = p.b1(j);
    for (int i = 0; i <= p.dim; ++i) acc += p.w1(j, i) * in[static_cast<std::size_t>(i)];
    h[static_cast<std::size_t>(j)] = std::tanh(acc);
  }
  LossGrad out;
  out.denoised.resize(dim);
  Vec residual(dim);
  for (int o = 0; o < p.dim; ++o) {
    double f = p.b2(o);
    for (int j = 0; j < p.hidden; ++j) f += p.w2(o, j) * h[static_cast<std::size_t>(j)];
    const double d = c.c_skip * noisy[static_cast<std::size_t>(o)] + c.c_out * f;
    out.denoised[static_cast<std::size_t>(o)] = d;
    residual[static_cast<std::size_t>(o)] = d - clean[static_cast<std::size_t>(o)];
    out.loss += residual[static_cast<std::size_t>(o)] * residual[static_cast<std::size_t>(o)];
  }
  out.loss *= lambda;

  // backward (gradient shares theta's flat layout)
  out.grad.assign(p.size(), 0.0);
  Vec gf(dim);
  for (std::size_t o = 0; o < dim; ++o) gf[o] = 2.0 * lambda * c.c_out * residual[o];
  Vec gh(static_cast<std::size_t>(p.hidden), 0.0);
  for (int o = 0; o < p.dim; ++o) {
    out.grad[p.b2_off() + static_cast<std::size_t>(o)] += gf[static_cast<std::size_t>(o)];
    for (int j = 0; j < p.hidden; ++j) {
      out.grad[p.w2_off() + static_cast<std::size_t>(o) * p.hidden + j] +=
          gf[static_cast<std::size_t>(o)] * h[static_cast<std::size_t>(j)];
      gh[static_cast<std::size_t>(j)] += gf[static_cast<std::size_t>(o)] * p.w2(o, j);
    }
  }
  for (int j = 0; j < p.hidden; ++j) {
    const double hp = 1.0 - h[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)];
    const double gpre = gh[static_cast<std::size_t>(j)] * hp;
    out.grad[p.b1_off() + static_cast<std::size_t>(j)] += gpre;
    for (int i = 0; i <= p.dim; ++i)
      out.grad[p.w1_off() + static_cast<std::size_t>(j) * (p.dim + 1) + i] +=
          gpre * in[static_cast<std::size_t>(i)];
  }
  return out;
}

TrainResult train(const ToyDataset& data, const TrainOptions& opt) {
  if (opt.steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  if (opt.dataset_size < 1) throw std::invalid_argument("train: dataset_size must be >= 1");
  Rng rng(opt.seed);
  DenoiserParams params = DenoiserParams::init(data.dim, opt.hidden, rng);

  struct Tuple {
    Vec clean, noisy;
    double sigma;
  };
  std::vector<Tuple> tuples;
  tuples.reserve(static_cast<std::size_t>(opt.dataset_size));
  double sigma_sum = 0.0;
  for (int i = 0; i < opt.dataset_size; ++i) {
    Tuple t;
    t.clean = data.draw(rng);
    t.sigma = opt.sigma_sampler.draw(rng);
    sigma_sum += t.sigma;
    t.noisy.resize(t.clean.size());
    for (std::size_t k = 0; k < t.clean.size(); ++k)
      t.noisy[k] = t.clean[k] + t.sigma * rng.normal();
    tuples.push_back(std::move(t));
  }
  const double sigma_mean = sigma_sum / static_cast<double>(opt.dataset_size);
  const double inv_n = 1.0 / static_cast<double>(opt.dataset_size);

  TrainResult res;
  res.loss_history.reserve(static_cast<std::size_t>(opt.steps));
  std::vector<double> grad(params.size());
  for (int step = 0; step < opt.steps; ++step) {
    double loss = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const Tuple& t : tuples) {
      const LossGrad lg = forward_backward(params, t.clean, t.noisy, t.sigma);
      loss += lg.loss;
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += lg.grad[k];
    }
    loss *= inv_n;
    if (!std::isfinite(loss))
      throw std::runtime_error("train: loss diverged (non-finite) at step " +
                               std::to_string(step));
    res.loss_history.push_back(loss);
    res.sigma_means.push_back(sigma_mean);
    for (std::size_t k = 0; k < grad.size(); ++k) params.theta[k] -= opt.lr * grad[k] * inv_n;
  }
  res.params = std::move(params);
  return res;
}

std::string loss_csv(const TrainResult& result) {
  std::string out = "step,loss,sigma_mean\n";
  for (std::size_t i = 0; i < result.loss_history.size(); ++i)
    out += std::to_string(i) + "," + format_double(result.loss_history[i]) + "," +
           format_double(result.sigma_means[i]) + "\n";
  return out;
}

}  // namespace scenforge::toy
