#include "pcattn/framework/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcattn/errors.hpp"

namespace pcattn::framework {

double default_weight_decay(Task task) { return task == Task::classification ? 1.0 : 1e-4; }

void validate(const TrainConfig& cfg) {
  if (cfg.epochs == 0) throw ConfigError("epochs must be at least 1");
  if (cfg.batch == 0) throw ConfigError("batch must be at least 1");
  if (cfg.warmup_epochs > cfg.epochs) throw ConfigError("warmup_epochs must not exceed epochs");
  if (!(cfg.lr_start > 0.0) || !(cfg.lr_end >= 0.0)) throw ConfigError("learning rates must be positive");
  if (cfg.lr_end > cfg.lr_start) throw ConfigError("lr_end must not exceed lr_start");
  if (!(cfg.weight_decay >= 0.0)) throw ConfigError("weight_decay must be non-negative");
}

double lr_schedule(std::size_t epoch, const TrainConfig& cfg) {
  if (epoch >= cfg.epochs) {
    throw ContractError("epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(cfg.epochs) + ")");
  }
  if (epoch < cfg.warmup_epochs) {
    return cfg.lr_start * static_cast<double>(epoch) / static_cast<double>(cfg.warmup_epochs);
  }
  const std::size_t span = cfg.epochs - 1 - cfg.warmup_epochs;
  if (span == 0) return cfg.lr_end;
  const double progress = static_cast<double>(epoch - cfg.warmup_epochs) / static_cast<double>(span);
  if (progress >= 1.0) return cfg.lr_end;
  return cfg.lr_end + 0.5 * (cfg.lr_start - cfg.lr_end) * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_update(std::span<double> p, std::span<const double> g, std::span<double> m, std::span<double> v,
                  std::uint64_t t, double lr, double weight_decay, const AdamHyper& hyper) {
  if (t == 0) throw ContractError("AdamW step count starts at 1");
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw DimensionError("AdamW buffers disagree in size");
  }
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(t));
  const double decay = 1.0 - lr * weight_decay;
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g[i];
    v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    p[i] = p[i] * decay - lr * mhat / (std::sqrt(vhat) + hyper.eps);
  }
}

AdamW::AdamW(std::vector<numerics::Value> params, AdamHyper hyper) : params_(std::move(params)), hyper_(hyper) {
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void AdamW::step(double lr, double weight_decay) {
  ++t_;
  std::vector<double> zeros;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    numerics::Value& p = params_[i];
    std::span<const double> g;
    if (p.has_grad()) {
      g = p.grad();
    } else {
      zeros.assign(p.numel(), 0.0);
      g = zeros;
    }
    adamw_update(p.mutable_data(), g, m_[i], v_[i], t_, lr, weight_decay, hyper_);
    p.zero_grad();
  }
}

}  // namespace pcattn::framework
