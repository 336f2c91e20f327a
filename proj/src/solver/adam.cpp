#include "decomposer/solver/adam.hpp"

#include <cmath>

#include "decomposer/errors.hpp"
#include "decomposer/simd/kernels.hpp"

namespace decomposer::opt {

void AdamConfig::validate() const {
  if (!(step_size > 0.0)) throw ArgumentError("step_size must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ArgumentError("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ArgumentError("beta2 must lie in (0, 1)");
  if (!(eps > 0.0)) throw ArgumentError("eps must be > 0");
}

void optimizer_step(std::span<double> theta, std::span<const double> grad, AdamState& state,
                    const AdamConfig& cfg, std::span<const Block> active) {
  if (grad.size() != theta.size() || state.size() != theta.size()) {
    throw DimensionError("optimizer_step: theta, gradient and state lengths differ");
  }
  for (const Block& b : active) {
    if (b.offset + b.length > theta.size()) throw DimensionError("optimizer_step: block out of range");
  }
  state.t += 1;
  simd::AdamCoefs c;
  c.step = cfg.step_size;
  c.beta1 = cfg.beta1;
  c.beta2 = cfg.beta2;
  c.bias1 = 1.0 - std::pow(cfg.beta1, double(state.t));
  c.bias2 = 1.0 - std::pow(cfg.beta2, double(state.t));
  c.eps = cfg.eps;

  const auto& k = simd::kernels();
  if (active.empty()) {
    k.adam_update(theta.data(), grad.data(), state.m.data(), state.v.data(), theta.size(), c);
    return;
  }
  for (const Block& b : active) {
    k.adam_update(theta.data() + b.offset, grad.data() + b.offset, state.m.data() + b.offset,
                  state.v.data() + b.offset, b.length, c);
  }
}

}  // namespace decomposer::opt
