#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "decomposer/decomp/decomposition.hpp"

namespace decomposer::opt {

struct AdamConfig {
  double step_size = 0.02;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

// Running moments for one parameter vector. `t` counts completed updates.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
  std::size_t size() const { return m.size(); }
};

// theta <- theta - step * m_hat / (sqrt(v_hat) + eps), restricted to
// `active` (all of theta when empty). Entries outside the active blocks,
// including their moments, are left untouched.
void optimizer_step(std::span<double> theta, std::span<const double> grad, AdamState& state,
                    const AdamConfig& cfg, std::span<const Block> active = {});

}  // namespace decomposer::opt
