#pragma once

#include <cstddef>

namespace sdre_eso {

/// Order k and channel dimension n of a system x_k^(k) = f(x) + G(x) u.
/// The stacked state x = [x_1; ...; x_k] has k*n entries and the extended
/// (total-disturbance) state has n entries.
struct SystemDims {
  std::size_t k = 1;
  std::size_t n = 1;

  std::size_t state_dim() const { return k * n; }

  friend bool operator==(const SystemDims&, const SystemDims&) = default;
};

/// Throws ConfigError unless k >= 1 and n >= 1.
void validate(const SystemDims& dims);

}  // namespace sdre_eso
