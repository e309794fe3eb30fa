#include "wse/rng.hpp"

#include <numeric>

namespace wse {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  // Partial Fisher-Yates: the first k slots end up holding the sample.
  for (std::size_t i = 0; i < k && i < n; ++i) {
    std::size_t j = i + index(n - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, n));
  return pool;
}

}  // namespace wse
