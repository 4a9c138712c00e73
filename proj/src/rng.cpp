#include "fedsim/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fedsim {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  // avoid log(0)
  while (u1 <= 0.0) u1 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::vector<int> sample_without_replacement(int total, int k, Rng& rng) {
  if (k < 1 || k > total) {
    throw std::invalid_argument("sample_without_replacement: k out of range");
  }
  std::vector<int> pool(total);
  for (int i = 0; i < total; ++i) pool[i] = i;
  // partial Fisher-Yates
  for (int i = 0; i < k; ++i) {
    const int j = i + rng.uniform_int(total - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace fedsim
