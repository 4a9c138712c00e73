#pragma once

#include <cstdint>
#include <functional>

#include "fedsim/dataset.hpp"

namespace fedsim {

struct CgConfig {
  enum class Init { kZero, kRandomUniform };

  int max_iterations = 250;
  double relative_tolerance = 1e-6;
  Init init = Init::kZero;
  std::uint64_t seed = 0;  // used only with kRandomUniform

  void validate() const;
};

struct CgResult {
  Vector direction;
  int iterations_used = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<Vector(const Vector&)>;

// Plain conjugate gradients for H u = rhs with a symmetric positive definite
// operator. Each iteration applies the operator exactly once; cost accounting
// happens inside the operator closure. Zero rhs short-circuits to zero.
// Throws std::runtime_error on non-finite intermediates.
CgResult cg_solve(const LinearOperator& op, const Vector& rhs,
                  const CgConfig& cfg);

}  // namespace fedsim
