#include "fedsim/cg.hpp"

#include <cmath>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

void CgConfig::validate() const {
  if (max_iterations < 1) {
    throw std::invalid_argument("CgConfig: max_iterations must be >= 1");
  }
  if (!(relative_tolerance > 0.0)) {
    throw std::invalid_argument("CgConfig: relative_tolerance must be > 0");
  }
}

CgResult cg_solve(const LinearOperator& op, const Vector& rhs,
                  const CgConfig& cfg) {
  cfg.validate();
  if (!rhs.allFinite()) {
    throw std::invalid_argument("cg_solve: non-finite rhs");
  }

  const double rhs_norm = rhs.norm();
  CgResult result;
  result.direction = Vector::Zero(rhs.size());
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }
  const double threshold = cfg.relative_tolerance * rhs_norm;

  Vector x;
  Vector r;
  if (cfg.init == CgConfig::Init::kRandomUniform) {
    Rng rng(derive_seed(cfg.seed, 0x6367u));
    x.resize(rhs.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform();
    r = rhs - op(x);
  } else {
    x = Vector::Zero(rhs.size());
    r = rhs;
  }

  Vector p = r;
  double rr = r.squaredNorm();
  int iter = 0;
  while (iter < cfg.max_iterations && std::sqrt(rr) > threshold) {
    const Vector hp = op(p);
    const double php = p.dot(hp);
    if (!std::isfinite(php) || php <= 0.0) {
      throw std::runtime_error(
          "cg_solve: operator not positive definite or overflow");
    }
    const double alpha = rr / php;
    x += alpha * p;
    r -= alpha * hp;
    const double rr_next = r.squaredNorm();
    if (!std::isfinite(rr_next)) {
      throw std::runtime_error("cg_solve: non-finite residual");
    }
    p = r + (rr_next / rr) * p;
    rr = rr_next;
    ++iter;
  }

  result.direction = std::move(x);
  result.iterations_used = iter;
  result.final_residual_norm = std::sqrt(rr);
  result.converged = result.final_residual_norm <= threshold;
  return result;
}

}  // namespace fedsim
