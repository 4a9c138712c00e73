#include "fedsim/line_search.hpp"

#include <stdexcept>

namespace fedsim {

void StepSizeSet::validate() const {
  if (candidates.empty()) {
    throw std::invalid_argument("StepSizeSet: empty candidate set");
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
    throw std::invalid_argument("StepSizeSet: armijo_c must be in (0,1)");
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double mu : candidates) {
    if (!(mu > 0.0)) {
      throw std::invalid_argument("StepSizeSet: candidates must be positive");
    }
    if (!(mu < prev)) {
      throw std::invalid_argument(
          "StepSizeSet: candidates must be strictly decreasing");
    }
    prev = mu;
  }
}

namespace {

void check_table(const Matrix& losses, const StepSizeSet& set) {
  set.validate();
  if (losses.rows() < 1 ||
      losses.cols() != static_cast<Eigen::Index>(set.candidates.size())) {
    throw std::invalid_argument(
        "line search: loss table does not cover every candidate for every "
        "polled client");
  }
}

}  // namespace

double global_backtracking(const Matrix& losses_at_candidates, double base_loss,
                           double directional_term, const StepSizeSet& set) {
  check_table(losses_at_candidates, set);
  const Vector mean = losses_at_candidates.colwise().mean();
  for (size_t m = 0; m < set.candidates.size(); ++m) {
    const double mu = set.candidates[m];
    if (mean[static_cast<Eigen::Index>(m)] <=
        base_loss - mu * set.armijo_c * directional_term) {
      return mu;
    }
  }
  return set.candidates.back();
}

double global_argmin(const Matrix& losses_at_candidates,
                     const StepSizeSet& set) {
  check_table(losses_at_candidates, set);
  const Vector mean = losses_at_candidates.colwise().mean();
  // candidates are decreasing, so keeping the first strict minimum breaks
  // ties toward the larger step size
  size_t best = 0;
  for (size_t m = 1; m < set.candidates.size(); ++m) {
    if (mean[static_cast<Eigen::Index>(m)] <
        mean[static_cast<Eigen::Index>(best)]) {
      best = m;
    }
  }
  return set.candidates[best];
}

double local_backtracking(const RegularizedObjective& obj, const Vector& w,
                          const Vector& u, const Vector& grad_at_w,
                          const StepSizeSet& set, CostCounters& counters) {
  set.validate();
  const double base = local_loss(obj, w);
  counters.grad_evals += obj.sample_count();
  const double directional = u.dot(grad_at_w);
  for (double mu : set.candidates) {
    const double trial = local_loss(obj, w - mu * u);
    counters.grad_evals += obj.sample_count();
    if (trial <= base - mu * set.armijo_c * directional) {
      return mu;
    }
  }
  return set.candidates.back();
}

}  // namespace fedsim
