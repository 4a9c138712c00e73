#pragma once

#include <vector>

#include "fedsim/counters.hpp"
#include "fedsim/objective.hpp"

namespace fedsim {

// Fixed candidate step sizes mu_1 > mu_2 > ... > mu_l, all positive.
struct StepSizeSet {
  std::vector<double> candidates;
  double armijo_c = 1e-4;

  void validate() const;

  static StepSizeSet defaults() {
    return {{1.0, 0.5, 0.25, 0.1, 0.05, 0.01}, 1e-4};
  }
};

// losses_at_candidates: one row per polled client, one column per candidate,
// entry (i, m) = f_i(w - mu_m u).

// Returns the first (largest) mu_m with
//   mean_i f_i(w - mu_m u) <= base_loss - mu_m * c * directional_term,
// falling back to the smallest candidate when none qualifies.
// base_loss is the polled-client mean of f_i(w); directional_term = <u, grad>.
double global_backtracking(const Matrix& losses_at_candidates, double base_loss,
                           double directional_term, const StepSizeSet& set);

// Returns the candidate minimizing the polled-client mean loss; ties go to
// the larger step size.
double global_argmin(const Matrix& losses_at_candidates,
                     const StepSizeSet& set);

// Same Armijo rule evaluated on this client's objective only. Evaluates
// candidates lazily, largest first; each loss evaluation (including the base
// loss at w) charges n_i gradient-equivalents. grad_at_w is the client's
// gradient at w.
double local_backtracking(const RegularizedObjective& obj, const Vector& w,
                          const Vector& u, const Vector& grad_at_w,
                          const StepSizeSet& set, CostCounters& counters);

}  // namespace fedsim
