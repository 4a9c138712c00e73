#pragma once

#include <cstdint>

#include "fedsim/cg.hpp"
#include "fedsim/counters.hpp"
#include "fedsim/line_search.hpp"
#include "fedsim/objective.hpp"

namespace fedsim {

struct LocalStepConfig {
  int local_steps = 1;
  double local_step_size = 1.0;  // gamma for the second-order local loops
  double sgd_step_size = 0.1;    // eta for the FedAvg loop
  int batch_size = 0;            // 0 = deterministic full batch
  std::uint64_t batch_seed = 0;

  void validate() const;
};

// What a client sends back to the server after its local solve.
struct LocalResult {
  enum class Kind { kUpdateVector, kWeights };

  Kind kind = Kind::kUpdateVector;
  Vector value;
  CostCounters counters;  // this client's delta for the round
  bool diverged = false;  // non-finite weights/loss encountered; value unusable
};

// GIANT: solve H_i u = global_grad by CG, emit the update vector.
LocalResult giant_local(const Vector& global_grad, const Vector& w,
                        const RegularizedObjective& obj, const CgConfig& cg);

// GIANT with local steps; the global-gradient estimate is refreshed with the
// client's own gradients between steps. Emits u_i = w_0 - w_l so the server
// rule w - mu*u with mu = 1 lands on the local endpoint.
LocalResult giant_local_steps_global_ls(const Vector& global_grad,
                                        const Vector& w,
                                        const RegularizedObjective& obj,
                                        const CgConfig& cg,
                                        const LocalStepConfig& cfg,
                                        int active_count);

// Same loop with per-step local backtracking; emits the final weights.
LocalResult giant_local_steps_local_ls(const Vector& global_grad,
                                       const Vector& w,
                                       const RegularizedObjective& obj,
                                       const CgConfig& cg,
                                       const LocalStepConfig& cfg,
                                       const StepSizeSet& ls, int active_count);

// LocalNewton steps driven by local gradients only; emits u_i = w_0 - w_l.
LocalResult localnewton_global_ls(const Vector& w,
                                  const RegularizedObjective& obj,
                                  const CgConfig& cg,
                                  const LocalStepConfig& cfg);

// LocalNewton with per-step local backtracking; emits the final weights.
LocalResult localnewton_local(const Vector& w, const RegularizedObjective& obj,
                              const CgConfig& cg, const LocalStepConfig& cfg,
                              const StepSizeSet& ls);

// FedAvg: l local gradient-descent steps; emits the final weights.
LocalResult fedavg_local(const Vector& w, const RegularizedObjective& obj,
                         const LocalStepConfig& cfg);

}  // namespace fedsim
