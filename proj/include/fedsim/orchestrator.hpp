#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/accounting.hpp"
#include "fedsim/cg.hpp"
#include "fedsim/counters.hpp"
#include "fedsim/line_search.hpp"
#include "fedsim/local_solvers.hpp"
#include "fedsim/objective.hpp"

namespace fedsim {

enum class Method {
  kGiant,
  kGiantLocalGlobalLS,
  kGiantLocalLocalLS,
  kLocalNewtonGlobalLS,
  kLocalNewton,
  kFedAvg,
};

const char* method_name(Method m);
Method method_from_name(const std::string& name);

// Communication rounds one server step costs for each method.
int comm_rounds_per_step(Method m);
bool uses_global_gradient(Method m);

struct MethodConfig {
  Method method = Method::kFedAvg;
  LocalStepConfig local;
  CgConfig cg;
  StepSizeSet ls = StepSizeSet::defaults();
  bool resample_for_linesearch = false;  // poll a fresh subset in Alg-6-style LS

  void validate() const;
};

struct RoundState {
  int t = 0;
  Vector w;
  std::vector<int> active;  // client ids active this round
  std::uint64_t rng_seed = 0;
  CostCounters counters;
};

struct RoundDiagnostics {
  double chosen_mu = 0.0;
  int failed_clients = 0;
  bool degenerate = false;
};

// Uniform sample of k client ids without replacement, ascending,
// deterministic under seed.
std::vector<int> sample_clients(int total_clients, int k, std::uint64_t seed);

// One server step of the blueprint loop over the already-selected
// state.active set. clients holds one objective per client id.
RoundState run_round(const RoundState& state, const MethodConfig& cfg,
                     const std::vector<RegularizedObjective>& clients,
                     RoundDiagnostics* diagnostics = nullptr);

struct ExperimentConfig {
  MethodConfig method;
  int rounds = 10;
  int active_clients = 1;
  std::uint64_t seed = 0;
};

// Full experiment from w = 0. The per-round global loss is evaluated over
// every client (not just the active subset) and never charged to the budget.
Trace run_experiment(const ExperimentConfig& cfg,
                     const std::vector<RegularizedObjective>& clients);

}  // namespace fedsim
