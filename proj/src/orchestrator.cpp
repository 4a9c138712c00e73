#include "fedsim/orchestrator.hpp"

#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

const char* method_name(Method m) {
  switch (m) {
    case Method::kGiant:
      return "giant";
    case Method::kGiantLocalGlobalLS:
      return "giant-local-global-ls";
    case Method::kGiantLocalLocalLS:
      return "giant-local-local-ls";
    case Method::kLocalNewtonGlobalLS:
      return "localnewton-global-ls";
    case Method::kLocalNewton:
      return "localnewton";
    case Method::kFedAvg:
      return "fedavg";
  }
  throw std::invalid_argument("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  for (Method m :
       {Method::kGiant, Method::kGiantLocalGlobalLS, Method::kGiantLocalLocalLS,
        Method::kLocalNewtonGlobalLS, Method::kLocalNewton, Method::kFedAvg}) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown method name: " + name);
}

int comm_rounds_per_step(Method m) {
  switch (m) {
    case Method::kGiant:
    case Method::kGiantLocalGlobalLS:
      return 3;
    case Method::kGiantLocalLocalLS:
    case Method::kLocalNewtonGlobalLS:
      return 2;
    case Method::kLocalNewton:
    case Method::kFedAvg:
      return 1;
  }
  throw std::invalid_argument("comm_rounds_per_step: unknown method");
}

bool uses_global_gradient(Method m) {
  switch (m) {
    case Method::kGiant:
    case Method::kGiantLocalGlobalLS:
    case Method::kGiantLocalLocalLS:
      return true;
    default:
      return false;
  }
}

void MethodConfig::validate() const {
  local.validate();
  cg.validate();
  ls.validate();
}

std::vector<int> sample_clients(int total_clients, int k, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x73616d70u));
  return sample_without_replacement(total_clients, k, rng);
}

namespace {

bool uses_update_vector(Method m) {
  return m == Method::kGiant || m == Method::kGiantLocalGlobalLS ||
         m == Method::kLocalNewtonGlobalLS;
}

// Candidate-loss table for the polled clients: entry (i, m) = f_i(w - mu_m u).
// Every loss evaluation is charged as one gradient-equivalent pass.
Matrix poll_losses(const std::vector<RegularizedObjective>& clients,
                   const std::vector<int>& polled, const Vector& w,
                   const Vector& u, const StepSizeSet& ls,
                   CostCounters& counters) {
  Matrix table(static_cast<Eigen::Index>(polled.size()),
               static_cast<Eigen::Index>(ls.candidates.size()));
  for (size_t i = 0; i < polled.size(); ++i) {
    const auto& obj = clients[polled[i]];
    for (size_t m = 0; m < ls.candidates.size(); ++m) {
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) =
          local_loss(obj, w - ls.candidates[m] * u);
      counters.grad_evals += obj.sample_count();
    }
  }
  return table;
}

}  // namespace

RoundState run_round(const RoundState& state, const MethodConfig& cfg,
                     const std::vector<RegularizedObjective>& clients,
                     RoundDiagnostics* diagnostics) {
  cfg.validate();
  if (state.active.empty()) {
    throw std::invalid_argument("run_round: empty active set");
  }
  for (int id : state.active) {
    if (id < 0 || static_cast<size_t>(id) >= clients.size()) {
      throw std::invalid_argument("run_round: active id out of range");
    }
  }

  RoundState next = state;
  RoundDiagnostics diag;
  const int n_active = static_cast<int>(state.active.size());
  const double inv_active = 1.0 / static_cast<double>(n_active);
  auto& counters = next.counters;

  // optional global-gradient phase
  Vector global_grad;
  if (uses_global_gradient(cfg.method)) {
    record_comm_round(counters, CommPhase::kGradientExchange);
    global_grad = Vector::Zero(state.w.size());
    for (int id : state.active) {
      global_grad += local_gradient(clients[id], state.w);
      counters.grad_evals += clients[id].sample_count();
    }
    global_grad *= inv_active;
  }

  // local solves, in ascending client-id order
  std::vector<LocalResult> results;
  results.reserve(state.active.size());
  for (int id : state.active) {
    const auto& obj = clients[id];
    LocalResult r;
    switch (cfg.method) {
      case Method::kGiant:
        r = giant_local(global_grad, state.w, obj, cfg.cg);
        break;
      case Method::kGiantLocalGlobalLS:
        r = giant_local_steps_global_ls(global_grad, state.w, obj, cfg.cg,
                                        cfg.local, n_active);
        break;
      case Method::kGiantLocalLocalLS:
        r = giant_local_steps_local_ls(global_grad, state.w, obj, cfg.cg,
                                       cfg.local, cfg.ls, n_active);
        break;
      case Method::kLocalNewtonGlobalLS:
        r = localnewton_global_ls(state.w, obj, cfg.cg, cfg.local);
        break;
      case Method::kLocalNewton:
        r = localnewton_local(state.w, obj, cfg.cg, cfg.local, cfg.ls);
        break;
      case Method::kFedAvg: {
        LocalStepConfig local = cfg.local;
        local.batch_seed = derive_seed(state.rng_seed, state.t, id);
        r = fedavg_local(state.w, obj, local);
        break;
      }
    }
    counters.grad_evals += r.counters.grad_evals;
    results.push_back(std::move(r));
  }
  record_comm_round(counters, CommPhase::kUpdateExchange);

  // diverged clients are excluded from averaging; a mostly-failed round keeps
  // the previous weights and is reported as degenerate
  Vector mean_result;
  int successes = 0;
  for (const auto& r : results) {
    if (r.diverged) {
      ++diag.failed_clients;
      continue;
    }
    if (successes == 0) {
      mean_result = r.value;
    } else {
      mean_result += r.value;
    }
    ++successes;
  }
  if (successes == 0 || 2 * diag.failed_clients >= n_active) {
    diag.degenerate = true;
    next.t = state.t + 1;
    if (diagnostics) *diagnostics = diag;
    return next;
  }
  mean_result /= static_cast<double>(successes);

  Vector new_w;
  if (uses_update_vector(cfg.method)) {
    const Vector& u = mean_result;
    std::vector<int> polled = state.active;
    const bool resample = cfg.method == Method::kLocalNewtonGlobalLS ||
                          cfg.resample_for_linesearch;
    if (resample) {
      polled = sample_clients(static_cast<int>(clients.size()), n_active,
                              derive_seed(state.rng_seed, state.t, 0x706f6cu));
    }
    const Matrix table =
        poll_losses(clients, polled, state.w, u, cfg.ls, counters);
    record_comm_round(counters, CommPhase::kLineSearchPoll);

    if (cfg.method == Method::kLocalNewtonGlobalLS) {
      diag.chosen_mu = global_argmin(table, cfg.ls);
    } else {
      // base losses f_i(w) travel in the same poll message
      double base = 0.0;
      for (int id : polled) {
        base += local_loss(clients[id], state.w);
        counters.grad_evals += clients[id].sample_count();
      }
      base /= static_cast<double>(polled.size());
      diag.chosen_mu =
          global_backtracking(table, base, u.dot(global_grad), cfg.ls);
    }
    new_w = state.w - diag.chosen_mu * u;
  } else {
    new_w = mean_result;
  }

  if (!new_w.allFinite()) {
    diag.degenerate = true;
  } else {
    next.w = std::move(new_w);
    ++counters.server_steps;
  }
  next.t = state.t + 1;
  if (diagnostics) *diagnostics = diag;
  return next;
}

Trace run_experiment(const ExperimentConfig& cfg,
                     const std::vector<RegularizedObjective>& clients) {
  cfg.method.validate();
  if (clients.empty()) {
    throw std::invalid_argument("run_experiment: no clients");
  }
  if (cfg.active_clients < 1 ||
      cfg.active_clients > static_cast<int>(clients.size())) {
    throw std::invalid_argument("run_experiment: active_clients out of range");
  }
  if (cfg.rounds < 0) {
    throw std::invalid_argument("run_experiment: negative round count");
  }

  const std::span<const RegularizedObjective> all(clients);
  RoundState state;
  state.w = Vector::Zero(clients.front().dim());
  state.rng_seed = cfg.seed;

  Trace trace;
  trace.method = method_name(cfg.method.method);
  trace.seed = cfg.seed;

  RoundRecord initial;
  initial.global_loss = aggregate_loss(all, state.w);
  trace.rows.push_back(initial);

  for (int t = 0; t < cfg.rounds; ++t) {
    state.active =
        sample_clients(static_cast<int>(clients.size()), cfg.active_clients,
                       derive_seed(cfg.seed, t, 0x616374u));
    RoundDiagnostics diag;
    state = run_round(state, cfg.method, clients, &diag);

    RoundRecord row;
    row.round = t + 1;
    row.comm_rounds = state.counters.comm_rounds;
    row.grad_evals = state.counters.grad_evals;
    row.global_loss = aggregate_loss(all, state.w);  // never charged
    row.step_size = diag.chosen_mu;
    row.failed_clients = diag.failed_clients;
    row.degenerate = diag.degenerate;
    trace.rows.push_back(row);
  }
  return trace;
}

}  // namespace fedsim
