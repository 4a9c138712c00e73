#include "fedsim/local_solvers.hpp"

#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

void LocalStepConfig::validate() const {
  if (local_steps < 1) {
    throw std::invalid_argument("LocalStepConfig: local_steps must be >= 1");
  }
  if (!(local_step_size > 0.0)) {
    throw std::invalid_argument("LocalStepConfig: local_step_size must be > 0");
  }
  if (sgd_step_size < 0.0) {
    throw std::invalid_argument("LocalStepConfig: sgd_step_size must be >= 0");
  }
  if (batch_size < 0) {
    throw std::invalid_argument("LocalStepConfig: batch_size must be >= 0");
  }
}

namespace {

LinearOperator hvp_operator(const RegularizedObjective& obj, const Vector& at,
                            CostCounters& counters) {
  return [&obj, at, &counters](const Vector& v) {
    return hessian_vector_product(obj, at, v, counters);
  };
}

LocalResult diverged_result(CostCounters counters) {
  LocalResult r;
  r.kind = LocalResult::Kind::kWeights;
  r.counters = counters;
  r.diverged = true;
  return r;
}

}  // namespace

LocalResult giant_local(const Vector& global_grad, const Vector& w,
                        const RegularizedObjective& obj, const CgConfig& cg) {
  LocalResult r;
  r.kind = LocalResult::Kind::kUpdateVector;
  try {
    r.value = cg_solve(hvp_operator(obj, w, r.counters), global_grad, cg)
                  .direction;
  } catch (const std::runtime_error&) {
    return diverged_result(r.counters);
  }
  return r;
}

LocalResult giant_local_steps_global_ls(const Vector& global_grad,
                                        const Vector& w,
                                        const RegularizedObjective& obj,
                                        const CgConfig& cg,
                                        const LocalStepConfig& cfg,
                                        int active_count) {
  cfg.validate();
  if (active_count < 1) {
    throw std::invalid_argument("giant_local_steps: active_count must be >= 1");
  }
  LocalResult r;
  r.kind = LocalResult::Kind::kUpdateVector;
  const double inv_s = 1.0 / static_cast<double>(active_count);

  Vector wj = w;
  Vector g = global_grad;
  Vector local_grad_at_wj;
  try {
    if (cfg.local_steps > 1) {
      local_grad_at_wj = local_gradient(obj, wj);
      r.counters.grad_evals += obj.sample_count();
    }
    for (int j = 0; j < cfg.local_steps; ++j) {
      const Vector u =
          cg_solve(hvp_operator(obj, wj, r.counters), g, cg).direction;
      const Vector w_next = wj - cfg.local_step_size * u;
      if (!w_next.allFinite()) return diverged_result(r.counters);
      if (j + 1 < cfg.local_steps) {
        const Vector grad_next = local_gradient(obj, w_next);
        r.counters.grad_evals += obj.sample_count();
        g += inv_s * (grad_next - local_grad_at_wj);
        local_grad_at_wj = grad_next;
      }
      wj = w_next;
    }
  } catch (const std::runtime_error&) {
    return diverged_result(r.counters);
  }
  r.value = w - wj;  // oriented so the server rule w - mu*u moves toward w_l
  return r;
}

LocalResult giant_local_steps_local_ls(const Vector& global_grad,
                                       const Vector& w,
                                       const RegularizedObjective& obj,
                                       const CgConfig& cg,
                                       const LocalStepConfig& cfg,
                                       const StepSizeSet& ls,
                                       int active_count) {
  cfg.validate();
  if (active_count < 1) {
    throw std::invalid_argument("giant_local_steps: active_count must be >= 1");
  }
  LocalResult r;
  r.kind = LocalResult::Kind::kWeights;
  const double inv_s = 1.0 / static_cast<double>(active_count);

  Vector wj = w;
  Vector g = global_grad;
  try {
    Vector local_grad_at_wj = local_gradient(obj, wj);
    r.counters.grad_evals += obj.sample_count();
    for (int j = 0; j < cfg.local_steps; ++j) {
      const Vector u =
          cg_solve(hvp_operator(obj, wj, r.counters), g, cg).direction;
      const double gamma_j =
          local_backtracking(obj, wj, u, local_grad_at_wj, ls, r.counters);
      const Vector w_next = wj - gamma_j * u;
      if (!w_next.allFinite()) return diverged_result(r.counters);
      if (j + 1 < cfg.local_steps) {
        const Vector grad_next = local_gradient(obj, w_next);
        r.counters.grad_evals += obj.sample_count();
        g += inv_s * (grad_next - local_grad_at_wj);
        local_grad_at_wj = grad_next;
      }
      wj = w_next;
    }
  } catch (const std::runtime_error&) {
    return diverged_result(r.counters);
  }
  r.value = wj;
  return r;
}

LocalResult localnewton_global_ls(const Vector& w,
                                  const RegularizedObjective& obj,
                                  const CgConfig& cg,
                                  const LocalStepConfig& cfg) {
  cfg.validate();
  LocalResult r;
  r.kind = LocalResult::Kind::kUpdateVector;
  Vector wj = w;
  try {
    for (int j = 0; j < cfg.local_steps; ++j) {
      const Vector g = local_gradient(obj, wj);
      r.counters.grad_evals += obj.sample_count();
      const Vector u =
          cg_solve(hvp_operator(obj, wj, r.counters), g, cg).direction;
      const Vector w_next = wj - cfg.local_step_size * u;
      if (!w_next.allFinite()) return diverged_result(r.counters);
      wj = w_next;
    }
  } catch (const std::runtime_error&) {
    return diverged_result(r.counters);
  }
  r.value = w - wj;
  return r;
}

LocalResult localnewton_local(const Vector& w, const RegularizedObjective& obj,
                              const CgConfig& cg, const LocalStepConfig& cfg,
                              const StepSizeSet& ls) {
  cfg.validate();
  LocalResult r;
  r.kind = LocalResult::Kind::kWeights;
  Vector wj = w;
  try {
    for (int j = 0; j < cfg.local_steps; ++j) {
      const Vector g = local_gradient(obj, wj);
      r.counters.grad_evals += obj.sample_count();
      const Vector u =
          cg_solve(hvp_operator(obj, wj, r.counters), g, cg).direction;
      const double gamma_j = local_backtracking(obj, wj, u, g, ls, r.counters);
      const Vector w_next = wj - gamma_j * u;
      if (!w_next.allFinite()) return diverged_result(r.counters);
      wj = w_next;
    }
  } catch (const std::runtime_error&) {
    return diverged_result(r.counters);
  }
  r.value = wj;
  return r;
}

LocalResult fedavg_local(const Vector& w, const RegularizedObjective& obj,
                         const LocalStepConfig& cfg) {
  cfg.validate();
  LocalResult r;
  r.kind = LocalResult::Kind::kWeights;
  Vector wj = w;
  const auto& data = obj.data();
  Rng rng(derive_seed(cfg.batch_seed, 0x66656461u));

  for (int j = 0; j < cfg.local_steps; ++j) {
    Vector g;
    if (cfg.batch_size == 0 ||
        cfg.batch_size >= static_cast<int>(data.rows())) {
      g = local_gradient(obj, wj);
      r.counters.grad_evals += obj.sample_count();
    } else {
      // minibatch mode: sampled rows, explicit seed
      const auto idx = sample_without_replacement(
          static_cast<int>(data.rows()), cfg.batch_size, rng);
      ClientDataset batch;
      batch.features.resize(cfg.batch_size, data.dim());
      batch.labels.resize(cfg.batch_size);
      for (int b = 0; b < cfg.batch_size; ++b) {
        batch.features.row(b) = data.features.row(idx[b]);
        batch.labels[b] = data.labels[idx[b]];
      }
      batch.client_id = data.client_id;
      RegularizedObjective batch_obj(batch, obj.gamma());
      g = local_gradient(batch_obj, wj);
      r.counters.grad_evals += cfg.batch_size;
    }
    const Vector w_next = wj - cfg.sgd_step_size * g;
    if (!w_next.allFinite()) return diverged_result(r.counters);
    wj = w_next;
  }
  r.value = wj;
  return r;
}

}  // namespace fedsim
