#include <doctest.h>

#include "fedsim/local_solvers.hpp"
#include "test_helpers.hpp"

using namespace fedsim;
using namespace fedsim::testing;

namespace {

CgConfig tight_cg() {
  CgConfig cfg;
  cfg.relative_tolerance = 1e-12;
  return cfg;
}

Vector dense_newton_direction(const RegularizedObjective& obj, const Vector& w,
                              const Vector& rhs) {
  return dense_hessian(obj, w).ldlt().solve(rhs);
}

}  // namespace

TEST_CASE("giant_local on the pure regularizer is grad / gamma") {
  const ClientDataset ds = zero_feature_instance(5, 4);
  const RegularizedObjective obj(ds, 0.5);
  const Vector w = random_vector(4, 3, 2.0);
  const Vector g = local_gradient(obj, w);
  const LocalResult r = giant_local(g, w, obj, tight_cg());
  CHECK(r.kind == LocalResult::Kind::kUpdateVector);
  CHECK((r.value - g / 0.5).norm() < 1e-10);
  // one server step with mu = 1 reaches the quadratic optimum w = 0
  CHECK((w - r.value).norm() < 1e-10);
}

TEST_CASE("giant_local with zero gradient returns zero") {
  const ClientDataset ds = random_instance(6, 3, 4);
  const RegularizedObjective obj(ds, 0.2);
  const LocalResult r =
      giant_local(Vector::Zero(3), random_vector(3, 1), obj, tight_cg());
  CHECK(r.value.norm() == 0.0);
  CHECK_FALSE(r.diverged);
}

TEST_CASE("giant_local matches the dense Newton solve") {
  const ClientDataset ds = random_instance(15, 6, 8);
  const RegularizedObjective obj(ds, 0.1);
  const Vector w = random_vector(6, 2, 0.5);
  const Vector g = random_vector(6, 9);  // stands in for the global gradient
  const LocalResult r = giant_local(g, w, obj, tight_cg());
  const Vector exact = dense_newton_direction(obj, w, g);
  CHECK((r.value - exact).norm() / exact.norm() < 1e-6);
}

TEST_CASE("giant local steps: l = 1 equals giant_local scaled by gamma") {
  const ClientDataset ds = random_instance(10, 4, 14);
  const RegularizedObjective obj(ds, 0.2);
  const Vector w = random_vector(4, 5, 0.4);
  const Vector g = local_gradient(obj, w);
  LocalStepConfig cfg;
  cfg.local_steps = 1;
  cfg.local_step_size = 0.3;
  const LocalResult one =
      giant_local_steps_global_ls(g, w, obj, tight_cg(), cfg, 7);
  const LocalResult plain = giant_local(g, w, obj, tight_cg());
  CHECK((one.value - 0.3 * plain.value).norm() < 1e-10);
  CHECK(one.kind == LocalResult::Kind::kUpdateVector);
}

TEST_CASE("giant local steps: single-client recursion collapses to local Newton") {
  const ClientDataset ds = random_instance(12, 4, 19);
  const RegularizedObjective obj(ds, 0.3);
  const Vector w = random_vector(4, 6, 0.4);
  const Vector g = local_gradient(obj, w);
  LocalStepConfig cfg;
  cfg.local_steps = 3;
  cfg.local_step_size = 1.0;

  const LocalResult r =
      giant_local_steps_global_ls(g, w, obj, tight_cg(), cfg, 1);

  // reference: with |S_t| = 1 the estimate g_j is exactly the local gradient
  Vector wj = w;
  for (int j = 0; j < 3; ++j) {
    const Vector gj = local_gradient(obj, wj);
    wj -= dense_newton_direction(obj, wj, gj);
  }
  CHECK((r.value - (w - wj)).norm() < 1e-8);
}

TEST_CASE("giant local steps: l = 3 matches a straight-line reference") {
  const ClientDataset ds = random_instance(9, 4, 33);
  const RegularizedObjective obj(ds, 0.15);
  const Vector w = random_vector(4, 8, 0.3);
  const Vector g0 = random_vector(4, 10, 0.2);
  const int active = 4;
  LocalStepConfig cfg;
  cfg.local_steps = 3;
  cfg.local_step_size = 0.6;

  const LocalResult r =
      giant_local_steps_global_ls(g0, w, obj, tight_cg(), cfg, active);

  // independent step-by-step transcript of the local loop
  Vector wj = w;
  Vector g = g0;
  for (int j = 0; j < 3; ++j) {
    const Vector u = dense_newton_direction(obj, wj, g);
    const Vector w_next = wj - 0.6 * u;
    g += (local_gradient(obj, w_next) - local_gradient(obj, wj)) /
         static_cast<double>(active);
    wj = w_next;
  }
  CHECK((r.value - (w - wj)).norm() < 1e-7);

  // counter contract: initial grad + 2 refreshes + 3 CG solves over n_i = 9
  const auto cg_evals = r.counters.grad_evals - 3 * 9;
  CHECK(cg_evals % 9 == 0);
  CHECK(cg_evals > 0);
}

TEST_CASE("giant local steps with local line search matches its reference") {
  const ClientDataset ds = random_instance(11, 4, 41);
  const RegularizedObjective obj(ds, 0.2);
  const Vector w = random_vector(4, 9, 0.5);
  const Vector g0 = local_gradient(obj, w);
  const StepSizeSet ls{{1.0, 0.5, 0.1}, 1e-4};
  const int active = 3;
  LocalStepConfig cfg;
  cfg.local_steps = 2;

  const LocalResult r =
      giant_local_steps_local_ls(g0, w, obj, tight_cg(), cfg, ls, active);
  CHECK(r.kind == LocalResult::Kind::kWeights);

  Vector wj = w;
  Vector g = g0;
  for (int j = 0; j < 2; ++j) {
    const Vector grad_local = local_gradient(obj, wj);
    const Vector u = dense_newton_direction(obj, wj, g);
    CostCounters scratch;
    const double gamma_j = local_backtracking(obj, wj, u, grad_local, ls,
                                              scratch);
    const Vector w_next = wj - gamma_j * u;
    g += (local_gradient(obj, w_next) - grad_local) /
         static_cast<double>(active);
    wj = w_next;
  }
  CHECK((r.value - wj).norm() < 1e-7);
}

TEST_CASE("localnewton_global_ls: l = 1, step 1 is the plain Newton step") {
  const ClientDataset ds = random_instance(13, 5, 52);
  const RegularizedObjective obj(ds, 0.25);
  const Vector w = random_vector(5, 11, 0.4);
  LocalStepConfig cfg;
  const LocalResult r = localnewton_global_ls(w, obj, tight_cg(), cfg);
  const Vector newton =
      dense_newton_direction(obj, w, local_gradient(obj, w));
  CHECK(r.kind == LocalResult::Kind::kUpdateVector);
  CHECK((r.value - newton).norm() < 1e-7);
}

TEST_CASE("localnewton_global_ls at the local optimum emits zero") {
  // minimize the pure regularizer: optimum is w = 0
  const ClientDataset ds = zero_feature_instance(4, 3);
  const RegularizedObjective obj(ds, 1.0);
  LocalStepConfig cfg;
  cfg.local_steps = 2;
  const LocalResult r =
      localnewton_global_ls(Vector::Zero(3), obj, tight_cg(), cfg);
  CHECK(r.value.norm() < 1e-14);
}

TEST_CASE("localnewton_global_ls: l = 2 matches a straight-line reference") {
  const ClientDataset ds = random_instance(10, 4, 61);
  const RegularizedObjective obj(ds, 0.1);
  const Vector w = random_vector(4, 12, 0.6);
  LocalStepConfig cfg;
  cfg.local_steps = 2;
  cfg.local_step_size = 0.8;
  const LocalResult r = localnewton_global_ls(w, obj, tight_cg(), cfg);

  Vector wj = w;
  for (int j = 0; j < 2; ++j) {
    wj -= 0.8 * dense_newton_direction(obj, wj, local_gradient(obj, wj));
  }
  CHECK((r.value - (w - wj)).norm() < 1e-7);
}

TEST_CASE("localnewton_local matches its reference and emits weights") {
  const ClientDataset ds = random_instance(10, 4, 71);
  const RegularizedObjective obj(ds, 0.2);
  const Vector w = random_vector(4, 13, 0.7);
  const StepSizeSet ls{{1.0, 0.25}, 1e-4};
  LocalStepConfig cfg;
  cfg.local_steps = 2;
  const LocalResult r = localnewton_local(w, obj, tight_cg(), cfg, ls);
  CHECK(r.kind == LocalResult::Kind::kWeights);

  Vector wj = w;
  for (int j = 0; j < 2; ++j) {
    const Vector g = local_gradient(obj, wj);
    const Vector u = dense_newton_direction(obj, wj, g);
    CostCounters scratch;
    wj -= local_backtracking(obj, wj, u, g, ls, scratch) * u;
  }
  CHECK((r.value - wj).norm() < 1e-7);
}

TEST_CASE("fedavg_local trivia and reference loop") {
  const ClientDataset ds = random_instance(8, 3, 81);
  const RegularizedObjective obj(ds, 0.1);
  const Vector w = random_vector(3, 14, 0.5);

  LocalStepConfig cfg;
  cfg.local_steps = 1;
  cfg.sgd_step_size = 0.2;
  const LocalResult one = fedavg_local(w, obj, cfg);
  CHECK((one.value - (w - 0.2 * local_gradient(obj, w))).norm() < 1e-14);
  CHECK(one.counters.grad_evals == 8);

  cfg.sgd_step_size = 0.0;
  cfg.local_steps = 4;
  const LocalResult frozen = fedavg_local(w, obj, cfg);
  CHECK((frozen.value - w).norm() == 0.0);

  cfg.sgd_step_size = 0.3;
  cfg.local_steps = 5;
  const LocalResult r = fedavg_local(w, obj, cfg);
  Vector wj = w;
  for (int j = 0; j < 5; ++j) wj -= 0.3 * local_gradient(obj, wj);
  CHECK((r.value - wj).norm() < 1e-14);
  CHECK(r.counters.grad_evals == 5 * 8);
}

TEST_CASE("fedavg minibatch mode is deterministic under its seed") {
  const ClientDataset ds = random_instance(20, 3, 91);
  const RegularizedObjective obj(ds, 0.1);
  const Vector w = random_vector(3, 15, 0.5);
  LocalStepConfig cfg;
  cfg.local_steps = 3;
  cfg.sgd_step_size = 0.1;
  cfg.batch_size = 5;
  cfg.batch_seed = 1234;
  const LocalResult a = fedavg_local(w, obj, cfg);
  const LocalResult b = fedavg_local(w, obj, cfg);
  CHECK((a.value - b.value).norm() == 0.0);
  CHECK(a.counters.grad_evals == 3 * 5);
  cfg.batch_seed = 99;
  const LocalResult other = fedavg_local(w, obj, cfg);
  CHECK((a.value - other.value).norm() > 0.0);
}

TEST_CASE("divergent local loop reports divergence instead of throwing") {
  // step size far beyond 2/gamma makes the regularizer term oscillate with
  // geometric growth until the weights overflow
  ClientDataset ds = zero_feature_instance(2, 2);
  const RegularizedObjective obj(ds, 1.0);
  LocalStepConfig cfg;
  cfg.local_steps = 400;
  cfg.sgd_step_size = 1e10;
  const LocalResult r = fedavg_local(Vector::Constant(2, 1.0), obj, cfg);
  CHECK(r.diverged);
}

TEST_CASE("single-client GIANT + unit server step solves a quadratic exactly") {
  const ClientDataset ds = zero_feature_instance(3, 5);
  const RegularizedObjective obj(ds, 3.0);
  const Vector w = random_vector(5, 16, 4.0);
  const LocalResult r = giant_local(local_gradient(obj, w), w, obj, tight_cg());
  const Vector next = w - 1.0 * r.value;
  CHECK(next.norm() < 1e-8);  // minimizer of the pure regularizer
}
