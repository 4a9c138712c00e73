#include "fedsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace fedsim {

namespace {

std::vector<GridCell> make_grid(const std::vector<double>& step_sizes,
                                const std::vector<int>& local_steps) {
  std::vector<GridCell> grid;
  grid.reserve(step_sizes.size() * local_steps.size());
  for (double s : step_sizes) {
    for (int l : local_steps) grid.push_back({s, l});
  }
  return grid;
}

std::string render(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::vector<GridCell> second_order_grid() {
  return make_grid({0.1, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}, {1, 2, 3, 5, 10});
}

std::vector<GridCell> fedavg_grid() {
  return make_grid({1e-5, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.9, 1.0},
                   {1, 10, 25, 50, 100});
}

GridResult run_grid(const ExperimentConfig& base,
                    const std::vector<RegularizedObjective>& clients,
                    const std::vector<GridCell>& grid, int workers) {
  if (grid.empty()) {
    throw std::invalid_argument("run_grid: empty grid");
  }
  workers = std::clamp(workers, 1, static_cast<int>(grid.size()));

  GridResult result;
  result.cells.resize(grid.size());

  std::atomic<size_t> cursor{0};
  auto work = [&] {
    for (size_t i = cursor.fetch_add(1); i < grid.size();
         i = cursor.fetch_add(1)) {
      ExperimentConfig cfg = base;
      cfg.method.local.local_steps = grid[i].local_steps;
      if (cfg.method.method == Method::kFedAvg) {
        cfg.method.local.sgd_step_size = grid[i].step_size;
      } else {
        cfg.method.local.local_step_size = grid[i].step_size;
      }
      // every cell keeps the base seed: runs are pure functions of their
      // config, so worker scheduling cannot change any cell's result and a
      // one-cell grid reproduces a plain run exactly
      GridCellResult& cell = result.cells[i];
      cell.cell = grid[i];
      try {
        cell.trace = run_experiment(cfg, clients);
        // a run whose every round was degenerate never moved the weights:
        // record it as diverged rather than reporting the initial loss
        bool all_degenerate = cell.trace.rounds() > 0;
        for (size_t r = 1; r < cell.trace.rows.size(); ++r) {
          all_degenerate = all_degenerate && cell.trace.rows[r].degenerate;
        }
        const double loss = cell.trace.final_loss();
        cell.final_loss = std::isfinite(loss) && !all_degenerate
                              ? loss
                              : std::numeric_limits<double>::infinity();
      } catch (const std::exception&) {
        cell.final_loss = std::numeric_limits<double>::infinity();
      }
    }
  };

  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  // argmin final loss; ties toward larger step size, then fewer local steps
  for (size_t i = 0; i < result.cells.size(); ++i) {
    if (!std::isfinite(result.cells[i].final_loss)) continue;
    if (result.best_index < 0) {
      result.best_index = static_cast<int>(i);
      continue;
    }
    const auto& best = result.cells[result.best_index];
    const auto& cur = result.cells[i];
    if (cur.final_loss < best.final_loss ||
        (cur.final_loss == best.final_loss &&
         (cur.cell.step_size > best.cell.step_size ||
          (cur.cell.step_size == best.cell.step_size &&
           cur.cell.local_steps < best.cell.local_steps)))) {
      result.best_index = static_cast<int>(i);
    }
  }
  return result;
}

void export_grid_summary(const GridResult& result, std::ostream& out) {
  out << "cell,step_size,local_steps,final_loss,best\n";
  for (size_t i = 0; i < result.cells.size(); ++i) {
    const auto& c = result.cells[i];
    out << i << ',' << render(c.cell.step_size) << ',' << c.cell.local_steps
        << ','
        << (std::isfinite(c.final_loss) ? render(c.final_loss) : "inf") << ','
        << (static_cast<int>(i) == result.best_index ? 1 : 0) << '\n';
  }
}

HessianSimilarityResult hessian_similarity(
    const std::vector<RegularizedObjective>& clients, const Vector& w,
    MatrixNorm norm) {
  if (clients.empty()) {
    throw std::invalid_argument("hessian_similarity: no clients");
  }
  auto matrix_norm = [norm](const Matrix& m) {
    if (norm == MatrixNorm::kSpectral) {
      return m.jacobiSvd().singularValues()[0];
    }
    return m.norm();  // Frobenius
  };

  std::vector<Matrix> locals;
  locals.reserve(clients.size());
  for (const auto& obj : clients) locals.push_back(dense_hessian(obj, w));

  Matrix global = Matrix::Zero(w.size(), w.size());
  for (const auto& h : locals) global += h;
  global /= static_cast<double>(locals.size());

  HessianSimilarityResult result;
  Matrix running = Matrix::Zero(w.size(), w.size());
  for (size_t k = 0; k < locals.size(); ++k) {
    running += locals[k];
    result.error_by_k.push_back(
        matrix_norm(running / static_cast<double>(k + 1) - global));
  }
  result.identity_baseline = matrix_norm(
      Matrix::Identity(w.size(), w.size()) - global);
  return result;
}

}  // namespace fedsim
