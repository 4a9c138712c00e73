#pragma once

#include <string>
#include <vector>

#include "fedsim/accounting.hpp"
#include "fedsim/orchestrator.hpp"

namespace fedsim {

// One (local step size, local step count) cell of a hyperparameter grid.
struct GridCell {
  double step_size = 1.0;
  int local_steps = 1;
};

struct GridCellResult {
  GridCell cell;
  Trace trace;
  double final_loss = 0.0;  // +inf marks a diverged cell
};

struct GridResult {
  std::vector<GridCellResult> cells;
  int best_index = -1;  // argmin final loss; larger step, then fewer steps on ties
};

// Default sweeps: step sizes x local steps.
std::vector<GridCell> second_order_grid();
std::vector<GridCell> fedavg_grid();

// Runs every cell (concurrently up to `workers`); every cell is a pure
// function of its own config, so worker count never changes results.
GridResult run_grid(const ExperimentConfig& base,
                    const std::vector<RegularizedObjective>& clients,
                    const std::vector<GridCell>& grid, int workers = 1);

void export_grid_summary(const GridResult& result, std::ostream& out);

enum class MatrixNorm { kFrobenius, kSpectral };

struct HessianSimilarityResult {
  std::vector<double> error_by_k;  // |mean of first k local Hessians - H_global|
  double identity_baseline = 0.0;  // |I - H_global|
};

// Fig-style estimation-quality analysis at the given evaluation point.
HessianSimilarityResult hessian_similarity(
    const std::vector<RegularizedObjective>& clients, const Vector& w,
    MatrixNorm norm = MatrixNorm::kFrobenius);

}  // namespace fedsim
