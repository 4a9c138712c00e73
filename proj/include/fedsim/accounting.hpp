#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fedsim/counters.hpp"

namespace fedsim {

struct RoundRecord {
  int round = 0;
  std::int64_t comm_rounds = 0;  // cumulative
  std::int64_t grad_evals = 0;   // cumulative
  double global_loss = 0.0;
  double step_size = 0.0;  // chosen mu, 0 for averaging methods
  int failed_clients = 0;
  bool degenerate = false;
};

struct Trace {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rows;  // rows[0] is the pre-optimization state

  int rounds() const {
    return rows.empty() ? 0 : static_cast<int>(rows.size()) - 1;
  }
  double final_loss() const;
};

// CSV with the fixed header
//   round,comm_rounds,grad_evals,global_loss,step_size,method,seed
// one row per record, losses at 17 significant digits.
void export_trace(const Trace& trace, std::ostream& out);
Trace import_trace(std::istream& in);

// trace file name convention
std::string trace_filename(const std::string& method,
                           const std::string& dataset, std::uint64_t seed);

// Local-step count for a budget-matched FedAvg run: l such that l*n_i is
// nearest to the reference's mean per-client per-round gradient-equivalents.
// Throws std::invalid_argument on an empty reference trace.
int match_budget(const Trace& reference, std::int64_t samples_per_client,
                 int active_clients);

}  // namespace fedsim
