#pragma once

#include <cstdint>

namespace fedsim {

// The three exchange phases that each count as one communication round:
// an O(d) vector down to the clients and an O(d) reply back up.
enum class CommPhase {
  kGradientExchange,  // broadcast parameters, gather local gradients
  kUpdateExchange,    // broadcast gradient/update, gather updates or weights
  kLineSearchPoll,    // broadcast candidate direction, gather loss tables
};

struct CostCounters {
  std::int64_t comm_rounds = 0;
  std::int64_t grad_evals = 0;  // per-sample gradient-equivalents
  std::int64_t server_steps = 0;

  void merge(const CostCounters& other) {
    comm_rounds += other.comm_rounds;
    grad_evals += other.grad_evals;
    server_steps += other.server_steps;
  }
};

inline void record_comm_round(CostCounters& counters, CommPhase /*phase*/) {
  ++counters.comm_rounds;
}

}  // namespace fedsim
