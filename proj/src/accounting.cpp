#include "fedsim/accounting.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fedsim {

namespace {

std::string render_loss(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

double Trace::final_loss() const {
  if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
  return rows.back().global_loss;
}

void export_trace(const Trace& trace, std::ostream& out) {
  out << "round,comm_rounds,grad_evals,global_loss,step_size,method,seed\n";
  for (const auto& r : trace.rows) {
    out << r.round << ',' << r.comm_rounds << ',' << r.grad_evals << ','
        << render_loss(r.global_loss) << ',' << render_loss(r.step_size) << ','
        << trace.method << ',' << trace.seed << '\n';
  }
}

Trace import_trace(std::istream& in) {
  Trace trace;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("import_trace: missing header");
  }
  if (line != "round,comm_rounds,grad_evals,global_loss,step_size,method,seed") {
    throw std::invalid_argument("import_trace: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw std::invalid_argument("import_trace: malformed row");
    }
    RoundRecord r;
    r.round = std::stoi(f[0]);
    r.comm_rounds = std::stoll(f[1]);
    r.grad_evals = std::stoll(f[2]);
    r.global_loss = std::stod(f[3]);
    r.step_size = std::stod(f[4]);
    trace.method = f[5];
    trace.seed = std::stoull(f[6]);
    trace.rows.push_back(r);
  }
  return trace;
}

std::string trace_filename(const std::string& method,
                           const std::string& dataset, std::uint64_t seed) {
  std::ostringstream os;
  os << method << '_' << dataset << '_' << seed << ".csv";
  return os.str();
}

int match_budget(const Trace& reference, std::int64_t samples_per_client,
                 int active_clients) {
  if (reference.rounds() < 1) {
    throw std::invalid_argument("match_budget: empty reference trace");
  }
  if (samples_per_client < 1 || active_clients < 1) {
    throw std::invalid_argument("match_budget: invalid client geometry");
  }
  const auto total = reference.rows.back().grad_evals;
  const double per_client_per_round =
      static_cast<double>(total) /
      (static_cast<double>(reference.rounds()) *
       static_cast<double>(active_clients));
  const long l = std::lround(per_client_per_round /
                             static_cast<double>(samples_per_client));
  return static_cast<int>(std::max(1L, l));
}

}  // namespace fedsim
