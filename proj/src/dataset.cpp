#include "fedsim/dataset.hpp"

#include <stdexcept>

namespace fedsim {

void ClientDataset::validate() const {
  if (features.rows() < 1) {
    throw std::invalid_argument("ClientDataset: needs at least one sample");
  }
  if (labels.size() != features.rows()) {
    throw std::invalid_argument("ClientDataset: label count != row count");
  }
  for (Eigen::Index j = 0; j < labels.size(); ++j) {
    if (labels[j] != 0.0 && labels[j] != 1.0) {
      throw std::invalid_argument("ClientDataset: labels must be 0 or 1");
    }
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("ClientDataset: non-finite feature");
  }
}

Eigen::Index FederatedDataset::total_rows() const {
  Eigen::Index n = 0;
  for (const auto& c : clients) n += c.rows();
  return n;
}

void FederatedDataset::validate() const {
  if (clients.empty()) {
    throw std::invalid_argument("FederatedDataset: no clients");
  }
  std::vector<bool> seen;
  for (const auto& c : clients) {
    c.validate();
    if (c.dim() != dim) {
      throw std::invalid_argument("FederatedDataset: inconsistent dimension");
    }
    if (c.client_id < 0) {
      throw std::invalid_argument("FederatedDataset: negative client id");
    }
    if (static_cast<size_t>(c.client_id) >= seen.size()) {
      seen.resize(c.client_id + 1, false);
    }
    if (seen[c.client_id]) {
      throw std::invalid_argument("FederatedDataset: duplicate client id");
    }
    seen[c.client_id] = true;
  }
}

}  // namespace fedsim
