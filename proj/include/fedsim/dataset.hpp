#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace fedsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Feature rows and binary {0,1} labels owned by one client.
struct ClientDataset {
  Matrix features;  // n_i x d
  Vector labels;    // n_i entries, each 0 or 1
  int client_id = 0;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  // throws std::invalid_argument on empty data or labels outside {0,1}
  void validate() const;
};

struct FederatedDataset {
  std::vector<ClientDataset> clients;
  Eigen::Index dim = 0;
  std::string provenance;

  Eigen::Index total_rows() const;
  void validate() const;
};

}  // namespace fedsim
