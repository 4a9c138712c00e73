#pragma once

#include <span>

#include "fedsim/counters.hpp"
#include "fedsim/dataset.hpp"

namespace fedsim {

// l2-regularized logistic regression on one client:
//   f_i(w) = (1/n_i) sum_j [softplus(x_j'w) - y_j x_j'w] + (gamma/2) |w|^2
// Non-owning view of the client's data.
class RegularizedObjective {
 public:
  RegularizedObjective(const ClientDataset& data, double gamma);

  const ClientDataset& data() const { return *data_; }
  double gamma() const { return gamma_; }
  Eigen::Index dim() const { return data_->dim(); }
  Eigen::Index sample_count() const { return data_->rows(); }

 private:
  const ClientDataset* data_;
  double gamma_;
};

double local_loss(const RegularizedObjective& obj, const Vector& w);

Vector local_gradient(const RegularizedObjective& obj, const Vector& w);

// H_i v without forming H_i; charges n_i gradient-equivalents to counters.
Vector hessian_vector_product(const RegularizedObjective& obj, const Vector& w,
                              const Vector& v, CostCounters& counters);

// Test/analysis oracle only; refuses d beyond the cap.
Matrix dense_hessian(const RegularizedObjective& obj, const Vector& w,
                     Eigen::Index dense_cap = 512);

// Unweighted means over an active client set.
double aggregate_loss(std::span<const RegularizedObjective> objs,
                      const Vector& w);
Vector aggregate_gradient(std::span<const RegularizedObjective> objs,
                          const Vector& w);

}  // namespace fedsim
