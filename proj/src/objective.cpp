#include "fedsim/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

namespace {

void check_dim(const RegularizedObjective& obj, const Vector& v,
               const char* what) {
  if (v.size() != obj.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

void check_finite(const Vector& w, const char* what) {
  if (!w.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite parameters");
  }
}

// log(1 + e^z), branch-stable for large |z|
inline double softplus(double z) {
  return std::fmax(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// sigma(z) * (1 - sigma(z)) without cancellation
inline double sigmoid_slope(double z) {
  const double e = std::exp(-std::fabs(z));
  const double d = 1.0 + e;
  return e / (d * d);
}

}  // namespace

RegularizedObjective::RegularizedObjective(const ClientDataset& data,
                                           double gamma)
    : data_(&data), gamma_(gamma) {
  if (gamma < 0.0) {
    throw std::invalid_argument("RegularizedObjective: gamma must be >= 0");
  }
}

double local_loss(const RegularizedObjective& obj, const Vector& w) {
  check_dim(obj, w, "local_loss");
  check_finite(w, "local_loss");
  const auto& d = obj.data();
  const Vector z = d.features * w;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    sum += softplus(z[j]) - d.labels[j] * z[j];
  }
  return sum / static_cast<double>(d.rows()) +
         0.5 * obj.gamma() * w.squaredNorm();
}

Vector local_gradient(const RegularizedObjective& obj, const Vector& w) {
  check_dim(obj, w, "local_gradient");
  check_finite(w, "local_gradient");
  const auto& d = obj.data();
  const Vector z = d.features * w;
  Vector residual(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    residual[j] = sigmoid(z[j]) - d.labels[j];
  }
  return d.features.transpose() * residual / static_cast<double>(d.rows()) +
         obj.gamma() * w;
}

Vector hessian_vector_product(const RegularizedObjective& obj, const Vector& w,
                              const Vector& v, CostCounters& counters) {
  check_dim(obj, w, "hessian_vector_product");
  check_dim(obj, v, "hessian_vector_product");
  check_finite(w, "hessian_vector_product");
  const auto& d = obj.data();
  counters.grad_evals += d.rows();
  const Vector z = d.features * w;
  Vector scaled = d.features * v;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    scaled[j] *= sigmoid_slope(z[j]);
  }
  return d.features.transpose() * scaled / static_cast<double>(d.rows()) +
         obj.gamma() * v;
}

Matrix dense_hessian(const RegularizedObjective& obj, const Vector& w,
                     Eigen::Index dense_cap) {
  check_dim(obj, w, "dense_hessian");
  check_finite(w, "dense_hessian");
  if (obj.dim() > dense_cap) {
    throw std::invalid_argument("dense_hessian: dimension exceeds cap");
  }
  const auto& d = obj.data();
  const Vector z = d.features * w;
  Matrix scaled = d.features;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    scaled.row(j) *= sigmoid_slope(z[j]);
  }
  Matrix h = d.features.transpose() * scaled / static_cast<double>(d.rows());
  h.diagonal().array() += obj.gamma();
  // enforce exact symmetry against round-off
  return 0.5 * (h + h.transpose());
}

double aggregate_loss(std::span<const RegularizedObjective> objs,
                      const Vector& w) {
  if (objs.empty()) {
    throw std::invalid_argument("aggregate_loss: empty client set");
  }
  double sum = 0.0;
  for (const auto& obj : objs) sum += local_loss(obj, w);
  return sum / static_cast<double>(objs.size());
}

Vector aggregate_gradient(std::span<const RegularizedObjective> objs,
                          const Vector& w) {
  if (objs.empty()) {
    throw std::invalid_argument("aggregate_gradient: empty client set");
  }
  Vector sum = Vector::Zero(w.size());
  for (const auto& obj : objs) sum += local_gradient(obj, w);
  return sum / static_cast<double>(objs.size());
}

}  // namespace fedsim
