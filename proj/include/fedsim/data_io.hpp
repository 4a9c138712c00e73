#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "fedsim/dataset.hpp"

namespace fedsim {

// LibSVM text format: "<label> <index>:<value> ...", 1-based strictly
// increasing indices per line, labels -1/+1 (or 0/1) mapped to {0,1}.
// Width defaults to the largest index seen; width_override forces it.
// Blank lines and '#' comments are tolerated.
std::pair<Matrix, Vector> parse_libsvm(std::istream& in,
                                       Eigen::Index width_override = 0);
std::pair<Matrix, Vector> parse_libsvm_file(const std::string& path,
                                            Eigen::Index width_override = 0);

// Inverse of the parser (zeros omitted); used for round-trip checks.
void format_libsvm(const Matrix& features, const Vector& labels,
                   std::ostream& out);

// Uniformly subsample `fraction` of all rows, shuffle, and split as evenly as
// possible (row counts differ by at most one) into k clients.
FederatedDataset partition(const Matrix& features, const Vector& labels, int k,
                           double fraction, std::uint64_t seed);

// Two-class Gaussian generator; per client i, class j samples
// x = mu_j + b_i + A_{i,j}^T z with z standard normal, so cov = A^T A.
struct SyntheticSpec {
  Eigen::Index d = 10;
  int n_per_client = 20;
  int clients = 50;
  Vector mu0;               // defaults to zeros(d)
  Vector mu1;               // defaults to ones(d)
  double bias_range = 100;  // b_i ~ U(-B, B)^d in heterogeneous mode
  bool heterogeneous = false;
  std::uint64_t seed = 0;

  void validate() const;
};

FederatedDataset synth_generate(const SyntheticSpec& spec);

// Binary dataset cache with magic, version, and checksum.
void save_cache(const FederatedDataset& ds, const std::string& path);
FederatedDataset load_cache(const std::string& path);

}  // namespace fedsim
