#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedsim/data_io.hpp"
#include "test_helpers.hpp"

using namespace fedsim;
using namespace fedsim::testing;

TEST_CASE("libsvm parsing basics") {
  std::istringstream in("+1 1:0.5 3:1\n-1\n");
  const auto [features, labels] = parse_libsvm(in);
  REQUIRE(features.rows() == 2);
  REQUIRE(features.cols() == 3);
  CHECK(features(0, 0) == 0.5);
  CHECK(features(0, 1) == 0.0);
  CHECK(features(0, 2) == 1.0);
  CHECK(labels[0] == 1.0);
  CHECK(features.row(1).norm() == 0.0);
  CHECK(labels[1] == 0.0);
}

TEST_CASE("libsvm tolerates blanks and comments, rejects malformed input") {
  std::istringstream ok("\n# full comment line\n+1 2:3.5 # trailing\n");
  const auto [features, labels] = parse_libsvm(ok);
  CHECK(features.rows() == 1);
  CHECK(features(0, 1) == 3.5);

  std::istringstream bad_label("2 1:1\n");
  CHECK_THROWS_AS(parse_libsvm(bad_label), std::invalid_argument);
  std::istringstream bad_token("+1 1:\n");
  CHECK_THROWS_AS(parse_libsvm(bad_token), std::invalid_argument);
  std::istringstream non_monotone("+1 3:1 2:1\n");
  CHECK_THROWS_AS(parse_libsvm(non_monotone), std::invalid_argument);
  std::istringstream zero_index("+1 0:1\n");
  CHECK_THROWS_AS(parse_libsvm(zero_index), std::invalid_argument);
  std::istringstream too_wide("+1 9:1\n");
  CHECK_THROWS_AS(parse_libsvm(too_wide, 4), std::invalid_argument);
}

TEST_CASE("parser round-trip is stable") {
  std::istringstream in("+1 1:0.25 4:-2\n-1 2:1e-3\n+1 3:7\n");
  const auto [f1, l1] = parse_libsvm(in);
  std::ostringstream formatted;
  format_libsvm(f1, l1, formatted);
  std::istringstream again(formatted.str());
  const auto [f2, l2] = parse_libsvm(again, f1.cols());
  CHECK((f1 - f2).norm() == 0.0);
  CHECK((l1 - l2).norm() == 0.0);
}

TEST_CASE("parsed counts match an independent scan") {
  // synthetic libsvm text with known row/col/nnz counts
  Rng rng(7);
  std::ostringstream text;
  int expected_nnz = 0;
  const int rows = 100, width = 12;
  for (int i = 0; i < rows; ++i) {
    text << (i % 2 ? "+1" : "-1");
    for (int j = 1; j <= width; ++j) {
      if (rng.uniform() < 0.3) {
        text << ' ' << j << ':' << 1;
        ++expected_nnz;
      }
    }
    text << '\n';
  }
  std::istringstream in(text.str());
  const auto [features, labels] = parse_libsvm(in, width);
  CHECK(features.rows() == rows);
  CHECK(features.cols() == width);
  CHECK(static_cast<int>((features.array() != 0.0).count()) == expected_nnz);
}

TEST_CASE("partition covers every retained row exactly once") {
  const ClientDataset whole = random_instance(101, 5, 31);
  const FederatedDataset ds = partition(whole.features, whole.labels, 7, 0.5,
                                        9);
  CHECK(ds.clients.size() == 7);
  Eigen::Index total = 0;
  Eigen::Index min_rows = 1 << 20, max_rows = 0;
  double row_sum = 0.0;
  for (const auto& c : ds.clients) {
    total += c.rows();
    min_rows = std::min(min_rows, c.rows());
    max_rows = std::max(max_rows, c.rows());
    row_sum += c.features.sum();
  }
  CHECK(total == 51);  // round(0.5 * 101)
  CHECK(max_rows - min_rows <= 1);

  // no duplication: each kept row's feature sum appears exactly once in the
  // source (rows are continuous random vectors, ties have measure zero)
  std::vector<double> source_sums;
  for (Eigen::Index r = 0; r < whole.features.rows(); ++r) {
    source_sums.push_back(whole.features.row(r).sum());
  }
  std::sort(source_sums.begin(), source_sums.end());
  std::vector<double> kept_sums;
  for (const auto& c : ds.clients) {
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      kept_sums.push_back(c.features.row(r).sum());
    }
  }
  std::sort(kept_sums.begin(), kept_sums.end());
  CHECK(std::unique(kept_sums.begin(), kept_sums.end()) == kept_sums.end());
  CHECK(std::includes(source_sums.begin(), source_sums.end(),
                      kept_sums.begin(), kept_sums.end()));
}

TEST_CASE("partition trivia, determinism, and errors") {
  const ClientDataset whole = random_instance(20, 3, 5);
  const FederatedDataset one = partition(whole.features, whole.labels, 1, 1.0,
                                         0);
  CHECK(one.clients.size() == 1);
  CHECK(one.clients[0].rows() == 20);

  const FederatedDataset a = partition(whole.features, whole.labels, 4, 0.6, 8);
  const FederatedDataset b = partition(whole.features, whole.labels, 4, 0.6, 8);
  for (size_t c = 0; c < a.clients.size(); ++c) {
    CHECK((a.clients[c].features - b.clients[c].features).norm() == 0.0);
    CHECK((a.clients[c].labels - b.clients[c].labels).norm() == 0.0);
  }

  CHECK_THROWS_AS(partition(whole.features, whole.labels, 30, 0.5, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(partition(whole.features, whole.labels, 2, 0.0, 0),
                  std::invalid_argument);
}

TEST_CASE("iid synthesis draws all clients from identical distributions") {
  SyntheticSpec spec;
  spec.d = 3;
  spec.n_per_client = 10;
  spec.clients = 4;
  spec.heterogeneous = false;
  spec.seed = 17;
  const FederatedDataset ds = synth_generate(spec);
  ds.validate();
  CHECK(ds.clients.size() == 4);
  for (const auto& c : ds.clients) {
    CHECK(c.rows() == 10);
    CHECK(c.labels.head(5).sum() == 0.0);
    CHECK(c.labels.tail(5).sum() == 5.0);
  }
  // determinism
  const FederatedDataset again = synth_generate(spec);
  CHECK((ds.clients[2].features - again.clients[2].features).norm() == 0.0);
}

TEST_CASE("synthetic moments match the requested factors") {
  // d = 1: class variance should be a^2; means should be mu + bias
  SyntheticSpec spec;
  spec.d = 1;
  spec.n_per_client = 4000;
  spec.clients = 1;
  spec.heterogeneous = true;
  spec.bias_range = 10.0;
  spec.seed = 23;
  const FederatedDataset ds = synth_generate(spec);
  const auto& c = ds.clients[0];
  const int n0 = 2000;

  const double mean0 = c.features.col(0).head(n0).mean();
  const double mean1 = c.features.col(0).tail(n0).mean();
  Eigen::ArrayXd class0 = c.features.col(0).head(n0).array() - mean0;
  const double var0 = (class0 * class0).sum() / (n0 - 1);
  const double sd = std::sqrt(var0);

  // class separation: mu1 - mu0 = 1 regardless of the shared bias; the two
  // class factors differ, so allow a generous multiple of the standard error
  CHECK(std::abs((mean1 - mean0) - 1.0) < 6.0 * sd / std::sqrt(n0) + 0.1);
  // bias is shared by both classes and bounded by the range
  CHECK(std::abs(mean0) <= 10.0 + 4.0 * sd / std::sqrt(n0) + 1.0);
  CHECK(var0 > 0.0);
}

TEST_CASE("cache round-trips exactly and rejects corruption") {
  SyntheticSpec spec;
  spec.d = 4;
  spec.n_per_client = 6;
  spec.clients = 3;
  spec.seed = 9;
  const FederatedDataset ds = synth_generate(spec);

  const std::string path =
      (std::filesystem::temp_directory_path() / "fedsim_cache_test.bin")
          .string();
  save_cache(ds, path);
  const FederatedDataset loaded = load_cache(path);
  CHECK(loaded.dim == ds.dim);
  REQUIRE(loaded.clients.size() == ds.clients.size());
  for (size_t c = 0; c < ds.clients.size(); ++c) {
    CHECK(loaded.clients[c].client_id == ds.clients[c].client_id);
    CHECK((loaded.clients[c].features - ds.clients[c].features).norm() == 0.0);
    CHECK((loaded.clients[c].labels - ds.clients[c].labels).norm() == 0.0);
  }

  // flip one payload byte: checksum must catch it
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    char byte = 0;
    f.read(&byte, 1);
    f.seekp(40);
    byte ^= 0x10;
    f.write(&byte, 1);
  }
  CHECK_THROWS_AS(load_cache(path), std::runtime_error);
  std::remove(path.c_str());

  FederatedDataset empty;
  CHECK_THROWS_AS(save_cache(empty, path), std::invalid_argument);
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec;
  spec.n_per_client = 1;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.d = 0;
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
  spec = {};
  spec.mu0 = Vector::Zero(3);  // d defaults to 10
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}
