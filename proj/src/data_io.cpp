#include "fedsim/data_io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

struct SparseRow {
  std::vector<std::pair<Eigen::Index, double>> entries;  // 0-based
  double label = 0.0;
};

double parse_label(const std::string& tok, int line_no) {
  if (tok == "+1" || tok == "1") return 1.0;
  if (tok == "-1" || tok == "0") return 0.0;
  throw std::invalid_argument("parse_libsvm: unknown label '" + tok +
                              "' on line " + std::to_string(line_no));
}

}  // namespace

std::pair<Matrix, Vector> parse_libsvm(std::istream& in,
                                       Eigen::Index width_override) {
  std::vector<SparseRow> rows;
  Eigen::Index max_index = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream is(line);
    std::string tok;
    if (!(is >> tok)) continue;  // blank line

    SparseRow row;
    row.label = parse_label(tok, line_no);
    Eigen::Index prev_index = 0;
    while (is >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tok.size()) {
        throw std::invalid_argument("parse_libsvm: malformed token '" + tok +
                                    "' on line " + std::to_string(line_no));
      }
      Eigen::Index index = 0;
      const char* first = tok.data();
      const auto [ptr, ec] = std::from_chars(first, first + colon, index);
      if (ec != std::errc{} || ptr != first + colon || index < 1) {
        throw std::invalid_argument("parse_libsvm: bad feature index in '" +
                                    tok + "' on line " +
                                    std::to_string(line_no));
      }
      if (index <= prev_index) {
        throw std::invalid_argument(
            "parse_libsvm: indices not strictly increasing on line " +
            std::to_string(line_no));
      }
      prev_index = index;
      size_t consumed = 0;
      double value = 0.0;
      try {
        value = std::stod(tok.substr(colon + 1), &consumed);
      } catch (const std::exception&) {
        throw std::invalid_argument("parse_libsvm: bad feature value in '" +
                                    tok + "' on line " +
                                    std::to_string(line_no));
      }
      if (consumed != tok.size() - colon - 1) {
        throw std::invalid_argument("parse_libsvm: trailing garbage in '" +
                                    tok + "' on line " +
                                    std::to_string(line_no));
      }
      row.entries.emplace_back(index - 1, value);
      max_index = std::max(max_index, index);
    }
    rows.push_back(std::move(row));
  }

  const Eigen::Index width =
      width_override > 0 ? width_override : max_index;
  if (width_override > 0 && max_index > width_override) {
    throw std::invalid_argument(
        "parse_libsvm: feature index exceeds width override");
  }
  Matrix features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), width);
  Vector labels(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    labels[static_cast<Eigen::Index>(i)] = rows[i].label;
    for (const auto& [j, v] : rows[i].entries) {
      features(static_cast<Eigen::Index>(i), j) = v;
    }
  }
  return {std::move(features), std::move(labels)};
}

std::pair<Matrix, Vector> parse_libsvm_file(const std::string& path,
                                            Eigen::Index width_override) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("parse_libsvm_file: cannot open " + path);
  }
  return parse_libsvm(in, width_override);
}

void format_libsvm(const Matrix& features, const Vector& labels,
                   std::ostream& out) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out << (labels[i] == 1.0 ? "+1" : "-1");
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      if (features(i, j) != 0.0) {
        out << ' ' << (j + 1) << ':' << features(i, j);
      }
    }
    out << '\n';
  }
}

FederatedDataset partition(const Matrix& features, const Vector& labels, int k,
                           double fraction, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("partition: k must be >= 1");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument("partition: fraction must be in (0, 1]");
  }
  const int total = static_cast<int>(features.rows());
  const int keep = std::max(1, static_cast<int>(
                                   std::lround(fraction * total)));
  if (keep < k) {
    throw std::invalid_argument("partition: too few rows for client count");
  }

  Rng rng(derive_seed(seed, 0x70617274u));
  // subsample-then-shuffle in one pass: a k-out-of-n draw is already in
  // random order before the final sort, so reshuffle the kept ids instead
  std::vector<int> kept = sample_without_replacement(total, keep, rng);
  for (int i = static_cast<int>(kept.size()) - 1; i > 0; --i) {
    std::swap(kept[i], kept[rng.uniform_int(i + 1)]);
  }

  FederatedDataset ds;
  ds.dim = features.cols();
  ds.provenance = "partition";
  const int base = keep / k;
  const int extra = keep % k;  // first `extra` clients get one more row
  int cursor = 0;
  for (int c = 0; c < k; ++c) {
    const int rows = base + (c < extra ? 1 : 0);
    ClientDataset client;
    client.client_id = c;
    client.features.resize(rows, features.cols());
    client.labels.resize(rows);
    for (int r = 0; r < rows; ++r) {
      client.features.row(r) = features.row(kept[cursor]);
      client.labels[r] = labels[kept[cursor]];
      ++cursor;
    }
    ds.clients.push_back(std::move(client));
  }
  return ds;
}

void SyntheticSpec::validate() const {
  if (d < 1) throw std::invalid_argument("SyntheticSpec: d must be >= 1");
  if (n_per_client < 2) {
    throw std::invalid_argument(
        "SyntheticSpec: n_per_client must be >= 2 (both classes present)");
  }
  if (clients < 1) {
    throw std::invalid_argument("SyntheticSpec: clients must be >= 1");
  }
  if (bias_range < 0.0) {
    throw std::invalid_argument("SyntheticSpec: bias_range must be >= 0");
  }
  if (mu0.size() != 0 && mu0.size() != d) {
    throw std::invalid_argument("SyntheticSpec: mu0 has wrong dimension");
  }
  if (mu1.size() != 0 && mu1.size() != d) {
    throw std::invalid_argument("SyntheticSpec: mu1 has wrong dimension");
  }
}

FederatedDataset synth_generate(const SyntheticSpec& spec) {
  spec.validate();
  const Vector mu0 = spec.mu0.size() ? spec.mu0 : Vector::Zero(spec.d);
  const Vector mu1 = spec.mu1.size() ? spec.mu1 : Vector::Ones(spec.d);

  // shared covariance factors for the i.i.d. mode, one per class
  Matrix shared_factor0, shared_factor1;
  {
    Rng rng(derive_seed(spec.seed, 0x73686172u));
    shared_factor0.resize(spec.d, spec.d);
    shared_factor1.resize(spec.d, spec.d);
    for (Eigen::Index r = 0; r < spec.d; ++r)
      for (Eigen::Index c = 0; c < spec.d; ++c)
        shared_factor0(r, c) = rng.uniform();
    for (Eigen::Index r = 0; r < spec.d; ++r)
      for (Eigen::Index c = 0; c < spec.d; ++c)
        shared_factor1(r, c) = rng.uniform();
  }

  FederatedDataset ds;
  ds.dim = spec.d;
  ds.provenance = spec.heterogeneous ? "synthetic-het" : "synthetic-iid";
  const int n0 = spec.n_per_client / 2;
  const int n1 = spec.n_per_client - n0;

  for (int i = 0; i < spec.clients; ++i) {
    Rng rng(derive_seed(spec.seed, 0x636c6960u + 1, static_cast<uint64_t>(i)));
    Vector bias = Vector::Zero(spec.d);
    Matrix factor0 = shared_factor0;
    Matrix factor1 = shared_factor1;
    if (spec.heterogeneous) {
      for (Eigen::Index j = 0; j < spec.d; ++j) {
        bias[j] = rng.uniform(-spec.bias_range, spec.bias_range);
      }
      for (Eigen::Index r = 0; r < spec.d; ++r)
        for (Eigen::Index c = 0; c < spec.d; ++c)
          factor0(r, c) = rng.uniform();
      for (Eigen::Index r = 0; r < spec.d; ++r)
        for (Eigen::Index c = 0; c < spec.d; ++c)
          factor1(r, c) = rng.uniform();
    }

    ClientDataset client;
    client.client_id = i;
    client.features.resize(spec.n_per_client, spec.d);
    client.labels.resize(spec.n_per_client);
    Vector z(spec.d);
    for (int s = 0; s < spec.n_per_client; ++s) {
      const bool cls1 = s >= n0;
      for (Eigen::Index j = 0; j < spec.d; ++j) z[j] = rng.normal();
      const Matrix& a = cls1 ? factor1 : factor0;
      client.features.row(s) =
          ((cls1 ? mu1 : mu0) + bias + a.transpose() * z).transpose();
      client.labels[s] = cls1 ? 1.0 : 0.0;
    }
    ds.clients.push_back(std::move(client));
  }
  return ds;
}

namespace {

constexpr char kCacheMagic[4] = {'F', 'D', 'S', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

std::uint64_t fnv1a(const unsigned char* data, size_t len,
                    std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (size_t i = 0; i < len; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

template <typename T>
void write_pod(std::ostream& out, const T& v, std::uint64_t& hash) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  hash = fnv1a(reinterpret_cast<const unsigned char*>(&v), sizeof(v), hash);
}

template <typename T>
void read_pod(std::istream& in, T& v, std::uint64_t& hash) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("dataset cache: truncated file");
  hash = fnv1a(reinterpret_cast<const unsigned char*>(&v), sizeof(v), hash);
}

}  // namespace

void save_cache(const FederatedDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_cache: cannot open " + path);
  out.write(kCacheMagic, sizeof(kCacheMagic));

  std::uint64_t hash = 0xcbf29ce484222325ULL;
  write_pod(out, kCacheVersion, hash);
  write_pod(out, static_cast<std::int64_t>(ds.dim), hash);
  write_pod(out, static_cast<std::int64_t>(ds.clients.size()), hash);
  for (const auto& c : ds.clients) {
    write_pod(out, static_cast<std::int64_t>(c.client_id), hash);
    write_pod(out, static_cast<std::int64_t>(c.rows()), hash);
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      for (Eigen::Index j = 0; j < c.dim(); ++j) {
        write_pod(out, c.features(r, j), hash);
      }
    }
    for (Eigen::Index r = 0; r < c.rows(); ++r) {
      write_pod(out, static_cast<unsigned char>(c.labels[r]), hash);
    }
  }
  out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
  if (!out) throw std::runtime_error("save_cache: write failed");
}

FederatedDataset load_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_cache: cannot open " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("load_cache: bad magic");
  }

  std::uint64_t hash = 0xcbf29ce484222325ULL;
  std::uint32_t version = 0;
  read_pod(in, version, hash);
  if (version != kCacheVersion) {
    throw std::runtime_error("load_cache: unsupported version " +
                             std::to_string(version));
  }
  std::int64_t dim = 0, n_clients = 0;
  read_pod(in, dim, hash);
  read_pod(in, n_clients, hash);
  if (dim < 1 || n_clients < 1) {
    throw std::runtime_error("load_cache: corrupt header");
  }

  FederatedDataset ds;
  ds.dim = dim;
  ds.provenance = "cache:" + path;
  for (std::int64_t c = 0; c < n_clients; ++c) {
    std::int64_t id = 0, rows = 0;
    read_pod(in, id, hash);
    read_pod(in, rows, hash);
    if (rows < 1) throw std::runtime_error("load_cache: corrupt row count");
    ClientDataset client;
    client.client_id = static_cast<int>(id);
    client.features.resize(rows, dim);
    client.labels.resize(rows);
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t j = 0; j < dim; ++j) {
        read_pod(in, client.features(r, j), hash);
      }
    }
    for (std::int64_t r = 0; r < rows; ++r) {
      unsigned char label = 0;
      read_pod(in, label, hash);
      client.labels[r] = label;
    }
    ds.clients.push_back(std::move(client));
  }
  std::uint64_t stored = 0;
  in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (!in || stored != hash) {
    throw std::runtime_error("load_cache: checksum mismatch");
  }
  ds.validate();
  return ds;
}

}  // namespace fedsim
