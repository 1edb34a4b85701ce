#include "support/oracles.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace testsupport {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  const int id = counter.fetch_add(1);
  path_ = (fs::temp_directory_path() /
           ("geoclust_test_" + std::to_string(::getpid()) + "_" + std::to_string(id)))
              .string();
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string TempDir::file(const std::string& name) const {
  return (fs::path(path_) / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string geoclust_bin() {
  const char* bin = std::getenv("GEOCLUST_BIN");
  if (bin == nullptr || *bin == '\0') {
    throw std::runtime_error("GEOCLUST_BIN is not set (run through ctest or export it)");
  }
  return bin;
}

int run_cli(const std::string& args, std::string* output, const std::string& extra_env) {
  static std::atomic<int> counter{0};
  const std::string capture =
      (fs::temp_directory_path() / ("geoclust_cli_out_" + std::to_string(::getpid()) + "_" +
                                    std::to_string(counter.fetch_add(1))))
          .string();
  std::string command;
  if (!extra_env.empty()) command += extra_env + " ";
  command += "'" + geoclust_bin() + "' " + args + " > '" + capture + "' 2>&1";
  const int status = std::system(command.c_str());
  if (output != nullptr) *output = read_file(capture);
  fs::remove(capture);
  if (status == -1) throw std::runtime_error("system() failed for: " + command);
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return 128;
}

namespace {
// Pseudo-inertia of one cluster of leaf indices, straight from the
// definition (full double sum, no recurrence).
double cluster_inertia(const std::vector<std::size_t>& members,
                       const geoclust::DissimilarityMatrix& d, const geoclust::WeightVector& w) {
  double weight = 0.0;
  for (std::size_t i : members) weight += w[i];
  double sum = 0.0;
  for (std::size_t i : members) {
    for (std::size_t j : members) {
      sum += w[i] * w[j] * d(i, j) * d(i, j);
    }
  }
  return sum / (2.0 * weight);
}
}  // namespace

geoclust::MergeTree brute_ward(const geoclust::DissimilarityMatrix& d,
                               const geoclust::WeightVector& w) {
  const std::size_t n = d.size();
  struct Cluster {
    int node;
    std::vector<std::size_t> members;
    double inertia;
  };
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < n; ++i) {
    clusters.push_back({static_cast<int>(i), {i}, 0.0});
  }
  geoclust::MergeTree tree;
  tree.leaf_weights = w;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    // Pass 1: the global minimum increase.
    std::vector<std::vector<double>> increase(clusters.size());
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      increase[a].assign(clusters.size(), 0.0);
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        std::vector<std::size_t> merged = clusters[a].members;
        merged.insert(merged.end(), clusters[b].members.begin(), clusters[b].members.end());
        increase[a][b] =
            cluster_inertia(merged, d, w) - clusters[a].inertia - clusters[b].inertia;
        if (increase[a][b] < best) best = increase[a][b];
      }
    }
    // Pass 2: among candidates within the tie band, the lexicographically
    // smallest (min node id, max node id).
    int best_lo = -1, best_hi = -1;
    for (std::size_t a = 0; a < clusters.size(); ++a) {
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        if (increase[a][b] > best + 1e-12) continue;
        const int lo = std::min(clusters[a].node, clusters[b].node);
        const int hi = std::max(clusters[a].node, clusters[b].node);
        if (best_lo == -1 || lo < best_lo || (lo == best_lo && hi < best_hi)) {
          best_lo = lo;
          best_hi = hi;
          bi = a;
          bj = b;
        }
      }
    }
    Cluster merged;
    merged.node = static_cast<int>(n + t);
    merged.members = clusters[bi].members;
    merged.members.insert(merged.members.end(), clusters[bj].members.begin(),
                          clusters[bj].members.end());
    merged.inertia = cluster_inertia(merged.members, d, w);
    geoclust::MergeRecord rec;
    rec.left = best_lo;
    rec.right = best_hi;
    rec.height = merged.inertia - clusters[bi].inertia - clusters[bj].inertia;
    double mw = 0.0;
    for (std::size_t i : merged.members) mw += w[i];
    rec.merged_weight = mw;
    tree.merges.push_back(rec);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
    clusters[bi] = std::move(merged);
  }
  return tree;
}

namespace {
double dtw_paths(const std::vector<double>& x, const std::vector<double>& y, std::size_t i,
                 std::size_t j) {
  const double cost = std::abs(x[i] - y[j]);
  if (i == 0 && j == 0) return cost;
  double best = std::numeric_limits<double>::infinity();
  if (i > 0 && j > 0) best = std::min(best, dtw_paths(x, y, i - 1, j - 1));
  if (i > 0) best = std::min(best, dtw_paths(x, y, i - 1, j));
  if (j > 0) best = std::min(best, dtw_paths(x, y, i, j - 1));
  return cost + best;
}
}  // namespace

double brute_dtw(const geoclust::TimeSeries& x, const geoclust::TimeSeries& y) {
  return dtw_paths(x.values, y.values, x.values.size() - 1, y.values.size() - 1);
}

double adjusted_rand(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::runtime_error("adjusted_rand: size mismatch");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> cell;
  std::map<int, double> row, col;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cell[{a[i], b[i]}] += 1.0;
    row[a[i]] += 1.0;
    col[b[i]] += 1.0;
  }
  const auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, row_sum = 0.0, col_sum = 0.0;
  for (const auto& kv : cell) index += comb2(kv.second);
  for (const auto& kv : row) row_sum += comb2(kv.second);
  for (const auto& kv : col) col_sum += comb2(kv.second);
  const double expected = row_sum * col_sum / comb2(n);
  const double max_index = 0.5 * (row_sum + col_sum);
  if (max_index == expected) return 1.0;  // both labelings trivial
  return (index - expected) / (max_index - expected);
}

double direct_within(const std::vector<int>& assignment,
                     const geoclust::DissimilarityMatrix& d, const geoclust::WeightVector& w) {
  std::map<int, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    clusters[assignment[i]].push_back(i);
  }
  double total = 0.0;
  for (const auto& [label, members] : clusters) total += cluster_inertia(members, d, w);
  return total;
}

}  // namespace testsupport
