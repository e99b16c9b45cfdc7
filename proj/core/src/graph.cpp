#include "streamfid/graph.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "streamfid/error.hpp"

namespace streamfid::graph {

namespace {

constexpr double kPowerTolerance = 1e-8;
constexpr int kPowerMaxIterations = 20'000;
constexpr int kLloydMaxIterations = 500;

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

Matrix orthonormalize(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
}

// Top `r` left/right singular vectors of `a` by subspace iteration on A^T A,
// finished with a Rayleigh-Ritz step.
std::pair<Matrix, Matrix> top_singular_vectors(const SparseMatrix& a, Eigen::Index r,
                                               std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix v(a.cols(), r);
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < r; ++j) v(i, j) = normal(rng);
  }
  v = orthonormalize(v);
  const SparseMatrix at = a.transpose();
  for (int it = 0; it < kPowerMaxIterations; ++it) {
    Matrix next = orthonormalize(at * (a * v));
    // Distance between the two subspaces.
    const double change = (next - v * (v.transpose() * next)).norm();
    v = std::move(next);
    if (change < kPowerTolerance) break;
  }
  Matrix av = a * v;
  Eigen::JacobiSVD<Matrix> svd(av, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), v * svd.matrixV()};
}

// k-means with k-means++ seeding; returns a label per row of `points`.
std::vector<int> kmeans(const Matrix& points, std::size_t k, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<int> labels(n, 0);
  if (k <= 1 || points.cols() == 0) return labels;

  Matrix centers(static_cast<Eigen::Index>(k), points.cols());
  std::uniform_int_distribution<std::size_t> first(0, n - 1);
  centers.row(0) = points.row(static_cast<Eigen::Index>(first(rng)));
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      d2[i] = std::min(d2[i], (points.row(ii) - centers.row(static_cast<Eigen::Index>(c - 1)))
                                  .squaredNorm());
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0) {
      double target = unit(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target <= 0 && d2[i] > 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
  }

  for (int it = 0; it < kLloydMaxIterations; ++it) {
    bool changed = it == 0;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (points.row(static_cast<Eigen::Index>(i)) -
                          centers.row(static_cast<Eigen::Index>(c)))
                             .squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(centers.rows(), centers.cols());
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(labels[i]) += points.row(static_cast<Eigen::Index>(i));
      ++sizes[static_cast<std::size_t>(labels[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(sizes[c]);
      }
    }
  }
  return labels;
}

}  // namespace

std::string user_node(UserId u) { return "u:" + std::to_string(u); }
std::string hashtag_node(const std::string& tag) { return "h:" + tag; }

BipartiteGraph build_bipartite(std::span<const Event> events) {
  std::map<std::pair<UserId, std::string>, std::uint64_t> weights;
  std::unordered_set<std::string_view> seen;
  for (const auto& e : events) {
    seen.clear();
    for (const auto& h : e.hashtags) {
      if (seen.insert(h).second) ++weights[{e.user_id, h}];
    }
  }

  BipartiteGraph g;
  std::set<UserId> users;
  std::set<std::string> tags;
  for (const auto& [key, w] : weights) {
    users.insert(key.first);
    tags.insert(key.second);
  }
  g.users.assign(users.begin(), users.end());
  g.hashtags.assign(tags.begin(), tags.end());
  std::unordered_map<UserId, std::uint32_t> user_index;
  std::unordered_map<std::string, std::uint32_t> tag_index;
  for (std::size_t i = 0; i < g.users.size(); ++i) user_index[g.users[i]] = static_cast<std::uint32_t>(i);
  for (std::size_t i = 0; i < g.hashtags.size(); ++i) tag_index[g.hashtags[i]] = static_cast<std::uint32_t>(i);
  for (const auto& [key, w] : weights) {
    g.edges.push_back({user_index[key.first], tag_index[key.second], w});
  }
  return g;
}

Labels spectral_cocluster(const BipartiteGraph& g, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  if (g.node_count() == 0) throw InvalidArgument("spectral_cocluster: empty graph");
  if (k > g.node_count()) throw InvalidArgument("k exceeds node count");

  const auto nu = static_cast<Eigen::Index>(g.users.size());
  const auto nh = static_cast<Eigen::Index>(g.hashtags.size());
  Eigen::VectorXd du = Eigen::VectorXd::Zero(nu);
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(nh);
  for (const auto& e : g.edges) {
    du(e.user) += static_cast<double>(e.weight);
    dh(e.hashtag) += static_cast<double>(e.weight);
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(g.edges.size());
  for (const auto& e : g.edges) {
    triplets.emplace_back(e.user, e.hashtag,
                          static_cast<double>(e.weight) / std::sqrt(du(e.user) * dh(e.hashtag)));
  }
  SparseMatrix an(nu, nh);
  an.setFromTriplets(triplets.begin(), triplets.end());

  std::mt19937_64 rng(seed);
  const auto needed = static_cast<Eigen::Index>(std::ceil(std::log2(static_cast<double>(k)))) + 1;
  const auto r = std::min({needed, nu, nh});

  Matrix embedding(nu + nh, r);
  if (k > 1) {
    auto [u, v] = top_singular_vectors(an, r, rng);
    embedding.topRows(nu) = du.cwiseSqrt().cwiseInverse().asDiagonal() * u;
    embedding.bottomRows(nh) = dh.cwiseSqrt().cwiseInverse().asDiagonal() * v;
  } else {
    embedding.setZero();
  }
  const auto raw = kmeans(embedding, k, rng);

  // Relabel by first appearance for stable output.
  std::vector<int> remap(k, -1);
  int next = 0;
  Labels labels;
  for (Eigen::Index i = 0; i < nu + nh; ++i) {
    auto& id = remap[static_cast<std::size_t>(raw[static_cast<std::size_t>(i)])];
    if (id < 0) id = next++;
    const auto name = i < nu ? user_node(g.users[static_cast<std::size_t>(i)])
                             : hashtag_node(g.hashtags[static_cast<std::size_t>(i - nu)]);
    labels[name] = id;
  }
  return labels;
}

std::uint64_t FlowMatrix::row_total(std::size_t i) const {
  std::uint64_t t = 0;
  for (auto c : counts.at(i)) t += c;
  return t;
}

FlowMatrix cluster_flow(const Labels& complete, const Labels& sample) {
  std::set<int> row_ids;
  std::set<int> col_ids;
  for (const auto& [n, l] : complete) row_ids.insert(l);
  for (const auto& [n, l] : sample) {
    if (!complete.contains(n)) {
      throw InvalidArgument("entity '" + n + "' labelled in sample but not in complete set");
    }
    col_ids.insert(l);
  }
  const std::vector<int> rows(row_ids.begin(), row_ids.end());
  const std::vector<int> cols(col_ids.begin(), col_ids.end());
  std::map<int, std::size_t> row_pos;
  std::map<int, std::size_t> col_pos;
  for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = i;
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = j;

  std::vector<std::vector<std::uint64_t>> raw(rows.size(),
                                              std::vector<std::uint64_t>(cols.size() + 1, 0));
  for (const auto& [n, l] : complete) {
    auto it = sample.find(n);
    const auto j = it == sample.end() ? cols.size() : col_pos[it->second];
    ++raw[row_pos[l]][j];
  }

  // Greedy diagonal assignment: biggest cell first.
  struct Cell {
    std::uint64_t count;
    std::size_t row;
    std::size_t col;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) cells.push_back({raw[i][j], i, j});
  }
  std::stable_sort(cells.begin(), cells.end(),
                   [](const Cell& a, const Cell& b) { return a.count > b.count; });
  std::vector<std::ptrdiff_t> col_for_row(rows.size(), -1);
  std::vector<bool> col_used(cols.size(), false);
  for (const auto& c : cells) {
    if (col_for_row[c.row] < 0 && !col_used[c.col]) {
      col_for_row[c.row] = static_cast<std::ptrdiff_t>(c.col);
      col_used[c.col] = true;
    }
  }
  std::vector<std::size_t> order;
  for (auto c : col_for_row) {
    if (c >= 0) order.push_back(static_cast<std::size_t>(c));
  }
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (!col_used[j]) order.push_back(j);
  }

  FlowMatrix f;
  for (int r : rows) f.row_labels.push_back(std::to_string(r));
  for (auto j : order) f.col_labels.push_back(std::to_string(cols[j]));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::uint64_t> row;
    for (auto j : order) row.push_back(raw[i][j]);
    row.push_back(raw[i][cols.size()]);
    f.counts.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double total = static_cast<double>(f.row_total(i));
    std::vector<double> ratio;
    for (auto c : f.counts[i]) ratio.push_back(total > 0 ? static_cast<double>(c) / total : 0.0);
    f.ratios.push_back(std::move(ratio));
  }
  return f;
}

RetweetNetwork build_retweet_network(std::span<const Event> events,
                                     const RetweetNetworkOptions& options) {
  std::unordered_map<EventId, UserId> author;
  for (const auto& e : events) {
    if (e.type == EventType::root) author[e.id] = e.user_id;
  }
  RetweetNetwork out;
  std::set<UserId> nodes;
  for (const auto& e : events) {
    const bool counts = e.type == EventType::retweet ||
                        (e.type == EventType::quote && options.quotes_as_retweets) ||
                        (e.type == EventType::reply && options.include_replies);
    if (!counts || !e.root_id) continue;
    auto it = author.find(*e.root_id);
    if (it == author.end()) {
      ++out.unresolved;
      continue;
    }
    ++out.graph.edges[{e.user_id, it->second}];
    nodes.insert(e.user_id);
    nodes.insert(it->second);
  }
  out.graph.nodes.assign(nodes.begin(), nodes.end());
  return out;
}

}  // namespace streamfid::graph
