#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::graph {

// User-hashtag affiliation graph. Nodes are named "u:<user id>" and
// "h:<hashtag>" so labelings of different graphs can be compared by name.
struct BipartiteGraph {
  struct Edge {
    std::uint32_t user;     // index into users
    std::uint32_t hashtag;  // index into hashtags
    std::uint64_t weight;   // events by the user carrying the hashtag
  };

  std::vector<UserId> users;           // sorted
  std::vector<std::string> hashtags;   // sorted
  std::vector<Edge> edges;             // sorted by (user, hashtag)

  std::size_t node_count() const noexcept { return users.size() + hashtags.size(); }
  bool empty() const noexcept { return edges.empty(); }
};

std::string user_node(UserId u);
std::string hashtag_node(const std::string& tag);

BipartiteGraph build_bipartite(std::span<const Event> events);

using Labels = std::map<std::string, int>;

// Bipartite spectral co-clustering: users and hashtags are embedded jointly
// through the top ceil(log2 k) + 1 singular vectors of D_u^-1/2 W D_h^-1/2
// (subspace power iteration) and clustered by k-means with k-means++ seeding.
// Cluster ids are 0..k-1 in order of first appearance (users, then hashtags).
// Deterministic per seed. Throws InvalidArgument if k exceeds the node count.
Labels spectral_cocluster(const BipartiteGraph& g, std::size_t k, std::uint64_t seed);

// Contingency table of labelled entities between two labelings. Row i is
// row_labels[i]; column j < cols is col_labels[j]; the last column counts
// entities absent from the second labeling.
struct FlowMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<std::uint64_t>> counts;  // rows x (cols + 1)
  std::vector<std::vector<double>> ratios;         // counts / row total

  std::uint64_t row_total(std::size_t i) const;
};

// Columns are reordered greedily (largest cell first) to maximize the diagonal.
// Throws InvalidArgument if the sample labels an entity the complete set lacks.
FlowMatrix cluster_flow(const Labels& complete, const Labels& sample);

// User-user retweet network, retweeter -> retweeted author.
struct Digraph {
  std::vector<UserId> nodes;                                   // sorted
  std::map<std::pair<UserId, UserId>, std::uint64_t> edges;    // weight >= 1

  std::size_t node_count() const noexcept { return nodes.size(); }
};

struct RetweetNetworkOptions {
  bool quotes_as_retweets = true;
  bool include_replies = false;
};

struct RetweetNetwork {
  Digraph graph;
  std::uint64_t unresolved = 0;  // retweets whose root is not in the input
};

RetweetNetwork build_retweet_network(std::span<const Event> events,
                                     const RetweetNetworkOptions& options = {});

}  // namespace streamfid::graph
