#include "streamfid/bowtie.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

#include "streamfid/error.hpp"

namespace streamfid::graph {

namespace {

constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();

using Adjacency = std::vector<std::vector<std::uint32_t>>;

std::vector<bool> reach(const Adjacency& adj, const std::vector<std::uint32_t>& sources) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<std::uint32_t> stack;
  for (auto s : sources) {
    if (!seen[s]) {
      seen[s] = true;
      stack.push_back(s);
    }
  }
  while (!stack.empty()) {
    const auto v = stack.back();
    stack.pop_back();
    for (auto w : adj[v]) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

std::string_view to_string(Component c) noexcept {
  switch (c) {
    case Component::lscc:
      return "LSCC";
    case Component::in:
      return "IN";
    case Component::out:
      return "OUT";
    case Component::tubes:
      return "Tubes";
    case Component::tendrils:
      return "Tendrils";
    case Component::disconnected:
      return "Disconnected";
  }
  return "Disconnected";
}

SccResult strongly_connected_components(const Adjacency& adj) {
  const auto n = static_cast<std::uint32_t>(adj.size());
  SccResult r;
  r.comp.assign(n, kUnvisited);
  std::vector<std::uint32_t> index(n, kUnvisited);
  std::vector<std::uint32_t> low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::uint32_t> stack;
  // Explicit DFS frames: (vertex, next edge position).
  std::vector<std::pair<std::uint32_t, std::size_t>> frames;
  std::uint32_t counter = 0;

  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    frames.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!frames.empty()) {
      auto& [v, pos] = frames.back();
      if (pos < adj[v].size()) {
        const auto w = adj[v][pos++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const auto done = v;
      frames.pop_back();
      if (!frames.empty()) {
        const auto parent = frames.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          r.comp[w] = r.count;
        } while (w != done);
        ++r.count;
      }
    }
  }
  return r;
}

BowtieAssignment bowtie_decompose(const Digraph& g) {
  BowtieAssignment out;
  const auto n = g.nodes.size();
  if (n == 0) return out;

  std::unordered_map<UserId, std::uint32_t> idx;
  for (std::size_t i = 0; i < n; ++i) idx[g.nodes[i]] = static_cast<std::uint32_t>(i);
  Adjacency fwd(n);
  Adjacency bwd(n);
  for (const auto& [edge, w] : g.edges) {
    auto s = idx.find(edge.first);
    auto t = idx.find(edge.second);
    if (s == idx.end() || t == idx.end()) throw InvalidArgument("edge endpoint is not a node");
    fwd[s->second].push_back(t->second);
    bwd[t->second].push_back(s->second);
  }

  const auto scc = strongly_connected_components(fwd);
  std::vector<std::uint32_t> size(scc.count, 0);
  std::vector<std::uint32_t> smallest(scc.count, kUnvisited);
  // Nodes are sorted by id, so the lowest index is the smallest id.
  for (std::uint32_t v = 0; v < n; ++v) {
    ++size[scc.comp[v]];
    smallest[scc.comp[v]] = std::min(smallest[scc.comp[v]], v);
  }
  std::uint32_t lscc = 0;
  for (std::uint32_t c = 1; c < scc.count; ++c) {
    if (size[c] > size[lscc] || (size[c] == size[lscc] && smallest[c] < smallest[lscc])) lscc = c;
  }

  std::vector<std::uint32_t> core;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (scc.comp[v] == lscc) core.push_back(v);
  }
  const auto from_core = reach(fwd, core);
  const auto to_core = reach(bwd, core);

  std::vector<Component> label(n, Component::disconnected);
  std::vector<std::uint32_t> in_nodes;
  std::vector<std::uint32_t> out_nodes;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (scc.comp[v] == lscc) {
      label[v] = Component::lscc;
    } else if (to_core[v]) {
      label[v] = Component::in;
      in_nodes.push_back(v);
    } else if (from_core[v]) {
      label[v] = Component::out;
      out_nodes.push_back(v);
    }
  }
  const auto from_in = reach(fwd, in_nodes);
  const auto to_out = reach(bwd, out_nodes);
  for (std::uint32_t v = 0; v < n; ++v) {
    if (label[v] != Component::disconnected) continue;
    if (from_in[v] && to_out[v]) {
      label[v] = Component::tubes;
    } else if (from_in[v] || to_out[v]) {
      label[v] = Component::tendrils;
    }
  }
  for (std::uint32_t v = 0; v < n; ++v) out[g.nodes[v]] = label[v];
  return out;
}

FlowMatrix bowtie_flow(const BowtieAssignment& complete, const BowtieAssignment& sample) {
  FlowMatrix f;
  for (auto c : kComponents) {
    f.row_labels.emplace_back(to_string(c));
    f.col_labels.emplace_back(to_string(c));
  }
  f.counts.assign(kComponents.size(), std::vector<std::uint64_t>(kComponents.size() + 1, 0));
  for (const auto& [node, c] : sample) {
    if (!complete.contains(node)) {
      throw InvalidArgument("node " + std::to_string(node) + " in sample but not in complete set");
    }
  }
  for (const auto& [node, c] : complete) {
    auto it = sample.find(node);
    const auto col = it == sample.end() ? kComponents.size() : static_cast<std::size_t>(it->second);
    ++f.counts[static_cast<std::size_t>(c)][col];
  }
  for (std::size_t i = 0; i < f.counts.size(); ++i) {
    const double total = static_cast<double>(f.row_total(i));
    std::vector<double> ratio;
    for (auto c : f.counts[i]) ratio.push_back(total > 0 ? static_cast<double>(c) / total : 0.0);
    f.ratios.push_back(std::move(ratio));
  }
  return f;
}

}  // namespace streamfid::graph
