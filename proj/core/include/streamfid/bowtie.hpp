#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "streamfid/graph.hpp"

namespace streamfid::graph {

enum class Component : std::uint8_t { lscc, in, out, tubes, tendrils, disconnected };

inline constexpr std::array<Component, 6> kComponents{Component::lscc,  Component::in,
                                                      Component::out,   Component::tubes,
                                                      Component::tendrils, Component::disconnected};

std::string_view to_string(Component c) noexcept;

using BowtieAssignment = std::map<UserId, Component>;

// Strongly connected components of an adjacency list (iterative Tarjan).
// comp[v] is the component index of v; components come out in reverse
// topological order.
struct SccResult {
  std::vector<std::uint32_t> comp;
  std::uint32_t count = 0;
};
SccResult strongly_connected_components(const std::vector<std::vector<std::uint32_t>>& adj);

// Six-way bow-tie partition. LSCC is the largest SCC (ties: the one holding
// the smallest node id); IN reaches it, OUT is reached from it. Of the other
// nodes, those reachable from IN and reaching OUT are Tubes, those with
// exactly one of the two properties are Tendrils, the rest Disconnected.
BowtieAssignment bowtie_decompose(const Digraph& g);

// 6 x 7 flow in fixed component order with a trailing "missing" column.
FlowMatrix bowtie_flow(const BowtieAssignment& complete, const BowtieAssignment& sample);

}  // namespace streamfid::graph
