#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace streamfid::testing {

std::vector<Event> zipf_population(std::uint64_t users, double exponent, std::uint32_t max_count,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> weights(max_count);
  for (std::uint32_t k = 1; k <= max_count; ++k) weights[k - 1] = std::pow(k, -exponent);
  std::discrete_distribution<std::uint32_t> count(weights.begin(), weights.end());
  std::uniform_int_distribution<TimestampMs> when(0, 86'400'000 - 1);

  std::vector<Event> events;
  for (UserId u = 0; u < users; ++u) {
    const auto n = count(rng) + 1;
    for (std::uint32_t i = 0; i < n; ++i) {
      Event e;
      e.timestamp_ms = when(rng);
      e.user_id = u;
      e.lang = "en";
      events.push_back(std::move(e));
    }
  }
  std::sort(events.begin(), events.end(),
            [](const Event& a, const Event& b) { return a.timestamp_ms < b.timestamp_ms; });
  for (std::size_t i = 0; i < events.size(); ++i) events[i].id = i;
  return events;
}

CounterInterleaving interleaved_counters(std::size_t counters, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> length(1, 40);
  std::uniform_int_distribution<std::uint64_t> step(1, 7);
  std::vector<std::size_t> owner;
  for (std::size_t c = 0; c < counters; ++c) owner.insert(owner.end(), length(rng), c);
  std::shuffle(owner.begin(), owner.end(), rng);

  // Bands by first appearance: rank 0 gets the highest band.
  std::vector<std::size_t> band(counters, counters);
  std::size_t next = 0;
  for (auto c : owner) {
    if (band[c] == counters) band[c] = next++;
  }
  constexpr std::uint64_t kBand = 1'000'000;
  std::vector<std::uint64_t> current(counters);
  for (std::size_t c = 0; c < counters; ++c) current[c] = (counters - band[c]) * kBand;

  CounterInterleaving out;
  for (auto c : owner) {
    current[c] += step(rng);
    out.values.push_back(current[c]);
  }
  out.total = std::accumulate(current.begin(), current.end(), std::uint64_t{0});
  return out;
}

graph::Digraph random_digraph(std::size_t n, std::size_t edges, std::mt19937_64& rng) {
  graph::Digraph g;
  for (UserId v = 0; v < n; ++v) g.nodes.push_back(v);
  if (n < 2) return g;
  edges = std::min(edges, n * (n - 1));
  std::uniform_int_distribution<UserId> pick(0, n - 1);
  while (g.edges.size() < edges) {
    const auto s = pick(rng);
    const auto t = pick(rng);
    if (s != t) g.edges[{s, t}] = 1;
  }
  return g;
}

graph::BowtieAssignment brute_force_bowtie(const graph::Digraph& g) {
  const std::size_t n = g.nodes.size();
  std::map<UserId, std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) idx[g.nodes[i]] = i;
  // reach[i][j]: j reachable from i (reflexive).
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) reach[i][i] = 1;
  for (const auto& [e, w] : g.edges) reach[idx[e.first]][idx[e.second]] = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = 1;
      }
    }
  }

  std::size_t best = 0;
  std::size_t best_size = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t size = 0;
    for (std::size_t j = 0; j < n; ++j) size += reach[i][j] && reach[j][i];
    if (size > best_size) {
      best_size = size;
      best = i;
    }
  }
  auto in_core = [&](std::size_t v) { return reach[v][best] && reach[best][v]; };

  using graph::Component;
  std::vector<Component> label(n, Component::disconnected);
  for (std::size_t v = 0; v < n; ++v) {
    if (in_core(v)) {
      label[v] = Component::lscc;
    } else if (reach[v][best]) {
      label[v] = Component::in;
    } else if (reach[best][v]) {
      label[v] = Component::out;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (label[v] != Component::disconnected) continue;
    bool from_in = false;
    bool to_out = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (label[u] == Component::in && reach[u][v]) from_in = true;
      if (label[u] == Component::out && reach[v][u]) to_out = true;
    }
    if (from_in && to_out) {
      label[v] = Component::tubes;
    } else if (from_in || to_out) {
      label[v] = Component::tendrils;
    }
  }
  graph::BowtieAssignment out;
  for (std::size_t v = 0; v < n; ++v) out[g.nodes[v]] = label[v];
  return out;
}

HourWorkload hour_workload(std::uint64_t users, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  HourWorkload w;
  std::uniform_int_distribution<int> home_of(0, 23);
  std::vector<int> home(users);
  for (auto& h : home) h = home_of(rng);

  std::vector<std::discrete_distribution<UserId>> who;
  for (int h = 0; h < 24; ++h) {
    // Between 1.6 and 4.7 arrivals per second.
    w.arrivals_per_second[h] = 3.15 + 1.55 * std::sin(2.0 * std::numbers::pi * h / 24.0);
    std::vector<double> weights(users);
    for (UserId u = 0; u < users; ++u) {
      const int d = std::abs(h - home[u]);
      const bool near = std::min(d, 24 - d) <= 3;
      weights[u] = (near ? 1.0 : 0.05) / static_cast<double>(u + 1);
    }
    who.emplace_back(weights.begin(), weights.end());
  }

  std::uniform_int_distribution<TimestampMs> ms(0, 999);
  std::vector<TimestampMs> stamps;
  for (int h = 0; h < 24; ++h) {
    std::poisson_distribution<int> arrivals(w.arrivals_per_second[h]);
    for (int s = 0; s < 3600; ++s) {
      const TimestampMs second_start = (static_cast<TimestampMs>(h) * 3600 + s) * 1000;
      stamps.clear();
      for (int n = arrivals(rng); n > 0; --n) stamps.push_back(second_start + ms(rng));
      std::sort(stamps.begin(), stamps.end());
      for (auto ts : stamps) {
        Event e;
        e.id = w.events.size();
        e.timestamp_ms = ts;
        e.user_id = who[h](rng);
        e.lang = "en";
        w.events.push_back(std::move(e));
      }
    }
  }
  return w;
}

double binomial_pmf(std::uint32_t k, std::uint32_t n, double p) {
  if (k > n) return 0.0;
  // C(n,k) p^k (1-p)^(n-k), accumulated factor by factor.
  double v = 1.0;
  for (std::uint32_t i = 1; i <= k; ++i) {
    v *= static_cast<double>(n - k + i) / static_cast<double>(i) * p;
  }
  for (std::uint32_t i = 0; i < n - k; ++i) v *= 1.0 - p;
  return v;
}

}  // namespace streamfid::testing
