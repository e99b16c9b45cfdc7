#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "streamfid/bowtie.hpp"
#include "streamfid/model.hpp"

namespace streamfid::testing {

inline Event make_event(EventId id, TimestampMs ts, UserId user, EventType type = EventType::root,
                        std::optional<EventId> root = std::nullopt) {
  Event e;
  e.id = id;
  e.timestamp_ms = ts;
  e.user_id = user;
  e.type = type;
  e.root_id = root;
  e.lang = "en";
  return e;
}

inline Event retweet_of(EventId id, TimestampMs ts, UserId user, EventId root,
                        std::uint64_t followers = 0) {
  Event e = make_event(id, ts, user, EventType::retweet, root);
  e.follower_count = followers;
  return e;
}

// Root events for `users` users whose per-user counts follow a discrete
// power law on [1, max_count]. Timestamps are spread over one day.
std::vector<Event> zipf_population(std::uint64_t users, double exponent, std::uint32_t max_count,
                                   std::uint64_t seed);

// Interleaving of several strictly increasing counters. Counters live in
// disjoint value bands and the counter that shows up first owns the highest band.
struct CounterInterleaving {
  std::vector<std::uint64_t> values;
  std::uint64_t total = 0;  // sum of the final value of every counter
};
CounterInterleaving interleaved_counters(std::size_t counters, std::mt19937_64& rng);

// Uniform random digraph on nodes 0..n-1 with `edges` distinct non-loop edges.
graph::Digraph random_digraph(std::size_t n, std::size_t edges, std::mt19937_64& rng);

// Bow-tie classification from an explicit reachability matrix.
graph::BowtieAssignment brute_force_bowtie(const graph::Digraph& g);

// One day of traffic with hour-dependent load. Users have Zipf weights and a
// home hour; most of a user's activity falls within three hours of it.
struct HourWorkload {
  std::vector<Event> events;
  std::map<int, double> arrivals_per_second;  // by hour of day
};
HourWorkload hour_workload(std::uint64_t users, std::uint64_t seed);

// Binomial pmf by the multiplicative formula (no log-gamma).
double binomial_pmf(std::uint32_t k, std::uint32_t n, double p);

}  // namespace streamfid::testing
