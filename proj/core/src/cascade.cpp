#include "streamfid/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "streamfid/error.hpp"

namespace streamfid::cascade {

namespace {

double to_seconds(TimestampMs ms) { return std::round(static_cast<double>(ms) / 100.0) / 10.0; }

std::uint64_t reach_within(const Cascade& c, TimestampMs start, double window_s) {
  std::uint64_t total = 0;
  const bool bounded = window_s >= 0;
  const auto end = start + static_cast<TimestampMs>(std::llround(window_s * 1000.0));
  for (const auto& e : c.retweets) {
    if (e.timestamp_ms < start) continue;
    if (bounded && e.timestamp_ms > end) continue;
    total += e.follower_count;
  }
  return total;
}

}  // namespace

TimestampMs Cascade::start_ms() const {
  if (root) return root->timestamp_ms;
  if (retweets.empty()) throw InvalidArgument("empty cascade");
  return retweets.front().timestamp_ms;
}

std::vector<Cascade> reconstruct_cascades(std::span<const Event> events,
                                          const CascadeOptions& options) {
  std::map<EventId, Cascade> by_root;
  for (const auto& e : events) {
    if (e.type == EventType::root) {
      auto& c = by_root[e.id];
      c.root_id = e.id;
      c.root = e;
    } else if (e.type == EventType::retweet ||
               (options.include_quotes && e.type == EventType::quote)) {
      if (!e.root_id) continue;
      auto& c = by_root[*e.root_id];
      c.root_id = *e.root_id;
      c.retweets.push_back(e);
    }
  }
  std::vector<Cascade> out;
  out.reserve(by_root.size());
  for (auto& [id, c] : by_root) {
    std::stable_sort(c.retweets.begin(), c.retweets.end(), event_order);
    out.push_back(std::move(c));
  }
  return out;
}

std::uint64_t potential_reach(const Cascade& cascade) {
  std::uint64_t total = 0;
  for (const auto& e : cascade.retweets) total += e.follower_count;
  return total;
}

std::optional<double> relative_potential_reach(const Cascade& sample, const Cascade& complete,
                                               double window_s) {
  if (sample.root_id != complete.root_id) throw InvalidArgument("mismatched root_id");
  if (complete.size() == 0) return std::nullopt;
  const auto start = complete.start_ms();
  const auto denom = reach_within(complete, start, window_s);
  if (denom == 0) return std::nullopt;
  const auto num = reach_within(sample, start, window_s);
  return std::min(1.0, static_cast<double>(num) / static_cast<double>(denom));
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<CcdfPoint> ccdf_of(std::vector<double> values, std::span<const double> grid) {
  std::sort(values.begin(), values.end());
  std::vector<double> xs(grid.begin(), grid.end());
  if (xs.empty()) {
    xs = values;
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  std::vector<CcdfPoint> out;
  out.reserve(xs.size());
  const double n = static_cast<double>(values.size());
  for (double x : xs) {
    const auto below = std::lower_bound(values.begin(), values.end(), x) - values.begin();
    out.push_back({x, n > 0 ? (n - static_cast<double>(below)) / n : 0.0});
  }
  return out;
}

InterArrivalDistribution inter_arrival_distribution(std::span<const Cascade> cascades,
                                                    const InterArrivalOptions& options) {
  InterArrivalDistribution d;
  std::vector<TimestampMs> times;
  std::vector<double> own;
  for (const auto& c : cascades) {
    times.clear();
    if (c.root && options.include_root_gap) times.push_back(c.root->timestamp_ms);
    for (const auto& e : c.retweets) times.push_back(e.timestamp_ms);
    if (times.size() < 2) continue;
    std::sort(times.begin(), times.end());
    own.clear();
    for (std::size_t i = 1; i < times.size(); ++i) own.push_back(to_seconds(times[i] - times[i - 1]));
    d.deltas_s.insert(d.deltas_s.end(), own.begin(), own.end());
    std::sort(own.begin(), own.end());
    d.per_cascade_median_s.push_back(quantile(own, 0.5));
  }
  if (d.deltas_s.empty()) {
    d.warnings.emplace_back("no cascade has two or more events; distribution is empty");
    return d;
  }
  std::sort(d.deltas_s.begin(), d.deltas_s.end());
  d.median_s = quantile(d.deltas_s, 0.5);
  d.ccdf = ccdf_of(d.deltas_s, options.grid_s);
  return d;
}

CascadeComparison compare_cascades(std::span<const Cascade> complete,
                                   std::span<const Cascade> sample,
                                   const CompareOptions& options) {
  std::unordered_map<EventId, const Cascade*> complete_by_id;
  for (const auto& c : complete) complete_by_id[c.root_id] = &c;
  std::unordered_map<EventId, const Cascade*> sample_by_id;
  for (const auto& c : sample) {
    if (!complete_by_id.contains(c.root_id)) {
      throw InvalidArgument("sample cascade " + std::to_string(c.root_id) +
                            " has no complete counterpart");
    }
    if (!c.rootless()) sample_by_id[c.root_id] = &c;
  }

  CascadeComparison out;
  auto& s = out.summary;
  std::vector<Cascade> kept_complete;
  std::vector<Cascade> kept_sample;
  double complete_retweets = 0;
  double sample_retweets = 0;

  for (const auto& c : complete) {
    if (c.rootless() || c.retweets.size() < options.min_retweets) continue;
    ++s.complete_cascades;
    complete_retweets += static_cast<double>(c.retweets.size());
    const bool large = c.retweets.size() >= options.large_threshold;
    if (large) ++s.complete_large;
    kept_complete.push_back(c);

    CascadeRow row;
    row.root_id = c.root_id;
    row.complete_size = c.size();
    auto it = sample_by_id.find(c.root_id);
    if (it != sample_by_id.end()) {
      const auto& sc = *it->second;
      row.sample_size = sc.size();
      row.fully_observed = sc.retweets.size() == c.retweets.size();
      ++s.sample_cascades;
      sample_retweets += static_cast<double>(sc.retweets.size());
      if (sc.retweets.size() >= options.large_threshold) ++s.sample_large;
      if (row.fully_observed) {
        ++s.fully_observed;
        if (large) ++s.fully_observed_large;
      }
      kept_sample.push_back(sc);
    }
    for (double w : options.windows_s) {
      Cascade probe;
      probe.root_id = c.root_id;
      const auto& sc = it != sample_by_id.end() ? *it->second : probe;
      row.relative_reach.push_back(relative_potential_reach(sc, c, w));
    }
    out.rows.push_back(std::move(row));
  }
  if (s.complete_cascades > 0) {
    s.complete_mean_retweets = complete_retweets / static_cast<double>(s.complete_cascades);
  }
  if (s.sample_cascades > 0) {
    s.sample_mean_retweets = sample_retweets / static_cast<double>(s.sample_cascades);
  }
  s.complete_median_inter_arrival_s =
      inter_arrival_distribution(kept_complete, options.inter_arrival).median_s;
  s.sample_median_inter_arrival_s =
      inter_arrival_distribution(kept_sample, options.inter_arrival).median_s;
  return out;
}

}  // namespace streamfid::cascade
