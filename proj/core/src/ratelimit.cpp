#include "streamfid/ratelimit.hpp"

#include <algorithm>
#include <cmath>

#include "streamfid/error.hpp"

namespace streamfid::ratelimit {

namespace {

// Number of events with timestamp in (lo, hi].
std::uint64_t count_in(const std::vector<Event>& events, TimestampMs lo, TimestampMs hi) {
  auto by_ts = [](const Event& e, TimestampMs t) { return e.timestamp_ms <= t; };
  auto first = std::partition_point(events.begin(), events.end(),
                                    [&](const Event& e) { return by_ts(e, lo); });
  auto last = std::partition_point(first, events.end(),
                                   [&](const Event& e) { return by_ts(e, hi); });
  return static_cast<std::uint64_t>(last - first);
}

}  // namespace

std::vector<Segment> segment_stream(const StreamBundle& complete, const StreamBundle& sample) {
  std::vector<Segment> out;
  const auto& msgs = sample.messages();
  if (msgs.size() < 2) return out;

  const auto& complete_msgs = complete.messages();
  for (std::size_t i = 0; i + 1 < msgs.size(); ++i) {
    const auto& lo = msgs[i];
    const auto& hi = msgs[i + 1];
    if (!(lo.timestamp_ms < hi.timestamp_ms)) continue;

    auto inside = std::partition_point(
        complete_msgs.begin(), complete_msgs.end(),
        [&](const RateLimitMessage& m) { return m.timestamp_ms <= lo.timestamp_ms; });
    if (inside != complete_msgs.end() && inside->timestamp_ms <= hi.timestamp_ms) continue;

    Segment seg;
    seg.start_ms = lo.timestamp_ms;
    seg.end_ms = hi.timestamp_ms;
    seg.bounding_messages = {lo, hi};
    seg.sample_event_count = count_in(sample.events(), lo.timestamp_ms, hi.timestamp_ms);
    seg.complete_event_count = count_in(complete.events(), lo.timestamp_ms, hi.timestamp_ms);
    if (seg.complete_event_count < seg.sample_event_count) {
      throw DataError("segment has more sample than complete events; is the sample a subset?");
    }
    out.push_back(seg);
  }
  return out;
}

std::uint64_t estimate_missing(const Segment& segment) {
  const auto& [start, end] = segment.bounding_messages;
  if (end.cumulative_missed < start.cumulative_missed) {
    throw DataError("non-monotone counter");
  }
  return end.cumulative_missed - start.cumulative_missed;
}

ValidationReport validate(std::span<const Segment> segments) {
  if (segments.empty()) throw InvalidArgument("validate: no segments");
  ValidationReport r;
  r.ape.reserve(segments.size());
  double sum = 0;
  for (const auto& seg : segments) {
    const double estimate = static_cast<double>(estimate_missing(seg));
    const double truth = static_cast<double>(seg.true_missing());
    const double ape = std::abs(estimate - truth) / std::max(truth, 1.0);
    r.ape.push_back(ape);
    sum += ape;
  }
  r.mean_ape = sum / static_cast<double>(r.ape.size());

  auto sorted = r.ape;
  std::sort(sorted.begin(), sorted.end());
  const auto n = sorted.size();
  r.median_ape = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return r;
}

std::vector<std::vector<std::uint64_t>> map_threads(std::span<const std::uint64_t> values,
                                                    std::size_t max_threads) {
  if (values.empty()) throw InvalidArgument("map_threads: empty input");
  if (max_threads == 0) throw InvalidArgument("map_threads: max_threads must be >= 1");

  std::vector<std::vector<std::uint64_t>> lists{{values.front()}};
  for (auto next : values.subspan(1)) {
    std::uint64_t min_tail = lists.front().back();
    for (const auto& l : lists) min_tail = std::min(min_tail, l.back());

    if (next <= min_tail) {
      if (lists.size() == max_threads) throw DataError("thread overflow");
      lists.push_back({next});
      continue;
    }
    // Some tail is strictly below `next`; pick the largest such tail.
    std::size_t best = lists.size();
    for (std::size_t k = 0; k < lists.size(); ++k) {
      const auto tail = lists[k].back();
      if (tail < next && (best == lists.size() || tail > lists[best].back())) best = k;
    }
    lists[best].push_back(next);
  }
  return lists;
}

std::uint64_t total_missing_from_threads(std::span<const std::vector<std::uint64_t>> threads) {
  std::uint64_t total = 0;
  for (const auto& t : threads) {
    if (!t.empty()) total += t.back();
  }
  return total;
}

}  // namespace streamfid::ratelimit
