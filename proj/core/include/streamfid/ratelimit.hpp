#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::ratelimit {

// Stretch of time (start_ms, end_ms] bounded by two consecutive sample-set
// rate limit messages, with no complete-set message inside.
struct Segment {
  TimestampMs start_ms = 0;
  TimestampMs end_ms = 0;
  std::pair<RateLimitMessage, RateLimitMessage> bounding_messages;
  std::uint64_t sample_event_count = 0;
  std::uint64_t complete_event_count = 0;

  std::uint64_t true_missing() const noexcept { return complete_event_count - sample_event_count; }
};

// Fewer than two sample messages yields an empty list.
std::vector<Segment> segment_stream(const StreamBundle& complete, const StreamBundle& sample);

// Counter difference across the segment. Throws DataError("non-monotone
// counter") when it would be negative; such data needs map_threads first.
std::uint64_t estimate_missing(const Segment& segment);

struct ValidationReport {
  std::vector<double> ape;  // per segment
  double median_ape = 0;
  double mean_ape = 0;
};

// Absolute percentage error |estimate - truth| / max(truth, 1) per segment.
ValidationReport validate(std::span<const Segment> segments);

inline constexpr std::size_t kDefaultMaxThreads = 4;

// Greedy split of an interleaved counter sequence into strictly increasing
// lists. A value no greater than every list tail opens a new list; otherwise
// it extends the list whose tail is the largest value still below it.
// Throws DataError("thread overflow") if more than `max_threads` lists are needed.
std::vector<std::vector<std::uint64_t>> map_threads(std::span<const std::uint64_t> values,
                                                    std::size_t max_threads = kDefaultMaxThreads);

// Sum of the final counter of every thread (counters start at zero).
std::uint64_t total_missing_from_threads(std::span<const std::vector<std::uint64_t>> threads);

}  // namespace streamfid::ratelimit
