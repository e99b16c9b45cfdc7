#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace streamfid {

using EventId = std::uint64_t;
using UserId = std::uint64_t;
using TimestampMs = std::int64_t;

enum class EventType : std::uint8_t { root, retweet, quote, reply };

inline constexpr EventType kAllEventTypes[] = {EventType::root, EventType::retweet,
                                               EventType::quote, EventType::reply};

std::string_view to_string(EventType type) noexcept;
// Throws InvalidArgument on an unknown name.
EventType parse_event_type(std::string_view name);

struct Event {
  EventId id = 0;
  TimestampMs timestamp_ms = 0;
  UserId user_id = 0;
  EventType type = EventType::root;
  std::optional<EventId> root_id;  // present iff type != root
  std::vector<std::string> hashtags;
  std::vector<std::string> urls;
  std::uint64_t follower_count = 0;
  std::string lang;

  bool operator==(const Event&) const = default;
};

// Checks the per-record invariants (root_id presence, timestamp sign).
void validate(const Event& event);

// Strict (timestamp, id) order used everywhere events are sorted.
inline bool event_order(const Event& a, const Event& b) noexcept {
  return a.timestamp_ms != b.timestamp_ms ? a.timestamp_ms < b.timestamp_ms : a.id < b.id;
}

struct RateLimitMessage {
  TimestampMs timestamp_ms = 0;
  std::uint64_t cumulative_missed = 0;

  bool operator==(const RateLimitMessage&) const = default;
};

// Time-ordered events and rate limit messages. Construction sorts both lists
// and rejects duplicate event ids; the bundle is immutable afterwards.
class StreamBundle {
 public:
  using Meta = std::map<std::string, std::string>;

  StreamBundle() = default;
  explicit StreamBundle(std::vector<Event> events, std::vector<RateLimitMessage> messages = {},
                        Meta meta = {});

  const std::vector<Event>& events() const noexcept { return events_; }
  const std::vector<RateLimitMessage>& messages() const noexcept { return messages_; }
  const Meta& meta() const noexcept { return meta_; }

  std::size_t event_count() const noexcept { return events_.size(); }
  std::size_t message_count() const noexcept { return messages_.size(); }
  bool empty() const noexcept { return events_.empty() && messages_.empty(); }

  bool operator==(const StreamBundle&) const = default;

 private:
  std::vector<Event> events_;
  std::vector<RateLimitMessage> messages_;
  Meta meta_;
};

// Histogram of entity occurrence counts: counts[k] = number of entities seen
// exactly k times (k >= 1). Values are real so the same type carries estimates.
struct FrequencyVector {
  std::map<std::uint32_t, double> counts;

  double at(std::uint32_t k) const;
  // Number of entities (sum of counts).
  double entities() const;
  // Number of occurrences (sum of k * counts[k]).
  double occurrences() const;
  std::uint32_t max_key() const;

  bool operator==(const FrequencyVector&) const = default;
};

enum class Granularity : std::uint8_t { hour, minute, second, millisecond };

std::string_view to_string(Granularity g) noexcept;
Granularity parse_granularity(std::string_view name);

// Width of the millisecond bands used by Granularity::millisecond.
inline constexpr int kMillisecondBandWidth = 50;

// Cyclic bucket index of a timestamp: hour-of-day (UTC), minute-of-hour,
// second-of-minute, or 50 ms band of the millisecond-of-second.
int bucket_of(TimestampMs ts, Granularity g, int utc_offset_hours = 0) noexcept;
int bucket_count(Granularity g) noexcept;

struct TemporalRateProfile {
  Granularity granularity = Granularity::hour;
  std::map<int, double> rates;
  double default_rate = 1.0;

  double rate_for_bucket(int bucket) const;
  double rate_at(TimestampMs ts) const { return rate_for_bucket(bucket_of(ts, granularity)); }
  // A single bucket-free profile with the same rate everywhere.
  static TemporalRateProfile constant(double rate, Granularity g = Granularity::hour);
};

// Fraction of the reference stream present in the sample.
double empirical_mean_rate(const StreamBundle& complete, const StreamBundle& sample);

// Union of the bundles: events deduplicated by id and re-sorted, messages
// concatenated and sorted. Equal ids with different payloads are an error.
StreamBundle merge_streams(std::span<const StreamBundle> bundles);

}  // namespace streamfid
