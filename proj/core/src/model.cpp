#include "streamfid/model.hpp"

#include <algorithm>
#include <unordered_map>

#include "streamfid/error.hpp"

namespace streamfid {

std::string_view to_string(EventType type) noexcept {
  switch (type) {
    case EventType::root:
      return "root";
    case EventType::retweet:
      return "retweet";
    case EventType::quote:
      return "quote";
    case EventType::reply:
      return "reply";
  }
  return "root";
}

EventType parse_event_type(std::string_view name) {
  for (auto t : kAllEventTypes) {
    if (to_string(t) == name) return t;
  }
  throw InvalidArgument("unknown event type '" + std::string(name) + "'");
}

void validate(const Event& event) {
  if (event.timestamp_ms < 0) {
    throw InvalidArgument("event " + std::to_string(event.id) + ": negative timestamp");
  }
  const bool is_root = event.type == EventType::root;
  if (is_root && event.root_id) {
    throw InvalidArgument("event " + std::to_string(event.id) + ": root event carries root_id");
  }
  if (!is_root && !event.root_id) {
    throw InvalidArgument("event " + std::to_string(event.id) + ": " +
                          std::string(to_string(event.type)) + " without root_id");
  }
}

StreamBundle::StreamBundle(std::vector<Event> events, std::vector<RateLimitMessage> messages,
                           Meta meta)
    : events_(std::move(events)), messages_(std::move(messages)), meta_(std::move(meta)) {
  if (!std::is_sorted(events_.begin(), events_.end(), event_order)) {
    std::sort(events_.begin(), events_.end(), event_order);
  }
  std::unordered_map<EventId, std::size_t> seen;
  seen.reserve(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (!seen.emplace(events_[i].id, i).second) {
      throw DataError("duplicate event id " + std::to_string(events_[i].id));
    }
  }
  std::stable_sort(messages_.begin(), messages_.end(),
                   [](const RateLimitMessage& a, const RateLimitMessage& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
}

double FrequencyVector::at(std::uint32_t k) const {
  auto it = counts.find(k);
  return it == counts.end() ? 0.0 : it->second;
}

double FrequencyVector::entities() const {
  double total = 0;
  for (const auto& [k, c] : counts) total += c;
  return total;
}

double FrequencyVector::occurrences() const {
  double total = 0;
  for (const auto& [k, c] : counts) total += static_cast<double>(k) * c;
  return total;
}

std::uint32_t FrequencyVector::max_key() const {
  return counts.empty() ? 0 : counts.rbegin()->first;
}

std::string_view to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::hour:
      return "hour";
    case Granularity::minute:
      return "minute";
    case Granularity::second:
      return "second";
    case Granularity::millisecond:
      return "millisecond";
  }
  return "hour";
}

Granularity parse_granularity(std::string_view name) {
  for (auto g : {Granularity::hour, Granularity::minute, Granularity::second,
                 Granularity::millisecond}) {
    if (to_string(g) == name) return g;
  }
  throw InvalidArgument("unknown granularity '" + std::string(name) + "'");
}

namespace {
TimestampMs floor_mod(TimestampMs a, TimestampMs m) {
  auto r = a % m;
  return r < 0 ? r + m : r;
}
}  // namespace

int bucket_of(TimestampMs ts, Granularity g, int utc_offset_hours) noexcept {
  ts += static_cast<TimestampMs>(utc_offset_hours) * 3'600'000;
  switch (g) {
    case Granularity::hour:
      return static_cast<int>(floor_mod(ts, 86'400'000) / 3'600'000);
    case Granularity::minute:
      return static_cast<int>(floor_mod(ts, 3'600'000) / 60'000);
    case Granularity::second:
      return static_cast<int>(floor_mod(ts, 60'000) / 1'000);
    case Granularity::millisecond:
      return static_cast<int>(floor_mod(ts, 1'000) / kMillisecondBandWidth);
  }
  return 0;
}

int bucket_count(Granularity g) noexcept {
  switch (g) {
    case Granularity::hour:
      return 24;
    case Granularity::minute:
    case Granularity::second:
      return 60;
    case Granularity::millisecond:
      return 1000 / kMillisecondBandWidth;
  }
  return 1;
}

double TemporalRateProfile::rate_for_bucket(int bucket) const {
  auto it = rates.find(bucket);
  return it == rates.end() ? default_rate : it->second;
}

TemporalRateProfile TemporalRateProfile::constant(double rate, Granularity g) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("rate outside [0,1]");
  TemporalRateProfile p;
  p.granularity = g;
  p.default_rate = rate;
  return p;
}

double empirical_mean_rate(const StreamBundle& complete, const StreamBundle& sample) {
  if (complete.event_count() == 0) throw InvalidArgument("empty reference stream");
  if (sample.event_count() > complete.event_count()) {
    throw InvalidArgument("sample larger than reference stream");
  }
  return static_cast<double>(sample.event_count()) /
         static_cast<double>(complete.event_count());
}

StreamBundle merge_streams(std::span<const StreamBundle> bundles) {
  if (bundles.empty()) throw InvalidArgument("merge_streams needs at least one bundle");

  std::unordered_map<EventId, const Event*> by_id;
  std::vector<Event> events;
  std::vector<RateLimitMessage> messages;
  StreamBundle::Meta meta;
  for (const auto& b : bundles) {
    for (const auto& e : b.events()) {
      auto [it, inserted] = by_id.emplace(e.id, &e);
      if (inserted) {
        events.push_back(e);
      } else if (!(*it->second == e)) {
        throw DataError("conflicting duplicate for event id " + std::to_string(e.id));
      }
    }
    messages.insert(messages.end(), b.messages().begin(), b.messages().end());
    meta.insert(b.meta().begin(), b.meta().end());
  }

  // Identical messages (same timestamp and counter) are the same record seen twice.
  std::sort(messages.begin(), messages.end(),
            [](const RateLimitMessage& a, const RateLimitMessage& b) {
              return a.timestamp_ms != b.timestamp_ms ? a.timestamp_ms < b.timestamp_ms
                                                      : a.cumulative_missed < b.cumulative_missed;
            });
  messages.erase(std::unique(messages.begin(), messages.end()), messages.end());

  return StreamBundle(std::move(events), std::move(messages), std::move(meta));
}

}  // namespace streamfid
