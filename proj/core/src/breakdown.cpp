#include "streamfid/breakdown.hpp"

#include <map>
#include <variant>

#include "streamfid/error.hpp"

namespace streamfid::breakdown {

std::string_view to_string(BreakdownKey key) noexcept {
  switch (key) {
    case BreakdownKey::hour:
      return "hour";
    case BreakdownKey::minute:
      return "minute";
    case BreakdownKey::second:
      return "second";
    case BreakdownKey::millisecond:
      return "millisecond";
    case BreakdownKey::lang:
      return "lang";
    case BreakdownKey::type:
      return "type";
  }
  return "hour";
}

BreakdownKey parse_breakdown_key(std::string_view name) {
  for (auto k : {BreakdownKey::hour, BreakdownKey::minute, BreakdownKey::second,
                 BreakdownKey::millisecond, BreakdownKey::lang, BreakdownKey::type}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown breakdown key '" + std::string(name) + "'");
}

namespace {

// Numeric buckets sort numerically, string buckets lexicographically.
using BucketKey = std::variant<int, std::string>;

BucketKey bucket(const Event& e, BreakdownKey key, const BreakdownOptions& o) {
  switch (key) {
    case BreakdownKey::hour:
      return bucket_of(e.timestamp_ms, Granularity::hour, o.utc_offset_hours);
    case BreakdownKey::minute:
      return bucket_of(e.timestamp_ms, Granularity::minute);
    case BreakdownKey::second:
      return bucket_of(e.timestamp_ms, Granularity::second);
    case BreakdownKey::millisecond:
      return bucket_of(e.timestamp_ms, Granularity::millisecond) * kMillisecondBandWidth;
    case BreakdownKey::lang:
      return e.lang;
    case BreakdownKey::type:
      return static_cast<int>(e.type);
  }
  return 0;
}

std::string label(const BucketKey& b, BreakdownKey key) {
  if (const auto* s = std::get_if<std::string>(&b)) return *s;
  const int v = std::get<int>(b);
  if (key == BreakdownKey::type) return std::string(to_string(static_cast<EventType>(v)));
  return std::to_string(v);
}

}  // namespace

std::vector<BreakdownRow> sampling_rate_breakdown(const StreamBundle& complete,
                                                  const StreamBundle& sample, BreakdownKey key,
                                                  const BreakdownOptions& options) {
  std::map<BucketKey, std::pair<std::uint64_t, std::uint64_t>> counts;
  for (const auto& e : complete.events()) ++counts[bucket(e, key, options)].first;
  for (const auto& e : sample.events()) ++counts[bucket(e, key, options)].second;

  std::vector<BreakdownRow> rows;
  for (const auto& [b, c] : counts) {
    if (c.first == 0) {
      if (c.second > 0) throw InvalidArgument("sample bucket absent from complete stream");
      continue;
    }
    rows.push_back({label(b, key), c.first, c.second,
                    static_cast<double>(c.second) / static_cast<double>(c.first)});
  }
  return rows;
}

}  // namespace streamfid::breakdown
