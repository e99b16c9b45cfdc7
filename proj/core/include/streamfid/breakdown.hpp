#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::breakdown {

enum class BreakdownKey : std::uint8_t { hour, minute, second, millisecond, lang, type };

std::string_view to_string(BreakdownKey key) noexcept;
BreakdownKey parse_breakdown_key(std::string_view name);

struct BreakdownRow {
  std::string bucket;
  std::uint64_t complete_count = 0;
  std::uint64_t sample_count = 0;
  double rate = 0;  // sample_count / complete_count
};

struct BreakdownOptions {
  int utc_offset_hours = 0;  // applied to the hour key only
};

// Sampling rate per bucket. Time keys use cyclic buckets (hour-of-day,
// minute-of-hour, second-of-minute, 50 ms band of the second); buckets absent
// from the complete stream are omitted. Rows are in bucket order.
std::vector<BreakdownRow> sampling_rate_breakdown(const StreamBundle& complete,
                                                  const StreamBundle& sample, BreakdownKey key,
                                                  const BreakdownOptions& options = {});

}  // namespace streamfid::breakdown
