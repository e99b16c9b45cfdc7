#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::sim {

enum class InterArrivalModel : std::uint8_t { exponential, power_law };

// Configuration of the synthetic ground-truth stream.
//
// Arrivals form a Poisson process whose intensity is `base_rate` modulated by
// an hour-of-day sinusoid and, optionally, by bursts. Every arrival draws its
// type from `type_mix`; a non-root arrival attaches to an earlier cascading
// root chosen by a delay drawn from the inter-arrival model and by the root's
// heavy-tailed popularity. Inside a burst the surplus arrivals are retweets of
// a single root, so rate limiting hits that content disproportionately.
struct GeneratorConfig {
  double duration_s = 60.0;
  TimestampMs start_ms = 0;
  double base_rate = 100.0;        // events per second
  double diurnal_amplitude = 0.0;  // in [0,1)

  std::uint64_t user_population = 10'000;
  double user_zipf_exponent = 1.1;
  std::uint64_t hashtag_population = 2'000;
  double hashtag_zipf_exponent = 1.0;
  double hashtags_per_event = 0.6;  // Poisson mean for root/quote/reply events
  double url_probability = 0.2;

  double cascade_fraction = 0.3;   // share of roots that can be retweeted
  double cascade_size_tail = 1.8;  // Pareto exponent of root popularity

  InterArrivalModel inter_arrival = InterArrivalModel::power_law;
  double inter_arrival_scale_s = 20.0;  // exponential mean, or power-law minimum
  double inter_arrival_exponent = 1.5;  // power-law tail exponent

  double burst_probability = 0.0;  // per-second chance a burst starts
  double burst_multiplier = 1.0;   // intensity multiplier inside a burst
  double burst_duration_s = 5.0;

  double follower_scale = 50.0;  // Pareto minimum of follower counts
  double follower_tail = 1.2;

  std::map<EventType, double> type_mix{{EventType::root, 0.35},
                                       {EventType::retweet, 0.5},
                                       {EventType::quote, 0.05},
                                       {EventType::reply, 0.1}};
  std::map<std::string, double> lang_mix{{"en", 0.6}, {"es", 0.15}, {"ja", 0.15}, {"de", 0.1}};

  std::uint64_t seed = 1;
};

// Throws InvalidArgument on out-of-range fields or mixes not summing to 1.
void validate(const GeneratorConfig& config);

// Expected number of generated events (the Poisson mean) with bursts disabled.
double expected_event_count(const GeneratorConfig& config);

// Deterministic for a given config; ids are dense from 0 in time order.
StreamBundle generate_stream(const GeneratorConfig& config);

inline constexpr int kDefaultThreshold = 50;
inline constexpr int kDefaultAnchorMs = 657;

struct RateLimitedSample {
  std::vector<Event> events;
  std::vector<RateLimitMessage> messages;
};

// Window index of a timestamp for one-second windows starting at `anchor_ms`.
std::int64_t window_of(TimestampMs ts, int anchor_ms) noexcept;

// Delivers the first `threshold` events of every one-second window that
// starts at `anchor_ms` past each wall-clock second; a window that drops
// anything emits one message at its last millisecond carrying the cumulative
// dropped count. Throws InvalidArgument on unsorted input.
RateLimitedSample rate_limited_sample(std::span<const Event> events,
                                      int threshold = kDefaultThreshold,
                                      int anchor_ms = kDefaultAnchorMs);

// Keeps every event independently with probability `rate`; order preserved.
std::vector<Event> bernoulli_sample(std::span<const Event> events, double rate,
                                    std::uint64_t seed);

}  // namespace streamfid::sim
