#include "streamfid/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "streamfid/error.hpp"

namespace streamfid::sim {

namespace {

constexpr std::size_t kRootCandidates = 32;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0,1], derived from a hash so per-user attributes need no table.
double hash_unit(std::uint64_t seed, std::uint64_t key, std::uint64_t salt) {
  auto h = splitmix64(seed ^ splitmix64(key * 0x2545f4914f6cdd1dULL + salt));
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t population, double exponent) : cdf_(population) {
    double acc = 0;
    for (std::uint64_t i = 0; i < population; ++i) {
      acc += std::pow(static_cast<double>(i + 1), -exponent);
      cdf_[i] = acc;
    }
  }

  template <typename Rng>
  std::uint64_t operator()(Rng& rng) const {
    std::uniform_real_distribution<double> u(0.0, cdf_.back());
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u(rng));
    return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(
        it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  }

 private:
  std::vector<double> cdf_;
};

template <typename Key>
class MixSampler {
 public:
  explicit MixSampler(const std::map<Key, double>& mix) {
    std::vector<double> weights;
    for (const auto& [k, p] : mix) {
      keys_.push_back(k);
      weights.push_back(p);
    }
    dist_ = std::discrete_distribution<std::size_t>(weights.begin(), weights.end());
  }

  template <typename Rng>
  const Key& operator()(Rng& rng) {
    return keys_[dist_(rng)];
  }

 private:
  std::vector<Key> keys_;
  std::discrete_distribution<std::size_t> dist_;
};

double diurnal_factor(const GeneratorConfig& c, double t_s) {
  if (c.diurnal_amplitude == 0.0) return 1.0;
  double tod = std::fmod(static_cast<double>(c.start_ms) / 1000.0 + t_s, 86400.0);
  if (tod < 0) tod += 86400.0;
  return 1.0 + c.diurnal_amplitude * std::sin(2.0 * std::numbers::pi * tod / 86400.0);
}

// Intensity integral of one second (or the trailing fraction of one).
double second_mass(const GeneratorConfig& c, std::int64_t s) {
  double frac = std::min(1.0, c.duration_s - static_cast<double>(s));
  return c.base_rate * diurnal_factor(c, static_cast<double>(s) + 0.5 * frac) * frac;
}

void check_mix(double total, const char* what) {
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument(std::string(what) + " must sum to 1");
  }
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

struct RootInfo {
  TimestampMs ts;
  EventId id;
  UserId user;
  double weight;
};

}  // namespace

void validate(const GeneratorConfig& c) {
  if (!(c.duration_s > 0)) throw InvalidArgument("duration_s must be > 0");
  if (!(c.base_rate > 0)) throw InvalidArgument("base_rate must be > 0");
  if (!(c.diurnal_amplitude >= 0.0 && c.diurnal_amplitude < 1.0)) {
    throw InvalidArgument("diurnal_amplitude must be in [0,1)");
  }
  if (c.start_ms < 0) throw InvalidArgument("start_ms must be >= 0");
  if (c.user_population == 0) throw InvalidArgument("user_population must be >= 1");
  if (c.hashtag_population == 0) throw InvalidArgument("hashtag_population must be >= 1");
  if (!(c.user_zipf_exponent >= 0) || !(c.hashtag_zipf_exponent >= 0)) {
    throw InvalidArgument("zipf exponents must be >= 0");
  }
  if (!(c.hashtags_per_event >= 0)) throw InvalidArgument("hashtags_per_event must be >= 0");
  if (!is_probability(c.url_probability)) throw InvalidArgument("url_probability outside [0,1]");
  if (!is_probability(c.cascade_fraction)) throw InvalidArgument("cascade_fraction outside [0,1]");
  if (!(c.cascade_size_tail > 0)) throw InvalidArgument("cascade_size_tail must be > 0");
  if (!(c.inter_arrival_scale_s > 0)) throw InvalidArgument("inter_arrival_scale_s must be > 0");
  if (!(c.inter_arrival_exponent > 0)) throw InvalidArgument("inter_arrival_exponent must be > 0");
  if (!is_probability(c.burst_probability)) {
    throw InvalidArgument("burst_probability outside [0,1]");
  }
  if (!(c.burst_multiplier >= 1.0)) throw InvalidArgument("burst_multiplier must be >= 1");
  if (!(c.burst_duration_s > 0)) throw InvalidArgument("burst_duration_s must be > 0");
  if (!(c.follower_scale > 0) || !(c.follower_tail > 0)) {
    throw InvalidArgument("follower parameters must be > 0");
  }

  double total = 0;
  for (const auto& [t, p] : c.type_mix) {
    if (!is_probability(p)) throw InvalidArgument("type_mix probability outside [0,1]");
    total += p;
  }
  check_mix(total, "type_mix");
  total = 0;
  for (const auto& [l, p] : c.lang_mix) {
    if (!is_probability(p)) throw InvalidArgument("lang_mix probability outside [0,1]");
    total += p;
  }
  check_mix(total, "lang_mix");
}

double expected_event_count(const GeneratorConfig& c) {
  validate(c);
  double mean = 0;
  const auto seconds = static_cast<std::int64_t>(std::ceil(c.duration_s));
  for (std::int64_t s = 0; s < seconds; ++s) mean += second_mass(c, s);
  return mean;
}

StreamBundle generate_stream(const GeneratorConfig& c) {
  validate(c);
  std::mt19937_64 rng(c.seed);
  ZipfSampler users(c.user_population, c.user_zipf_exponent);
  ZipfSampler hashtags(c.hashtag_population, c.hashtag_zipf_exponent);
  ZipfSampler urls(c.hashtag_population * 5, c.hashtag_zipf_exponent);
  MixSampler<EventType> types(c.type_mix);

  std::vector<std::string> langs;
  std::vector<double> lang_cdf;
  double acc = 0;
  for (const auto& [l, p] : c.lang_mix) {
    langs.push_back(l);
    acc += p;
    lang_cdf.push_back(acc);
  }
  auto lang_of = [&](UserId u) -> const std::string& {
    double x = hash_unit(c.seed, u, 1) * acc;
    auto it = std::lower_bound(lang_cdf.begin(), lang_cdf.end(), x);
    auto idx = std::min<std::ptrdiff_t>(it - lang_cdf.begin(),
                                        static_cast<std::ptrdiff_t>(langs.size()) - 1);
    return langs[static_cast<std::size_t>(idx)];
  };
  auto followers_of = [&](UserId u) -> std::uint64_t {
    double x = c.follower_scale * std::pow(hash_unit(c.seed, u, 2), -1.0 / c.follower_tail);
    return static_cast<std::uint64_t>(std::min(x, 1e9));
  };

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> exp_delay(1.0 / c.inter_arrival_scale_s);
  auto draw_delay_ms = [&]() -> TimestampMs {
    double d = c.inter_arrival == InterArrivalModel::exponential
                   ? exp_delay(rng)
                   : c.inter_arrival_scale_s *
                         std::pow(1.0 - unit(rng), -1.0 / c.inter_arrival_exponent);
    return static_cast<TimestampMs>(std::min(d, 1e9) * 1000.0);
  };
  auto draw_tags = [&](ZipfSampler& z, const char* prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) {
      auto tag = prefix + std::to_string(z(rng));
      if (std::find(out.begin(), out.end(), tag) == out.end()) out.push_back(std::move(tag));
    }
    return out;
  };
  std::poisson_distribution<int> tag_dist(c.hashtags_per_event > 0 ? c.hashtags_per_event : 1.0);
  auto tag_count = [&]() -> std::size_t {
    return c.hashtags_per_event > 0 ? static_cast<std::size_t>(tag_dist(rng)) : 0;
  };

  std::vector<Event> events;
  events.reserve(static_cast<std::size_t>(expected_event_count(c) * 1.05) + 16);
  // Cascading roots in time order. Ids are dense, so events[root.id] is the root.
  std::vector<RootInfo> roots;
  std::vector<TimestampMs> root_ts;

  const auto seconds = static_cast<std::int64_t>(std::ceil(c.duration_s));
  std::int64_t burst_left = 0;
  std::optional<std::size_t> burst_root;
  std::vector<int> offsets;

  for (std::int64_t s = 0; s < seconds; ++s) {
    double mult = 1.0;
    if (c.burst_probability > 0) {
      if (burst_left == 0 && unit(rng) < c.burst_probability && !roots.empty()) {
        burst_left = static_cast<std::int64_t>(std::ceil(c.burst_duration_s));
        burst_root = roots.size() - 1;
      }
      if (burst_left > 0) {
        mult = c.burst_multiplier;
        --burst_left;
      } else {
        burst_root.reset();
      }
    }
    const double frac = std::min(1.0, c.duration_s - static_cast<double>(s));
    std::poisson_distribution<long long> arrivals(second_mass(c, s) * mult);
    const auto n = arrivals(rng);
    const int span_ms = std::max(1, static_cast<int>(std::floor(frac * 1000.0)));
    std::uniform_int_distribution<int> offset(0, span_ms - 1);
    offsets.resize(static_cast<std::size_t>(n));
    for (auto& o : offsets) o = offset(rng);
    std::sort(offsets.begin(), offsets.end());

    for (int o : offsets) {
      Event e;
      e.id = events.size();
      e.timestamp_ms = c.start_ms + s * 1000 + o;

      std::optional<std::size_t> parent;
      if (burst_root && unit(rng) < 1.0 - 1.0 / mult) {
        e.type = EventType::retweet;
        parent = burst_root;
      } else {
        e.type = types(rng);
        if (e.type != EventType::root) {
          if (roots.empty()) {
            e.type = EventType::root;
          } else {
            auto target = e.timestamp_ms - draw_delay_ms();
            auto it = std::upper_bound(root_ts.begin(), root_ts.end(), target);
            std::size_t last = it == root_ts.begin()
                                   ? 0
                                   : static_cast<std::size_t>(it - root_ts.begin()) - 1;
            std::size_t first = last + 1 >= kRootCandidates ? last + 1 - kRootCandidates : 0;
            double total = 0;
            for (std::size_t i = first; i <= last; ++i) total += roots[i].weight;
            double pick = unit(rng) * total;
            std::size_t chosen = last;
            for (std::size_t i = first; i <= last; ++i) {
              pick -= roots[i].weight;
              if (pick <= 0) {
                chosen = i;
                break;
              }
            }
            parent = chosen;
          }
        }
      }

      e.user_id = users(rng);
      if (parent) {
        const auto& root = roots[*parent];
        if (e.user_id == root.user) e.user_id = (e.user_id + 1) % c.user_population;
        e.root_id = root.id;
        if (e.type == EventType::retweet) {
          e.hashtags = events[root.id].hashtags;
          e.urls = events[root.id].urls;
        }
      }
      if (e.type != EventType::retweet) {
        e.hashtags = draw_tags(hashtags, "h", tag_count());
        if (unit(rng) < c.url_probability) e.urls = draw_tags(urls, "https://t.example/", 1);
      }
      e.follower_count = followers_of(e.user_id);
      e.lang = lang_of(e.user_id);

      if (e.type == EventType::root && unit(rng) < c.cascade_fraction) {
        double w = std::pow(1.0 - unit(rng), -1.0 / c.cascade_size_tail);
        roots.push_back({e.timestamp_ms, e.id, e.user_id, w});
        root_ts.push_back(e.timestamp_ms);
      }
      events.push_back(std::move(e));
    }
  }

  StreamBundle::Meta meta{{"generator", "streamfid.sim"},
                          {"seed", std::to_string(c.seed)},
                          {"duration_s", std::to_string(c.duration_s)},
                          {"base_rate", std::to_string(c.base_rate)}};
  return StreamBundle(std::move(events), {}, std::move(meta));
}

std::int64_t window_of(TimestampMs ts, int anchor_ms) noexcept {
  auto shifted = ts - anchor_ms;
  return shifted >= 0 ? shifted / 1000 : -((-shifted + 999) / 1000);
}

RateLimitedSample rate_limited_sample(std::span<const Event> events, int threshold,
                                      int anchor_ms) {
  if (threshold < 1) throw InvalidArgument("threshold must be >= 1");
  if (anchor_ms < 0 || anchor_ms >= 1000) throw InvalidArgument("anchor_ms must be in [0,1000)");

  RateLimitedSample out;
  out.events.reserve(events.size());
  std::uint64_t dropped_total = 0;
  std::size_t i = 0;
  while (i < events.size()) {
    const auto w = window_of(events[i].timestamp_ms, anchor_ms);
    std::size_t in_window = 0;
    std::uint64_t dropped = 0;
    for (; i < events.size() && window_of(events[i].timestamp_ms, anchor_ms) == w; ++i) {
      if (i > 0 && event_order(events[i], events[i - 1])) {
        throw InvalidArgument("rate_limited_sample: events not sorted");
      }
      if (in_window < static_cast<std::size_t>(threshold)) {
        out.events.push_back(events[i]);
      } else {
        ++dropped;
      }
      ++in_window;
    }
    if (i < events.size() && event_order(events[i], events[i - 1])) {
      throw InvalidArgument("rate_limited_sample: events not sorted");
    }
    if (dropped > 0) {
      dropped_total += dropped;
      out.messages.push_back({w * 1000 + anchor_ms + 999, dropped_total});
    }
  }
  return out;
}

std::vector<Event> bernoulli_sample(std::span<const Event> events, double rate,
                                    std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("rate outside [0,1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(rate);
  std::vector<Event> out;
  out.reserve(static_cast<std::size_t>(static_cast<double>(events.size()) * rate) + 16);
  for (const auto& e : events) {
    if (keep(rng)) out.push_back(e);
  }
  return out;
}

}  // namespace streamfid::sim
