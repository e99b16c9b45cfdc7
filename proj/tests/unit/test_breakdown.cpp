#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "streamfid/breakdown.hpp"
#include "streamfid/error.hpp"
#include "streamfid/simulate.hpp"

namespace streamfid::breakdown {
namespace {

using streamfid::testing::make_event;

TEST(Breakdown, IdentityRatesAreOne) {
  sim::GeneratorConfig c;
  c.duration_s = 30;
  const auto b = sim::generate_stream(c);
  for (auto key : {BreakdownKey::hour, BreakdownKey::minute, BreakdownKey::second,
                   BreakdownKey::millisecond, BreakdownKey::lang, BreakdownKey::type}) {
    for (const auto& row : sampling_rate_breakdown(b, b, key)) EXPECT_DOUBLE_EQ(row.rate, 1.0);
  }
}

TEST(Breakdown, HalfKept) {
  std::vector<Event> complete;
  std::vector<Event> sample;
  for (EventId i = 0; i < 100; ++i) {
    auto e = make_event(i, 3 * 3'600'000 + static_cast<TimestampMs>(i), 1);
    if (i % 2) sample.push_back(e);
    complete.push_back(e);
  }
  const auto rows =
      sampling_rate_breakdown(StreamBundle(complete), StreamBundle(sample), BreakdownKey::hour);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].bucket, "3");
  EXPECT_EQ(rows[0].complete_count, 100u);
  EXPECT_DOUBLE_EQ(rows[0].rate, 0.5);

  BreakdownOptions shifted;
  shifted.utc_offset_hours = 9;
  EXPECT_EQ(sampling_rate_breakdown(StreamBundle(complete), StreamBundle(sample),
                                    BreakdownKey::hour, shifted)[0].bucket,
            "12");
}

TEST(Breakdown, LabelsForCategoricalKeys) {
  auto a = make_event(0, 0, 1);
  a.lang = "ja";
  const auto b = make_event(1, 1, 2, EventType::reply, 0);
  const StreamBundle complete({a, b});
  const auto types = sampling_rate_breakdown(complete, complete, BreakdownKey::type);
  ASSERT_EQ(types.size(), 2u);
  EXPECT_EQ(types[0].bucket, "root");
  EXPECT_EQ(types[1].bucket, "reply");
  const auto langs = sampling_rate_breakdown(complete, complete, BreakdownKey::lang);
  EXPECT_EQ(langs[0].bucket, "en");
  EXPECT_EQ(langs[1].bucket, "ja");
  EXPECT_THROW(parse_breakdown_key("geo"), InvalidArgument);
  EXPECT_EQ(parse_breakdown_key("millisecond"), BreakdownKey::millisecond);
}

TEST(Breakdown, WeightedMeanEqualsEmpiricalRate) {
  sim::GeneratorConfig c;
  c.duration_s = 120;
  c.base_rate = 150;
  const auto complete = sim::generate_stream(c);
  const StreamBundle sample(sim::rate_limited_sample(complete.events()).events);
  const double rho = empirical_mean_rate(complete, sample);
  for (auto key : {BreakdownKey::second, BreakdownKey::millisecond, BreakdownKey::type}) {
    double num = 0;
    double den = 0;
    for (const auto& row : sampling_rate_breakdown(complete, sample, key)) {
      num += row.rate * static_cast<double>(row.complete_count);
      den += static_cast<double>(row.complete_count);
    }
    EXPECT_NEAR(num / den, rho, 1e-12);
  }
}

TEST(Breakdown, MillisecondProfileFallsFromAnchor) {
  sim::GeneratorConfig c;
  c.duration_s = 3600;
  c.base_rate = 100;
  const auto complete = sim::generate_stream(c);
  const int anchor = sim::kDefaultAnchorMs;
  const StreamBundle sample(sim::rate_limited_sample(complete.events(), 50, anchor).events);
  const auto rows = sampling_rate_breakdown(complete, sample, BreakdownKey::millisecond);
  ASSERT_EQ(rows.size(), 20u);

  // Poisson(100) arrivals, first 50 kept: an event at offset x into the window
  // is kept when fewer than 50 others arrived earlier in the window.
  auto keep_probability = [](double offset_fraction) {
    const double lambda = 100.0 * offset_fraction;
    double term = std::exp(-lambda);
    double cdf = term;
    for (int k = 1; k < 50; ++k) {
      term *= lambda / k;
      cdf += term;
    }
    return cdf;
  };
  for (const auto& row : rows) {
    const int band_start = std::stoi(row.bucket);
    double expected = 0;
    for (int ms = band_start; ms < band_start + kMillisecondBandWidth; ++ms) {
      const int offset = ((ms - anchor) % 1000 + 1000) % 1000;
      expected += keep_probability((offset + 0.5) / 1000.0);
    }
    expected /= kMillisecondBandWidth;
    EXPECT_NEAR(row.rate, expected, 0.02) << "band " << row.bucket;
  }
}

TEST(Breakdown, BernoulliTypeRatesUnbiased) {
  sim::GeneratorConfig c;
  c.duration_s = 1200;
  c.base_rate = 100;
  const auto complete = sim::generate_stream(c);
  const double rate = 0.5272;
  const StreamBundle sample(sim::bernoulli_sample(complete.events(), rate, 3));
  const double rho = empirical_mean_rate(complete, sample);
  const double N = static_cast<double>(complete.event_count());
  const double n = static_cast<double>(sample.event_count());
  for (const auto& row : sampling_rate_breakdown(complete, sample, BreakdownKey::type)) {
    const double m = static_cast<double>(row.complete_count);
    // Hypergeometric sd of the kept fraction of a group of size m.
    const double sd = std::sqrt((n / N) * (1 - n / N) * (N - m) / (N - 1) / m);
    EXPECT_LE(std::abs(row.rate - rho), 5 * sd) << row.bucket;
  }
}

}  // namespace
}  // namespace streamfid::breakdown
