#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "streamfid/error.hpp"
#include "streamfid/jsonl.hpp"
#include "streamfid/model.hpp"
#include "streamfid/simulate.hpp"

namespace streamfid {
namespace {

using testing::make_event;
using testing::retweet_of;

std::vector<Event> ramp(EventId first, std::size_t n, TimestampMs step = 10) {
  std::vector<Event> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_event(first + i, static_cast<TimestampMs>(first + i) * step, (first + i) % 7));
  }
  return out;
}

TEST(Event, ValidateRootIdPresence) {
  EXPECT_NO_THROW(validate(make_event(1, 0, 1)));
  EXPECT_NO_THROW(validate(retweet_of(2, 5, 1, 1)));
  EXPECT_THROW(validate(make_event(1, 0, 1, EventType::root, 9)), InvalidArgument);
  EXPECT_THROW(validate(make_event(1, 0, 1, EventType::reply)), InvalidArgument);
  EXPECT_THROW(validate(make_event(1, -1, 1)), InvalidArgument);
}

TEST(Event, TypeNamesRoundTrip) {
  for (auto t : kAllEventTypes) EXPECT_EQ(parse_event_type(to_string(t)), t);
  EXPECT_THROW(parse_event_type("like"), InvalidArgument);
}

TEST(StreamBundle, SortsEventsAndMessages) {
  StreamBundle b({make_event(3, 20, 1), make_event(1, 20, 1), make_event(2, 5, 1)},
                 {{30, 4}, {10, 1}});
  ASSERT_EQ(b.event_count(), 3u);
  EXPECT_EQ(b.events()[0].id, 2u);
  EXPECT_EQ(b.events()[1].id, 1u);
  EXPECT_EQ(b.events()[2].id, 3u);
  EXPECT_EQ(b.messages().front().timestamp_ms, 10);
}

TEST(StreamBundle, RejectsDuplicateIds) {
  EXPECT_THROW(StreamBundle({make_event(1, 0, 1), make_event(1, 5, 2)}), DataError);
}

TEST(EmpiricalMeanRate, IdentityIsOne) {
  StreamBundle b(ramp(0, 10));
  EXPECT_DOUBLE_EQ(empirical_mean_rate(b, b), 1.0);
}

TEST(EmpiricalMeanRate, BernoulliKeepFraction) {
  const auto events = ramp(0, 1000);
  const auto kept = sim::bernoulli_sample(events, 0.5, 7);
  EXPECT_DOUBLE_EQ(empirical_mean_rate(StreamBundle(events), StreamBundle(kept)),
                   static_cast<double>(kept.size()) / 1000.0);
}

TEST(EmpiricalMeanRate, EmptyReferenceIsAnError) {
  try {
    empirical_mean_rate(StreamBundle{}, StreamBundle{});
    FAIL() << "expected an exception";
  } catch (const InvalidArgument& e) {
    EXPECT_STREQ(e.what(), "empty reference stream");
  }
}

TEST(MergeStreams, DisjointBundles) {
  const std::vector<StreamBundle> in{StreamBundle(ramp(0, 3)), StreamBundle(ramp(10, 3))};
  const auto m = merge_streams(in);
  EXPECT_EQ(m.event_count(), 6u);
  EXPECT_TRUE(std::is_sorted(m.events().begin(), m.events().end(), event_order));
}

TEST(MergeStreams, IdenticalBundlesAreIdempotent) {
  const StreamBundle b(ramp(0, 5), {{15, 2}, {40, 3}});
  const std::vector<StreamBundle> in{b, b};
  EXPECT_EQ(merge_streams(in), b);
  const std::vector<StreamBundle> once{merge_streams(in)};
  EXPECT_EQ(merge_streams(once), merge_streams(in));
}

TEST(MergeStreams, TwentyPercentOverlap) {
  const std::vector<StreamBundle> in{StreamBundle(ramp(0, 100)), StreamBundle(ramp(80, 100))};
  EXPECT_EQ(merge_streams(in).event_count(), 180u);
}

TEST(MergeStreams, ConflictingDuplicate) {
  auto a = ramp(0, 3);
  auto b = ramp(0, 3);
  b[1].follower_count = 99;
  const std::vector<StreamBundle> in{StreamBundle(a), StreamBundle(b)};
  try {
    merge_streams(in);
    FAIL() << "expected an exception";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("conflicting duplicate"), std::string::npos);
  }
}

TEST(MergeStreams, PropertyUnionIsSortedAndUnique) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<StreamBundle> in;
    std::set<EventId> ids;
    for (int b = 0; b < 3; ++b) {
      std::vector<Event> events;
      std::set<EventId> local;
      for (int i = 0; i < 40; ++i) {
        const EventId id = rng() % 100;
        if (!local.insert(id).second) continue;
        ids.insert(id);
        events.push_back(make_event(id, static_cast<TimestampMs>(id % 17) * 3, id));
      }
      in.emplace_back(std::move(events));
    }
    const auto m = merge_streams(in);
    ASSERT_EQ(m.event_count(), ids.size());
    for (std::size_t i = 1; i < m.event_count(); ++i) {
      const auto& p = m.events()[i - 1];
      const auto& q = m.events()[i];
      ASSERT_TRUE(p.timestamp_ms < q.timestamp_ms ||
                  (p.timestamp_ms == q.timestamp_ms && p.id < q.id));
    }
  }
}

TEST(FrequencyVector, Aggregates) {
  FrequencyVector f;
  f.counts = {{1, 4}, {3, 2}};
  EXPECT_DOUBLE_EQ(f.entities(), 6);
  EXPECT_DOUBLE_EQ(f.occurrences(), 10);
  EXPECT_DOUBLE_EQ(f.at(2), 0);
  EXPECT_EQ(f.max_key(), 3u);
}

TEST(Buckets, CyclicIndices) {
  const TimestampMs ts = 5 * 3'600'000 + 7 * 60'000 + 9 * 1000 + 657;
  EXPECT_EQ(bucket_of(ts, Granularity::hour), 5);
  EXPECT_EQ(bucket_of(ts, Granularity::hour, -6), 23);
  EXPECT_EQ(bucket_of(ts, Granularity::minute), 7);
  EXPECT_EQ(bucket_of(ts, Granularity::second), 9);
  EXPECT_EQ(bucket_of(ts, Granularity::millisecond), 13);
  EXPECT_EQ(bucket_count(Granularity::millisecond), 20);
  EXPECT_EQ(bucket_of(ts + 86'400'000, Granularity::hour), 5);
}

TEST(TemporalRateProfile, DefaultForUnseenBuckets) {
  TemporalRateProfile p;
  p.rates[3] = 0.25;
  EXPECT_DOUBLE_EQ(p.rate_at(3 * 3'600'000 + 1), 0.25);
  EXPECT_DOUBLE_EQ(p.rate_at(0), 1.0);
  EXPECT_DOUBLE_EQ(TemporalRateProfile::constant(0.4).rate_at(123456789), 0.4);
  EXPECT_THROW(TemporalRateProfile::constant(1.5), InvalidArgument);
}

TEST(Jsonl, RoundTrip) {
  Event e = retweet_of(7, 1234, 42, 3, 99);
  e.hashtags = {"a", "b"};
  e.urls = {"u1"};
  e.lang = "ja";
  const StreamBundle b({make_event(3, 1000, 5), e}, {{1234, 10}, {2000, 12}});
  std::stringstream ss;
  jsonl::write_bundle(ss, b);
  EXPECT_EQ(jsonl::read_bundle(ss), b);
}

TEST(Jsonl, EventsPrecedeMessagesAtEqualTimestamps) {
  const StreamBundle b({make_event(1, 500, 1)}, {{500, 3}});
  std::stringstream ss;
  jsonl::write_bundle(ss, b);
  std::string first;
  std::getline(ss, first);
  EXPECT_NE(first.find("\"id\""), std::string::npos);
}

TEST(Jsonl, MessageRecord) {
  const auto r = jsonl::parse_record(R"({"rl_ts_ms": 5, "missed": 9})");
  ASSERT_TRUE(std::holds_alternative<RateLimitMessage>(r));
  EXPECT_EQ(std::get<RateLimitMessage>(r), (RateLimitMessage{5, 9}));
}

TEST(Jsonl, MalformedLineReportsLineNumber) {
  std::stringstream ss;
  ss << jsonl::to_line(make_event(1, 0, 1)) << "\n\n{\"id\": 2, \"ts_ms\": oops}\n";
  try {
    jsonl::read_bundle(ss);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Jsonl, SchemaViolations) {
  EXPECT_THROW(jsonl::parse_record(R"({"id":1,"ts_ms":0,"user":1,"type":"retweet",)"
                                   R"("hashtags":[],"urls":[],"followers":0,"lang":"en"})"),
               ParseError);
  EXPECT_THROW(jsonl::parse_record(R"({"id":1,"ts_ms":0,"user":1,"type":"root",)"
                                   R"("hashtags":[3],"urls":[],"followers":0,"lang":"en"})"),
               ParseError);
  EXPECT_THROW(jsonl::parse_record(R"({"rl_ts_ms":1,"missed":-2})"), ParseError);
  EXPECT_THROW(jsonl::parse_record("[1,2]"), ParseError);
}

}  // namespace
}  // namespace streamfid
