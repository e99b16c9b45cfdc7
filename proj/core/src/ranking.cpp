#include "streamfid/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

#include "streamfid/error.hpp"

namespace streamfid::ranking {

namespace {

std::unordered_map<UserId, std::uint64_t> counts_by_user(const std::vector<Event>& events) {
  std::unordered_map<UserId, std::uint64_t> out;
  for (const auto& e : events) ++out[e.user_id];
  return out;
}

// 1-based ranks of `items` ordered by `score` descending, ties by id ascending.
template <typename Score>
std::unordered_map<UserId, std::uint32_t> rank_by(std::vector<UserId> items, Score score) {
  std::sort(items.begin(), items.end(), [&](UserId a, UserId b) {
    const auto sa = score(a);
    const auto sb = score(b);
    return sa != sb ? sa > sb : a < b;
  });
  std::unordered_map<UserId, std::uint32_t> rank;
  for (std::size_t i = 0; i < items.size(); ++i) rank[items[i]] = static_cast<std::uint32_t>(i + 1);
  return rank;
}

// Competition ranks: 1 + number of entries strictly greater.
std::unordered_map<std::uint64_t, std::uint64_t> min_ranks(std::vector<std::uint64_t> values) {
  std::sort(values.begin(), values.end(), std::greater<>());
  std::unordered_map<std::uint64_t, std::uint64_t> rank;
  for (std::size_t i = 0; i < values.size(); ++i) rank.emplace(values[i], i + 1);
  return rank;
}

}  // namespace

double UserSampleStats::user_rate() const {
  if (n_c == 0) throw InvalidArgument("user rate undefined for n_c == 0");
  return static_cast<double>(n_s) / static_cast<double>(n_c);
}

std::vector<UserSampleStats> user_sample_stats(const StreamBundle& complete,
                                               const StreamBundle& sample) {
  std::map<UserId, UserSampleStats> stats;
  for (const auto& e : complete.events()) {
    auto& s = stats[e.user_id];
    s.user_id = e.user_id;
    ++s.n_c;
  }
  for (const auto& e : sample.events()) {
    auto& s = stats[e.user_id];
    s.user_id = e.user_id;
    ++s.n_s;
  }
  std::vector<UserSampleStats> out;
  out.reserve(stats.size());
  for (const auto& [id, s] : stats) {
    if (s.n_s > s.n_c) {
      throw DataError("user " + std::to_string(id) + " has more sample than complete events");
    }
    out.push_back(s);
  }
  return out;
}

TemporalRateProfile temporal_rates_from_messages(const StreamBundle& sample,
                                                 Granularity granularity) {
  std::map<int, double> delivered;
  std::map<int, double> missed;
  for (const auto& e : sample.events()) delivered[bucket_of(e.timestamp_ms, granularity)] += 1;

  std::uint64_t previous = 0;
  for (const auto& m : sample.messages()) {
    if (m.cumulative_missed < previous) {
      throw DataError("non-monotone counter; map messages into threads first");
    }
    missed[bucket_of(m.timestamp_ms, granularity)] +=
        static_cast<double>(m.cumulative_missed - previous);
    previous = m.cumulative_missed;
  }

  TemporalRateProfile profile;
  profile.granularity = granularity;
  profile.default_rate = 1.0;
  for (int b = 0; b < bucket_count(granularity); ++b) {
    const double d = delivered.contains(b) ? delivered[b] : 0.0;
    const double m = missed.contains(b) ? missed[b] : 0.0;
    if (d + m > 0) profile.rates[b] = d / (d + m);
  }
  return profile;
}

double corrected_volume(std::span<const Event> user_events, const TemporalRateProfile& profile) {
  double volume = 0;
  for (const auto& e : user_events) {
    volume += 1.0 / std::max(profile.rate_at(e.timestamp_ms), kRateFloor);
  }
  return volume;
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("kendall_tau_b: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw InvalidArgument("kendall_tau_b: need at least two items");
  double concordant = 0;
  double discordant = 0;
  double ties_x = 0;
  double ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ties_x += 1;
      } else if (dy == 0) {
        ties_y += 1;
      } else if ((dx > 0) == (dy > 0)) {
        concordant += 1;
      } else {
        discordant += 1;
      }
    }
  }
  const double denom = std::sqrt((concordant + discordant + ties_x) *
                                 (concordant + discordant + ties_y));
  if (denom == 0) throw InvalidArgument("kendall_tau_b: undefined for constant input");
  return (concordant - discordant) / denom;
}

double kendall_tau(std::span<const std::uint64_t> order_a, std::span<const std::uint64_t> order_b) {
  if (order_a.size() != order_b.size()) throw InvalidArgument("mismatched element sets");
  std::unordered_map<std::uint64_t, double> pos_b;
  for (std::size_t i = 0; i < order_b.size(); ++i) {
    if (!pos_b.emplace(order_b[i], static_cast<double>(i)).second) {
      throw InvalidArgument("duplicate element in ranking");
    }
  }
  std::vector<double> x;
  std::vector<double> y;
  std::unordered_set<std::uint64_t> seen;
  for (std::size_t i = 0; i < order_a.size(); ++i) {
    auto it = pos_b.find(order_a[i]);
    if (it == pos_b.end() || !seen.insert(order_a[i]).second) {
      throw InvalidArgument("mismatched element sets");
    }
    x.push_back(static_cast<double>(i));
    y.push_back(it->second);
  }
  return kendall_tau_b(x, y);
}

RankReport top_k_rank_table(const StreamBundle& complete, const StreamBundle& sample,
                            const TemporalRateProfile& profile, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  RankReport report;

  const auto n_c = counts_by_user(complete.events());
  const auto n_s = counts_by_user(sample.events());
  std::unordered_map<UserId, double> volume;
  for (const auto& e : sample.events()) {
    volume[e.user_id] += 1.0 / std::max(profile.rate_at(e.timestamp_ms), kRateFloor);
  }

  std::vector<UserId> users;
  users.reserve(n_s.size());
  for (const auto& [u, c] : n_s) users.push_back(u);
  std::sort(users.begin(), users.end(), [&](UserId a, UserId b) {
    const auto ca = n_s.at(a);
    const auto cb = n_s.at(b);
    return ca != cb ? ca > cb : a < b;
  });
  if (users.size() < k) {
    report.warnings.push_back("only " + std::to_string(users.size()) +
                              " users observed; table shrunk from k=" + std::to_string(k));
    k = users.size();
  }
  users.resize(k);

  auto complete_count = [&](UserId u) {
    auto it = n_c.find(u);
    return it == n_c.end() ? std::uint64_t{0} : it->second;
  };
  const auto true_rank = rank_by(users, complete_count);
  const auto est_rank = rank_by(users, [&](UserId u) { return volume.at(u); });

  std::vector<double> observed;
  std::vector<double> truth;
  std::vector<double> estimated;
  for (std::size_t i = 0; i < users.size(); ++i) {
    const UserId u = users[i];
    RankRow row;
    row.entity = u;
    row.observed_rank = static_cast<std::uint32_t>(i + 1);
    row.true_rank = true_rank.at(u);
    row.estimated_rank = est_rank.at(u);
    row.n_s = n_s.at(u);
    row.n_c = complete_count(u);
    row.estimated_volume = volume.at(u);
    report.rows.push_back(row);
    observed.push_back(row.observed_rank);
    truth.push_back(row.true_rank);
    estimated.push_back(row.estimated_rank);
  }
  if (users.size() >= 2) {
    report.kendall_observed = kendall_tau_b(observed, truth);
    report.kendall_estimated = kendall_tau_b(estimated, truth);
  } else {
    report.kendall_observed = report.kendall_estimated = 1.0;
  }
  return report;
}

std::vector<PercentileRow> rank_percentiles(
    const std::unordered_map<UserId, std::uint64_t>& complete_counts,
    const std::unordered_map<UserId, std::uint64_t>& sample_counts) {
  if (complete_counts.empty()) throw InvalidArgument("rank_percentiles: empty population");
  const double population = static_cast<double>(complete_counts.size());

  std::vector<std::uint64_t> complete_values;
  std::vector<std::uint64_t> sample_values;
  for (const auto& [u, c] : complete_counts) {
    complete_values.push_back(c);
    auto it = sample_counts.find(u);
    sample_values.push_back(it == sample_counts.end() ? 0 : it->second);
  }
  const auto true_rank = min_ranks(complete_values);
  const auto observed_rank = min_ranks(sample_values);

  struct Acc {
    std::uint64_t n = 0;
    double sum = 0;
    double sum_sq = 0;
  };
  std::map<std::uint64_t, Acc> groups;
  for (std::size_t i = 0; i < complete_values.size(); ++i) {
    const double p = static_cast<double>(observed_rank.at(sample_values[i])) / population;
    auto& g = groups[complete_values[i]];
    ++g.n;
    g.sum += p;
    g.sum_sq += p * p;
  }

  std::vector<PercentileRow> out;
  for (const auto& [c, g] : groups) {
    PercentileRow row;
    row.n_c = c;
    row.users = g.n;
    row.true_percentile = static_cast<double>(true_rank.at(c)) / population;
    row.observed_mean = g.sum / static_cast<double>(g.n);
    const double var = g.sum_sq / static_cast<double>(g.n) - row.observed_mean * row.observed_mean;
    row.observed_sd = std::sqrt(std::max(0.0, var));
    out.push_back(row);
  }
  return out;
}

}  // namespace streamfid::ranking
