#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::ranking {

// Floor applied to zero-rate buckets when inverting rates.
inline constexpr double kRateFloor = 1e-3;

struct UserSampleStats {
  UserId user_id = 0;
  std::uint64_t n_c = 0;
  std::uint64_t n_s = 0;
  double user_rate() const;  // n_s / n_c; throws when n_c == 0
};

// Per-user complete and sample counts, ordered by user id.
std::vector<UserSampleStats> user_sample_stats(const StreamBundle& complete,
                                               const StreamBundle& sample);

// Per-bucket keep rate delivered / (delivered + missed), where a message's
// counter increment is charged to the bucket holding its timestamp. Buckets
// without data fall back to rate 1. Throws DataError on a decreasing counter.
TemporalRateProfile temporal_rates_from_messages(const StreamBundle& sample,
                                                 Granularity granularity);

// Sum over the user's observed events of 1 / rate(bucket(event)).
double corrected_volume(std::span<const Event> user_events, const TemporalRateProfile& profile);

// Kendall tau-b between two score vectors over the same items (ties allowed).
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Kendall tau between two orderings of the same element set.
// Throws InvalidArgument when the element sets differ.
double kendall_tau(std::span<const std::uint64_t> order_a, std::span<const std::uint64_t> order_b);

struct RankRow {
  UserId entity = 0;
  std::uint32_t observed_rank = 0;
  std::uint32_t true_rank = 0;
  std::uint32_t estimated_rank = 0;
  std::uint64_t n_s = 0;
  std::uint64_t n_c = 0;
  double estimated_volume = 0;
};

struct RankReport {
  std::vector<RankRow> rows;  // ordered by observed rank
  double kendall_observed = 0;
  double kendall_estimated = 0;
  std::vector<std::string> warnings;
};

// Top-k users by sample count. Each rank column is a permutation of 1..k
// among those users (ties broken by user id); both tau values are measured
// against the true ranks.
RankReport top_k_rank_table(const StreamBundle& complete, const StreamBundle& sample,
                            const TemporalRateProfile& profile, std::size_t k);

struct PercentileRow {
  std::uint64_t n_c = 0;
  std::uint64_t users = 0;
  double true_percentile = 0;
  double observed_mean = 0;
  double observed_sd = 0;
};

// Universal rank percentiles grouped by complete count. A user's rank is one
// plus the number of users with a strictly larger count; percentile is rank
// over the population size, so smaller means higher ranked.
std::vector<PercentileRow> rank_percentiles(
    const std::unordered_map<UserId, std::uint64_t>& complete_counts,
    const std::unordered_map<UserId, std::uint64_t>& sample_counts);

}  // namespace streamfid::ranking
