#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::cascade {

// A root event and the events that retweet it.
struct Cascade {
  EventId root_id = 0;
  std::optional<Event> root;   // absent when the root was not observed
  std::vector<Event> retweets; // time ordered

  bool rootless() const noexcept { return !root.has_value(); }
  std::size_t size() const noexcept { return retweets.size() + (root ? 1 : 0); }
  TimestampMs start_ms() const;
};

struct CascadeOptions {
  bool include_quotes = false;
};

// Groups retweet events by root id and attaches the root when present; every
// root event opens a cascade even without retweets. Sorted by root id.
std::vector<Cascade> reconstruct_cascades(std::span<const Event> events,
                                          const CascadeOptions& options = {});

// Sum of follower counts over the retweets (the root author is excluded).
std::uint64_t potential_reach(const Cascade& cascade);

inline constexpr double kUnboundedWindow = -1.0;

// Sample reach over complete reach, both restricted to
// [root time, root time + window_s]; a negative window means unbounded.
// Returns nullopt for 0/0. Throws InvalidArgument on mismatched root ids.
std::optional<double> relative_potential_reach(const Cascade& sample, const Cascade& complete,
                                               double window_s);

struct InterArrivalOptions {
  bool include_root_gap = true;
  std::vector<double> grid_s;  // CCDF evaluation points; empty = observed values
};

struct CcdfPoint {
  double x = 0;
  double ccdf = 0;  // fraction of values >= x
};

struct InterArrivalDistribution {
  std::vector<double> deltas_s;  // pooled, sorted, rounded to 0.1 s
  std::vector<CcdfPoint> ccdf;
  std::optional<double> median_s;
  std::vector<double> per_cascade_median_s;
  std::vector<std::string> warnings;
};

// Pooled gaps between consecutive events within each cascade. Gaps are taken
// in milliseconds and reported in seconds at 0.1 s resolution.
InterArrivalDistribution inter_arrival_distribution(std::span<const Cascade> cascades,
                                                    const InterArrivalOptions& options = {});

// CCDF of arbitrary values over a grid (observed values when the grid is empty).
std::vector<CcdfPoint> ccdf_of(std::vector<double> values, std::span<const double> grid = {});

double quantile(std::span<const double> sorted, double q);

struct CascadeRow {
  EventId root_id = 0;
  std::size_t complete_size = 0;
  std::size_t sample_size = 0;  // 0 when the sample misses the root
  bool fully_observed = false;
  std::vector<std::optional<double>> relative_reach;  // one per window
};

struct CascadeSummary {
  std::size_t complete_cascades = 0;
  std::size_t sample_cascades = 0;
  std::size_t fully_observed = 0;
  std::size_t complete_large = 0;  // >= large_threshold retweets
  std::size_t sample_large = 0;
  std::size_t fully_observed_large = 0;
  double complete_mean_retweets = 0;
  double sample_mean_retweets = 0;
  std::optional<double> complete_median_inter_arrival_s;
  std::optional<double> sample_median_inter_arrival_s;
};

struct CompareOptions {
  std::size_t large_threshold = 50;
  std::size_t min_retweets = 1;  // complete cascades with fewer retweets are skipped
  std::vector<double> windows_s{600.0, 3600.0, kUnboundedWindow};
  InterArrivalOptions inter_arrival;
};

struct CascadeComparison {
  std::vector<CascadeRow> rows;
  CascadeSummary summary;
};

// Sample cascades are matched to complete ones by root id. A sample cascade
// whose root is missing is not observed at all. Throws InvalidArgument if the
// sample holds a root id the complete set lacks.
CascadeComparison compare_cascades(std::span<const Cascade> complete,
                                   std::span<const Cascade> sample,
                                   const CompareOptions& options = {});

}  // namespace streamfid::cascade
