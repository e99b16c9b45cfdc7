#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "streamfid/model.hpp"

namespace streamfid::entity {

// Finite discrete distribution on a sorted integer support.
struct DiscreteDistribution {
  std::vector<std::int64_t> support;
  std::vector<double> probabilities;

  double mean() const;
  // Pr(X <= x).
  double cdf(std::int64_t x) const;
  // Throws InvalidArgument unless the support is sorted, probabilities are
  // non-negative and they sum to 1 within 1e-9.
  void check() const;
};

// Largest absolute CDF gap over the union of both supports.
double ks_d_statistic(const DiscreteDistribution& g, const DiscreteDistribution& h);

// Sample count of an entity seen `n_c` times in the complete stream, when
// each occurrence is kept independently with probability `rate`.
DiscreteDistribution binomial_sample_model(std::uint32_t n_c, double rate);

struct NegativeBinomialModel {
  DiscreteDistribution distribution;  // renormalized over [n_s, k_max]
  double truncation_mass = 0;         // mass beyond k_max before renormalizing
  bool truncation_warning = false;    // truncation_mass > 0.01
  double truncated_mean = 0;
  double untruncated_mean = 0;  // n_s / rate
};

// Complete count of an entity observed `n_s` times in the sample.
NegativeBinomialModel negbinom_complete_model(std::uint32_t n_s, double rate,
                                              std::uint32_t k_max);

struct InversionOptions {
  std::uint32_t k_max = 100;
  double tolerance = 1e-8;  // on the residual relative to ||F||, or the projected step relative to ||x||
  int max_iterations = 10'000;
};

struct InversionResult {
  FrequencyVector f_hat;
  double residual_norm = 0;
  int iterations = 0;
  double clamped_entities = 0;  // sample entities with frequency above k_max
  std::vector<std::string> warnings;
};

// Expected sample frequency vector of a complete one: the forward model
// F[n_s] = sum_{k >= n_s} Pr(n_s | k, rate) * F_complete[k], for n_s in [1, k_max].
FrequencyVector forward_sample_model(const FrequencyVector& f_complete, double rate,
                                     std::uint32_t k_max);

// Recovers the complete frequency vector from the sample one by least squares
// against the forward model, constrained to be non-negative and
// non-increasing. Throws ConvergenceError after max_iterations.
InversionResult estimate_complete_frequency_vector(const FrequencyVector& f_sample, double rate,
                                                   const InversionOptions& options = {});

// Expected number of entities with no occurrence in the sample:
// sum_k (1 - rate)^k * f_hat[k].
double estimate_missing_entities(const FrequencyVector& f_hat, double rate);

enum class EntityKey : std::uint8_t { user, hashtag, url };

std::string_view to_string(EntityKey key) noexcept;
EntityKey parse_entity_key(std::string_view name);

// Single-pass accumulator behind frequency_vector_of; memory grows with the
// number of distinct entities, not events.
class FrequencyCounter {
 public:
  explicit FrequencyCounter(EntityKey key) : key_(key) {}
  void add(const Event& event);
  FrequencyVector result() const;

 private:
  EntityKey key_;
  std::unordered_map<UserId, std::uint32_t> per_user_;
  std::unordered_map<std::string, std::uint32_t> per_tag_;
};

// Occurrences per entity, then a histogram of those counts. An event counts
// each distinct hashtag (or url) it carries once.
FrequencyVector frequency_vector_of(std::span<const Event> events, EntityKey key);

// Distribution of per-entity counts described by a frequency vector, with
// `zero_count` extra entities at frequency 0.
DiscreteDistribution to_distribution(const FrequencyVector& f, double zero_count = 0);

}  // namespace streamfid::entity
