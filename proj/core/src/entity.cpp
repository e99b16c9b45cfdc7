#include "streamfid/entity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "streamfid/error.hpp"

namespace streamfid::entity {

namespace {

void check_rate(double rate) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("rate must be in (0,1]");
}

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Pr(successes | trials, rate) of the binomial law.
double binomial_pmf(std::uint32_t successes, std::uint32_t trials, double rate) {
  if (successes > trials) return 0.0;
  if (rate == 1.0) return successes == trials ? 1.0 : 0.0;
  const double s = successes;
  const double n = trials;
  return std::exp(log_choose(n, s) + s * std::log(rate) + (n - s) * std::log1p(-rate));
}

// Projection onto {x : x[0] >= x[1] >= ... , x >= 0}: pool adjacent
// violators for the order, then clip at zero.
void project_nonincreasing_nonnegative(std::vector<double>& x) {
  struct Block {
    double sum;
    std::size_t len;
    double mean() const { return sum / static_cast<double>(len); }
  };
  std::vector<Block> blocks;
  blocks.reserve(x.size());
  for (double v : x) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
      auto top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().len += top.len;
    }
  }
  std::size_t i = 0;
  for (const auto& b : blocks) {
    const double m = std::max(0.0, b.mean());
    for (std::size_t j = 0; j < b.len; ++j) x[i++] = m;
  }
}

// Dense upper-triangular forward operator, row-major K x K.
struct ForwardOperator {
  std::size_t k;
  std::vector<double> a;

  ForwardOperator(std::size_t k_max, double rate) : k(k_max), a(k_max * k_max, 0.0) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) {
        a[i * k + j] = binomial_pmf(static_cast<std::uint32_t>(i + 1),
                                    static_cast<std::uint32_t>(j + 1), rate);
      }
    }
  }

  void apply(const std::vector<double>& x, std::vector<double>& out) const {
    for (std::size_t i = 0; i < k; ++i) {
      double s = 0;
      for (std::size_t j = i; j < k; ++j) s += a[i * k + j] * x[j];
      out[i] = s;
    }
  }

  void apply_transpose(const std::vector<double>& y, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) out[j] += a[i * k + j] * y[i];
    }
  }

  // Largest eigenvalue of A^T A by power iteration.
  double lipschitz() const {
    std::vector<double> v(k, 1.0 / std::sqrt(static_cast<double>(k)));
    std::vector<double> av(k);
    std::vector<double> w(k);
    double lambda = 0;
    for (int it = 0; it < 500; ++it) {
      apply(v, av);
      apply_transpose(av, w);
      const double norm = std::sqrt(std::inner_product(w.begin(), w.end(), w.begin(), 0.0));
      if (norm == 0) return 1.0;
      for (std::size_t i = 0; i < k; ++i) v[i] = w[i] / norm;
      if (std::abs(norm - lambda) <= 1e-12 * norm) {
        lambda = norm;
        break;
      }
      lambda = norm;
    }
    return lambda;
  }
};

double norm2(const std::vector<double>& v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

}  // namespace

double DiscreteDistribution::mean() const {
  double m = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    m += static_cast<double>(support[i]) * probabilities[i];
  }
  return m;
}

double DiscreteDistribution::cdf(std::int64_t x) const {
  double c = 0;
  for (std::size_t i = 0; i < support.size() && support[i] <= x; ++i) c += probabilities[i];
  return std::min(c, 1.0);
}

void DiscreteDistribution::check() const {
  if (support.size() != probabilities.size()) {
    throw InvalidArgument("support and probabilities differ in length");
  }
  if (!std::is_sorted(support.begin(), support.end()) ||
      std::adjacent_find(support.begin(), support.end()) != support.end()) {
    throw InvalidArgument("support must be strictly increasing");
  }
  double total = 0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw InvalidArgument("negative probability mass");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("probabilities do not sum to 1");
}

double ks_d_statistic(const DiscreteDistribution& g, const DiscreteDistribution& h) {
  // Merge walk over the union support accumulating both CDFs.
  std::size_t i = 0;
  std::size_t j = 0;
  double cg = 0;
  double ch = 0;
  double d = 0;
  while (i < g.support.size() || j < h.support.size()) {
    std::int64_t x;
    if (j == h.support.size() || (i < g.support.size() && g.support[i] <= h.support[j])) {
      x = g.support[i];
    } else {
      x = h.support[j];
    }
    while (i < g.support.size() && g.support[i] == x) cg += g.probabilities[i++];
    while (j < h.support.size() && h.support[j] == x) ch += h.probabilities[j++];
    d = std::max(d, std::abs(cg - ch));
  }
  return std::min(d, 1.0);
}

DiscreteDistribution binomial_sample_model(std::uint32_t n_c, double rate) {
  check_rate(rate);
  if (n_c == 0) throw InvalidArgument("n_c must be >= 1");
  DiscreteDistribution d;
  d.support.resize(n_c + 1);
  d.probabilities.resize(n_c + 1);
  double total = 0;
  for (std::uint32_t s = 0; s <= n_c; ++s) {
    d.support[s] = s;
    d.probabilities[s] = binomial_pmf(s, n_c, rate);
    total += d.probabilities[s];
  }
  // Absorb rounding so the pmf sums to 1 to machine precision.
  for (auto& p : d.probabilities) p /= total;
  return d;
}

NegativeBinomialModel negbinom_complete_model(std::uint32_t n_s, double rate,
                                              std::uint32_t k_max) {
  check_rate(rate);
  if (n_s == 0) throw InvalidArgument("n_s must be >= 1");
  if (k_max < n_s) throw InvalidArgument("k_max must be >= n_s");

  NegativeBinomialModel m;
  auto& d = m.distribution;
  const double s = n_s;
  double total = 0;
  for (std::uint32_t n = n_s; n <= k_max; ++n) {
    double p;
    if (rate == 1.0) {
      p = n == n_s ? 1.0 : 0.0;
    } else {
      p = std::exp(log_choose(n - 1.0, s - 1.0) + s * std::log(rate) +
                   (static_cast<double>(n) - s) * std::log1p(-rate));
    }
    d.support.push_back(n);
    d.probabilities.push_back(p);
    total += p;
  }
  m.truncation_mass = std::max(0.0, 1.0 - total);
  m.truncation_warning = m.truncation_mass > 0.01;
  for (auto& p : d.probabilities) p /= total;
  m.truncated_mean = d.mean();
  m.untruncated_mean = s / rate;
  return m;
}

FrequencyVector forward_sample_model(const FrequencyVector& f_complete, double rate,
                                     std::uint32_t k_max) {
  check_rate(rate);
  FrequencyVector out;
  for (std::uint32_t s = 1; s <= k_max; ++s) {
    double v = 0;
    for (auto it = f_complete.counts.lower_bound(s); it != f_complete.counts.end(); ++it) {
      v += binomial_pmf(s, it->first, rate) * it->second;
    }
    if (v != 0.0) out.counts[s] = v;
  }
  return out;
}

InversionResult estimate_complete_frequency_vector(const FrequencyVector& f_sample, double rate,
                                                   const InversionOptions& options) {
  check_rate(rate);
  if (options.k_max == 0) throw InvalidArgument("k_max must be >= 1");
  const std::size_t k = options.k_max;

  InversionResult result;
  std::vector<double> f(k, 0.0);
  for (const auto& [key, count] : f_sample.counts) {
    if (key == 0) throw InvalidArgument("frequency vector keys must be >= 1");
    if (count < 0) throw InvalidArgument("frequency vector counts must be >= 0");
    if (key > options.k_max) {
      f[k - 1] += count;
      result.clamped_entities += count;
    } else {
      f[key - 1] += count;
    }
  }
  if (result.clamped_entities > 0) {
    result.warnings.push_back(std::to_string(static_cast<std::uint64_t>(result.clamped_entities)) +
                              " entities above k_max clamped into bin " +
                              std::to_string(options.k_max));
  }

  const double f_norm = norm2(f);
  if (f_norm == 0.0) return result;

  const ForwardOperator op(k, rate);
  const double step = 1.0 / op.lipschitz();

  // Accelerated projected gradient with adaptive restart.
  std::vector<double> x(k, 0.0), x_next(k), y(k, 0.0), ay(k), grad(k), ax(k);
  double t = 1.0;
  double residual = f_norm;
  bool converged = false;
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    op.apply(y, ay);
    for (std::size_t i = 0; i < k; ++i) ay[i] -= f[i];
    op.apply_transpose(ay, grad);
    for (std::size_t i = 0; i < k; ++i) x_next[i] = y[i] - step * grad[i];
    project_nonincreasing_nonnegative(x_next);

    op.apply(x_next, ax);
    for (std::size_t i = 0; i < k; ++i) ax[i] -= f[i];
    const double next_residual = norm2(ax);

    // Gradient-mapping norm; zero only at the constrained minimiser.
    double mapping = 0;
    for (std::size_t i = 0; i < k; ++i) mapping += (y[i] - x_next[i]) * (y[i] - x_next[i]);
    mapping = std::sqrt(mapping);

    double momentum_dot = 0;
    for (std::size_t i = 0; i < k; ++i) momentum_dot += (y[i] - x_next[i]) * (x_next[i] - x[i]);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if (momentum_dot > 0) {
      t = 1.0;
      y = x_next;
    } else {
      const double beta = (t - 1.0) / t_next;
      for (std::size_t i = 0; i < k; ++i) y[i] = x_next[i] + beta * (x_next[i] - x[i]);
      t = t_next;
    }
    x.swap(x_next);
    residual = next_residual;
    if (residual <= options.tolerance * f_norm || mapping <= options.tolerance * norm2(x)) {
      converged = true;
      ++it;
      break;
    }
  }
  result.iterations = it;
  result.residual_norm = residual;
  if (!converged) {
    throw ConvergenceError("frequency vector inversion did not converge", residual);
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (x[i] > 0) result.f_hat.counts[static_cast<std::uint32_t>(i + 1)] = x[i];
  }
  return result;
}

double estimate_missing_entities(const FrequencyVector& f_hat, double rate) {
  check_rate(rate);
  double missing = 0;
  for (const auto& [k, count] : f_hat.counts) {
    missing += std::pow(1.0 - rate, static_cast<double>(k)) * count;
  }
  return missing;
}

std::string_view to_string(EntityKey key) noexcept {
  switch (key) {
    case EntityKey::user:
      return "user";
    case EntityKey::hashtag:
      return "hashtag";
    case EntityKey::url:
      return "url";
  }
  return "user";
}

EntityKey parse_entity_key(std::string_view name) {
  for (auto k : {EntityKey::user, EntityKey::hashtag, EntityKey::url}) {
    if (to_string(k) == name) return k;
  }
  throw InvalidArgument("unknown entity key '" + std::string(name) + "'");
}

void FrequencyCounter::add(const Event& event) {
  if (key_ == EntityKey::user) {
    ++per_user_[event.user_id];
    return;
  }
  const auto& tags = key_ == EntityKey::hashtag ? event.hashtags : event.urls;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (std::find(tags.begin(), tags.begin() + static_cast<std::ptrdiff_t>(i), tags[i]) ==
        tags.begin() + static_cast<std::ptrdiff_t>(i)) {
      ++per_tag_[tags[i]];
    }
  }
}

FrequencyVector FrequencyCounter::result() const {
  FrequencyVector f;
  for (const auto& [entity, n] : per_user_) f.counts[n] += 1.0;
  for (const auto& [entity, n] : per_tag_) f.counts[n] += 1.0;
  return f;
}

FrequencyVector frequency_vector_of(std::span<const Event> events, EntityKey key) {
  FrequencyCounter counter(key);
  for (const auto& e : events) counter.add(e);
  return counter.result();
}

DiscreteDistribution to_distribution(const FrequencyVector& f, double zero_count) {
  DiscreteDistribution d;
  const double total = f.entities() + zero_count;
  if (total <= 0) throw InvalidArgument("empty frequency vector");
  if (zero_count > 0) {
    d.support.push_back(0);
    d.probabilities.push_back(zero_count / total);
  }
  for (const auto& [k, c] : f.counts) {
    if (c <= 0) continue;
    d.support.push_back(k);
    d.probabilities.push_back(c / total);
  }
  return d;
}

}  // namespace streamfid::entity
