#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "streamfid/bowtie.hpp"
#include "streamfid/cascade.hpp"
#include "streamfid/entity.hpp"
#include "streamfid/graph.hpp"
#include "streamfid/ranking.hpp"
#include "streamfid/ratelimit.hpp"
#include "streamfid/simulate.hpp"

namespace {

using namespace streamfid;

const StreamBundle& stream(double seconds) {
  static std::map<double, StreamBundle> cache;
  auto it = cache.find(seconds);
  if (it == cache.end()) {
    sim::GeneratorConfig c;
    c.duration_s = seconds;
    c.base_rate = 100;
    c.seed = 42;
    it = cache.emplace(seconds, sim::generate_stream(c)).first;
  }
  return it->second;
}

void BM_GenerateStream(benchmark::State& state) {
  sim::GeneratorConfig c;
  c.duration_s = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sim::generate_stream(c));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(c.duration_s * c.base_rate));
}
BENCHMARK(BM_GenerateStream)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_RateLimitedSample(benchmark::State& state) {
  const auto& events = stream(static_cast<double>(state.range(0))).events();
  for (auto _ : state) benchmark::DoNotOptimize(sim::rate_limited_sample(events));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_RateLimitedSample)->Arg(600)->Arg(3600)->Unit(benchmark::kMillisecond);

void BM_SegmentAndEstimate(benchmark::State& state) {
  const auto& complete = stream(static_cast<double>(state.range(0)));
  auto rl = sim::rate_limited_sample(complete.events());
  const StreamBundle sample(std::move(rl.events), std::move(rl.messages));
  for (auto _ : state) {
    const auto segs = ratelimit::segment_stream(complete, sample);
    benchmark::DoNotOptimize(ratelimit::validate(segs));
  }
}
BENCHMARK(BM_SegmentAndEstimate)->Arg(600)->Arg(3600)->Unit(benchmark::kMillisecond);

void BM_MapThreads(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<std::uint64_t> values;
  std::vector<std::uint64_t> next{3'000'000, 2'000'000, 1'000'000, 0};
  for (std::int64_t i = 0; i < state.range(0); ++i) {
    auto& c = next[rng() % next.size()];
    c += 1 + rng() % 5;
    values.push_back(c);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ratelimit::map_threads(values));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MapThreads)->Arg(1'000)->Arg(100'000);

void BM_Inversion(benchmark::State& state) {
  const auto k_max = static_cast<std::uint32_t>(state.range(0));
  FrequencyVector f;
  for (std::uint32_t k = 1; k <= k_max; ++k) f.counts[k] = 1e5 / (static_cast<double>(k) * k);
  const auto sample = entity::forward_sample_model(f, 0.5272, k_max);
  entity::InversionOptions opt;
  opt.k_max = k_max;
  opt.max_iterations = 1'000'000;
  for (auto _ : state)
    benchmark::DoNotOptimize(entity::estimate_complete_frequency_vector(sample, 0.5272, opt));
}
BENCHMARK(BM_Inversion)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_FrequencyVector(benchmark::State& state) {
  const auto& events = stream(600).events();
  for (auto _ : state) {
    benchmark::DoNotOptimize(entity::frequency_vector_of(events, entity::EntityKey::hashtag));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(events.size()));
}
BENCHMARK(BM_FrequencyVector)->Unit(benchmark::kMillisecond);

void BM_KendallTauB(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng() % 1000);
    y[i] = x[i] + static_cast<double>(rng() % 300);
  }
  for (auto _ : state) benchmark::DoNotOptimize(ranking::kendall_tau_b(x, y));
}
BENCHMARK(BM_KendallTauB)->Arg(100)->Arg(10'000);

void BM_Bowtie(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto n = static_cast<std::uint64_t>(state.range(0));
  graph::Digraph g;
  g.nodes.resize(n);
  std::iota(g.nodes.begin(), g.nodes.end(), 0);
  for (std::uint64_t i = 0; i < 2 * n; ++i) {
    const auto a = rng() % n;
    const auto b = rng() % n;
    if (a != b) g.edges[{a, b}] = 1;
  }
  for (auto _ : state) benchmark::DoNotOptimize(graph::bowtie_decompose(g));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Bowtie)->Arg(10'000)->Arg(200'000)->Unit(benchmark::kMillisecond);

void BM_SpectralCocluster(benchmark::State& state) {
  const auto g = graph::build_bipartite(stream(static_cast<double>(state.range(0))).events());
  for (auto _ : state) benchmark::DoNotOptimize(graph::spectral_cocluster(g, 8, 1));
  state.counters["nodes"] = static_cast<double>(g.node_count());
}
BENCHMARK(BM_SpectralCocluster)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_CascadeCompare(benchmark::State& state) {
  const auto& complete = stream(static_cast<double>(state.range(0)));
  const auto sample = sim::bernoulli_sample(complete.events(), 0.5, 1);
  for (auto _ : state) {
    const auto cc = cascade::reconstruct_cascades(complete.events());
    const auto sc = cascade::reconstruct_cascades(sample);
    benchmark::DoNotOptimize(cascade::compare_cascades(cc, sc));
  }
}
BENCHMARK(BM_CascadeCompare)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
