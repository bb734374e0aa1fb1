#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "gamette/numkit/hcluster.hpp"
#include "gamette/numkit/pca.hpp"
#include "gamette/seqtype.hpp"

namespace {

std::vector<gamette::seqtype::ModeSequence> mode_sequences(std::size_t n) {
  static const char* modes[] = {"P2", "P1", "C", "N1", "N2"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 4);
  std::vector<gamette::seqtype::ModeSequence> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].player_id = "p" + std::to_string(i);
    for (int t = 0; t < 36; ++t) out[i].labels.emplace_back(modes[t < 10 ? 2 : pick(rng)]);
  }
  return out;
}

gamette::numkit::Matrix points(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  gamette::numkit::Matrix m(n, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = g(rng);
  return m;
}

void BM_LcpDistances(benchmark::State& state) {
  const auto seqs = mode_sequences(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gamette::seqtype::lcp_distances(seqs));
}
BENCHMARK(BM_LcpDistances)->Arg(100)->Arg(400);

void BM_WardLinkage(benchmark::State& state) {
  const auto data = points(static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state)
    benchmark::DoNotOptimize(gamette::numkit::hcluster_points(data, gamette::numkit::Linkage::Ward));
}
BENCHMARK(BM_WardLinkage)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_Pca(benchmark::State& state) {
  const auto data = points(500, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gamette::numkit::pca(data));
}
BENCHMARK(BM_Pca)->Arg(6)->Arg(20);

}  // namespace
