#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "vsir/loglinear.hpp"
#include "vsir/lse.hpp"
#include "vsir/nvsm.hpp"
#include "vsir/retrieval.hpp"

using namespace vsir;

namespace {

Batch random_batch(std::size_t vocab, std::size_t objects, std::size_t n, std::size_t m, Rng& rng) {
  Batch b;
  b.n = n;
  for (std::size_t i = 0; i < m * n; ++i) b.tokens.push_back(static_cast<TokenId>(2 + rng() % (vocab - 2)));
  for (std::size_t i = 0; i < m; ++i) b.targets.push_back(rng() % objects);
  return b;
}

void BM_NvsmBatchLoss(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto p = nvsm::init_params(5000, 2000, 64, 32, rng);
  const auto b = random_batch(5000, 2000, 4, m, rng);
  const auto negs = sample_negatives(m, 10, 2000, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nvsm::batch_loss(b, p, negs, 0.01).loss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_NvsmBatchLoss)->Arg(256)->Arg(1024);

void BM_LseBatchLoss(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const auto p = lse::init_params(5000, 500, 64, 32, rng);
  const auto b = random_batch(5000, 500, 4, m, rng);
  const auto negs = sample_negatives(m, 10, 500, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lse::batch_loss(b, p, negs, 0.01).loss);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_LseBatchLoss)->Arg(256)->Arg(1024);

void BM_RankDocuments(benchmark::State& state) {
  const auto docs = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const auto p = nvsm::init_params(1000, docs, 64, 32, rng);
  std::vector<std::string> ids;
  for (std::size_t d = 0; d < docs; ++d) ids.push_back("d" + std::to_string(d));
  const std::vector<TokenId> q{5, 17, 42};
  for (auto _ : state) benchmark::DoNotOptimize(rank_documents(p, ids, q, "q", 1000));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(docs));
}
BENCHMARK(BM_RankDocuments)->Arg(10000)->Arg(100000);

void BM_QueryPosterior(benchmark::State& state) {
  Rng rng(4);
  const auto p = loglinear::init_params(5000, static_cast<std::size_t>(state.range(0)), 64, rng);
  const std::vector<TokenId> q{5, 17, 42, 99};
  for (auto _ : state) benchmark::DoNotOptimize(loglinear::query_posterior(q, p));
}
BENCHMARK(BM_QueryPosterior)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
