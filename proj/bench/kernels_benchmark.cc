// Copyright 2026 The Bisec-BiO Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial vs OpenMP kernels. Args are {rows, cols}.

#include <benchmark/benchmark.h>

#include "bisecbio/data.h"
#include "bisecbio/kernels.h"

namespace bisecbio {
namespace {

struct Fixture {
  kernels::DenseMatrix a;
  Vector x, r, labels, ax;
  Fixture(int m, int n) : a(m, n), x(n), r(m), labels(m), ax(m) {
    Rng rng(1);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = rng.Normal();
      r[i] = rng.Normal();
      labels[i] = rng.Uniform() < 0.5 ? -1.0 : 1.0;
      ax[i] = rng.Normal();
    }
    for (double& v : x) v = rng.Normal();
  }
};

template <bool kParallel>
void BM_MatVec(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  Vector out(f.a.rows());
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::parallel::MatVec(f.a, f.x, out);
    } else {
      kernels::serial::MatVec(f.a, f.x, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_MatTVec(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  Vector out(f.a.cols());
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::parallel::MatTVec(f.a, f.r, out);
    } else {
      kernels::serial::MatTVec(f.a, f.r, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool kParallel>
void BM_Gram(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    kernels::DenseMatrix g = kParallel ? kernels::parallel::Gram(f.a)
                                       : kernels::serial::Gram(f.a);
    benchmark::DoNotOptimize(g(0, 0));
  }
}

template <bool kParallel>
void BM_LogisticTerms(benchmark::State& state) {
  Fixture f(static_cast<int>(state.range(0)), 1);
  Vector loss(f.ax.size()), weight(f.ax.size());
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::parallel::LogisticTerms(f.ax, f.labels, loss, weight);
    } else {
      kernels::serial::LogisticTerms(f.ax, f.labels, loss, weight);
    }
    benchmark::DoNotOptimize(loss.data());
  }
}

#define BISECBIO_SIZES ->Args({200, 100})->Args({2000, 1000})->Args({8000, 2000})

BENCHMARK(BM_MatVec<false>) BISECBIO_SIZES;
BENCHMARK(BM_MatVec<true>) BISECBIO_SIZES;
BENCHMARK(BM_MatTVec<false>) BISECBIO_SIZES;
BENCHMARK(BM_MatTVec<true>) BISECBIO_SIZES;
BENCHMARK(BM_Gram<false>)->Args({200, 100})->Args({2000, 300});
BENCHMARK(BM_Gram<true>)->Args({200, 100})->Args({2000, 300});
BENCHMARK(BM_LogisticTerms<false>)->Args({1000, 1})->Args({1000000, 1});
BENCHMARK(BM_LogisticTerms<true>)->Args({1000, 1})->Args({1000000, 1});

}  // namespace
}  // namespace bisecbio

BENCHMARK_MAIN();
