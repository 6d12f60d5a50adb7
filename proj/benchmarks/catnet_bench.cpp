#include <benchmark/benchmark.h>

#include "ctxrec/catnet/attention.hpp"
#include "ctxrec/catnet/model.hpp"
#include "ctxrec/catnet/preprocess.hpp"

namespace {

using namespace ctxrec;
using namespace ctxrec::catnet;

void BM_Attention(benchmark::State& state) {
  const int L = static_cast<int>(state.range(0));
  const int D = static_cast<int>(state.range(1));
  const int n = 512;
  Rng rng(1);
  const Eigen::MatrixXd features = Eigen::MatrixXd::Random(D, L);
  const Eigen::VectorXd h = Eigen::VectorXd::Random(n);
  const auto params = AttentionParams::random(L, D, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(attend(features, h, params));
}
BENCHMARK(BM_Attention)->Args({16, 8})->Args({625, 512});

ModelConfig bench_config(int input) {
  ModelConfig c;
  c.input_size = input;
  c.backbone = BackboneSpec::toy(8, 16);
  c.hidden = 32;
  c.classes = {"a", "b", "c", "d", "e", "f", "g", "h"};
  return c;
}

ScheduledInput bench_input(const ModelConfig& c) {
  StreamInput in;
  in.context = Tensor(3, c.input_size, c.input_size);
  in.object = Tensor(3, c.input_size, c.input_size);
  Rng rng(2);
  for (auto* t : {&in.context, &in.object}) {
    for (Eigen::Index i = 0; i < t->data.size(); ++i) t->data.data()[i] = rng.uniform(-0.5, 0.5);
  }
  return ScheduledInput::repeat(std::move(in), c.steps);
}

void BM_Forward(benchmark::State& state) {
  const CatNet net(bench_config(static_cast<int>(state.range(0))), 3);
  const auto input = bench_input(net.config());
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(input));
}
BENCHMARK(BM_Forward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_LossAndGradient(benchmark::State& state) {
  const CatNet net(bench_config(static_cast<int>(state.range(0))), 3);
  const auto input = bench_input(net.config());
  Parameters grad = net.zero_like();
  for (auto _ : state) benchmark::DoNotOptimize(net.loss_and_gradient(input, 1, grad));
}
BENCHMARK(BM_LossAndGradient)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
