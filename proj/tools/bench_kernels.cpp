// Times the serial reference kernels against the OpenMP variants and checks
// that both produce identical bytes.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "kgalign/kernels.hpp"
#include "kgalign/kg_data.hpp"
#include "kgalign/ppr.hpp"
#include "kgalign/rng.hpp"
#include "kgalign/sinkhorn.hpp"
#include "kgalign/tensor.hpp"

using namespace kgalign;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(
             clock::now().time_since_epoch())
      .count();
}

template <class F>
double time_ms(F&& f, int reps) {
  // One warmup, then best of reps.
  f();
  double best = 1e30;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_ms();
    f();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void report(const std::string& name, const std::string& size, double serial,
            double parallel, double diff) {
  std::printf("%-18s %-20s %10.2f %12.2f %9.2fx %9.1e\n", name.c_str(),
              size.c_str(), serial, parallel, serial / parallel, diff);
}

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t scale = 512;
  if (argc > 1) scale = static_cast<std::size_t>(std::stoul(argv[1]));
  const int reps = 3;
  Rng rng(7);

  std::printf("threads: %d, scale: %zu\n", kernels::max_threads(), scale);
  std::printf("%-18s %-20s %10s %12s %10s %9s\n", "kernel", "size",
              "serial_ms", "parallel_ms", "speedup", "max_diff");

  {
    const std::size_t n = scale;
    auto a = random_values(n * n, rng);
    auto b = random_values(n * n, rng);
    std::vector<double> c1(n * n), c2(n * n);
    const double ts = time_ms(
        [&] { kernels::matmul_serial(a.data(), false, b.data(), false,
                                     c1.data(), n, n, n); },
        reps);
    const double tp = time_ms(
        [&] { kernels::matmul(a.data(), false, b.data(), false, c2.data(), n,
                              n, n); },
        reps);
    report("matmul", std::to_string(n) + "^3", ts, tp, max_abs_diff(c1, c2));
  }

  {
    const std::size_t n = scale, s = 64;
    auto t1 = random_values(n * s, rng);
    auto t2 = random_values(n * s, rng);
    for (auto& v : t1) v = std::abs(v);
    for (auto& v : t2) v = std::abs(v);
    std::vector<double> o1(n * n), o2(n * n);
    const double ts = time_ms(
        [&] { kernels::hos_matrix_serial(t1.data(), n, t2.data(), n, s,
                                         o1.data()); },
        reps);
    const double tp = time_ms(
        [&] { kernels::hos_matrix(t1.data(), n, t2.data(), n, s, o2.data()); },
        reps);
    report("hos_matrix", std::to_string(n) + "x" + std::to_string(n) + "xS64",
           ts, tp, max_abs_diff(o1, o2));
  }

  {
    const std::size_t n = 2 * scale;
    const std::size_t k = 10;
    auto s = random_values(n * n, rng);
    std::vector<double> r1(n), r2(n), c1(n), c2(n);
    const double ts = time_ms(
        [&] {
          kernels::topk_row_means_serial(s.data(), n, n, k, r1.data());
          kernels::topk_col_means_serial(s.data(), n, n, k, c1.data());
        },
        reps);
    const double tp = time_ms(
        [&] {
          kernels::topk_row_means(s.data(), n, n, k, r2.data());
          kernels::topk_col_means(s.data(), n, n, k, c2.data());
        },
        reps);
    report("csls_topk", std::to_string(n) + "x" + std::to_string(n) + " K10",
           ts, tp, std::max(max_abs_diff(r1, r2), max_abs_diff(c1, c2)));
  }

  {
    const std::size_t n = scale;
    Tensor cost(n, n);
    for (auto& v : cost.values) v = rng.uniform(0.0, 4.0);
    SinkhornResult s1, s2;
    const double ts = time_ms(
        [&] {
          kernels::set_exec_mode(kernels::ExecMode::Serial);
          s1 = sinkhorn_plan(cost, 0.05, 50, 0.0);
        },
        reps);
    const double tp = time_ms(
        [&] {
          kernels::set_exec_mode(kernels::ExecMode::Parallel);
          s2 = sinkhorn_plan(cost, 0.05, 50, 0.0);
        },
        reps);
    kernels::set_exec_mode(kernels::ExecMode::Parallel);
    report("sinkhorn_50it", std::to_string(n) + "x" + std::to_string(n), ts,
           tp, max_abs_diff(s1.plan.values, s2.plan.values));
  }

  {
    SyntheticSpec spec;
    spec.core_size = 4 * scale;
    spec.avg_degree = 6;
    spec.rng_seed = 3;
    auto corpus = generate_synthetic(spec);
    std::vector<LinkPair> seeds;
    for (std::size_t i = 0; i < 32; ++i) seeds.emplace_back(i, i);
    PPRConfig cfg;
    std::pair<Tensor, Tensor> v1, v2;
    const double ts = time_ms(
        [&] {
          kernels::set_exec_mode(kernels::ExecMode::Serial);
          v1 = score_vectors(corpus, seeds, cfg);
        },
        reps);
    const double tp = time_ms(
        [&] {
          kernels::set_exec_mode(kernels::ExecMode::Parallel);
          v2 = score_vectors(corpus, seeds, cfg);
        },
        reps);
    kernels::set_exec_mode(kernels::ExecMode::Parallel);
    report("score_vectors",
           "n=" + std::to_string(spec.core_size) + " S32", ts, tp,
           std::max(max_abs_diff(v1.first.values, v2.first.values),
                    max_abs_diff(v1.second.values, v2.second.values)));
  }

  return 0;
}
