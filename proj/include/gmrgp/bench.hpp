#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace gmrgp {

struct BenchConfig {
  std::vector<std::size_t> n_grid{100, 1000, 10000};  // demonstration points per cell
  std::vector<std::size_t> v_grid{3};                 // via-points per cell
  std::vector<std::string> methods{"gmr", "mogp", "gmr-gp"};
  std::size_t output_dim = 2;
  std::size_t components = 4;
  std::size_t repetitions = 30;  // timed batches per cell, >= 30
  std::size_t warmup = 5;        // untimed queries per cell, >= 5
  double min_batch_seconds = 1e-3;
  std::uint64_t seed = 0;
};

/// Per-query latency of one (method, N, V) cell.
struct BenchCell {
  std::string method;
  std::size_t n = 0;
  std::size_t v = 0;
  std::size_t output_dim = 0;
  std::size_t count = 0;      // timed repetitions
  std::size_t batch = 0;      // queries per repetition
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::vector<double> samples_ms;  // per-query latency of each repetition
  std::string error;               // non-empty when the cell failed
};

/// Runs every cell sequentially. Models are built per cell from minimum-jerk
/// demonstrations with fixed hyperparameters; failures are recorded, not thrown.
std::vector<BenchCell> run_bench(const BenchConfig& config);

/// method,n,v,d,count,batch,mean_ms,std_ms,error
void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells);

}  // namespace gmrgp
