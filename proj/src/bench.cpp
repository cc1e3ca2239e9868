#include "gmrgp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>

#include "gmrgp/error.hpp"
#include "gmrgp/format.hpp"
#include "gmrgp/gmm.hpp"
#include "gmrgp/gmr.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/mogp.hpp"
#include "gmrgp/synthetic.hpp"

namespace gmrgp {

namespace {

using Clock = std::chrono::steady_clock;

// Keeps results observable so the timed calls cannot be optimized away.
volatile double g_sink = 0.0;

struct CellData {
  DemonstrationSet demos;
  std::shared_ptr<const GmmModel> gmm;
  Points queries;
};

CellData make_data(const BenchConfig& config, std::size_t n) {
  SyntheticParams params;
  params.demos = std::min<std::size_t>(5, std::max<std::size_t>(1, n / 2));
  params.samples = std::max<std::size_t>(2, n / params.demos);
  params.noise = 0.05;
  params.start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.output_dim));
  params.goal = Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(config.output_dim), 1.0, 0.5);
  CellData data{generate_synthetic(SyntheticKind::MinJerk, params, config.seed), nullptr, {}};
  data.gmm = std::make_shared<const GmmModel>(fit_gmm(data.demos, config.components));
  std::mt19937_64 rng(config.seed + 1);
  std::uniform_real_distribution<double> unit(0.0, params.duration);
  for (int i = 0; i < 64; ++i) data.queries.push_back(Eigen::VectorXd::Constant(1, unit(rng)));
  return data;
}

std::vector<ViaPoint> make_via(const GmmModel& gmm, std::size_t v) {
  std::vector<ViaPoint> out;
  for (std::size_t i = 0; i < v; ++i) {
    const double t = v == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(v - 1);
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, t);
    Eigen::VectorXd y = gmr_predict(gmm, x).mean;
    y.array() += 0.05;
    out.push_back({x, y, std::nullopt});
  }
  return out;
}

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

void time_cell(BenchCell& cell, const BenchConfig& config, const Points& queries,
               const std::function<double(const Eigen::VectorXd&)>& query) {
  std::size_t next = 0;
  auto run = [&](std::size_t count) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      acc += query(queries[next]);
      next = (next + 1) % queries.size();
    }
    g_sink = g_sink + acc;
  };
  run(config.warmup);
  std::size_t batch = 1;
  while (true) {
    const auto start = Clock::now();
    run(batch);
    if (elapsed(start) >= config.min_batch_seconds || batch >= (std::size_t{1} << 20)) break;
    batch *= 2;
  }
  cell.batch = batch;
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    const auto start = Clock::now();
    run(batch);
    cell.samples_ms.push_back(1e3 * elapsed(start) / static_cast<double>(batch));
  }
  cell.count = cell.samples_ms.size();
  const double n = static_cast<double>(cell.count);
  cell.mean_ms = std::accumulate(cell.samples_ms.begin(), cell.samples_ms.end(), 0.0) / n;
  double ss = 0.0;
  for (double s : cell.samples_ms) ss += (s - cell.mean_ms) * (s - cell.mean_ms);
  cell.std_ms = cell.count > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

}  // namespace

std::vector<BenchCell> run_bench(const BenchConfig& config) {
  if (config.repetitions < 30 || config.warmup < 5) {
    throw Error(ErrorCode::InvalidArgument, "bench needs >= 30 repetitions and >= 5 warm-up queries");
  }
  std::vector<BenchCell> cells;
  for (std::size_t n : config.n_grid) {
    CellData data;
    std::string data_error;
    try {
      data = make_data(config, n);
    } catch (const std::exception& e) {
      data_error = e.what();
    }
    for (std::size_t v : config.v_grid) {
      for (const auto& method : config.methods) {
        BenchCell cell{method, n, v, config.output_dim, 0, 0, 0.0, 0.0, {}, data_error};
        if (data_error.empty()) {
          try {
            const auto via = make_via(*data.gmm, v);
            if (method == "gmr") {
              time_cell(cell, config, data.queries, [&](const Eigen::VectorXd& x) {
                const GmrPrediction p = gmr_predict(*data.gmm, x);
                return p.mean[0] + p.covariance(0, 0);
              });
            } else if (method == "gmr-gp") {
              const GmrGpModel model =
                  adapt(GmrGpModel::from_parameters(data.gmm, std::vector<double>(config.components, 0.1),
                                                    NoiseSpec::shared(1e-4)),
                        via);
              time_cell(cell, config, data.queries, [&](const Eigen::VectorXd& x) {
                const PosteriorPrediction p = predict(model.engine(), x);
                return p.mean[0] + p.covariance(0, 0);
              });
            } else if (method == "mogp") {
              const auto coreg = empirical_coregionalization(data.demos.outputs(), config.components);
              const GpModel prior = mogp_prior(coreg, 1, {std::vector<double>(config.components, 0.1), 1e-4});
              ObservationSet obs =
                  ObservationSet::with_shared_noise(data.demos.inputs(), data.demos.outputs(), 1e-4);
              const ObservationSet extra = via_observation_set(prior, via);
              obs.inputs.insert(obs.inputs.end(), extra.inputs.begin(), extra.inputs.end());
              obs.outputs.insert(obs.outputs.end(), extra.outputs.begin(), extra.outputs.end());
              obs.noise.insert(obs.noise.end(), extra.noise.begin(), extra.noise.end());
              const GpModel posterior = condition(prior, std::move(obs));
              time_cell(cell, config, data.queries, [&](const Eigen::VectorXd& x) {
                const PosteriorPrediction p = predict(posterior, x);
                return p.mean[0] + p.covariance(0, 0);
              });
            } else {
              throw Error(ErrorCode::InvalidArgument, "unknown bench method '" + method + "'");
            }
          } catch (const std::exception& e) {
            cell.error = e.what();
          }
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchCell>& cells) {
  write_csv_row(out, std::vector<std::string>{"method", "n", "v", "d", "count", "batch", "mean_ms", "std_ms", "error"});
  for (const auto& c : cells) {
    std::string error = c.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    write_csv_row(out, std::vector<std::string>{c.method, std::to_string(c.n), std::to_string(c.v),
                                                std::to_string(c.output_dim), std::to_string(c.count),
                                                std::to_string(c.batch), format_double(c.mean_ms),
                                                format_double(c.std_ms), error});
  }
}

}  // namespace gmrgp
