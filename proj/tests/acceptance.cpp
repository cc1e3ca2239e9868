// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Usage: acceptance [criterion numbers...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gmrgp/bench.hpp"
#include "gmrgp/gmm.hpp"
#include "gmrgp/gmr.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/gp.hpp"
#include "gmrgp/kernels.hpp"
#include "gmrgp/lqr.hpp"
#include "gmrgp/mogp.hpp"
#include "gmrgp/scenario.hpp"
#include "gmrgp/synthetic.hpp"
#include "oracles.hpp"

namespace {

using namespace gmrgp;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& text) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += text;
  }
  Outcome outcome() const { return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)}; }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

OptConfig quick_optimizer() {
  OptConfig config;
  config.starts = 2;
  config.max_evaluations = 60;
  config.max_points = 150;
  return config;
}

GmrGpModel letter_model(const LetterScenario& s) {
  auto gmm = std::make_shared<const GmmModel>(fit_gmm(s.demos, s.components));
  BuildConfig config;
  config.optimizer = quick_optimizer();
  return build(gmm, s.demos, config);
}

// 1 ---------------------------------------------------------------------------

Outcome prior_mean_identity() {
  Checker check;
  std::mt19937_64 rng(1);
  auto compare = [&](const GmrGpModel& model, double lo, double hi, const std::string& name) {
    std::uniform_real_distribution<double> u(lo, hi);
    double worst = 0.0;
    std::size_t exact = 0;
    for (int i = 0; i < 1000; ++i) {
      const Eigen::VectorXd x = scalar(u(rng));
      const Eigen::VectorXd a = model.prior_mean(x);
      const Eigen::VectorXd b = gmr_predict(model.gmm(), x).mean;
      worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      exact += (a == b) ? 1 : 0;
    }
    check.expect(worst <= 1e-12, name + " max deviation " + num(worst));
    check.note(name + " exact " + std::to_string(exact) + "/1000");
  };
  compare(letter_model(letter_scenario(0)), -0.2, 1.2, "letter");
  compare(GmrGpModel::from_parameters(two_component_model(), {1.0, 1.0}, NoiseSpec::shared(1e-4)), -1.0, 3.4,
          "two-component");
  return check.outcome();
}

// 2 ---------------------------------------------------------------------------

Outcome pure_responsibility_covariance() {
  Checker check;
  const auto model = GmrGpModel::from_parameters(two_component_model(), {1.0, 1.0}, NoiseSpec::shared(1e-4));
  const GmrKernel& kernel = model.kernel();
  std::vector<std::size_t> hits(2, 0);
  double worst = 0.0;
  for (double x = -3.0; x <= 5.0; x += 0.01) {
    const Eigen::VectorXd in = scalar(x);
    const Eigen::VectorXd h = responsibilities(model.gmm(), in).values;
    for (std::size_t l = 0; l < 2; ++l) {
      if (h[static_cast<Eigen::Index>(l)] <= 1.0 - 1e-9) continue;
      const Eigen::MatrixXd& s = kernel.conditional_covs()[l];
      const double rel = (kernel.evaluate(in, in) - s).norm() / s.norm();
      worst = std::max(worst, rel);
      ++hits[l];
    }
  }
  check.expect(hits[0] > 0 && hits[1] > 0, "no pure-responsibility inputs found for a component");
  check.expect(worst <= 1e-6, "relative Frobenius deviation " + num(worst));
  check.note("inputs " + std::to_string(hits[0]) + "+" + std::to_string(hits[1]) + ", max rel dev " + num(worst));
  return check.outcome();
}

// 3 ---------------------------------------------------------------------------

std::vector<ViaPoint> fig3_via_points(bool three) {
  std::vector<ViaPoint> via{{scalar(0.0), scalar(0.8), {}}, {scalar(2.2), scalar(-1.0), {}}};
  if (three) via.push_back({scalar(kTwoComponentMidpoint), scalar(0.5), {}});
  return via;
}

Outcome via_point_tracking() {
  Checker check;
  double worst_miss = 0.0, worst_var = 0.0;
  double lo_var = std::numeric_limits<double>::infinity(), hi_var = 0.0;
  for (bool three : {false, true}) {
    const auto via = fig3_via_points(three);
    const auto tight =
        adapt(GmrGpModel::from_parameters(two_component_model(), {1.0, 1.0}, NoiseSpec::shared(1e-4)), via);
    const auto loose =
        adapt(GmrGpModel::from_parameters(two_component_model(), {1.0, 1.0}, NoiseSpec::shared(0.1)), via);
    for (const auto& v : via) {
      const PosteriorPrediction p = predict_trajectory(tight, {v.input}).front();
      worst_miss = std::max(worst_miss, (p.mean - v.output).cwiseAbs().maxCoeff());
      worst_var = std::max(worst_var, p.predictive_covariance(0, 0));
      const PosteriorPrediction q = predict_trajectory(loose, {v.input}).front();
      lo_var = std::min(lo_var, q.predictive_covariance(0, 0));
      hi_var = std::max(hi_var, q.predictive_covariance(0, 0));
    }
  }
  check.expect(worst_miss <= 1e-2, "mean miss " + num(worst_miss));
  check.expect(worst_var <= 2e-4, "variance at via-points " + num(worst_var));
  check.expect(lo_var >= 0.05 && hi_var <= 0.15, "noisy variance range [" + num(lo_var) + ", " + num(hi_var) + "]");
  check.note("miss " + num(worst_miss) + ", var " + num(worst_var) + ", noisy var [" + num(lo_var) + ", " +
             num(hi_var) + "]");
  return check.outcome();
}

// 4 ---------------------------------------------------------------------------

Outcome prior_reversion() {
  Checker check;
  const LetterScenario s = letter_scenario(0);
  const GmrGpModel prior = letter_model(s);
  const GmrGpModel posterior = adapt(prior, s.via_points);
  Points via_inputs;
  for (const auto& v : s.via_points) via_inputs.push_back(v.input);

  const OptConfig opt = quick_optimizer();
  const MogpParams mp = fit_mogp(s.demos, s.components, opt);
  const GpModel mogp_prior_model = mogp_prior(empirical_coregionalization(s.demos.outputs(), s.components), 1, mp);
  const GpModel mogp = condition(mogp_prior_model, via_observation_set(mogp_prior_model, s.via_points));

  double scale = 0.0;
  for (Eigen::Index d = 0; d < static_cast<Eigen::Index>(s.demos.output_dim()); ++d) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& y : s.demos.outputs()) {
      lo = std::min(lo, y[d]);
      hi = std::max(hi, y[d]);
    }
    scale = std::max(scale, hi - lo);
  }

  std::size_t far = 0;
  double worst_mean = 0.0, worst_cov = 0.0, min_gap = std::numeric_limits<double>::infinity();
  for (double t : s.times) {
    const Eigen::VectorXd x = scalar(t);
    if (posterior.kernel().gram({x}, via_inputs).norm() >= 1e-12) continue;
    ++far;
    const PosteriorPrediction p = predict_trajectory(posterior, {x}).front();
    worst_mean = std::max(worst_mean, (p.mean - posterior.prior_mean(x)).cwiseAbs().maxCoeff());
    worst_cov = std::max(worst_cov, (p.covariance - posterior.kernel().evaluate(x, x)).cwiseAbs().maxCoeff());
    const Eigen::VectorXd gmr_mean = gmr_predict(posterior.gmm(), x).mean;
    min_gap = std::min(min_gap, (predict(mogp, x).mean - gmr_mean).cwiseAbs().maxCoeff());
  }
  check.expect(far > 0, "no query beyond via-point correlation");
  check.expect(worst_mean <= 1e-9 && worst_cov <= 1e-9,
               "posterior vs prior deviation mean " + num(worst_mean) + " cov " + num(worst_cov));
  check.expect(min_gap > 0.1 * scale, "MOGP vs GMR mean gap " + num(min_gap) + " <= " + num(0.1 * scale));
  check.note(std::to_string(far) + " far queries, dev " + num(std::max(worst_mean, worst_cov)) +
             ", MOGP gap " + num(min_gap) + " vs 0.1*scale " + num(0.1 * scale));
  return check.outcome();
}

// 5 ---------------------------------------------------------------------------

double rel_err(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Outcome dense_oracle_equivalence() {
  Checker check;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> c_dist(1, 4), d_dist(1, 3), din_dist(1, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_mean = 0.0, worst_cov = 0.0, worst_lml = 0.0;
  std::size_t jittered = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = static_cast<std::size_t>(c_dist(rng));
    const auto d = static_cast<std::size_t>(d_dist(rng));
    const auto din = static_cast<std::size_t>(din_dist(rng));
    auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(c, din, d, rng));
    std::vector<double> ls(c);
    for (auto& l : ls) l = std::exp(std::log(0.1) + u(rng) * std::log(30.0));
    NoiseSpec noise = NoiseSpec::shared(std::exp(std::log(1e-4) + u(rng) * std::log(1e3)) * 0.05);
    if (trial % 3 == 1) {
      std::vector<double> values(c);
      for (auto& v : values) v = 0.05 * std::exp(std::log(1e-3) + u(rng) * std::log(1e2));
      noise = NoiseSpec::per_component_values(values);
    }
    const auto model = GmrGpModel::from_parameters(gmm, ls, noise);
    std::uniform_int_distribution<int> v_dist(1, static_cast<int>(60 / d));
    const int v = v_dist(rng);
    std::vector<ViaPoint> via;
    for (int i = 0; i < v; ++i) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(din));
      for (auto& xi : x) xi = -0.5 + 3.0 * u(rng);
      Eigen::VectorXd y = gmr_predict(*gmm, x).mean;
      for (auto& yi : y) yi += 0.3 * (u(rng) - 0.5);
      ViaPoint p{x, y, {}};
      if (i % 4 == 3) p.noise_override = oracle::random_spd(d, 1e-3, rng);
      via.push_back(std::move(p));
    }
    const GmrGpModel posterior = adapt(model, via);
    jittered += posterior.engine().jitter() > 0.0 ? 1 : 0;
    const oracle::DenseGp dense(model.engine(), via_observation_set(model.engine(), via));

    Eigen::VectorXd means(20 * static_cast<Eigen::Index>(d)), dense_means(means.size());
    Eigen::VectorXd covs(20 * static_cast<Eigen::Index>(d * d)), dense_covs(covs.size());
    for (int q = 0; q < 20; ++q) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(din));
      for (auto& xi : x) xi = -0.5 + 3.0 * u(rng);
      const PosteriorPrediction p = predict(posterior.engine(), x);
      const auto dd = static_cast<Eigen::Index>(d);
      means.segment(q * dd, dd) = p.mean;
      dense_means.segment(q * dd, dd) = dense.mean(x);
      covs.segment(q * dd * dd, dd * dd) = p.covariance.reshaped();
      dense_covs.segment(q * dd * dd, dd * dd) = dense.covariance(x).reshaped();
    }
    worst_mean = std::max(worst_mean, rel_err(means, dense_means));
    worst_cov = std::max(worst_cov, rel_err(covs, dense_covs));
    const double lml = log_marginal_likelihood(model.engine(), via_observation_set(model.engine(), via));
    const double dense_lml = dense.log_marginal_likelihood();
    worst_lml = std::max(worst_lml, std::abs(lml - dense_lml) / std::max(std::abs(dense_lml), 1.0));
  }
  check.expect(jittered == 0, std::to_string(jittered) + " systems needed jitter");
  check.expect(worst_mean <= 1e-8, "mean rel err " + num(worst_mean));
  check.expect(worst_cov <= 1e-8, "covariance rel err " + num(worst_cov));
  check.expect(worst_lml <= 1e-8, "log-likelihood rel err " + num(worst_lml));
  check.note("max rel err mean " + num(worst_mean) + ", cov " + num(worst_cov) + ", lml " + num(worst_lml));
  return check.outcome();
}

// 6 ---------------------------------------------------------------------------

Outcome kernel_psd() {
  Checker check;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> c_dist(1, 6), d_dist(1, 3), din_dist(1, 2), m_dist(2, 60);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = static_cast<std::size_t>(c_dist(rng));
    const auto d = static_cast<std::size_t>(d_dist(rng));
    const auto din = static_cast<std::size_t>(din_dist(rng));
    auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(c, din, d, rng));
    std::vector<double> ls(c);
    for (auto& l : ls) l = std::exp(std::log(0.01) + u(rng) * std::log(1e4));
    const GmrKernel kernel(gmm, ls);
    Points xs(static_cast<std::size_t>(m_dist(rng)));
    for (auto& x : xs) {
      x.resize(static_cast<Eigen::Index>(din));
      for (auto& xi : x) xi = -0.5 + 3.0 * u(rng);
    }
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(kernel.gram(xs), Eigen::EigenvaluesOnly)
                                    .eigenvalues();
    const double ratio = -eig.minCoeff() / eig.maxCoeff();
    worst = std::max(worst, ratio);
  }
  check.expect(worst <= 1e-8, "min/max eigenvalue ratio " + num(-worst));
  check.note("worst min/max eigenvalue ratio " + num(-worst));
  return check.outcome();
}

// 7 ---------------------------------------------------------------------------

Outcome monte_carlo_gmr() {
  Checker check;
  std::mt19937_64 rng(7);
  std::vector<GaussianComponent> comps;
  const double weights[] = {0.3, 0.45, 0.25};
  for (int l = 0; l < 3; ++l) {
    GaussianComponent c;
    c.weight = weights[l];
    c.mean = Eigen::Vector3d(0.6 * l, 0.5 - 0.4 * l, 0.2 * l * l);
    c.covariance = oracle::random_spd(3, 0.04, rng);
    comps.push_back(std::move(c));
  }
  const GmmModel model(std::move(comps), 1, 2);
  const Eigen::MatrixXd joint = sample_joint(model, 1000000, 77);
  const double band = 0.01;
  std::size_t checked = 0, outside = 0;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double x = -0.1 + 1.4 * i / 9.0;
    const GmrPrediction p = gmr_predict(model, scalar(x));
    const oracle::BandedMoments mc = oracle::banded_moments(joint, x, band);
    for (Eigen::Index a = 0; a < 2; ++a) {
      const double z = std::abs(p.mean[a] - mc.mean[a]) / mc.mean_se[a];
      worst = std::max(worst, z);
      outside += z > 3.0 ? 1 : 0;
      ++checked;
      for (Eigen::Index b = a; b < 2; ++b) {
        const double zc = std::abs(p.covariance(a, b) - mc.covariance(a, b)) / mc.covariance_se(a, b);
        worst = std::max(worst, zc);
        outside += zc > 3.0 ? 1 : 0;
        ++checked;
      }
    }
  }
  check.expect(outside == 0, std::to_string(outside) + "/" + std::to_string(checked) + " moments beyond 3 SE");
  check.note(std::to_string(checked) + " moments, max |z| " + num(worst));
  return check.outcome();
}

// 8 ---------------------------------------------------------------------------

const BenchCell* find_cell(const std::vector<BenchCell>& cells, const std::string& method, std::size_t n) {
  for (const auto& c : cells) {
    if (c.method == method && c.n == n) return &c;
  }
  return nullptr;
}

Outcome complexity_contrast() {
  Checker check;
  BenchConfig scaling;
  scaling.n_grid = {100, 1000, 10000};
  scaling.v_grid = {3};
  scaling.methods = {"gmr-gp", "mogp"};
  scaling.output_dim = 2;
  const auto cells = run_bench(scaling);
  for (const auto& c : cells) check.expect(c.error.empty(), c.method + " N=" + std::to_string(c.n) + ": " + c.error);

  double gp_lo = std::numeric_limits<double>::infinity(), gp_hi = 0.0;
  for (std::size_t n : scaling.n_grid) {
    if (const auto* c = find_cell(cells, "gmr-gp", n); c && c->error.empty()) {
      gp_lo = std::min(gp_lo, c->mean_ms);
      gp_hi = std::max(gp_hi, c->mean_ms);
    }
  }
  const auto* m_lo = find_cell(cells, "mogp", 100);
  const auto* m_hi = find_cell(cells, "mogp", 10000);
  const double gp_ratio = gp_hi / gp_lo;
  const double mogp_ratio = (m_lo && m_hi) ? m_hi->mean_ms / m_lo->mean_ms : 0.0;
  check.expect(gp_ratio < 2.0, "GMR-GP latency ratio " + num(gp_ratio));
  check.expect(mogp_ratio > 10.0, "MOGP latency growth " + num(mogp_ratio));

  BenchConfig ordering;
  ordering.n_grid = {300};
  ordering.v_grid = {3};
  ordering.methods = {"gmr", "mogp"};
  ordering.output_dim = 3;
  ordering.components = 4;
  const auto order_cells = run_bench(ordering);
  const auto* gmr = find_cell(order_cells, "gmr", 300);
  const auto* mogp = find_cell(order_cells, "mogp", 300);
  const bool ordered = gmr && mogp && gmr->error.empty() && mogp->error.empty() && gmr->mean_ms < mogp->mean_ms;
  check.expect(ordered, "GMR not faster than MOGP at N=300");
  check.note("GMR-GP ratio " + num(gp_ratio) + ", MOGP growth " + num(mogp_ratio) + ", N=300 GMR " +
             (gmr ? num(gmr->mean_ms) : "-") + " ms vs MOGP " + (mogp ? num(mogp->mean_ms) : "-") + " ms");
  return check.outcome();
}

// 9 ---------------------------------------------------------------------------

Outcome lqr_gain_scheduling() {
  Checker check;
  const InsertionScenario s = insertion_scenario(0);
  auto gmm = std::make_shared<const GmmModel>(fit_gmm(s.demos, s.components));
  BuildConfig build_config;
  build_config.optimizer.max_points = 200;
  build_config.optimizer.max_evaluations = 100;
  const GmrGpModel model = adapt(build(gmm, s.demos, build_config), s.via_points);
  const Points xs = as_inputs(s.times);
  const TrackerConfig config;

  std::vector<TimedTarget> targets;
  for (const auto& v : s.via_points) targets.push_back({v.input[0], v.output});
  const Eigen::VectorXd approach = demonstrated_approach(s.demos, s.approach_start);

  const ReferenceTrajectory ref = make_reference(s.times, predict_trajectory(model, xs));
  const auto q = gains_from_covariance(ref, config);
  const SimulationReport run = simulate(ref, solve_lqr(ref, q, config), config, {}, targets, s.obstacles);

  // Step of maximum demonstrated variability.
  const auto gmr = gmr_predict_batch(*gmm, xs);
  std::size_t peak = 0;
  for (std::size_t i = 0; i < gmr.size(); ++i) {
    if (gmr[i].covariance.trace() > gmr[peak].covariance.trace()) peak = i;
  }
  double min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& v : s.via_points) {
    const auto it = std::min_element(s.times.begin(), s.times.end(), [&](double a, double b) {
      return std::abs(a - v.input[0]) < std::abs(b - v.input[0]);
    });
    const auto step = static_cast<std::size_t>(it - s.times.begin());
    min_ratio = std::min(min_ratio, q[step].trace() / q[peak].trace());
  }
  check.expect(min_ratio >= 5.0, "via/peak-variability precision ratio " + num(min_ratio));
  const double worst_miss = *std::max_element(run.target_misses.begin(), run.target_misses.end());
  check.expect(worst_miss <= 0.05, "via-point miss " + num(worst_miss));
  const double gp_angle = approach_deviation_deg(s.times, run.positions, s.approach_start, approach);

  const MogpParams mp = fit_mogp(s.demos, s.components, build_config.optimizer);
  const GpModel mprior = mogp_prior(empirical_coregionalization(s.demos.outputs(), s.components), 1, mp);
  const GpModel mpost = condition(mprior, via_observation_set(mprior, s.via_points));
  const ReferenceTrajectory mref = make_reference(s.times, predict(mpost, xs));
  const auto mq = gains_from_covariance(mref, config);
  const SimulationReport mrun = simulate(mref, solve_lqr(mref, mq, config), config, {}, targets, s.obstacles);
  const double mogp_angle = approach_deviation_deg(s.times, mrun.positions, s.approach_start, approach);

  check.expect(gp_angle <= 20.0, "GMR-GP approach deviation " + num(gp_angle) + " deg");
  check.expect(mogp_angle > 20.0, "MOGP approach deviation " + num(mogp_angle) + " deg");
  check.note("precision ratio " + num(min_ratio) + ", max miss " + num(worst_miss) + ", approach " + num(gp_angle) +
             " vs MOGP " + num(mogp_angle) + " deg");
  return check.outcome();
}

// 10 --------------------------------------------------------------------------

Outcome em_correctness() {
  Checker check;
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> c_dist(1, 5), d_dist(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_drop = 0.0, worst_norm = 0.0;
  std::size_t total_iterations = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = static_cast<std::size_t>(c_dist(rng));
    DemonstrationSet data;
    if (trial % 2 == 0) {
      SyntheticParams params;
      params.demos = 3 + static_cast<std::size_t>(trial % 3);
      params.samples = 60 + 20 * static_cast<std::size_t>(trial % 4);
      data = generate_synthetic(trial % 4 == 0 ? SyntheticKind::Letter : SyntheticKind::MinJerk, params,
                                static_cast<std::uint64_t>(trial));
    } else {
      const auto din = static_cast<std::size_t>(1 + trial % 2);
      const auto dout = static_cast<std::size_t>(d_dist(rng));
      const GmmModel truth = oracle::random_gmm(c + 1, din, dout, rng);
      const Eigen::MatrixXd z = sample_joint(truth, 300, static_cast<std::uint64_t>(trial));
      Points in, out;
      for (Eigen::Index i = 0; i < z.rows(); ++i) {
        in.push_back(z.row(i).head(static_cast<Eigen::Index>(din)).transpose());
        out.push_back(z.row(i).tail(static_cast<Eigen::Index>(dout)).transpose());
      }
      data = DemonstrationSet(std::move(in), std::move(out));
    }
    EmTrace trace;
    EmConfig config;
    config.seed = static_cast<std::uint64_t>(trial);
    const GmmModel model = fit_gmm(data, c, config, &trace);
    total_iterations += trace.iterations;
    for (std::size_t i = 1; i < trace.log_likelihood.size(); ++i) {
      worst_drop = std::max(worst_drop, trace.log_likelihood[i - 1] - trace.log_likelihood[i]);
    }
    for (int k = 0; k < 50; ++k) {
      const Eigen::VectorXd& base = data.inputs()[static_cast<std::size_t>(k * 7) % data.size()];
      Eigen::VectorXd x = base;
      for (auto& xi : x) xi += 0.5 * (u(rng) - 0.5);
      const Eigen::VectorXd h = responsibilities(model, x).values;
      worst_norm = std::max(worst_norm, std::abs(h.sum() - 1.0));
      check.expect(h.minCoeff() >= 0.0 && h.maxCoeff() <= 1.0, "responsibility outside [0, 1]");
    }
  }
  check.expect(worst_drop <= 1e-9, "log-likelihood drop " + num(worst_drop));
  check.expect(worst_norm <= 1e-12, "responsibility sum error " + num(worst_norm));
  check.note(std::to_string(total_iterations) + " EM iterations, max drop " + num(worst_drop) +
             ", max |sum h - 1| " + num(worst_norm));
  return check.outcome();
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  // 0: no limit
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "prior mean equals GMR mean", 5.0, prior_mean_identity},
      {2, "pure-responsibility covariance", 1.0, pure_responsibility_covariance},
      {3, "via-point tracking", 1.0, via_point_tracking},
      {4, "prior reversion", 0.0, prior_reversion},
      {5, "dense-oracle equivalence", 30.0, dense_oracle_equivalence},
      {6, "kernel PSD", 60.0, kernel_psd},
      {7, "Monte-Carlo GMR oracle", 60.0, monte_carlo_gmr},
      {8, "complexity contrast", 300.0, complexity_contrast},
      {9, "LQR gain scheduling", 60.0, lqr_gain_scheduling},
      {10, "EM correctness", 30.0, em_correctness},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (c.limit_seconds > 0.0 && secs > c.limit_seconds) {
      out.pass = false;
      out.detail += " | runtime " + num(secs) + " s over " + num(c.limit_seconds) + " s";
    }
    all = all && out.pass;
    std::printf("%s %2d %s (%.2f s): %s\n", out.pass ? "PASS" : "FAIL", c.id, c.name, secs, out.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
