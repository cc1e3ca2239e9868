// Command-line front end: fit, adapt, predict, sample, track, bench, generate.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "gmrgp/bench.hpp"
#include "gmrgp/error.hpp"
#include "gmrgp/format.hpp"
#include "gmrgp/gmm.hpp"
#include "gmrgp/gmr.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/io.hpp"
#include "gmrgp/lqr.hpp"
#include "gmrgp/scenario.hpp"
#include "gmrgp/synthetic.hpp"

namespace {

using namespace gmrgp;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("gmrgp");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("GMRGP_LOG")) spdlog::set_level(spdlog::level::from_str(level));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path, {{"path", path}});
  return out;
}

void print_error(const std::string& code, const std::string& message, const Error::Context& context = {}) {
  Json ctx = Json::object();
  for (const auto& [k, v] : context) ctx[k] = v;
  std::cerr << Json{{"error", code}, {"message", message}, {"context", ctx}}.dump() << '\n';
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "expected a comma-separated list of counts", {{"value", text}});
    }
  }
  return out;
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  std::string demos;
  std::size_t components = 0;
  std::uint64_t seed = 0;
  std::size_t resample = 0;
  std::optional<double> lengthscale;
  std::optional<double> noise;
  bool per_component_noise = false;
  OptConfig opt;
  std::string out;
};

int run_fit(const FitArgs& a) {
  LoadOptions load;
  load.resample = a.resample;
  const DemonstrationSet demos = load_demonstrations(a.demos, load);
  spdlog::info("loaded {} samples in {} demonstrations", demos.size(), demos.demos().size());
  EmConfig em;
  em.seed = a.seed;
  EmTrace trace;
  auto gmm = std::make_shared<const GmmModel>(fit_gmm(demos, a.components, em, &trace));
  spdlog::info("EM finished after {} iterations (converged: {})", trace.iterations, trace.converged);

  std::optional<GmrGpModel> model;
  if (a.lengthscale || a.noise) {
    if (!a.lengthscale || !a.noise) {
      throw Error(ErrorCode::InvalidArgument, "--lengthscale and --noise must be given together");
    }
    model = GmrGpModel::from_parameters(gmm, std::vector<double>(a.components, *a.lengthscale),
                                        NoiseSpec::shared(*a.noise));
  } else {
    BuildConfig config{a.opt, a.per_component_noise};
    config.optimizer.seed = a.seed;
    BuildReport report;
    model = build(gmm, demos, config, &report);
    spdlog::info("hyperparameters: log-likelihood {} from start {} ({} evaluations, stride {})",
                 report.fit.log_likelihood, report.fit.best_start, report.fit.evaluations, report.stride);
  }
  write_json_file(a.out, gmr_gp_to_json(*model));
  return 0;
}

// --- adapt / predict / sample ----------------------------------------------

int run_adapt(const std::string& model_path, const std::string& via_path, const std::string& out) {
  const GmrGpModel model = gmr_gp_from_json(read_json_file(model_path));
  const auto via = via_points_from_json(read_json_file(via_path));
  write_json_file(out, gmr_gp_to_json(adapt(model, via)));
  return 0;
}

int run_predict(const std::string& model_path, const std::string& grid, const std::string& method,
                const std::string& format, const std::string& out_path) {
  const GmrGpModel model = gmr_gp_from_json(read_json_file(model_path));
  const auto times = parse_grid(grid);
  const Points xs = as_inputs(times);
  std::ofstream out = open_out(out_path);
  if (method == "gmr") {
    const auto preds = gmr_predict_batch(model.gmm(), xs);
    if (format == "json") {
      Json rows = Json::array();
      for (std::size_t i = 0; i < xs.size(); ++i) {
        rows.push_back({{"x", times[i]},
                        {"mean", std::vector<double>(preds[i].mean.data(), preds[i].mean.data() + preds[i].mean.size())},
                        {"covariance", std::vector<double>(preds[i].covariance.data(),
                                                           preds[i].covariance.data() + preds[i].covariance.size())}});
      }
      out << rows.dump(2) << '\n';
    } else {
      write_gmr_csv(out, xs, preds);
    }
    return 0;
  }
  if (method != "gmr-gp") throw Error(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
  const auto preds = predict_trajectory(model, xs);
  if (format == "json") {
    Json rows = Json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      rows.push_back({{"x", times[i]},
                      {"mean", std::vector<double>(preds[i].mean.data(), preds[i].mean.data() + preds[i].mean.size())},
                      {"covariance", std::vector<double>(preds[i].covariance.data(),
                                                         preds[i].covariance.data() + preds[i].covariance.size())}});
    }
    out << rows.dump(2) << '\n';
  } else {
    write_trajectory_csv(out, xs, preds);
  }
  return 0;
}

int run_sample(const std::string& model_path, const std::string& grid, std::size_t count, std::uint64_t seed,
               const std::string& out_path) {
  const GmrGpModel model = gmr_gp_from_json(read_json_file(model_path));
  const Points xs = as_inputs(parse_grid(grid));
  std::ofstream out = open_out(out_path);
  write_samples_csv(out, xs, sample_trajectories(model, xs, count, seed));
  return 0;
}

// --- track -----------------------------------------------------------------

double number_or(const Json& doc, const char* key, double fallback) {
  const auto it = doc.find(key);
  if (it == doc.end()) return fallback;
  if (!it->is_number()) throw Error(ErrorCode::ParseError, std::string("expected a number for '") + key + "'");
  return it->get<double>();
}

Eigen::VectorXd vector_of(const Json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must contain numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

int run_track(const std::string& scenario_path, const std::string& out_path, const std::string& summary_path) {
  const Json doc = read_json_file(scenario_path);
  const std::filesystem::path base = std::filesystem::path(scenario_path).parent_path();
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "scenario must be a JSON object");

  std::optional<GmrGpModel> model;
  std::vector<double> times;
  std::vector<ViaPoint> via;
  std::vector<Obstacle> obstacles;
  if (doc.value("builtin", std::string()) == "insertion") {
    const InsertionScenario s = insertion_scenario(static_cast<std::uint64_t>(number_or(doc, "seed", 0.0)));
    auto gmm = std::make_shared<const GmmModel>(fit_gmm(s.demos, s.components));
    BuildConfig config;
    config.optimizer.max_points = 200;
    model = build(gmm, s.demos, config);
    times = s.times;
    via = s.via_points;
    obstacles = s.obstacles;
  } else {
    const auto path = doc.find("model");
    if (path == doc.end() || !path->is_string()) throw Error(ErrorCode::ParseError, "scenario needs a model path");
    std::filesystem::path model_path(path->get<std::string>());
    if (model_path.is_relative()) model_path = base / model_path;
    model = gmr_gp_from_json(read_json_file(model_path.string()));
    via = model->via_points();
  }
  if (const auto grid = doc.find("grid"); grid != doc.end()) {
    if (!grid->is_string()) throw Error(ErrorCode::ParseError, "grid must be a \"start:stop:step\" string");
    times = parse_grid(grid->get<std::string>());
  }
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "scenario needs a grid");
  if (const auto v = doc.find("via_points"); v != doc.end()) via = via_points_from_json(*v);
  if (const auto obs = doc.find("obstacles"); obs != doc.end()) {
    obstacles.clear();
    for (const auto& o : *obs) obstacles.push_back({vector_of(o.at("center"), "obstacle center"), number_or(o, "radius", 0.0)});
  }

  TrackerConfig config;
  if (const auto p = doc.find("plant"); p != doc.end()) {
    config.plant.mass = number_or(*p, "mass", config.plant.mass);
    config.plant.damping = number_or(*p, "damping", config.plant.damping);
  }
  if (const auto t = doc.find("tracker"); t != doc.end()) {
    config.precision_scale = number_or(*t, "precision_scale", config.precision_scale);
    config.control_cost = number_or(*t, "control_cost", config.control_cost);
    config.covariance_floor = number_or(*t, "covariance_floor", config.covariance_floor);
  }
  Disturbance disturbance;
  if (const auto d = doc.find("disturbance"); d != doc.end()) {
    disturbance.seed = static_cast<std::uint64_t>(number_or(*d, "seed", 0.0));
    disturbance.force_std = number_or(*d, "force_std", 0.0);
  }

  const std::string reference_kind = doc.value("reference", std::string("gmr-gp"));
  const Points xs = as_inputs(times);
  ReferenceTrajectory ref;
  if (reference_kind == "gmr") {
    ref = make_reference(times, gmr_predict_batch(model->gmm(), xs));
  } else if (reference_kind == "gmr-gp") {
    ref = make_reference(times, predict_trajectory(adapt(*model, via), xs));
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown reference '" + reference_kind + "'");
  }
  const auto q = gains_from_covariance(ref, config);
  const GainSchedule schedule = solve_lqr(ref, q, config);
  std::vector<TimedTarget> targets;
  for (const auto& v : via) {
    if (v.input.size() == 1) targets.push_back({v.input[0], v.output});
  }
  const SimulationReport report = simulate(ref, schedule, config, disturbance, targets, obstacles);

  std::ofstream out = open_out(out_path);
  const auto d = static_cast<Eigen::Index>(ref.dim());
  std::vector<std::string> header{"step", "t"};
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("ref" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("pos" + std::to_string(i + 1));
  header.insert(header.end(), {"error", "trace_q", "gain_norm"});
  write_csv_row(out, header);
  for (std::size_t t = 0; t < report.positions.size(); ++t) {
    std::vector<double> row{static_cast<double>(t), times[t]};
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(ref.means[t][i]);
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(report.positions[t][i]);
    row.push_back(report.tracking_errors[t]);
    row.push_back(q[t].trace());
    row.push_back(t < schedule.feedback.size() ? schedule.feedback[t].norm() : 0.0);
    write_csv_row(out, row);
  }

  Json summary{{"rms_error", report.rms_error},
               {"max_error", report.max_error},
               {"via_misses", report.target_misses},
               {"cost", report.cost},
               {"predicted_cost", report.predicted_cost},
               {"diverged", report.diverged}};
  summary["min_clearance"] = std::isfinite(report.min_clearance) ? Json(report.min_clearance) : Json(nullptr);
  if (const auto goal = doc.find("goal"); goal != doc.end() && !report.positions.empty()) {
    const Eigen::VectorXd center = vector_of(goal->at("center"), "goal center");
    const double dist = (report.positions.back() - center).norm();
    summary["goal_distance"] = dist;
    summary["goal_reached"] = dist <= number_or(*goal, "radius", 0.0);
  }
  if (summary_path.empty()) {
    std::cout << summary.dump(2) << '\n';
  } else {
    write_json_file(summary_path, summary);
  }
  return 0;
}

// --- bench / generate ------------------------------------------------------

int run_bench_cmd(const std::string& config_path, const std::string& n_grid, const std::string& v_grid,
                  std::size_t reps, std::size_t dim, std::uint64_t seed, const std::string& out_path) {
  BenchConfig config;
  if (!config_path.empty()) {
    const Json doc = read_json_file(config_path);
    if (doc.contains("n_grid")) config.n_grid = doc.at("n_grid").get<std::vector<std::size_t>>();
    if (doc.contains("v_grid")) config.v_grid = doc.at("v_grid").get<std::vector<std::size_t>>();
    if (doc.contains("methods")) config.methods = doc.at("methods").get<std::vector<std::string>>();
    if (doc.contains("output_dim")) config.output_dim = doc.at("output_dim").get<std::size_t>();
    if (doc.contains("components")) config.components = doc.at("components").get<std::size_t>();
    if (doc.contains("repetitions")) config.repetitions = doc.at("repetitions").get<std::size_t>();
    if (doc.contains("warmup")) config.warmup = doc.at("warmup").get<std::size_t>();
  }
  if (!n_grid.empty()) config.n_grid = parse_counts(n_grid);
  if (!v_grid.empty()) config.v_grid = parse_counts(v_grid);
  if (reps > 0) config.repetitions = reps;
  if (dim > 0) config.output_dim = dim;
  config.seed = seed;
  const auto cells = run_bench(config);
  std::ofstream out = open_out(out_path);
  write_bench_csv(out, cells);
  for (const auto& c : cells) {
    if (!c.error.empty()) spdlog::warn("bench cell {} N={} V={} failed: {}", c.method, c.n, c.v, c.error);
  }
  return 0;
}

int run_generate(const std::string& kind, const SyntheticParams& base, const std::string& model_path,
                 std::uint64_t seed, const std::string& out_path) {
  SyntheticParams params = base;
  if (!model_path.empty()) {
    const Json doc = read_json_file(model_path);
    params.model = std::make_shared<const GmmModel>(gmm_from_json(doc.contains("gmm") ? doc.at("gmm") : doc));
  }
  save_demonstrations(out_path, generate_synthetic(parse_synthetic_kind(kind), params, seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Trajectory learning with GMR-based Gaussian processes"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a GMM and GMR-GP hyperparameters to demonstrations");
  fit_cmd->add_option("--demos", fit.demos, "Demonstration CSV")->required();
  fit_cmd->add_option("--components", fit.components, "Number of GMM components")->required()->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit.seed, "Seed for initialization and optimizer starts");
  fit_cmd->add_option("--resample", fit.resample, "Resample each demonstration to this many samples");
  fit_cmd->add_option("--lengthscale", fit.lengthscale, "Fixed lengthscale for every component (skips optimization)");
  fit_cmd->add_option("--noise", fit.noise, "Fixed noise variance (with --lengthscale)");
  fit_cmd->add_flag("--per-component-noise", fit.per_component_noise, "Fit one noise value per component");
  fit_cmd->add_option("--starts", fit.opt.starts, "Optimizer starts");
  fit_cmd->add_option("--max-evals", fit.opt.max_evaluations, "Likelihood evaluations per start");
  fit_cmd->add_option("--max-points", fit.opt.max_points, "Stride the likelihood data down to this many points");
  fit_cmd->add_option("--stride", fit.opt.stride, "Explicit likelihood subsampling stride");
  fit_cmd->add_option("--out", fit.out, "Output model JSON")->required();

  std::string model_path, via_path, out_path, grid, method = "gmr-gp", format = "csv", summary_path;
  std::size_t samples = 10;
  std::uint64_t seed = 0;

  auto* adapt_cmd = app.add_subcommand("adapt", "Condition a model on via-points");
  adapt_cmd->add_option("--model", model_path, "Model JSON")->required();
  adapt_cmd->add_option("--via", via_path, "Via-point JSON")->required();
  adapt_cmd->add_option("--out", out_path, "Output model JSON")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict mean and covariance on an input grid");
  predict_cmd->add_option("--model", model_path, "Model JSON")->required();
  predict_cmd->add_option("--grid", grid, "start:stop:step")->required();
  predict_cmd->add_option("--method", method, "gmr-gp or gmr")->check(CLI::IsMember({"gmr-gp", "gmr"}));
  predict_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  predict_cmd->add_option("--out", out_path, "Output file")->required();

  auto* sample_cmd = app.add_subcommand("sample", "Draw trajectories from the model");
  sample_cmd->add_option("--model", model_path, "Model JSON")->required();
  sample_cmd->add_option("--grid", grid, "start:stop:step")->required();
  sample_cmd->add_option("--samples", samples, "Number of trajectories")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed, "Sampling seed");
  sample_cmd->add_option("--out", out_path, "Output CSV")->required();

  std::string scenario_path;
  auto* track_cmd = app.add_subcommand("track", "Simulate LQR tracking of a predicted trajectory");
  track_cmd->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  track_cmd->add_option("--out", out_path, "Per-step report CSV")->required();
  track_cmd->add_option("--summary", summary_path, "Summary JSON (default: stdout)");

  std::string bench_config, n_grid, v_grid;
  std::size_t reps = 0, dim = 0;
  auto* bench_cmd = app.add_subcommand("bench", "Time single-query prediction of GMR, MOGP and GMR-GP");
  bench_cmd->add_option("--config", bench_config, "Bench JSON (n_grid, v_grid, methods, ...)");
  bench_cmd->add_option("--n-grid", n_grid, "Comma-separated demonstration sizes");
  bench_cmd->add_option("--v-grid", v_grid, "Comma-separated via-point counts");
  bench_cmd->add_option("--repetitions", reps, "Timed repetitions per cell (>= 30)");
  bench_cmd->add_option("--dim", dim, "Output dimension");
  bench_cmd->add_option("--seed", seed, "Data seed");
  bench_cmd->add_option("--out", out_path, "Output CSV")->required();

  std::string kind;
  SyntheticParams synth;
  auto* gen_cmd = app.add_subcommand("generate", "Generate synthetic demonstrations");
  gen_cmd->add_option("--kind", kind, "letter, minjerk or gmm-draw")->required();
  gen_cmd->add_option("--demos", synth.demos, "Number of demonstrations");
  gen_cmd->add_option("--samples", synth.samples, "Samples per demonstration");
  gen_cmd->add_option("--noise", synth.noise, "Perturbation amplitude");
  gen_cmd->add_option("--model", model_path, "GMM or model JSON (gmm-draw)");
  gen_cmd->add_option("--seed", seed, "Seed");
  gen_cmd->add_option("--out", out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("UsageError", e.what());
    return 2;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*adapt_cmd) return run_adapt(model_path, via_path, out_path);
    if (*predict_cmd) return run_predict(model_path, grid, method, format, out_path);
    if (*sample_cmd) return run_sample(model_path, grid, samples, seed, out_path);
    if (*track_cmd) return run_track(scenario_path, out_path, summary_path);
    if (*bench_cmd) return run_bench_cmd(bench_config, n_grid, v_grid, reps, dim, seed, out_path);
    if (*gen_cmd) return run_generate(kind, synth, model_path, seed, out_path);
  } catch (const Error& e) {
    print_error(std::string(error_name(e.code())), e.what(), e.context());
    return 1;
  } catch (const Json::exception& e) {
    print_error("ParseError", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("InternalError", e.what());
    return 1;
  }
  return 1;
}
