#include "gmrgp/gmr_gp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmrgp/error.hpp"
#include "gmrgp/gmr.hpp"

namespace gmrgp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate_noise(const NoiseSpec& noise, std::size_t num_components) {
  const std::size_t expected = noise.per_component ? num_components : 1;
  if (noise.values.size() != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                "noise needs " + std::to_string(expected) + " value(s), got " + std::to_string(noise.values.size()));
  }
  for (double v : noise.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NonPositiveParam, "noise must be finite and >= 0");
  }
}

GpModel make_prior(const std::shared_ptr<const GmrKernel>& kernel, const NoiseSpec& noise) {
  auto gmm = kernel->model_ptr();
  MeanFunction mean = [gmm](const VectorXd& x) { return gmr_predict(*gmm, x).mean; };
  NoiseFunction noise_fn = [gmm, noise](const VectorXd& x) { return gmr_gp_noise(*gmm, noise, x); };
  return GpModel(std::move(mean), kernel, std::move(noise_fn));
}

double input_range(const Points& inputs) {
  if (inputs.empty()) return 1.0;
  VectorXd lo = inputs.front();
  VectorXd hi = inputs.front();
  for (const auto& x : inputs) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  const double range = (hi - lo).maxCoeff();
  return range > 0.0 ? range : 1.0;
}

}  // namespace

ObservationSet via_observation_set(const GpModel& prior, const std::vector<ViaPoint>& via_points) {
  ObservationSet obs;
  for (const auto& v : via_points) {
    obs.inputs.push_back(v.input);
    obs.outputs.push_back(v.output);
    obs.noise.push_back(v.noise_override ? *v.noise_override : prior.noise_at(v.input));
  }
  return obs;
}

Eigen::MatrixXd gmr_gp_noise(const GmmModel& gmm, const NoiseSpec& noise, const Eigen::VectorXd& x) {
  const auto d = static_cast<Eigen::Index>(gmm.output_dim());
  if (!noise.per_component) return noise.values.at(0) * MatrixXd::Identity(d, d);
  if (noise.values.size() != gmm.num_components()) {
    throw Error(ErrorCode::DimensionMismatch, "per-component noise needs one value per component",
                {{"expected", std::to_string(gmm.num_components())}, {"actual", std::to_string(noise.values.size())}});
  }
  const VectorXd h = responsibilities(gmm, x).values;
  double sigma = 0.0;
  for (Eigen::Index l = 0; l < h.size(); ++l) sigma += h[l] * h[l] * noise.values.at(static_cast<std::size_t>(l));
  return sigma * MatrixXd::Identity(d, d);
}

GmrGpModel::GmrGpModel(std::shared_ptr<const GmrKernel> kernel, NoiseSpec noise, std::vector<ViaPoint> via_points)
    : kernel_(std::move(kernel)),
      noise_(std::move(noise)),
      via_points_(std::move(via_points)),
      engine_(make_prior(kernel_, noise_)) {
  engine_ = condition(engine_, via_observation_set(engine_, via_points_));
}

GmrGpModel GmrGpModel::from_parameters(std::shared_ptr<const GmmModel> gmm, std::vector<double> lengthscales,
                                       NoiseSpec noise) {
  if (!gmm) throw Error(ErrorCode::InvalidArgument, "GMR-GP needs a GMM");
  validate_noise(noise, gmm->num_components());
  auto kernel = std::make_shared<const GmrKernel>(std::move(gmm), std::move(lengthscales));
  return GmrGpModel(std::move(kernel), std::move(noise), {});
}

GmrGpModel build(std::shared_ptr<const GmmModel> gmm, const DemonstrationSet& demos, const BuildConfig& config,
                 BuildReport* report) {
  if (!gmm) throw Error(ErrorCode::InvalidArgument, "GMR-GP needs a GMM");
  if (demos.input_dim() != gmm->input_dim() || demos.output_dim() != gmm->output_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "demonstrations do not match the GMM dimensions");
  }
  const std::size_t c = gmm->num_components();
  const std::size_t noise_count = config.per_component_noise ? c : 1;
  const double range = input_range(demos.inputs());
  const auto& opt = config.optimizer;

  ModelTemplate tmpl;
  tmpl.bounds.assign(c, {opt.lengthscale_lower * range, opt.lengthscale_upper * range});
  tmpl.bounds.insert(tmpl.bounds.end(), noise_count, opt.noise_bounds);
  auto split = [c, noise_count, per = config.per_component_noise](const VectorXd& params) {
    std::vector<double> ls(params.data(), params.data() + c);
    std::vector<double> noise(params.data() + c, params.data() + c + noise_count);
    return std::pair{std::move(ls), per ? NoiseSpec::per_component_values(std::move(noise))
                                        : NoiseSpec::shared(noise.front())};
  };
  tmpl.make_prior = [gmm, split](const VectorXd& params) {
    auto [ls, noise] = split(params);
    return make_prior(std::make_shared<const GmrKernel>(gmm, std::move(ls)), noise);
  };
  tmpl.make_noise = [gmm, split](const VectorXd& params, const Points& inputs) {
    const NoiseSpec noise = split(params).second;
    std::vector<MatrixXd> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs) out.push_back(gmr_gp_noise(*gmm, noise, x));
    return out;
  };

  ObservationSet data;
  data.inputs = demos.inputs();
  data.outputs = demos.outputs();
  data.noise.assign(data.size(), MatrixXd::Zero(static_cast<Eigen::Index>(demos.output_dim()),
                                                static_cast<Eigen::Index>(demos.output_dim())));
  HyperparameterFit fit = optimize_hyperparams(tmpl, data, opt);
  auto [ls, noise] = split(fit.parameters);
  GmrGpModel model = GmrGpModel::from_parameters(gmm, std::move(ls), std::move(noise));
  if (report) {
    report->stride = likelihood_stride(opt, data.size());
    report->likelihood_points = (data.size() + report->stride - 1) / report->stride;
    report->fit = std::move(fit);
  }
  return model;
}

GmrGpModel adapt(const GmrGpModel& model, std::vector<ViaPoint> via_points) {
  const auto din = static_cast<Eigen::Index>(model.gmm().input_dim());
  const auto d = static_cast<Eigen::Index>(model.gmm().output_dim());
  std::vector<ViaPoint> merged;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < via_points.size(); ++i) {
    auto& v = via_points[i];
    if (v.input.size() != din || v.output.size() != d ||
        (v.noise_override && (v.noise_override->rows() != d || v.noise_override->cols() != d))) {
      throw Error(ErrorCode::DimensionMismatch, "via-point dimensions do not match the model",
                  {{"index", std::to_string(i)}});
    }
    bool absorbed = false;
    for (std::size_t j = 0; j < merged.size() && !absorbed; ++j) {
      auto& m = merged[j];
      if ((m.input - v.input).cwiseAbs().maxCoeff() > 1e-12) continue;
      const double scale = 1.0 + std::max(m.output.cwiseAbs().maxCoeff(), v.output.cwiseAbs().maxCoeff());
      if ((m.output - v.output).cwiseAbs().maxCoeff() <= 1e-9 * scale) {
        const double n = static_cast<double>(++counts[j]);
        m.output += (v.output - m.output) / n;
        absorbed = true;
        continue;
      }
      const MatrixXd nm = m.noise_override ? *m.noise_override : model.noise_at(m.input);
      const MatrixXd nv = v.noise_override ? *v.noise_override : model.noise_at(v.input);
      if (nm.isZero(0.0) && nv.isZero(0.0)) {
        throw Error(ErrorCode::DuplicateViaInput, "noise-free via-points share an input but disagree on the output",
                    {{"index", std::to_string(i)}, {"other", std::to_string(j)}});
      }
    }
    if (!absorbed) {
      merged.push_back(std::move(v));
      counts.push_back(1);
    }
  }
  return GmrGpModel(model.kernel_, model.noise_, std::move(merged));
}

std::vector<PosteriorPrediction> predict_trajectory(const GmrGpModel& model, const Points& xs) {
  return predict(model.engine(), xs);
}

std::vector<Points> sample_trajectories(const GmrGpModel& model, const Points& xs, std::size_t count,
                                        std::uint64_t seed) {
  return sample(model.engine(), xs, count, seed);
}

GmrGpModel set_component_lengthscale(const GmrGpModel& model, std::size_t component, double lengthscale) {
  if (component >= model.lengthscales().size()) {
    throw Error(ErrorCode::IndexOutOfRange, "component index " + std::to_string(component) + " out of range");
  }
  std::vector<double> ls = model.lengthscales();
  ls[component] = lengthscale;
  return adapt(GmrGpModel::from_parameters(model.gmm_ptr(), std::move(ls), model.noise()), model.via_points());
}

GmrGpModel set_noise(const GmrGpModel& model, NoiseSpec noise) {
  return adapt(GmrGpModel::from_parameters(model.gmm_ptr(), model.lengthscales(), std::move(noise)),
               model.via_points());
}

}  // namespace gmrgp
