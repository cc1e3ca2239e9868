#include "gmrgp/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

#include "gmrgp/error.hpp"
#include "gmrgp/format.hpp"
#include "gmrgp/scenario.hpp"

namespace gmrgp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    std::string cell(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ' || cell.back() == '\t')) cell.pop_back();
    const auto first = cell.find_first_not_of(" \t");
    out.push_back(first == std::string::npos ? std::string() : cell.substr(first));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Error parse_error(const std::string& message, std::size_t row, std::size_t column) {
  return Error(ErrorCode::ParseError, message, {{"row", std::to_string(row)}, {"column", std::to_string(column)}});
}

// --- JSON helpers ----------------------------------------------------------

double number_at(const Json& j, const std::string& where) {
  if (j.is_null()) throw Error(ErrorCode::NonFiniteValue, "non-finite or missing number", {{"path", where}});
  if (!j.is_number()) throw Error(ErrorCode::ParseError, "expected a number", {{"path", where}});
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite number", {{"path", where}});
  return v;
}

std::size_t count_at(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
    throw Error(ErrorCode::ParseError, "expected a non-negative integer", {{"path", where}});
  }
  return j.get<std::size_t>();
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "expected an object", {{"path", where}});
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'", {{"path", where}});
  return *it;
}

VectorXd vector_at(const Json& j, const std::string& where) {
  if (j.is_number() || j.is_null()) return VectorXd::Constant(1, number_at(j, where));
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "expected an array of numbers", {{"path", where}});
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = number_at(j[i], where + "/" + std::to_string(i));
  return v;
}

MatrixXd matrix_at(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, "expected a nested array", {{"path", where}});
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  MatrixXd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const VectorXd row = vector_at(j[r], where + "/" + std::to_string(r));
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      m.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, "matrix rows differ in length", {{"path", where}});
    }
    m.row(static_cast<Index>(r)) = row.transpose();
  }
  return m;
}

std::vector<double> doubles_at(const Json& j, const std::string& where) {
  const VectorXd v = vector_at(j, where);
  return {v.data(), v.data() + v.size()};
}

Json to_json(const VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json to_json(const MatrixXd& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(VectorXd(m.row(r).transpose())));
  return rows;
}

}  // namespace

// --- demonstrations --------------------------------------------------------

DemonstrationSet read_demonstrations(std::istream& in, const LoadOptions& options) {
  std::size_t din = 0, d = 0;
  bool declared = false;
  std::vector<std::string> header;
  std::vector<std::string> demo_ids;
  std::vector<std::vector<std::pair<VectorXd, VectorXd>>> rows_by_demo;

  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line.front() == '#') {
      std::istringstream tokens(line.substr(1));
      std::string token;
      while (tokens >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = token.substr(0, eq);
        double value = 0.0;
        if (key != "input_dim" && key != "output_dim") continue;
        if (!parse_double(token.substr(eq + 1), value) || value < 1.0 || value != std::floor(value)) {
          throw parse_error("invalid " + key, row, 1);
        }
        (key == "input_dim" ? din : d) = static_cast<std::size_t>(value);
        declared = true;
      }
      continue;
    }
    std::vector<std::string> cells = split(line, ',');
    if (header.empty()) {
      header = std::move(cells);
      if (header.front() != "demo_id") throw parse_error("first header column must be demo_id", row, 1);
      if (header.size() < 3) throw parse_error("need demo_id, at least one input and one output column", row, 1);
      if (!declared) {
        din = din == 0 ? 1 : din;
        d = header.size() - 1 - din;
      }
      if (din == 0 || d == 0 || header.size() != 1 + din + d) {
        throw parse_error("header has " + std::to_string(header.size()) + " columns, expected " +
                              std::to_string(1 + din + d),
                          row, header.size());
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw parse_error("row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(header.size()),
                        row, std::min(cells.size(), header.size()) + 1);
    }
    const std::string& id = cells.front();
    if (id.empty()) throw parse_error("empty demo_id", row, 1);
    if (demo_ids.empty() || demo_ids.back() != id) {
      if (std::find(demo_ids.begin(), demo_ids.end(), id) != demo_ids.end()) {
        throw parse_error("rows of demo_id " + id + " are not contiguous", row, 1);
      }
      demo_ids.push_back(id);
      rows_by_demo.emplace_back();
    }
    VectorXd x(static_cast<Index>(din)), y(static_cast<Index>(d));
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double value = 0.0;
      if (!parse_double(cells[c], value)) throw parse_error("cannot parse '" + cells[c] + "' as a number", row, c + 1);
      if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFiniteValue, "non-finite value in column " + header[c] + " at row " + std::to_string(row),
                    {{"row", std::to_string(row)}, {"column", std::to_string(c + 1)}, {"column_name", header[c]}});
      }
      if (c <= din) {
        x[static_cast<Index>(c - 1)] = value;
      } else {
        y[static_cast<Index>(c - 1 - din)] = value;
      }
    }
    rows_by_demo.back().emplace_back(std::move(x), std::move(y));
  }
  if (header.empty() || rows_by_demo.empty()) throw Error(ErrorCode::EmptyData, "no demonstration rows");

  Points inputs, outputs;
  std::vector<DemoRange> ranges;
  for (const auto& demo : rows_by_demo) {
    ranges.push_back({inputs.size(), inputs.size() + demo.size()});
    for (const auto& [x, y] : demo) {
      inputs.push_back(x);
      outputs.push_back(y);
    }
  }
  DemonstrationSet set(std::move(inputs), std::move(outputs), std::move(ranges));
  if (options.resample > 0) return resample_demonstrations(set, options.resample);
  for (std::size_t k = 1; k < set.demos().size(); ++k) {
    if (set.demos()[k].size() != set.demos().front().size()) {
      throw Error(ErrorCode::RaggedDemo,
                  "demonstration " + demo_ids[k] + " has " + std::to_string(set.demos()[k].size()) +
                      " samples, the first has " + std::to_string(set.demos().front().size()) +
                      " (use resampling to align lengths)",
                  {{"demo_id", demo_ids[k]}});
    }
  }
  return set;
}

DemonstrationSet load_demonstrations(const std::string& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path, {{"path", path}});
  try {
    return read_demonstrations(in, options);
  } catch (const Error& e) {
    throw e.with_context("path", path);
  }
}

void write_demonstrations(std::ostream& out, const DemonstrationSet& demos) {
  out << "# input_dim=" << demos.input_dim() << " output_dim=" << demos.output_dim() << '\n';
  std::vector<std::string> header{"demo_id"};
  if (demos.input_dim() == 1) {
    header.push_back("t");
  } else {
    for (std::size_t i = 0; i < demos.input_dim(); ++i) header.push_back("x" + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < demos.output_dim(); ++i) header.push_back("y" + std::to_string(i + 1));
  write_csv_row(out, header);
  std::vector<std::string> cells;
  for (std::size_t k = 0; k < demos.demos().size(); ++k) {
    const auto& r = demos.demos()[k];
    for (std::size_t i = r.begin; i < r.end; ++i) {
      cells.assign(1, std::to_string(k));
      for (Index j = 0; j < demos.inputs()[i].size(); ++j) cells.push_back(format_double(demos.inputs()[i][j]));
      for (Index j = 0; j < demos.outputs()[i].size(); ++j) cells.push_back(format_double(demos.outputs()[i][j]));
      write_csv_row(out, cells);
    }
  }
}

void save_demonstrations(const std::string& path, const DemonstrationSet& demos) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path, {{"path", path}});
  write_demonstrations(out, demos);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path, {{"path", path}});
}

DemonstrationSet resample_demonstrations(const DemonstrationSet& demos, std::size_t samples) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "resampling needs at least 2 samples");
  Points inputs, outputs;
  std::vector<DemoRange> ranges;
  for (const auto& r : demos.demos()) {
    const std::size_t n = r.size();
    std::vector<double> param(n);
    bool by_input = demos.input_dim() == 1 && n > 1 && demos.inputs()[r.end - 1][0] > demos.inputs()[r.begin][0];
    for (std::size_t i = 0; i < n && by_input; ++i) {
      param[i] = demos.inputs()[r.begin + i][0];
      if (i > 0 && param[i] < param[i - 1]) by_input = false;
    }
    if (!by_input) {
      for (std::size_t i = 0; i < n; ++i) param[i] = static_cast<double>(i);
    }
    ranges.push_back({inputs.size(), inputs.size() + samples});
    for (std::size_t k = 0; k < samples; ++k) {
      const double target =
          n == 1 ? param[0] : param.front() + (param.back() - param.front()) * static_cast<double>(k) / (samples - 1.0);
      std::size_t hi = static_cast<std::size_t>(std::upper_bound(param.begin(), param.end(), target) - param.begin());
      hi = std::clamp<std::size_t>(hi, 1, std::max<std::size_t>(n - 1, 1));
      const std::size_t lo = n == 1 ? 0 : hi - 1;
      if (n == 1) hi = 0;
      const double span = param[hi] - param[lo];
      const double f = span > 0.0 ? std::clamp((target - param[lo]) / span, 0.0, 1.0) : 0.0;
      inputs.push_back((1.0 - f) * demos.inputs()[r.begin + lo] + f * demos.inputs()[r.begin + hi]);
      outputs.push_back((1.0 - f) * demos.outputs()[r.begin + lo] + f * demos.outputs()[r.begin + hi]);
    }
  }
  return DemonstrationSet(std::move(inputs), std::move(outputs), std::move(ranges));
}

// --- JSON ------------------------------------------------------------------

Json gmm_to_json(const GmmModel& model) {
  Json components = Json::array();
  for (const auto& c : model.components()) {
    components.push_back({{"weight", c.weight}, {"mean", to_json(c.mean)}, {"covariance", to_json(c.covariance)}});
  }
  return {{"input_dim", model.input_dim()}, {"output_dim", model.output_dim()}, {"components", components}};
}

GmmModel gmm_from_json(const Json& doc) {
  const std::size_t din = count_at(field(doc, "input_dim", "gmm"), "gmm/input_dim");
  const std::size_t d = count_at(field(doc, "output_dim", "gmm"), "gmm/output_dim");
  const Json& list = field(doc, "components", "gmm");
  if (!list.is_array() || list.empty()) throw Error(ErrorCode::ParseError, "components must be a non-empty array");
  std::vector<GaussianComponent> components;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "gmm/components/" + std::to_string(i);
    GaussianComponent c;
    c.weight = number_at(field(list[i], "weight", where), where + "/weight");
    c.mean = vector_at(field(list[i], "mean", where), where + "/mean");
    c.covariance = matrix_at(field(list[i], "covariance", where), where + "/covariance");
    const auto joint = static_cast<Index>(din + d);
    if (c.mean.size() != joint || c.covariance.rows() != joint || c.covariance.cols() != joint) {
      throw Error(ErrorCode::DimensionMismatch, "component dimensions do not match input_dim + output_dim",
                  {{"path", where}});
    }
    components.push_back(std::move(c));
  }
  return GmmModel(std::move(components), din, d);
}

Json kernel_to_json(const MatrixKernel& kernel) {
  if (const auto* k = dynamic_cast<const GmrKernel*>(&kernel)) {
    return {{"type", "gmr"},
            {"lengthscales", k->lengthscales()},
            {"variances", std::vector<double>(k->num_components(), 1.0)}};
  }
  if (const auto* k = dynamic_cast<const LmcKernel*>(&kernel)) {
    std::vector<double> ls, vars;
    Json coreg = Json::array();
    for (const auto& p : k->scalar_kernels()) {
      ls.push_back(p.lengthscale);
      vars.push_back(p.variance);
    }
    for (const auto& u : k->coregionalization()) coreg.push_back(to_json(u));
    return {{"type", "lmc"}, {"lengthscales", ls}, {"variances", vars}, {"coregionalization", coreg}};
  }
  if (const auto* k = dynamic_cast<const Matern52Kernel*>(&kernel)) {
    return {{"type", "matern52"},
            {"lengthscales", {k->params().lengthscale}},
            {"variances", {k->params().variance}}};
  }
  throw Error(ErrorCode::InvalidArgument, "kernel type has no JSON form");
}

Json via_points_to_json(const std::vector<ViaPoint>& via_points) {
  Json list = Json::array();
  for (const auto& v : via_points) {
    Json entry{{"input", to_json(v.input)}, {"output", to_json(v.output)}};
    if (v.noise_override) entry["noise"] = to_json(*v.noise_override);
    list.push_back(std::move(entry));
  }
  return list;
}

std::vector<ViaPoint> via_points_from_json(const Json& doc) {
  const Json& list = doc.is_object() ? field(doc, "via_points", "") : doc;
  if (!list.is_array()) throw Error(ErrorCode::ParseError, "via-points must be an array");
  std::vector<ViaPoint> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "via_points/" + std::to_string(i);
    ViaPoint v;
    v.input = vector_at(field(list[i], "input", where), where + "/input");
    v.output = vector_at(field(list[i], "output", where), where + "/output");
    const auto noise = list[i].find("noise");
    if (noise != list[i].end() && !noise->is_null()) {
      const auto d = v.output.size();
      v.noise_override = noise->is_number() ? MatrixXd(number_at(*noise, where + "/noise") * MatrixXd::Identity(d, d))
                                            : matrix_at(*noise, where + "/noise");
    }
    out.push_back(std::move(v));
  }
  return out;
}

Json gmr_gp_to_json(const GmrGpModel& model) {
  return {{"gmm", gmm_to_json(model.gmm())},
          {"kernel", kernel_to_json(model.kernel())},
          {"noise", {{"per_component", model.noise().per_component}, {"values", model.noise().values}}},
          {"via_points", via_points_to_json(model.via_points())}};
}

GmrGpModel gmr_gp_from_json(const Json& doc) {
  auto gmm = std::make_shared<const GmmModel>(gmm_from_json(field(doc, "gmm", "")));
  const Json& kernel = field(doc, "kernel", "");
  const Json& type = field(kernel, "type", "kernel");
  if (!type.is_string() || type.get<std::string>() != "gmr") {
    throw Error(ErrorCode::InvalidArgument, "model kernel must have type \"gmr\"");
  }
  std::vector<double> ls = doubles_at(field(kernel, "lengthscales", "kernel"), "kernel/lengthscales");
  if (const auto vars = kernel.find("variances"); vars != kernel.end()) {
    for (double v : doubles_at(*vars, "kernel/variances")) {
      if (v != 1.0) throw Error(ErrorCode::InvalidArgument, "GMR kernel variances are fixed to 1");
    }
  }
  const Json& noise_doc = field(doc, "noise", "");
  NoiseSpec noise;
  const Json& per = field(noise_doc, "per_component", "noise");
  if (!per.is_boolean()) throw Error(ErrorCode::ParseError, "noise/per_component must be a boolean");
  noise.per_component = per.get<bool>();
  noise.values = doubles_at(field(noise_doc, "values", "noise"), "noise/values");
  GmrGpModel prior = GmrGpModel::from_parameters(std::move(gmm), std::move(ls), std::move(noise));
  const auto via = doc.find("via_points");
  if (via == doc.end() || via->is_null()) return prior;
  return adapt(prior, via_points_from_json(*via));
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path, {{"path", path}});
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what(),
                {{"path", path}, {"byte", std::to_string(e.byte)}});
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path, {{"path", path}});
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path, {{"path", path}});
}

// --- CSV exports -----------------------------------------------------------

void write_trajectory_csv(std::ostream& out, const Points& xs, const std::vector<PosteriorPrediction>& predictions) {
  if (xs.size() != predictions.size()) throw Error(ErrorCode::DimensionMismatch, "query and prediction counts differ");
  if (xs.empty()) return;
  const Index din = xs.front().size();
  const Index d = predictions.front().mean.size();
  std::vector<std::string> header;
  for (Index i = 0; i < din; ++i) header.push_back("x" + std::to_string(i + 1));
  for (Index i = 0; i < d; ++i) header.push_back("mean" + std::to_string(i + 1));
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) header.push_back("cov" + std::to_string(i + 1) + std::to_string(j + 1));
  }
  for (Index i = 0; i < d; ++i) {
    header.push_back("lo" + std::to_string(i + 1));
    header.push_back("hi" + std::to_string(i + 1));
  }
  write_csv_row(out, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const auto& p = predictions[k];
    row.assign(xs[k].data(), xs[k].data() + din);
    row.insert(row.end(), p.mean.data(), p.mean.data() + d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = 0; j < d; ++j) row.push_back(p.covariance(i, j));
    }
    for (Index i = 0; i < d; ++i) {
      const double band = 2.0 * std::sqrt(std::max(p.covariance(i, i), 0.0));
      row.push_back(p.mean[i] - band);
      row.push_back(p.mean[i] + band);
    }
    write_csv_row(out, row);
  }
}

void write_samples_csv(std::ostream& out, const Points& xs, const std::vector<Points>& samples) {
  if (xs.empty() || samples.empty()) return;
  const Index din = xs.front().size();
  const Index d = samples.front().front().size();
  std::vector<std::string> header{"sample"};
  for (Index i = 0; i < din; ++i) header.push_back("x" + std::to_string(i + 1));
  for (Index i = 0; i < d; ++i) header.push_back("y" + std::to_string(i + 1));
  write_csv_row(out, header);
  std::vector<std::string> cells;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    for (std::size_t k = 0; k < xs.size(); ++k) {
      cells.assign(1, std::to_string(s));
      for (Index i = 0; i < din; ++i) cells.push_back(format_double(xs[k][i]));
      for (Index i = 0; i < d; ++i) cells.push_back(format_double(samples[s][k][i]));
      write_csv_row(out, cells);
    }
  }
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto parts = split(spec, ':');
  double v[3] = {0.0, 0.0, 0.0};
  if (parts.size() != 3) throw Error(ErrorCode::ParseError, "grid must be start:stop:step", {{"grid", spec}});
  for (std::size_t i = 0; i < 3; ++i) {
    if (!parse_double(parts[i], v[i]) || !std::isfinite(v[i])) {
      throw Error(ErrorCode::ParseError, "grid must be start:stop:step", {{"grid", spec}});
    }
  }
  if (!(v[2] > 0.0) || v[1] < v[0]) {
    throw Error(ErrorCode::ParseError, "grid needs step > 0 and stop >= start", {{"grid", spec}});
  }
  return time_grid(v[0], v[1], v[2]);
}

}  // namespace gmrgp
