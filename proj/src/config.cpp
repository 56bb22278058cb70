#include "ttr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <string>

#include "ttr/error.hpp"

namespace ttr {

void ClassWeights::validate() const {
  bool any_positive = false;
  for (double w : values) {
    if (!std::isfinite(w) || w < 0.0) throw UsageError("class weights must be finite and >= 0");
    any_positive |= w > 0.0;
  }
  if (!any_positive) throw UsageError("at least one class weight must be positive");
}

void Cutoffs::validate() const {
  auto inside = [](double v) { return v > 0.0 && v < 1.0; };
  if (!inside(alpha) || !inside(beta)) {
    throw UsageError("alpha and beta must lie strictly inside (0, 1)");
  }
}

PipelineConfig read_pipeline_config(std::istream& in, std::string_view source) {
  std::map<std::string, double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    std::string_view body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto eq = body.find('=');
    auto where = std::string(source) + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw InputError(where + ": expected key=value");
    std::string key(trim(body.substr(0, eq)));
    std::string val(trim(body.substr(eq + 1)));
    try {
      std::size_t used = 0;
      double v = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      values[key] = v;
    } catch (const std::exception&) {
      throw InputError(where + ": '" + val + "' is not a number");
    }
  }
  PipelineConfig cfg;
  auto take = [&](const std::string& key, double& dst) {
    auto it = values.find(key);
    if (it == values.end()) throw InputError(std::string(source) + ": missing key '" + key + "'");
    dst = it->second;
    values.erase(it);
  };
  for (auto c : kSemanticClasses) take(std::string(to_string(c)), cfg.weights[c]);
  take("alpha", cfg.cutoffs.alpha);
  take("beta", cfg.cutoffs.beta);
  if (!values.empty()) {
    throw InputError(std::string(source) + ": unknown key '" + values.begin()->first + "'");
  }
  try {
    cfg.weights.validate();
    cfg.cutoffs.validate();
  } catch (const UsageError& e) {
    throw InputError(std::string(source) + ": " + e.what());
  }
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read weight file '" + path.string() + "'");
  return read_pipeline_config(in, path.string());
}

namespace {

// Shortest text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace

void write_pipeline_config(std::ostream& out, const PipelineConfig& config) {
  for (auto c : kSemanticClasses) out << to_string(c) << '=' << shortest(config.weights[c]) << '\n';
  out << "alpha=" << shortest(config.cutoffs.alpha) << '\n';
  out << "beta=" << shortest(config.cutoffs.beta) << '\n';
}

void save_pipeline_config(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write weight file '" + path.string() + "'");
  write_pipeline_config(out, config);
}

}  // namespace ttr
