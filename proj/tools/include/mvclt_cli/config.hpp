#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvclt/bounds.hpp"
#include "mvclt/matrix.hpp"
#include "mvclt/model.hpp"
#include "mvclt/monte_carlo.hpp"
#include "mvclt/quadforms.hpp"
#include "mvclt/runs.hpp"
#include "mvclt/smooth_function.hpp"

namespace mvclt::cli {

/// Malformed or schema-violating configuration. The message names the field
/// path (for example /instances/0/statistic/kind) or the line and column.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TargetKind { exact_covariance, identity, explicit_matrix };

struct TargetSpec {
  TargetKind kind = TargetKind::exact_covariance;
  Matrix c;  // explicit_matrix only
};

struct InstanceConfig {
  std::string id;
  ProductModel model;
  StatisticVector statistic;
  std::optional<RunsSpec> runs;
  std::optional<QuadFormSpec> quadform;
  TargetSpec target;
  std::vector<SmoothTestFunction> functions;  // falls back to RunConfig::functions
};

enum class CorpusKind { identity, rademacher, bound };

struct CorpusConfig {
  CorpusKind kind = CorpusKind::identity;
  std::size_t count = 200;
  std::optional<std::uint64_t> seed;
};

struct SweepConfig {
  std::string family;  // bernoulli-runs | qf-tridiagonal | qf-single-row
  std::vector<std::size_t> n_grid;
  std::size_t d = 1;
  double p = 0.5;
  std::size_t lhs_max_coordinates = 16;
};

struct CompareRunsConfig {
  std::vector<std::size_t> n{10, 100, 1000};
  std::vector<std::size_t> d{1, 2, 3};
  std::vector<double> p{0.3, 0.5, 0.7};
  double g2 = 1.0;
  double g3 = 1.0;
};

struct RunConfig {
  std::optional<std::string> command;
  std::uint64_t seed = 1;
  EstimationMode mode = EstimationMode::exact;
  McConfig mc;
  std::optional<std::vector<double>> alphas;
  std::vector<BoundForm> forms{BoundForm::l1, BoundForm::l2, BoundForm::split};
  std::vector<SmoothTestFunction> functions;
  bool instances_given = false;
  std::vector<InstanceConfig> instances;
  std::optional<CorpusConfig> corpus;
  std::optional<SweepConfig> sweep;
  std::optional<CompareRunsConfig> compare_runs;
  std::optional<std::string> csv_path;
  std::optional<std::string> svg_path;
  std::vector<std::string> warnings;
};

/// Validates against the fixed schema; unknown keys are rejected. Relative
/// CSV paths are resolved against `base_dir`.
RunConfig parse_config(const nlohmann::json& root, const std::filesystem::path& base_dir = {});
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

EstimationMode parse_mode(const std::string& s);

}  // namespace mvclt::cli
