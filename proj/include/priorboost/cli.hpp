#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "priorboost/boosting.hpp"
#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"
#include "priorboost/selection.hpp"
#include "priorboost/simdata.hpp"

namespace priorboost::cli {

struct GenConfig {
  std::size_t rows = 136;
  std::string mode = "chain";  // chain | bias
  ParamSampler sampler;
  ControlModelProxy proxy = ControlModelProxy::default_scenario();
  BiasScenario bias;
};

struct CvConfig {
  int k_folds = 5;
  Loss loss{LossKind::absolute};
};

struct CurveConfig {
  int target = 1;  // 1-based
  std::vector<std::size_t> sizes{23, 31, 39, 47, 55, 63, 71, 79, 87, 95};
  int repeats = 5;
  int k_folds = 5;
  Loss loss{LossKind::absolute};
};

struct ExplainConfig {
  std::string subject = "model";  // model | prior (bias-feature control model)
  int target = 1;
  std::string mode = "exact";     // exact | sampled
  std::size_t background_rows = 64;
  std::size_t max_features = 15;
  std::size_t n_permutations = 1000;
  std::size_t rows = 0;  // examples explained; 0 = all
};

struct NestedCvConfig {
  int target = 1;
  int outer_k = 5;
  int inner_l = 3;
  Loss loss{LossKind::absolute};
  Grid grid{{GridAxis{"n_stages", {json(100)}}}, 512};
};

// Command-line flags; set values override the config file.
struct Flags {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> model;
  std::optional<int> target;
  bool on_training = false;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> model;
  bool on_training = false;
  SplitSpec split;
  json boost = json::object();       // shared BoostParams overrides
  json per_target = json::object();  // "j" (1-based) -> merge patch over `boost`
  CvConfig cv;
  GenConfig gen;
  CurveConfig curve;
  ExplainConfig explain;
  NestedCvConfig nested_cv;

  BoostParams shared_params() const;
  std::map<std::size_t, BoostParams> per_target_params() const;  // 0-based keys
};

// Defaults < config file < flags. Unknown keys are rejected.
RunConfig resolve_config(const json& file, const Flags& flags);
RunConfig load_config(const Flags& flags);
json to_json(const RunConfig& config);

// Seed streams derived from the master seed.
enum class Stream : std::uint64_t { gen = 1, split = 2, fit = 3, curve = 4, nested_cv = 5, explain = 6 };
std::uint64_t stream_seed(const RunConfig& config, Stream stream);

// Entry point; returns the process exit code (0 ok, 1 validation, 2 I/O,
// 3 numerical). Errors are written to `err` as one JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace priorboost::cli
