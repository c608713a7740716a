#include <string>

#include "priorboost/cli.hpp"
#include "priorboost/csv.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/rng.hpp"

namespace priorboost::cli {

namespace {

Loss read_loss(const json& j, std::string_view key, Loss fallback) {
  if (auto it = j.find(key); it != j.end()) return Loss{loss_kind_from_string(it->get<std::string>())};
  return fallback;
}

void read_split(const json& j, SplitSpec& s) {
  check_keys(j, {"train_fraction", "shuffle"}, "split");
  read_optional(j, "train_fraction", s.train_fraction, "split");
  read_optional(j, "shuffle", s.shuffle, "split");
  s.validate();
}

void read_gen(const json& j, GenConfig& g) {
  check_keys(j, {"rows", "mode", "sampler", "proxy", "bias_scenario"}, "gen");
  read_optional(j, "rows", g.rows, "gen");
  read_optional(j, "mode", g.mode, "gen");
  if (g.mode != "chain" && g.mode != "bias") throw ValidationError("gen.mode: expected 'chain' or 'bias'");
  read_optional(j, "sampler", g.sampler, "gen");
  read_optional(j, "proxy", g.proxy, "gen");
  read_optional(j, "bias_scenario", g.bias, "gen");
}

void read_cv(const json& j, CvConfig& c) {
  check_keys(j, {"k_folds", "loss"}, "cv");
  read_optional(j, "k_folds", c.k_folds, "cv");
  c.loss = read_loss(j, "loss", c.loss);
}

void read_curve(const json& j, CurveConfig& c) {
  check_keys(j, {"target", "sizes", "repeats", "k_folds", "loss"}, "curve");
  read_optional(j, "target", c.target, "curve");
  read_optional(j, "sizes", c.sizes, "curve");
  read_optional(j, "repeats", c.repeats, "curve");
  read_optional(j, "k_folds", c.k_folds, "curve");
  c.loss = read_loss(j, "loss", c.loss);
}

void read_explain(const json& j, ExplainConfig& e) {
  check_keys(j, {"subject", "target", "mode", "background_rows", "max_features", "n_permutations", "rows"},
             "explain");
  read_optional(j, "subject", e.subject, "explain");
  read_optional(j, "target", e.target, "explain");
  read_optional(j, "mode", e.mode, "explain");
  read_optional(j, "background_rows", e.background_rows, "explain");
  read_optional(j, "max_features", e.max_features, "explain");
  read_optional(j, "n_permutations", e.n_permutations, "explain");
  read_optional(j, "rows", e.rows, "explain");
  if (e.subject != "model" && e.subject != "prior") throw ValidationError("explain.subject: expected 'model' or 'prior'");
  if (e.mode != "exact" && e.mode != "sampled") throw ValidationError("explain.mode: expected 'exact' or 'sampled'");
}

void read_nested(const json& j, NestedCvConfig& n) {
  check_keys(j, {"target", "outer_k", "inner_l", "loss", "grid"}, "nested_cv");
  read_optional(j, "target", n.target, "nested_cv");
  read_optional(j, "outer_k", n.outer_k, "nested_cv");
  read_optional(j, "inner_l", n.inner_l, "nested_cv");
  n.loss = read_loss(j, "loss", n.loss);
  read_optional(j, "grid", n.grid, "nested_cv");
}

}  // namespace

BoostParams RunConfig::shared_params() const {
  json j = boost;
  if (j.contains("seed")) throw ValidationError("boost.seed: seeds derive from the top-level seed");
  return j.get<BoostParams>();
}

std::map<std::size_t, BoostParams> RunConfig::per_target_params() const {
  std::map<std::size_t, BoostParams> out;
  for (const auto& [key, patch] : per_target.items()) {
    std::size_t j = 0;
    try {
      j = std::stoul(key);
    } catch (const std::exception&) {
      throw ValidationError("per_target: key '" + key + "' is not a target number");
    }
    if (j < 1) throw ValidationError("per_target: target numbers start at 1");
    json merged = boost;
    merged.merge_patch(patch);
    if (merged.contains("seed")) throw ValidationError("per_target.seed: seeds derive from the top-level seed");
    out[j - 1] = merged.get<BoostParams>();
  }
  return out;
}

RunConfig resolve_config(const json& file, const Flags& flags) {
  RunConfig c;
  check_keys(file, {"seed", "jobs", "out", "data", "model", "split", "boost", "per_target", "cv", "gen", "curve",
                    "explain", "nested_cv"},
             "config");
  read_optional(file, "seed", c.seed, "config");
  read_optional(file, "jobs", c.jobs, "config");
  if (auto it = file.find("out"); it != file.end()) c.out = it->get<std::string>();
  if (auto it = file.find("data"); it != file.end()) c.data = it->get<std::string>();
  if (auto it = file.find("model"); it != file.end()) c.model = it->get<std::string>();
  if (auto it = file.find("split"); it != file.end()) read_split(*it, c.split);
  if (auto it = file.find("boost"); it != file.end()) {
    if (!it->is_object()) throw ValidationError("boost: expected a JSON object");
    c.boost = *it;
  }
  if (auto it = file.find("per_target"); it != file.end()) {
    if (!it->is_object()) throw ValidationError("per_target: expected a JSON object");
    c.per_target = *it;
  }
  if (auto it = file.find("cv"); it != file.end()) read_cv(*it, c.cv);
  if (auto it = file.find("gen"); it != file.end()) read_gen(*it, c.gen);
  if (auto it = file.find("curve"); it != file.end()) read_curve(*it, c.curve);
  if (auto it = file.find("explain"); it != file.end()) read_explain(*it, c.explain);
  if (auto it = file.find("nested_cv"); it != file.end()) read_nested(*it, c.nested_cv);

  if (flags.seed) c.seed = *flags.seed;
  if (flags.jobs) c.jobs = *flags.jobs;
  if (flags.out) c.out = *flags.out;
  if (flags.data) c.data = *flags.data;
  if (flags.model) c.model = *flags.model;
  if (flags.target) c.curve.target = c.explain.target = c.nested_cv.target = *flags.target;
  c.on_training = flags.on_training;

  if (c.jobs < 1) throw ValidationError("jobs must be at least 1");
  // Parse eagerly so schema errors surface before any work starts.
  c.shared_params();
  c.per_target_params();
  return c;
}

RunConfig load_config(const Flags& flags) {
  json file = json::object();
  if (flags.config) {
    const std::string text = csv::read_text(*flags.config);
    try {
      file = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ValidationError(flags.config->string() + ": invalid JSON: " + e.what());
    }
  }
  try {
    return resolve_config(file, flags);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

json to_json(const RunConfig& c) {
  json boost = c.shared_params();
  boost.erase("seed");
  json per_target = json::object();
  for (const auto& [j, p] : c.per_target_params()) {
    json pj = p;
    pj.erase("seed");
    per_target[std::to_string(j + 1)] = pj;
  }
  json out{
      {"seed", c.seed},
      {"jobs", c.jobs},
      {"out", c.out.string()},
      {"split", {{"train_fraction", c.split.train_fraction}, {"shuffle", c.split.shuffle}}},
      {"boost", boost},
      {"per_target", per_target},
      {"cv", {{"k_folds", c.cv.k_folds}, {"loss", to_string(c.cv.loss.kind)}}},
      {"gen",
       {{"rows", c.gen.rows},
        {"mode", c.gen.mode},
        {"sampler", c.gen.sampler},
        {"proxy", c.gen.proxy},
        {"bias_scenario", c.gen.bias}}},
      {"curve",
       {{"target", c.curve.target},
        {"sizes", c.curve.sizes},
        {"repeats", c.curve.repeats},
        {"k_folds", c.curve.k_folds},
        {"loss", to_string(c.curve.loss.kind)}}},
      {"explain",
       {{"subject", c.explain.subject},
        {"target", c.explain.target},
        {"mode", c.explain.mode},
        {"background_rows", c.explain.background_rows},
        {"max_features", c.explain.max_features},
        {"n_permutations", c.explain.n_permutations},
        {"rows", c.explain.rows}}},
      {"nested_cv",
       {{"target", c.nested_cv.target},
        {"outer_k", c.nested_cv.outer_k},
        {"inner_l", c.nested_cv.inner_l},
        {"loss", to_string(c.nested_cv.loss.kind)},
        {"grid", c.nested_cv.grid}}},
  };
  if (c.data) out["data"] = c.data->string();
  if (c.model) out["model"] = c.model->string();
  return out;
}

std::uint64_t stream_seed(const RunConfig& config, Stream stream) {
  return derive_seed(config.seed, static_cast<std::uint64_t>(stream));
}

}  // namespace priorboost::cli
