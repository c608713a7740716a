#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "priorboost/cli.hpp"
#include "priorboost/csv.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/explain.hpp"
#include "priorboost/log.hpp"
#include "priorboost/multitarget.hpp"
#include "priorboost/rng.hpp"

namespace priorboost::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_json(const fs::path& path, const json& j) { csv::write_text(path, j.dump(2) + "\n"); }

json read_json(const fs::path& path) {
  const std::string text = csv::read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path data_path(const RunConfig& c, const char* fallback) { return c.data ? *c.data : c.out / fallback; }
fs::path model_path(const RunConfig& c) { return c.model ? *c.model : c.out / "model.json"; }

std::size_t target_index(int target, std::size_t n, const char* context) {
  if (target < 1 || static_cast<std::size_t>(target) > n) {
    throw ValidationError(std::string(context) + ".target: " + std::to_string(target) + " is outside 1.." +
                          std::to_string(n));
  }
  return static_cast<std::size_t>(target - 1);
}

MultiTargetModel load_model(const RunConfig& c) {
  const fs::path path = model_path(c);
  if (!fs::exists(path)) throw IoError("model file '" + path.string() + "' does not exist");
  try {
    return MultiTargetModel::from_json(read_json(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void print_metric(std::ostream& out, const char* name, double value) {
  out << name << ": " << csv::format_double(value) << '\n';
}

// ---------------------------------------------------------------------------

void cmd_gen(const RunConfig& c, std::ostream& out) {
  const std::uint64_t seed = stream_seed(c, Stream::gen);
  const fs::path dataset_file = c.out / "dataset.csv";
  std::optional<Dataset> dataset;
  if (c.gen.mode == "bias") {
    auto generated = generate_bias_dataset(c.gen.rows, c.gen.bias, c.gen.proxy, seed, c.jobs);
    std::vector<std::string> header{"id"};
    const auto names = bias_names(c.gen.bias);
    header.insert(header.end(), names.begin(), names.end());
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < generated.biases.rows(); ++i) {
      std::vector<double> row{static_cast<double>(i)};
      for (Eigen::Index b = 0; b < generated.biases.cols(); ++b) row.push_back(generated.biases(i, b));
      rows.push_back(std::move(row));
    }
    csv::write_table(c.out / "biases.csv", header, rows);
    dataset = std::move(generated.data);
  } else {
    dataset = generate_dataset(c.gen.rows, c.gen.sampler, c.gen.proxy, seed, c.jobs);
  }
  csv::write_dataset(dataset_file, *dataset);

  std::vector<double> per_target;
  for (Eigen::Index j = 0; j < dataset->examples().cols(); ++j) {
    per_target.push_back(mae(Vector(dataset->targets().col(j)), Vector(dataset->examples().col(j))));
  }
  const double baseline = average_mae(dataset->targets(), dataset->examples());
  write_json(c.out / "gen_summary.json", json{{"rows", dataset->rows()},
                                              {"baseline_average_mae", baseline},
                                              {"baseline_per_target_mae", per_target},
                                              {"units", "MHz"}});
  out << "rows: " << dataset->rows() << '\n';
  print_metric(out, "baseline_average_mae", baseline);
}

void write_correlations(const fs::path& dir, const Dataset& train) {
  const CorrelationMatrix corr = pairwise_correlations(train);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < corr.values.rows(); ++i) {
    rows.emplace_back(corr.values.row(i).begin(), corr.values.row(i).end());
  }
  csv::write_table(dir / "correlations.csv", corr.labels, rows);
  json values = json::array();
  for (const auto& r : rows) values.push_back(r);
  write_json(dir / "correlations.json",
             json{{"labels", corr.labels}, {"values", values}, {"zero_variance_columns", corr.zero_variance_columns}});
}

void cmd_fit(const RunConfig& c, std::ostream& out) {
  const Dataset data = csv::read_dataset(data_path(c, "dataset.csv"));
  SplitSpec spec = c.split;
  spec.seed = stream_seed(c, Stream::split);
  const SplitResult parts = split(data, spec);
  csv::write_dataset(c.out / "train.csv", parts.train);
  csv::write_dataset(c.out / "test.csv", parts.test);
  write_correlations(c.out, parts.train);

  FitMultiOptions options;
  options.shared = c.shared_params();
  options.per_target = c.per_target_params();
  options.k_folds = c.cv.k_folds;
  options.cv_loss = c.cv.loss;
  options.master_seed = stream_seed(c, Stream::fit);
  options.jobs = c.jobs;
  const MultiTargetModel model = fit_multi(parts.train, options);
  write_json(c.out / "model.json", model.to_json());

  json reports = json::array();
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < model.reports.size(); ++j) {
    const auto& r = model.reports[j];
    json entry = r;
    entry["target"] = model.target_names[j];
    reports.push_back(std::move(entry));
    for (std::size_t f = 0; f < r.fold_errors_candidate.size(); ++f) {
      rows.push_back({static_cast<double>(j + 1), static_cast<double>(f), r.fold_errors_candidate[f],
                      r.fold_errors_incumbent[f]});
    }
    out << model.target_names[j] << ": cv_error " << csv::format_double(r.cv_error) << ", incumbent_error "
        << csv::format_double(r.incumbent_error) << (r.chose_incumbent ? ", incumbent kept" : ", boosted")
        << '\n';
  }
  write_json(c.out / "cv_reports.json", reports);
  csv::write_table(c.out / "cv_reports.csv", {"target", "fold", "candidate_error", "incumbent_error"}, rows);
  out << "train rows: " << parts.train.rows() << ", test rows: " << parts.test.rows() << '\n';
}

Matrix read_feature_rows(const fs::path& path, std::size_t n) {
  const csv::Table table = csv::read_table(path);
  if (table.header.size() != n && table.header.size() != 2 * n) {
    throw ValidationError(path.string() + ": expected " + std::to_string(n) + " feature columns (optionally followed by " +
                          std::to_string(n) + " target columns)");
  }
  Matrix x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    for (std::size_t j = 0; j < n; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][j];
  }
  return x;
}

void cmd_predict(const RunConfig& c, std::ostream& out) {
  const MultiTargetModel model = load_model(c);
  const Matrix x = read_feature_rows(data_path(c, "test.csv"), model.n_targets());
  const Matrix p = model.predict(x);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index i = 0; i < p.rows(); ++i) rows.emplace_back(p.row(i).begin(), p.row(i).end());
  csv::write_table(c.out / "predictions.csv", model.target_names, rows);
  out << "predicted rows: " << p.rows() << '\n';
}

void cmd_eval(const RunConfig& c, std::ostream& out) {
  const MultiTargetModel model = load_model(c);
  const Dataset data = csv::read_dataset(data_path(c, c.on_training ? "train.csv" : "test.csv"));
  const MultiEvaluation e = c.on_training ? evaluate_multi_on_training(model, data) : evaluate_multi(model, data);
  json metrics = e;
  metrics["target_names"] = model.target_names;
  write_json(c.out / "metrics.json", metrics);
  std::vector<std::vector<double>> rows;
  for (std::size_t j = 0; j < e.per_target_mae.size(); ++j) {
    const double base = e.baseline_per_target_mae[j];
    rows.push_back({static_cast<double>(j + 1), e.per_target_mae[j], base,
                    base > 0.0 ? 100.0 * (1.0 - e.per_target_mae[j] / base) : 0.0});
  }
  rows.push_back({0.0, e.average_mae, e.baseline_average_mae, e.improvement_pct});
  csv::write_table(c.out / "metrics.csv", {"target", "mae", "baseline_mae", "improvement_pct"}, rows);
  if (e.on_training_data) out << "(training data)\n";
  print_metric(out, "average_mae", e.average_mae);
  print_metric(out, "baseline_average_mae", e.baseline_average_mae);
  print_metric(out, "improvement_pct", e.improvement_pct);
}

void cmd_curve(const RunConfig& c, std::ostream& out) {
  const Dataset data = csv::read_dataset(data_path(c, "train.csv"));
  const std::size_t j = target_index(c.curve.target, data.n_targets(), "curve");
  BoostParams params = c.shared_params();
  if (auto pt = c.per_target_params(); pt.contains(j)) params = pt.at(j);
  params.seed = stream_seed(c, Stream::curve);
  LearningCurveOptions options;
  options.sizes = c.curve.sizes;
  options.k_folds = c.curve.k_folds;
  options.loss = c.curve.loss;
  options.repeats = c.curve.repeats;
  options.seed = params.seed;
  options.jobs = c.jobs;
  const auto curve = learning_curve(data.slice(j), params, options);
  std::vector<std::vector<double>> rows;
  for (const auto& p : curve) {
    rows.push_back({static_cast<double>(p.train_size), p.train_error, p.cv_error, p.incumbent_error});
    out << "size " << p.train_size << ": train " << csv::format_double(p.train_error) << ", cv "
        << csv::format_double(p.cv_error) << ", incumbent " << csv::format_double(p.incumbent_error) << '\n';
  }
  write_json(c.out / "learning_curve.json", json{{"target", data.target_names()[j]}, {"points", curve}});
  csv::write_table(c.out / "learning_curve.csv", {"train_size", "train_error", "cv_error", "incumbent_error"}, rows);
}

void cmd_explain(const RunConfig& c, std::ostream& out) {
  const ExplainConfig& e = c.explain;
  const std::uint64_t seed = stream_seed(c, Stream::explain);
  Model model;
  Matrix features;
  std::vector<std::string> names;
  std::string subject;
  if (e.subject == "prior") {
    // Control-model prior as a function of the bias features.
    const BiasScenario scenario = c.gen.bias;
    const ControlModelProxy proxy = c.gen.proxy;
    const std::size_t j = target_index(e.target, scenario.n_qubit_biases(), "explain");
    const fs::path bias_file = c.data ? *c.data : c.out / "biases.csv";
    const csv::Table table = csv::read_table(bias_file);
    if (table.header.size() != scenario.n_biases() + 1) {
      throw ValidationError(bias_file.string() + ": expected id plus " + std::to_string(scenario.n_biases()) +
                            " bias columns");
    }
    names.assign(table.header.begin() + 1, table.header.end());
    features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(scenario.n_biases()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (std::size_t b = 0; b < scenario.n_biases(); ++b) {
        features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) = table.rows[i][b + 1];
      }
    }
    model = [scenario, proxy, j](std::span<const double> x) { return prior_prediction(scenario, proxy, x)[j]; };
    subject = "prior Y" + std::to_string(j + 1);
  } else {
    const auto fitted = std::make_shared<MultiTargetModel>(load_model(c));
    const Dataset data = csv::read_dataset(data_path(c, "train.csv"));
    const std::size_t j = target_index(e.target, fitted->n_targets(), "explain");
    features = data.examples();
    names = data.feature_names();
    model = [fitted, j](std::span<const double> x) { return fitted->models[j].predict(x); };
    subject = "model " + fitted->target_names[j];
  }

  const Matrix background = subsample_background(features, e.background_rows, derive_seed(seed, 1));
  const std::size_t n_rows =
      e.rows == 0 ? static_cast<std::size_t>(features.rows())
                  : std::min<std::size_t>(e.rows, static_cast<std::size_t>(features.rows()));
  const RowMatrix rows = features;
  std::vector<Attribution> attributions;
  double worst_gap = 0.0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    const auto x = row_of(rows, static_cast<Eigen::Index>(i));
    Attribution a = e.mode == "exact" ? shapley_exact(model, x, background, e.max_features, c.jobs)
                                      : shapley_sampled(model, x, background, e.n_permutations, derive_seed(seed, 2 + i));
    a.example_id = i;
    double total = a.base_value;
    for (double phi : a.phis) total += phi;
    worst_gap = std::max(worst_gap, std::abs(total - a.prediction));
    attributions.push_back(std::move(a));
  }
  const AttributionSummary summary = summary_data(attributions, features, names);

  std::string text = "example_id,feature,shap_value,feature_value\n";
  for (const auto& r : summary.records) {
    text += std::to_string(r.example_id) + "," + r.feature + "," + csv::format_double(r.shap_value) + "," +
            csv::format_double(r.feature_value) + "\n";
  }
  csv::write_text(c.out / "attributions.csv", text);
  json report = summary.importance;
  report["subject"] = subject;
  report["mode"] = e.mode;
  report["explained_rows"] = n_rows;
  report["background_rows"] = background.rows();
  report["max_local_accuracy_gap"] = worst_gap;
  write_json(c.out / "importance.json", report);
  write_json(c.out / "attributions.json", attributions);

  out << "explained " << n_rows << " rows of " << subject << '\n';
  out << "most important: " << names[summary.importance.order.back()] << '\n';
  print_metric(out, "max_local_accuracy_gap", worst_gap);
}

void cmd_nested_cv(const RunConfig& c, std::ostream& out) {
  const Dataset data = csv::read_dataset(data_path(c, "train.csv"));
  const std::size_t j = target_index(c.nested_cv.target, data.n_targets(), "nested_cv");
  BoostParams base = c.shared_params();
  if (auto pt = c.per_target_params(); pt.contains(j)) base = pt.at(j);
  base.seed = stream_seed(c, Stream::nested_cv);
  NestedCvOptions options;
  options.outer_k = c.nested_cv.outer_k;
  options.inner_l = c.nested_cv.inner_l;
  options.loss = c.nested_cv.loss;
  options.seed = base.seed;
  options.jobs = c.jobs;
  const NestedCvReport report = nested_cv(data.slice(j), base, c.nested_cv.grid, options);
  json j_report = report;
  j_report["target"] = data.target_names()[j];
  j_report["grid"] = c.nested_cv.grid;
  write_json(c.out / "nested_cv.json", j_report);
  std::vector<std::vector<double>> rows;
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    rows.push_back({static_cast<double>(f), static_cast<double>(report.folds[f].config_index),
                    report.folds[f].fold_error});
    out << "outer fold " << f << ": config " << report.folds[f].chosen_config.dump() << ", error "
        << csv::format_double(report.folds[f].fold_error) << '\n';
  }
  csv::write_table(c.out / "nested_cv.csv", {"fold", "config_index", "fold_error"}, rows);
  print_metric(out, "outer_error_estimate", report.outer_error_estimate);
}

int report_error(std::ostream& err, const char* kind, int code, const std::string& message) {
  err << json{{"error", {{"kind", kind}, {"exit_code", code}, {"message", message}}}}.dump() << '\n';
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient boosting on prior knowledge", "priorboost"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);

  Flags flags;
  std::string config_path, out_dir, data_file, model_file;
  std::uint64_t seed = 0;
  int jobs = 1;
  int target = 1;
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration");
  auto* o_seed = app.add_option("--seed", seed, "master seed (U64)");
  auto* o_jobs = app.add_option("--jobs", jobs, "worker threads");
  auto* o_out = app.add_option("--out", out_dir, "output directory");
  auto* o_data = app.add_option("--data", data_file, "input CSV");
  auto* o_model = app.add_option("--model", model_file, "model JSON");
  auto* o_target = app.add_option("--target", target, "target number (1-based) for curve/explain/nested-cv");
  app.add_flag("--on-training", flags.on_training, "eval: score the training split, labeled as such");

  using Handler = std::function<void(const RunConfig&, std::ostream&)>;
  std::vector<std::pair<CLI::App*, Handler>> commands;
  const auto add = [&](const char* name, const char* help, Handler handler) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    commands.emplace_back(sub, std::move(handler));
  };
  add("gen", "generate a synthetic dataset", cmd_gen);
  add("fit", "split, fit one booster per target with incumbent selection", cmd_fit);
  add("predict", "predict with a fitted model", cmd_predict);
  add("eval", "compare a fitted model against the prior baseline", cmd_eval);
  add("curve", "augmented learning curve for one target", cmd_curve);
  add("explain", "Shapley attributions", cmd_explain);
  add("nested-cv", "nested cross-validation over a hyperparameter grid", cmd_nested_cv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, "usage", 1, e.what());
  }

  if (*o_config) flags.config = config_path;
  if (*o_seed) flags.seed = seed;
  if (*o_jobs) flags.jobs = jobs;
  if (*o_out) flags.out = out_dir;
  if (*o_data) flags.data = data_file;
  if (*o_model) flags.model = model_file;
  if (*o_target) flags.target = target;

  try {
    const RunConfig config = load_config(flags);
    for (const auto& [sub, handler] : commands) {
      if (!sub->parsed()) continue;
      const std::string name = sub->get_name();
      write_json(config.out / (name + ".resolved_config.json"), to_json(config));
      const auto started = iso_timestamp();
      handler(config, out);
      write_json(config.out / (name + ".run_metadata.json"), json{{"command", name},
                                                                  {"version", kVersion},
                                                                  {"started_utc", started},
                                                                  {"finished_utc", iso_timestamp()},
                                                                  {"jobs", config.jobs}});
    }
  } catch (const ValidationError& e) {
    return report_error(err, "validation", 1, e.what());
  } catch (const IoError& e) {
    return report_error(err, "io", 2, e.what());
  } catch (const NumericalError& e) {
    return report_error(err, "numerical", 3, e.what());
  } catch (const json::exception& e) {
    return report_error(err, "validation", 1, e.what());
  } catch (const std::exception& e) {
    return report_error(err, "internal", 3, e.what());
  }
  return 0;
}

}  // namespace priorboost::cli
