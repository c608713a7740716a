#include "priorboost/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "priorboost/eigensolver.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/parallel.hpp"
#include "priorboost/rng.hpp"

namespace priorboost {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw ValidationError(std::string(what) + ": non-finite value");
  }
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return out;
}

// Prior spectrum and noisy target spectrum for one chain.
void observe(const ChainParams& truth, const ControlModelProxy& proxy, Rng& rng, std::vector<double>& feature,
             std::vector<double>& target) {
  feature = spectrum(proxy.distort(truth));
  target = spectrum(truth);
  if (proxy.noise_sigma > 0.0) {
    for (auto& y : target) y += proxy.noise_sigma * rng.normal();
    std::sort(target.begin(), target.end());
  }
}

Dataset assemble(const std::vector<std::vector<double>>& features, const std::vector<std::vector<double>>& targets,
                 std::size_t n) {
  return Dataset(rows_to_matrix(features, n), rows_to_matrix(targets, n), default_names('X', n),
                 default_names('Y', n), std::string("MHz"));
}

}  // namespace

void ChainParams::validate() const {
  if (detunings.empty()) throw ValidationError("chain: needs at least one site");
  if (couplings.size() + 1 != detunings.size()) throw ValidationError("chain: couplings must have length n - 1");
  check_finite(detunings, "chain detunings");
  check_finite(couplings, "chain couplings");
}

std::vector<double> spectrum(const ChainParams& params) {
  params.validate();
  return tridiagonal_eigen(params.detunings, params.couplings).values;
}

void ControlModelProxy::validate() const {
  for (const Distortion* d : {&detuning, &coupling}) {
    if (!std::isfinite(d->offset) || !std::isfinite(d->gain) || !std::isfinite(d->curvature)) {
      throw ValidationError("proxy: distortion coefficients must be finite");
    }
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("proxy: scale must be positive");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ValidationError("proxy: noise_sigma must be >= 0");
}

ChainParams ControlModelProxy::distort(const ChainParams& truth) const {
  ChainParams out = truth;
  for (auto& v : out.detunings) v = detuning.apply(v, scale);
  for (auto& v : out.couplings) v = coupling.apply(v, scale);
  return out;
}

ControlModelProxy ControlModelProxy::default_scenario() {
  ControlModelProxy p;
  p.detuning = Distortion{0.5, 1.02, 0.01};
  p.coupling = Distortion{0.3, 0.97, 0.0};
  p.noise_sigma = 0.1;
  return p;
}

void ParamSampler::validate() const {
  if (n_sites < 1) throw ValidationError("sampler: n_sites must be at least 1");
  for (const Range* r : {&detuning, &coupling}) {
    if (!std::isfinite(r->lo) || !std::isfinite(r->hi) || r->lo > r->hi) {
      throw ValidationError("sampler: ranges need finite lo <= hi");
    }
  }
}

ChainParams ParamSampler::sample(std::uint64_t seed) const {
  Rng rng(seed);
  ChainParams p;
  for (std::size_t j = 0; j < n_sites; ++j) p.detunings.push_back(rng.uniform(detuning.lo, detuning.hi));
  for (std::size_t j = 0; j + 1 < n_sites; ++j) p.couplings.push_back(rng.uniform(coupling.lo, coupling.hi));
  return p;
}

void to_json(json& j, const Distortion& d) {
  j = json{{"offset", d.offset}, {"gain", d.gain}, {"curvature", d.curvature}};
}

void from_json(const json& j, Distortion& d) {
  check_keys(j, {"offset", "gain", "curvature"}, "distortion");
  read_optional(j, "offset", d.offset, "distortion");
  read_optional(j, "gain", d.gain, "distortion");
  read_optional(j, "curvature", d.curvature, "distortion");
}

void to_json(json& j, const ControlModelProxy& p) {
  j = json{{"detuning", p.detuning}, {"coupling", p.coupling}, {"scale", p.scale}, {"noise_sigma", p.noise_sigma}};
}

void from_json(const json& j, ControlModelProxy& p) {
  check_keys(j, {"detuning", "coupling", "scale", "noise_sigma"}, "proxy");
  read_optional(j, "detuning", p.detuning, "proxy");
  read_optional(j, "coupling", p.coupling, "proxy");
  read_optional(j, "scale", p.scale, "proxy");
  read_optional(j, "noise_sigma", p.noise_sigma, "proxy");
  p.validate();
}

void to_json(json& j, const ParamSampler& s) {
  j = json{{"n_sites", s.n_sites},
           {"detuning_range", {s.detuning.lo, s.detuning.hi}},
           {"coupling_range", {s.coupling.lo, s.coupling.hi}}};
}

void from_json(const json& j, ParamSampler& s) {
  check_keys(j, {"n_sites", "detuning_range", "coupling_range"}, "sampler");
  read_optional(j, "n_sites", s.n_sites, "sampler");
  for (auto [key, range] : {std::pair{"detuning_range", &s.detuning}, std::pair{"coupling_range", &s.coupling}}) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_array() || it->size() != 2) {
        throw ValidationError(std::string("sampler.") + key + ": expected [lo, hi]");
      }
      range->lo = it->at(0).get<double>();
      range->hi = it->at(1).get<double>();
    }
  }
  s.validate();
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t i) { return derive_seed(seed, static_cast<std::uint64_t>(i)); }

Dataset generate_dataset(std::size_t m, const ParamSampler& sampler, const ControlModelProxy& proxy,
                         std::uint64_t seed, int jobs) {
  if (m < 1) throw ValidationError("gen: rows must be at least 1");
  sampler.validate();
  proxy.validate();
  std::vector<std::vector<double>> features(m);
  std::vector<std::vector<double>> targets(m);
  parallel_for(m, jobs, [&](std::size_t i) {
    const std::uint64_t s = row_seed(seed, i);
    const ChainParams truth = sampler.sample(s);
    Rng noise(derive_seed(s, 1));
    observe(truth, proxy, noise, features[i], targets[i]);
  });
  return assemble(features, targets, sampler.n_sites);
}

void BiasScenario::validate() const {
  const std::size_t n = detuning_base.size();
  if (n < 1) throw ValidationError("bias scenario: needs at least one site");
  if (qubit_linear.size() != n || qubit_quadratic.size() != n) {
    throw ValidationError("bias scenario: qubit maps must have one entry per site");
  }
  if (coupling_base.size() + 1 != n || coupler_linear.size() + 1 != n || coupler_quadratic.size() + 1 != n) {
    throw ValidationError("bias scenario: coupler maps must have n - 1 entries");
  }
  for (const auto* v : {&detuning_base, &qubit_linear, &qubit_quadratic, &coupling_base, &coupler_linear,
                        &coupler_quadratic}) {
    check_finite(*v, "bias scenario");
  }
}

ChainParams BiasScenario::chain(std::span<const double> biases) const {
  const std::size_t n = n_qubit_biases();
  if (biases.size() != n_biases()) {
    throw ValidationError("bias scenario: expected " + std::to_string(n_biases()) + " biases, got " +
                          std::to_string(biases.size()));
  }
  for (double b : biases) {
    if (!(b >= -1.0 && b <= 1.0)) throw ValidationError("bias scenario: biases must lie in [-1, 1]");
  }
  ChainParams p;
  for (std::size_t j = 0; j < n; ++j) {
    const double q = biases[j];
    p.detunings.push_back(detuning_base[j] + qubit_linear[j] * q + qubit_quadratic[j] * q * q);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double c = biases[n + j];
    p.couplings.push_back(coupling_base[j] + coupler_linear[j] * c + coupler_quadratic[j] * c * c);
  }
  return p;
}

BiasScenario BiasScenario::boundary() {
  BiasScenario s;
  s.qubit_linear = {2.0, 2.0, 2.0, 2.0, 2.0};
  s.qubit_quadratic = {0.5, 0.5, 0.5, 0.5, 0.5};
  s.coupler_linear = {12.0, 2.0, 2.0, 12.0};
  s.coupler_quadratic = {3.0, 0.5, 0.5, 3.0};
  return s;
}

void to_json(json& j, const BiasScenario& s) {
  j = json{{"detuning_base", s.detuning_base},     {"qubit_linear", s.qubit_linear},
           {"qubit_quadratic", s.qubit_quadratic}, {"coupling_base", s.coupling_base},
           {"coupler_linear", s.coupler_linear},   {"coupler_quadratic", s.coupler_quadratic}};
}

void from_json(const json& j, BiasScenario& s) {
  check_keys(j, {"preset", "detuning_base", "qubit_linear", "qubit_quadratic", "coupling_base", "coupler_linear",
                 "coupler_quadratic"},
             "bias scenario");
  if (auto it = j.find("preset"); it != j.end()) {
    const auto name = it->get<std::string>();
    if (name == "boundary") {
      s = BiasScenario::boundary();
    } else if (name == "default") {
      s = BiasScenario{};
    } else {
      throw ValidationError("bias scenario: unknown preset '" + name + "'");
    }
  }
  read_optional(j, "detuning_base", s.detuning_base, "bias scenario");
  read_optional(j, "qubit_linear", s.qubit_linear, "bias scenario");
  read_optional(j, "qubit_quadratic", s.qubit_quadratic, "bias scenario");
  read_optional(j, "coupling_base", s.coupling_base, "bias scenario");
  read_optional(j, "coupler_linear", s.coupler_linear, "bias scenario");
  read_optional(j, "coupler_quadratic", s.coupler_quadratic, "bias scenario");
  s.validate();
}

std::vector<std::string> bias_names(const BiasScenario& scenario) { return default_names('B', scenario.n_biases()); }

BiasDataset generate_bias_dataset(std::size_t m, const BiasScenario& scenario, const ControlModelProxy& proxy,
                                  std::uint64_t seed, int jobs) {
  if (m < 1) throw ValidationError("gen: rows must be at least 1");
  scenario.validate();
  proxy.validate();
  const std::size_t nb = scenario.n_biases();
  std::vector<std::vector<double>> biases(m);
  std::vector<std::vector<double>> features(m);
  std::vector<std::vector<double>> targets(m);
  parallel_for(m, jobs, [&](std::size_t i) {
    Rng rng(row_seed(seed, i));
    for (std::size_t b = 0; b < nb; ++b) biases[i].push_back(rng.uniform(-1.0, 1.0));
    observe(scenario.chain(biases[i]), proxy, rng, features[i], targets[i]);
  });
  const std::size_t n = scenario.n_qubit_biases();
  return BiasDataset{rows_to_matrix(biases, nb), assemble(features, targets, n)};
}

std::vector<double> prior_prediction(const BiasScenario& scenario, const ControlModelProxy& proxy,
                                     std::span<const double> biases) {
  return spectrum(proxy.distort(scenario.chain(biases)));
}

}  // namespace priorboost
