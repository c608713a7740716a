#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "priorboost/core.hpp"
#include "priorboost/json_util.hpp"

namespace priorboost {

// Single-excitation sector of a chain of n coupled sites: H[j][j] = detuning j,
// H[j][j+1] = H[j+1][j] = coupling j. Units are MHz throughout.
struct ChainParams {
  std::vector<double> detunings;
  std::vector<double> couplings;  // length n - 1

  std::size_t n_sites() const { return detunings.size(); }
  void validate() const;
};

// Eigenvalues of H, ascending.
std::vector<double> spectrum(const ChainParams& params);

// v' = offset + gain * v + curvature * v^2 / scale
struct Distortion {
  double offset = 0.0;
  double gain = 1.0;
  double curvature = 0.0;

  double apply(double v, double scale) const { return offset + gain * v + curvature * v * v / scale; }
};

// Stand-in for a miscalibrated control model: it sees distorted chain
// parameters. Targets carry Gaussian measurement noise of width noise_sigma.
struct ControlModelProxy {
  Distortion detuning;
  Distortion coupling;
  double scale = 50.0;
  double noise_sigma = 0.0;

  void validate() const;
  ChainParams distort(const ChainParams& truth) const;

  static ControlModelProxy identity() { return {}; }
  // Default miscalibration used by `gen` when no proxy is configured.
  static ControlModelProxy default_scenario();
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct ParamSampler {
  std::size_t n_sites = 5;
  Range detuning{-50.0, 50.0};
  Range coupling{20.0, 40.0};

  void validate() const;
  ChainParams sample(std::uint64_t row_seed) const;
};

void to_json(json& j, const Distortion& d);
void from_json(const json& j, Distortion& d);
void to_json(json& j, const ControlModelProxy& p);
void from_json(const json& j, ControlModelProxy& p);
void to_json(json& j, const ParamSampler& s);
void from_json(const json& j, ParamSampler& s);

// Seed of row i; rows are generated independently of each other.
std::uint64_t row_seed(std::uint64_t seed, std::size_t i);

// Features: spectrum of the distorted parameters. Targets: true spectrum plus
// noise, re-sorted. Both ascending in every row.
Dataset generate_dataset(std::size_t m, const ParamSampler& sampler, const ControlModelProxy& proxy,
                         std::uint64_t seed, int jobs = 1);

// Maps qubit biases q (one per site) and coupler biases c (one per coupling),
// each in [-1, 1], to chain parameters:
//   detuning_j = detuning_base_j + qubit_linear_j * q_j + qubit_quadratic_j * q_j^2
//   coupling_j = coupling_base_j + coupler_linear_j * c_j + coupler_quadratic_j * c_j^2
struct BiasScenario {
  std::vector<double> detuning_base{-30.0, -15.0, 0.0, 15.0, 30.0};
  std::vector<double> qubit_linear{8.0, 8.0, 8.0, 8.0, 8.0};
  std::vector<double> qubit_quadratic{2.0, 2.0, 2.0, 2.0, 2.0};
  std::vector<double> coupling_base{30.0, 30.0, 30.0, 30.0};
  std::vector<double> coupler_linear{5.0, 5.0, 5.0, 5.0};
  std::vector<double> coupler_quadratic{1.0, 1.0, 1.0, 1.0};

  std::size_t n_qubit_biases() const { return detuning_base.size(); }
  std::size_t n_coupler_biases() const { return coupling_base.size(); }
  std::size_t n_biases() const { return n_qubit_biases() + n_coupler_biases(); }

  void validate() const;
  // biases = [q_1..q_n, c_1..c_{n-1}]
  ChainParams chain(std::span<const double> biases) const;

  // Coupler sensitivity concentrated at the two couplers nearest the chain ends.
  static BiasScenario boundary();
};

void to_json(json& j, const BiasScenario& s);
void from_json(const json& j, BiasScenario& s);

// B1..B9 for the default scenario.
std::vector<std::string> bias_names(const BiasScenario& scenario);

struct BiasDataset {
  Matrix biases;  // m x n_biases
  Dataset data;
};

BiasDataset generate_bias_dataset(std::size_t m, const BiasScenario& scenario, const ControlModelProxy& proxy,
                                  std::uint64_t seed, int jobs = 1);

// Noise-free prior prediction for one bias vector: the ascending spectrum the
// control model proxy assigns to these biases.
std::vector<double> prior_prediction(const BiasScenario& scenario, const ControlModelProxy& proxy,
                                     std::span<const double> biases);

}  // namespace priorboost
