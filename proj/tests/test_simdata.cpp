#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "priorboost/eigensolver.hpp"
#include "priorboost/errors.hpp"
#include "priorboost/rng.hpp"
#include "priorboost/simdata.hpp"

using namespace priorboost;

namespace {

ChainParams random_chain(std::size_t n, Rng& rng) {
  ChainParams p;
  for (std::size_t j = 0; j < n; ++j) p.detunings.push_back(rng.uniform(-50, 50));
  for (std::size_t j = 0; j + 1 < n; ++j) p.couplings.push_back(rng.uniform(20, 40));
  return p;
}

bool ascending(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) < m(i, j - 1)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("one and two site chains") {
  CHECK(spectrum({{7.5}, {}}) == std::vector<double>{7.5});
  const double d1 = -3.0;
  const double d2 = 5.0;
  const double g = 2.5;
  const auto s = spectrum({{d1, d2}, {g}});
  const double mid = 0.5 * (d1 + d2);
  const double half = std::sqrt(0.25 * (d1 - d2) * (d1 - d2) + g * g);
  CHECK(s[0] == doctest::Approx(mid - half).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(mid + half).epsilon(1e-14));
}

TEST_CASE("eigenvalues agree with Sturm bisection") {
  Rng rng(11);
  for (std::size_t n : {3u, 5u, 8u, 20u}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = random_chain(n, rng);
      const auto s = spectrum(p);
      const auto ref = oracle::sturm_eigenvalues(p.detunings, p.couplings);
      REQUIRE(s.size() == n);
      for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(s[k] - ref[k]) < 1e-8);
      CHECK(std::is_sorted(s.begin(), s.end()));
      const double trace = std::accumulate(p.detunings.begin(), p.detunings.end(), 0.0);
      CHECK(std::accumulate(s.begin(), s.end(), 0.0) == doctest::Approx(trace).epsilon(1e-10));
    }
  }
}

TEST_CASE("leading submatrix eigenvalues interlace") {
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = random_chain(6, rng);
    ChainParams sub{{p.detunings.begin(), p.detunings.end() - 1}, {p.couplings.begin(), p.couplings.end() - 1}};
    const auto s = spectrum(p);
    const auto t = spectrum(sub);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(s[k] <= t[k] + 1e-10);
      CHECK(t[k] <= s[k + 1] + 1e-10);
    }
  }
}

TEST_CASE("eigenvectors satisfy the residual bound") {
  Rng rng(13);
  const auto p = random_chain(9, rng);
  const auto eig = tridiagonal_eigen(p.detunings, p.couplings);
  const double norm = tridiagonal_norm(p.detunings, p.couplings);
  for (std::size_t k = 0; k < 9; ++k) {
    const auto v = eig.vectors.col(static_cast<Eigen::Index>(k));
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    for (Eigen::Index i = 0; i < 9; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      double hv = p.detunings[iu] * v(i);
      if (i > 0) hv += p.couplings[iu - 1] * v(i - 1);
      if (i < 8) hv += p.couplings[iu] * v(i + 1);
      CHECK(std::abs(hv - eig.values[k] * v(i)) <= 1e-10 * norm);
    }
  }
}

TEST_CASE("chain parameter validation") {
  CHECK_THROWS_AS(spectrum({{}, {}}), ValidationError);
  CHECK_THROWS_AS(spectrum({{1.0, 2.0}, {}}), ValidationError);
  CHECK_THROWS_AS(spectrum({{1.0, std::nan("")}, {1.0}}), ValidationError);
}

TEST_CASE("identity proxy without noise reproduces the targets") {
  const auto data = generate_dataset(20, ParamSampler{}, ControlModelProxy::identity(), 5);
  CHECK(data.examples() == data.targets());
  CHECK(data.examples().cols() == 5);
  CHECK(data.units() == std::optional<std::string>("MHz"));
  CHECK(data.feature_names().front() == "X1");
  CHECK(data.target_names().back() == "Y5");
}

TEST_CASE("a detuning offset shifts every prior eigenvalue") {
  auto proxy = ControlModelProxy::identity();
  proxy.detuning.offset = 2.0;
  const auto data = generate_dataset(20, ParamSampler{}, proxy, 5);
  CHECK(((data.examples() - data.targets()).array() - 2.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("default scenario rows are sorted and reproducible") {
  const auto proxy = ControlModelProxy::default_scenario();
  const auto a = generate_dataset(50, ParamSampler{}, proxy, 9, 1);
  const auto b = generate_dataset(50, ParamSampler{}, proxy, 9, 4);
  CHECK(a.examples() == b.examples());
  CHECK(a.targets() == b.targets());
  CHECK(ascending(a.examples()));
  CHECK(ascending(a.targets()));
  const auto c = generate_dataset(50, ParamSampler{}, proxy, 10, 1);
  CHECK(a.targets() != c.targets());
  // Rows are independent of how many are drawn.
  const auto head = generate_dataset(10, ParamSampler{}, proxy, 9, 1);
  CHECK(head.targets() == a.targets().topRows(10));
}

TEST_CASE("sampled chains stay in range") {
  ParamSampler sampler;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto p = sampler.sample(s);
    for (double d : p.detunings) CHECK((d >= -50.0 && d <= 50.0));
    for (double g : p.couplings) CHECK((g >= 20.0 && g <= 40.0));
  }
  sampler.coupling = {5.0, 1.0};
  CHECK_THROWS_AS(sampler.validate(), ValidationError);
}

TEST_CASE("bias map at zero bias is the base chain") {
  const BiasScenario scenario;
  const std::vector<double> zero(scenario.n_biases(), 0.0);
  const auto chain = scenario.chain(zero);
  CHECK(chain.detunings == scenario.detuning_base);
  CHECK(chain.couplings == scenario.coupling_base);

  std::vector<double> b(scenario.n_biases(), 0.0);
  b[0] = 0.5;
  b[5] = -1.0;
  const auto moved = scenario.chain(b);
  CHECK(moved.detunings[0] == doctest::Approx(-30.0 + 8.0 * 0.5 + 2.0 * 0.25));
  CHECK(moved.couplings[0] == doctest::Approx(30.0 - 5.0 + 1.0));
  CHECK(bias_names(scenario) == std::vector<std::string>{"B1", "B2", "B3", "B4", "B5", "B6", "B7", "B8", "B9"});

  b[1] = 1.5;
  CHECK_THROWS_AS(scenario.chain(b), ValidationError);
}

TEST_CASE("raising a coupler widens the spectrum") {
  const BiasScenario scenario;
  std::vector<double> b(scenario.n_biases(), 0.0);
  double previous = -1.0;
  for (double c = -1.0; c <= 1.0; c += 0.25) {
    b[5] = c;
    const auto s = spectrum(scenario.chain(b));
    const double width = s.back() - s.front();
    CHECK(width > previous);
    previous = width;
  }
}

TEST_CASE("bias dataset priors are noise free") {
  const auto scenario = BiasScenario::boundary();
  const auto proxy = ControlModelProxy::default_scenario();
  const auto bd = generate_bias_dataset(15, scenario, proxy, 3);
  CHECK(bd.biases.rows() == 15);
  CHECK(bd.biases.cols() == 9);
  CHECK(bd.biases.cwiseAbs().maxCoeff() <= 1.0);
  for (Eigen::Index i = 0; i < 15; ++i) {
    const std::vector<double> row(bd.biases.row(i).begin(), bd.biases.row(i).end());
    const auto prior = prior_prediction(scenario, proxy, row);
    for (Eigen::Index k = 0; k < 5; ++k) CHECK(prior[static_cast<std::size_t>(k)] == bd.data.examples()(i, k));
  }
  CHECK(ascending(bd.data.targets()));
}

TEST_CASE("proxy and scenario json round trip") {
  const auto proxy = ControlModelProxy::default_scenario();
  const auto back = json(proxy).get<ControlModelProxy>();
  CHECK(back.detuning.gain == proxy.detuning.gain);
  CHECK(back.coupling.offset == proxy.coupling.offset);
  CHECK(back.noise_sigma == proxy.noise_sigma);
  const auto boundary = json::parse(R"({"preset": "boundary"})").get<BiasScenario>();
  CHECK(boundary.coupler_linear == BiasScenario::boundary().coupler_linear);
  CHECK_THROWS_AS(json::parse(R"({"noise_sigma": -1})").get<ControlModelProxy>(), ValidationError);
  CHECK_THROWS_AS(json::parse(R"({"bogus": 1})").get<ControlModelProxy>(), ValidationError);
}
