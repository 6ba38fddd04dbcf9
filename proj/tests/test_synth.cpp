#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "pathlasso/synth.hpp"

using namespace pathlasso;

namespace {

SynthSpec chain_spec(std::uint64_t seed, Eigen::Index n = 500) {
  SynthSpec sp;
  sp.n = n;
  sp.layer_sizes = {2, 3};
  Eigen::MatrixXd t(3, 2);
  t << 0.9, -0.7, -0.6, 0.8, 0.7, -0.6;
  sp.theta_matrices = {t};
  sp.noise_sd = 0.6;
  sp.outcome_beta.resize(2);
  sp.outcome_beta << 1.6, -1.4;
  sp.seed = seed;
  return sp;
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const SynthSpec sp = chain_spec(11);
  auto [d1, t1] = generate_layered(sp);
  auto [d2, t2] = generate_layered(sp);
  CHECK(d1.design == d2.design);
  CHECK(d1.outcome == d2.outcome);
  CHECK(t1.layer_members == t2.layer_members);

  SynthSpec other = sp;
  other.seed = 12;
  auto [d3, t3] = generate_layered(other);
  CHECK(d1.design != d3.design);
}

TEST_CASE("truth records names, layers and coefficients") {
  auto [d, truth] = generate_layered(chain_spec(3));
  REQUIRE(truth.layer_members.size() == 2);
  CHECK(truth.layer_members[0] == std::vector<std::string>{"V1", "V2"});
  CHECK(truth.layer_members[1] == std::vector<std::string>{"V3", "V4", "V5"});
  CHECK(d.p() == 5);
  CHECK(d.n() == 500);
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    CHECK((d.outcome[i] == 0.0 || d.outcome[i] == 1.0));
  }
}

TEST_CASE("vanishing noise makes lower layers exact linear maps") {
  SynthSpec sp = chain_spec(21, 200);
  sp.noise_sd = 1e-8;
  auto [d, truth] = generate_layered(sp);
  const Eigen::MatrixXd& t = truth.theta_matrices[0];
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    const Eigen::VectorXd upper = d.design.row(i).head(2).transpose();
    const Eigen::VectorXd lower = d.design.row(i).segment(2, 3).transpose();
    CHECK((lower - t * upper).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("generated moments converge to theta theta-transpose plus noise") {
  for (const std::uint64_t seed : {2, 3, 4, 6, 8, 10, 11, 12}) {
    SynthSpec sp = chain_spec(seed, 4000);
    sp.noise_sd = 1.0;
    auto [d, truth] = generate_layered(sp);
    const Eigen::MatrixXd& t = truth.theta_matrices[0];
    const Eigen::MatrixXd lower = d.design.rightCols(3);
    const Eigen::MatrixXd centered = lower.rowwise() - lower.colwise().mean();
    const Eigen::MatrixXd cov =
        centered.transpose() * centered / static_cast<double>(d.n() - 1);
    const Eigen::MatrixXd expected =
        t * t.transpose() + Eigen::MatrixXd::Identity(3, 3);
    CHECK((cov - expected).norm() < 0.15);
  }
}

TEST_CASE("spec validation rejects inconsistent shapes") {
  SynthSpec sp = chain_spec(1);
  SECTION("missing theta") {
    sp.theta_matrices.clear();
    CHECK_THROWS_AS(sp.validate(), DataError);
  }
  SECTION("wrong theta shape") {
    sp.theta_matrices[0].resize(2, 2);
    CHECK_THROWS_AS(sp.validate(), DataError);
  }
  SECTION("outcome beta size") {
    sp.outcome_beta.resize(3);
    CHECK_THROWS_AS(sp.validate(), DataError);
  }
  SECTION("non-positive noise") {
    sp.noise_sd = 0.0;
    CHECK_THROWS_AS(sp.validate(), DataError);
  }
}

TEST_CASE("spec json round-trip is lossless") {
  const SynthSpec sp = chain_spec(99);
  const SynthSpec back = SynthSpec::from_json(sp.to_json());
  CHECK(back.n == sp.n);
  CHECK(back.layer_sizes == sp.layer_sizes);
  CHECK(back.noise_sd == sp.noise_sd);
  CHECK(back.seed == sp.seed);
  CHECK(back.outcome_beta == sp.outcome_beta);
  REQUIRE(back.theta_matrices.size() == 1);
  CHECK(back.theta_matrices[0] == sp.theta_matrices[0]);
}

TEST_CASE("orthonormal solution soft-thresholds componentwise") {
  Eigen::VectorXd z(3), w(3);
  z << 3.0, 1.0, 0.2;
  w << 1.0, 1.0, 1.0;
  Eigen::VectorXd beta = orthonormal_solution(z, 1.0, w);
  CHECK(beta[0] == 2.0);
  CHECK(beta[1] == 0.0);
  CHECK(beta[2] == 0.0);

  w << 1.0, 0.25, 1.0;
  beta = orthonormal_solution(z, 1.0, w);
  CHECK(beta[0] == 2.0);
  CHECK(beta[1] == 0.75);
  CHECK(beta[2] == 0.0);

  SECTION("lambda zero returns z itself") {
    w.setOnes();
    CHECK(orthonormal_solution(z, 0.0, w) == z);
  }
  SECTION("infinite weight forces zero") {
    w << 1.0, std::numeric_limits<double>::infinity(), 1.0;
    beta = orthonormal_solution(z, 1.0, w);
    CHECK(beta[1] == 0.0);
    CHECK(beta[0] == 2.0);
  }
  SECTION("negative entries keep their sign") {
    z << -3.0, -0.5, 0.0;
    w.setOnes();
    beta = orthonormal_solution(z, 1.0, w);
    CHECK(beta[0] == -2.0);
    CHECK(beta[1] == 0.0);
  }
}

TEST_CASE("best-subset oracle finds the planted support") {
  Rng rng(404);
  const Eigen::Index n = 400, p = 6;
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
    y[i] = 2.5 * x(i, 0) - 2.0 * x(i, 3) + 0.3 * rng.normal();
  }
  const auto fits = best_subset_oracle(x, y, Family::linear, 3);
  REQUIRE(fits.size() == 4);
  CHECK(fits[0].support.empty());
  CHECK(fits[2].support == std::vector<Eigen::Index>{0, 3});
  // Deviance strictly improves while true variables remain missing.
  CHECK(fits[1].deviance < fits[0].deviance);
  CHECK(fits[2].deviance < fits[1].deviance);

  SECTION("k_max zero keeps only the null model") {
    const auto only_null = best_subset_oracle(x, y, Family::linear, 0);
    REQUIRE(only_null.size() == 1);
    CHECK(only_null[0].support.empty());
    CHECK(std::isfinite(only_null[0].deviance));
  }
  SECTION("wide problems are refused") {
    Eigen::MatrixXd wide(5, 13);
    wide.setRandom();
    Eigen::VectorXd yy = wide.col(0);
    CHECK_THROWS_AS(best_subset_oracle(wide, yy, Family::linear, 2), UsageError);
  }
}

TEST_CASE("pure noise gains little from the first oracle predictor") {
  int small_gain = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(7000 + s);
    const Eigen::Index n = 300, p = 6;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = rng.normal();
      y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
    const auto fits = best_subset_oracle(x, y, Family::logistic, 1);
    // 99th percentile of chi2(1) = 6.635.
    if (fits[0].deviance - fits[1].deviance < 6.635) ++small_gain;
  }
  CHECK(small_gain >= seeds * 7 / 10);
}

TEST_CASE("recovery metrics compare assignments against the truth") {
  auto [d, truth] = generate_layered(chain_spec(5));

  LayerAssignment perfect;
  for (const auto& members : truth.layer_members) {
    Layer layer;
    layer.parents = members;
    perfect.layers.push_back(layer);
  }
  const RecoveryMetrics exact = recovery_metrics(perfect, truth);
  CHECK(exact.exact);
  CHECK(exact.support_precision == 1.0);
  CHECK(exact.support_recall == 1.0);
  for (const double j : exact.layer_jaccard) CHECK(j == 1.0);

  SECTION("empty assignment recalls nothing") {
    const RecoveryMetrics none = recovery_metrics(LayerAssignment{}, truth);
    CHECK_FALSE(none.exact);
    CHECK(none.support_recall == 0.0);
    CHECK(none.support_precision == 1.0);  // vacuous
  }
  SECTION("one variable a layer too deep breaks exactness but not support") {
    LayerAssignment shifted = perfect;
    shifted.layers[0].parents = {"V1"};
    shifted.layers[1].parents = {"V2", "V3", "V4", "V5"};
    const RecoveryMetrics m = recovery_metrics(shifted, truth);
    CHECK_FALSE(m.exact);
    CHECK(m.support_precision == 1.0);
    CHECK(m.support_recall == 1.0);
    CHECK(m.layer_jaccard[0] == 0.5);
  }
}

TEST_CASE("csv export round-trips through the dataset loader") {
  SynthSpec sp = chain_spec(17, 50);
  auto [d, truth] = generate_layered(sp);
  const std::string csv = synth_to_csv(d);
  const Schema schema = synth_schema(d);
  const RawTable raw = load_table_from_string(csv, schema);
  auto [prepared, report] = prepare_dataset(raw, schema, {});
  REQUIRE(prepared.n() == d.n());
  REQUIRE(prepared.p() == d.p());
  // prepare_dataset does not rescale; %.17g preserves doubles exactly.
  CHECK((prepared.design - d.design).cwiseAbs().maxCoeff() == 0.0);
  CHECK(prepared.outcome == d.outcome);
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    CHECK(prepared.column_meta[static_cast<std::size_t>(j)].parent ==
          d.column_meta[static_cast<std::size_t>(j)].parent);
  }
}
