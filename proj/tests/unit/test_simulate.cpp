#include "doctest.h"

#include <cmath>
#include <random>

#include "smoothfit/error.hpp"
#include "smoothfit/simulate.hpp"

using namespace smoothfit;

namespace {

// Brute-force truncated compound-symmetry normal, written independently.
Eigen::MatrixXd oracle_draws(int n, double rho, double var, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const double s = std::sqrt(var);
  // x_j = 0.5 + s (sqrt(rho) z0 + sqrt(1 - rho) z_j) has the required covariance.
  Eigen::MatrixXd out(n, 3);
  int got = 0;
  while (got < n) {
    double z0 = z(rng);
    double row[3];
    bool ok = true;
    for (double& r : row) {
      r = 0.5 + s * (std::sqrt(rho) * z0 + std::sqrt(1.0 - rho) * z(rng));
      ok = ok && r >= 0.0 && r <= 1.0;
    }
    if (!ok) continue;
    out.row(got++) << row[0], row[1], row[2];
  }
  return out;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double ma = a.mean(), mb = b.mean();
  Eigen::ArrayXd da = a.array() - ma, db = b.array() - mb;
  return (da * db).sum() / std::sqrt(da.square().sum() * db.square().sum());
}

}  // namespace

TEST_CASE("covariate sampler invariants") {
  Eigen::MatrixXd x = sample_covariates(20000, 3, 0.0, 42);
  CHECK(x.minCoeff() >= 0.0);
  CHECK(x.maxCoeff() <= 1.0);
  for (int j = 0; j < 3; ++j) {
    double m = x.col(j).mean();
    double sd = std::sqrt((x.col(j).array() - m).square().mean());
    CHECK(std::abs(m - 0.5) < 3.0 * sd / std::sqrt(20000.0));
  }
  CHECK(x == sample_covariates(20000, 3, 0.0, 42));
  CHECK(x != sample_covariates(20000, 3, 0.0, 43));
}

TEST_CASE("truncated correlation matches a brute-force oracle") {
  const int n = 40000;
  Eigen::MatrixXd x = sample_covariates(n, 3, 0.5, 7);
  Eigen::MatrixXd ref = oracle_draws(1000000, 0.5, 0.5, 99);
  for (auto [a, b] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    double r = correlation(x.col(a), x.col(b));
    double r0 = correlation(ref.col(a), ref.col(b));
    double se = (1.0 - r0 * r0) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(r - r0) < 3.0 * se);
    CHECK(r0 < 0.5);  // truncation shrinks the correlation
  }
  Eigen::VectorXd mu = design_component_means(0.5, 0.5);
  for (int j = 0; j < 3; ++j) {
    double truth = ref.col(j).array().pow(j + 2).mean();
    CHECK(std::abs(mu[j] - truth) < 2e-3);
  }
}

TEST_CASE("degenerate sampler") {
  std::mt19937_64 rng(1);
  try {
    sample_covariates(10, 3, 0.0, rng, 1e6);
    FAIL("expected sampler_degenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::sampler_degenerate);
  }
}

TEST_CASE("data generation") {
  SimConfig cfg;
  cfg.n = 20000;
  auto rng = replicate_engine(5, 0);
  GeneratedData g = generate(cfg, rng);
  REQUIRE(g.data.d() == 3);
  Eigen::VectorXd resid = g.data.y;
  for (Eigen::Index i = 0; i < g.data.n(); ++i)
    for (int j = 0; j < 3; ++j) resid[i] -= g.components[j](g.data.x(i, j));
  double v = (resid.array() - resid.mean()).square().mean();
  CHECK(std::abs(v - 0.01) < 3.0 * 0.01 * std::sqrt(2.0 / cfg.n));

  // Population centering: centered truths shift by the design means.
  Eigen::VectorXd mu = design_component_means(0.0, 0.5);
  REQUIRE(g.truth.intercept.has_value());
  CHECK(*g.truth.intercept == doctest::Approx(mu.sum()).epsilon(1e-12));
  for (int j = 0; j < 3; ++j)
    CHECK(g.truth.centered[j](0.3) == doctest::Approx(std::pow(0.3, j + 2) - mu[j]));

  cfg.centering = Centering::sample;
  cfg.n = 300;
  auto rng2 = replicate_engine(5, 1);
  GeneratedData s = generate(cfg, rng2);
  CHECK_FALSE(s.truth.intercept.has_value());
  for (int j = 0; j < 3; ++j) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < s.data.n(); ++i) m += s.truth.centered[j](s.data.x(i, j));
    CHECK(std::abs(m / 300.0) < 1e-12);
  }

  cfg.sigma2 = 1e-300;
  auto rng3 = replicate_engine(5, 2);
  GeneratedData z = generate(cfg, rng3);
  for (Eigen::Index i = 0; i < z.data.n(); ++i)
    CHECK(z.data.y[i] == doctest::Approx(z.truth.regression(z.data.x.row(i).transpose())));

  cfg = {};
  cfg.model = Model::m2;
  auto r4 = replicate_engine(5, 3);
  auto a = generate(cfg, r4);
  auto r5 = replicate_engine(5, 3);
  auto b = generate(cfg, r5);
  CHECK(a.data.d() == 1);
  CHECK(a.data.x == b.data.x);
  CHECK(a.data.y == b.data.y);
}

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto edit) {
    SimConfig k;
    edit(k);
    CHECK_THROWS_AS(k.validate(), Error);
  };
  bad([](SimConfig& k) { k.n = 19; });
  bad([](SimConfig& k) { k.rho = 1.0; });
  bad([](SimConfig& k) { k.sigma2 = 0.0; });
  bad([](SimConfig& k) { k.replicates = 0; });
  bad([](SimConfig& k) { k.methods = {Method::pls1}; });
  bad([](SimConfig& k) {
    k.model = Model::m2;
    k.methods = {Method::pl_star};
  });
  CHECK(c.effective_methods().size() == 4);
}

TEST_CASE("studies are deterministic and order independent") {
  SimConfig cfg;
  cfg.n = 60;
  cfg.replicates = 4;
  cfg.seed = 3;
  cfg.methods = {Method::ase_oracle, Method::pls, Method::pl_star};
  cfg.threads = 1;
  SimReport a = run_study(cfg);
  cfg.threads = 4;
  SimReport b = run_study(cfg);
  REQUIRE(a.replicates.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(a.replicates[r].ase == b.replicates[r].ase);
    for (std::size_t m = 0; m < 3; ++m)
      CHECK(a.replicates[r].bandwidths[m] == b.replicates[r].bandwidths[m]);
  }
  // Summaries are plain averages of the stored records.
  const MethodSummary& s = a.summary(Method::pls);
  double mean = 0.0;
  int ok = 0;
  for (const auto& rec : a.replicates)
    if (!rec.failed) {
      mean += rec.ase[1];
      ++ok;
    }
  CHECK(s.mean_ase == doctest::Approx(mean / ok).epsilon(1e-14));
  CHECK(std::is_sorted(s.sorted_ase.begin(), s.sorted_ase.end()));
  CHECK(s.log_differences.size() == static_cast<std::size_t>(ok));
  const auto& rec = a.replicates[0];
  CHECK(s.log_differences[0][0] ==
        doctest::Approx(std::log(rec.bandwidths[1][0]) - std::log(rec.oracle_bandwidths[0])));
  CHECK(a.summary(Method::ase_oracle).mean_ase <= s.mean_ase);

  cfg.replicates = 1;
  SimReport c1 = run_study(cfg);
  SimReport c2 = run_study(cfg);
  CHECK(c1.replicates[0].ase == c2.replicates[0].ase);
}

TEST_CASE("single covariate study") {
  SimConfig cfg;
  cfg.model = Model::m2;
  cfg.n = 50;
  cfg.replicates = 2;
  SimReport r = run_study(cfg);
  CHECK(r.replicates.size() == 2);
  CHECK(r.methods.size() == 2);
  CHECK(r.failed == 0);
  CHECK(r.summary(Method::pl1).mean_ase > 0.0);
}

TEST_CASE("thread resolution") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
