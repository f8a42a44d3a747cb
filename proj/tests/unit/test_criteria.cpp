#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "smoothfit/backfit_ll.hpp"
#include "smoothfit/criteria.hpp"
#include "smoothfit/error.hpp"

using namespace smoothfit;

namespace {

AdditiveFit flat_fit(int d, double intercept) {
  AdditiveFit f;
  f.intercept = intercept;
  f.components.assign(d, Eigen::VectorXd::Zero(f.grid.size()));
  f.bandwidths = Eigen::VectorXd::Constant(d, 0.1);
  return f;
}

Dataset sample(int n, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = u(rng);
    y[i] = x(i, 0) * x(i, 0) + 0.2 * u(rng);
  }
  return Dataset(x, y);
}

}  // namespace

TEST_CASE("rss examples") {
  Eigen::MatrixXd x(2, 1);
  x << 0.2, 0.8;
  Dataset d(x, Eigen::Vector2d(0.0, 2.0));
  CHECK(rss_from_predictions(d, Eigen::Vector2d(1.0, 1.0)).value == 1.0);
  CHECK(rss_from_predictions(d, Eigen::Vector2d(0.0, 2.0)).value == 0.0);

  Dataset s = sample(50, 2, 1);
  double mean = s.y.mean();
  double var = (s.y.array() - mean).square().sum() / 50.0;
  CriterionValue r = rss(s, flat_fit(2, mean));
  CHECK(r.value == doctest::Approx(var).epsilon(1e-13));
  CHECK(r.n_used == 50);
}

TEST_CASE("rss trimming and weights") {
  Dataset s = sample(200, 2, 2);
  TrimSpec t = TrimSpec::symmetric(2, 0.1);
  CriterionValue r = rss(s, flat_fit(2, 0.0), {}, t);
  double acc = 0.0;
  Eigen::Index used = 0;
  for (Eigen::Index i = 0; i < s.n(); ++i) {
    bool in = true;
    for (int j = 0; j < 2; ++j) in = in && s.x(i, j) >= 0.1 && s.x(i, j) <= 0.9;
    if (in) {
      acc += s.y[i] * s.y[i];
      ++used;
    }
  }
  CHECK(r.n_used == used);
  // Trimmed observations carry weight zero but the mean keeps dividing by n.
  CHECK(r.value == doctest::Approx(acc / 200.0).epsilon(1e-12));
  CHECK_THROWS_AS(TrimSpec::symmetric(2, 0.5), Error);

  WeightFn half = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 0.5; };
  CHECK(rss(s, flat_fit(2, 0.0), half).value ==
        doctest::Approx(0.5 * rss(s, flat_fit(2, 0.0)).value));
}

TEST_CASE("pls penalty") {
  Eigen::VectorXd h = Eigen::VectorXd::Constant(3, 0.1);
  CHECK(pls(1.0, h, 0.9375, 200).value == doctest::Approx(1.28125).epsilon(1e-15));
  CHECK(pls(0.0, h, 0.9375, 200).value == 0.0);
  Eigen::VectorXd h1 = Eigen::VectorXd::Constant(1, 0.17);
  double r = 0.0123;
  CHECK(pls(r, h1, 0.9375, 150).value ==
        doctest::Approx(r * (1.0 + 2.0 * 0.9375 / (150 * 0.17))).epsilon(1e-15));
}

TEST_CASE("pls to rss ratio identity on a real fit") {
  Dataset s = sample(120, 3, 3);
  Eigen::Vector3d h(0.11, 0.23, 0.31);
  AdditiveFit f = backfit_ll(s, h, Grid());
  double r = rss(s, f).value;
  double ratio = pls(r, h, 0.9375, 120).value / r;
  double expect = 1.0 + 2.0 * 0.9375 / 120.0 * (1 / 0.11 + 1 / 0.23 + 1 / 0.31);
  CHECK(std::abs(ratio - expect) < 1e-14);
}

TEST_CASE("ase examples") {
  Dataset s = sample(30, 2, 4);
  TruthFn truth = [](const Eigen::Ref<const Eigen::VectorXd>&) { return 1.0; };
  CHECK(ase(s, flat_fit(2, 1.0), truth).value == 0.0);
  CHECK(ase(s, flat_fit(2, 1.3), truth).value == doctest::Approx(0.09));

  Eigen::MatrixXd x(2, 1);
  x << 0.25, 0.75;
  Dataset two(x, Eigen::Vector2d::Zero());
  TruthFn off = [](const Eigen::Ref<const Eigen::VectorXd>& v) {
    return v[0] < 0.5 ? std::sqrt(0.01) : std::sqrt(0.03);
  };
  CHECK(ase(two, flat_fit(1, 0.0), off).value == doctest::Approx(0.02).epsilon(1e-14));
}

TEST_CASE("ase_j examples") {
  Grid g;
  AdditiveFit f = flat_fit(2, 0.0);
  f.components[1] = g.points();
  Dataset s = sample(40, 2, 5);
  CHECK(ase_j(s, f, 1, [](double u) { return u; }).value < 1e-28);
  CHECK(ase_j(s, f, 1, [](double u) { return u - 0.2; }).value == doctest::Approx(0.04));

  Eigen::MatrixXd x(2, 1);
  x << g[3], g[9];
  Dataset two(x, Eigen::Vector2d::Zero());
  AdditiveFit z = flat_fit(1, 0.0);
  auto err = [&](double u) { return u == g[3] ? 0.1 : 0.3; };
  CHECK(ase_j(two, z, 0, err).value == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("estimated AASE") {
  Eigen::MatrixXd x(200, 1);
  x.setConstant(0.5);
  Dataset d(x, Eigen::VectorXd::Zero(200));
  Eigen::MatrixXd curv = Eigen::MatrixXd::Constant(200, 1, 2.0);  // m''^2 = 4
  Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 0.1);
  KernelMoments km = Kernel::biweight().moments();
  double v = aase_hat(d, 0.01, curv, h, km).value;
  double expect = 0.01 * (5.0 / 7.0) / (200 * 0.1) + 0.25 * std::pow(0.1, 4) * 4.0 / 49.0;
  CHECK(v == doctest::Approx(expect).epsilon(1e-14));
  CHECK(v == doctest::Approx(3.5918e-4).epsilon(2e-4));

  Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(200, 1);
  CHECK(aase_hat(d, 0.01, zero, h, km).value ==
        doctest::Approx(0.01 * (5.0 / 7.0) / 20.0).epsilon(1e-14));

  // Along one axis the objective is convex with one interior grid minimum.
  Dataset s = sample(200, 2, 6);
  Eigen::MatrixXd c(200, 2);
  for (int i = 0; i < 200; ++i) c.row(i) << 2.0 + s.x(i, 0), 6.0 * s.x(i, 1);
  AaseObjective obj(0.01, c, km, Eigen::VectorXd::Ones(200));
  std::vector<double> vals;
  for (int k = 0; k < 40; ++k) {
    Eigen::Vector2d hh(0.03 * std::pow(1.08, k), 0.15);
    vals.push_back(obj(hh));
  }
  auto it = std::min_element(vals.begin(), vals.end());
  CHECK(it != vals.begin());
  CHECK(it != vals.end() - 1);
  for (auto p = vals.begin(); p + 1 != vals.end(); ++p) {
    if (p < it) CHECK(*(p + 1) < *p);
    if (p >= it) CHECK(*(p + 1) > *p);
  }
  CHECK(obj(Eigen::Vector2d(0.1, 0.2)) ==
        doctest::Approx(obj.variance_term(Eigen::Vector2d(0.1, 0.2)) +
                        obj.bias_term(Eigen::Vector2d(0.1, 0.2))));
}

TEST_CASE("criteria are invariant to permuting observations") {
  Dataset s = sample(90, 2, 7);
  Eigen::Vector2d h(0.2, 0.25);
  AdditiveFit f = backfit_ll(s, h, Grid());
  std::vector<int> perm(90);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  Dataset p = s;
  for (int i = 0; i < 90; ++i) {
    p.x.row(i) = s.x.row(perm[i]);
    p.y[i] = s.y[perm[i]];
  }
  TruthFn truth = [](const Eigen::Ref<const Eigen::VectorXd>& v) { return v[0] * v[0]; };
  CHECK(rss(s, f).value == doctest::Approx(rss(p, f).value).epsilon(1e-13));
  CHECK(ase(s, f, truth).value == doctest::Approx(ase(p, f, truth).value).epsilon(1e-13));
  AdditiveFit fp = backfit_ll(p, h, Grid());
  CHECK(rss(p, fp).value == doctest::Approx(rss(s, f).value).epsilon(1e-9));
}
