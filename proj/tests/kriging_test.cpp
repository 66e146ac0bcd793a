#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "sfreg/kriging.hpp"

using namespace sfreg;

namespace {

KrigingConfig make_config(double sigma2, double rs, double rt, double nugget,
                          int neighbors = 20) {
  KrigingConfig cfg;
  cfg.n_neighbors = neighbors;
  cfg.covariance = {sigma2, rs, rt, nugget};
  return cfg;
}

}  // namespace

TEST_CASE("separable covariance closed form and validation") {
  SeparableCovariance cov{2.0, 400.0, 3.0, 0.1};
  CHECK(cov.value(0.0, 0.0) == doctest::Approx(2.0));
  CHECK(cov.value(400.0, 0.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(cov.value(400.0, 3.0) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-12));
  CHECK(cov.value(0.0, -3.0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-12));
  CHECK(cov.scaled_distance(400.0, 0.0) == doctest::Approx(1.0));
  CHECK(cov.scaled_distance(300.0, 2.4) ==
        doctest::Approx(std::sqrt(0.75 * 0.75 + 0.8 * 0.8)).epsilon(1e-12));

  SeparableCovariance bad = cov;
  bad.sigma2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), NumericError);
  bad = cov;
  bad.range_s = -1.0;
  CHECK_THROWS_AS(bad.validate(), NumericError);
  bad = cov;
  bad.nugget = -0.1;
  CHECK_THROWS_AS(bad.validate(), NumericError);
}

TEST_CASE("kriging reproduces a record exactly when the nugget is zero") {
  std::vector<SpaceTimeRecord> recs;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(10.0, 2.0);
  const auto sites = oracles::random_sites(8, 7);
  for (int i = 0; i < 8; ++i)
    for (double t : {1.0, 5.0, 9.0}) recs.push_back({sites[i], t, gauss(rng)});

  const KrigingConfig cfg = make_config(1.0, 400.0, 2.0, 0.0);
  for (const auto& r : recs) {
    const KrigePrediction p = krige_point(recs, cfg, r.site, r.time);
    CHECK(p.value == doctest::Approx(r.value).epsilon(1e-8));
    CHECK(p.variance == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(p.weight_sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("single record gives its value back") {
  std::vector<SpaceTimeRecord> recs = {{{"only", 5.0, 45.0}, 3.0, 7.5}};
  const KrigingConfig cfg = make_config(1.0, 300.0, 2.0, 0.0);
  const KrigePrediction p = krige_point(recs, cfg, {"q", 12.0, 50.0}, 8.0);
  CHECK(p.value == doctest::Approx(7.5));
  CHECK(p.weight_sum == doctest::Approx(1.0));
  CHECK(p.variance > 0.0);
}

TEST_CASE("two-record prediction matches the hand-solved system") {
  // sites on the same parallel, target halfway between, same time everywhere
  std::vector<SpaceTimeRecord> recs = {{{"a", 4.0, 45.0}, 2.0, 1.0},
                                       {{"b", 8.0, 45.0}, 2.0, 3.0}};
  const SiteLocation target{"mid", 6.0, 45.0};
  const SeparableCovariance cov{1.5, 350.0, 2.0, 0.2};
  KrigingConfig cfg = make_config(cov.sigma2, cov.range_s, cov.range_t, cov.nugget);

  const double h12 = great_circle_distance(recs[0].site, recs[1].site);
  const double h1t = great_circle_distance(recs[0].site, target);
  const double h2t = great_circle_distance(recs[1].site, target);

  // 3x3 bordered system [[K11 K12 1][K12 K22 1][1 1 0]] [w1 w2 l] = [c1 c2 1]
  using LD = long double;
  Eigen::Matrix<LD, 3, 3> A;
  const LD k12 = cov.value(h12, 0.0);
  const LD diag = cov.sigma2 + cov.nugget;
  A << diag, k12, 1.0L, k12, diag, 1.0L, 1.0L, 1.0L, 0.0L;
  Eigen::Matrix<LD, 3, 1> rhs;
  rhs << (LD)cov.value(h1t, 0.0), (LD)cov.value(h2t, 0.0), 1.0L;
  const Eigen::Matrix<LD, 3, 1> sol = A.fullPivLu().solve(rhs);
  const double want_value = (double)(sol(0) * 1.0L + sol(1) * 3.0L);
  const double want_var =
      (double)((LD)cov.sigma2 - sol(0) * rhs(0) - sol(1) * rhs(1) - sol(2));
  REQUIRE(want_var > 0.0);

  const KrigePrediction p = krige_point(recs, cfg, target, 2.0);
  CHECK(p.value == doctest::Approx(want_value).epsilon(1e-10));
  CHECK(p.variance == doctest::Approx(want_var).epsilon(1e-8));
  CHECK(p.weight_sum == doctest::Approx(1.0).epsilon(1e-12));

  // symmetric geometry: equal weights, so the mean of the two values
  CHECK(p.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("kriging is affine equivariant and exact on constants") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto sites = oracles::random_sites(10, 17);
  std::vector<SpaceTimeRecord> recs;
  for (int i = 0; i < 10; ++i)
    for (double t : {0.5, 4.0, 7.5, 11.0, 14.5}) recs.push_back({sites[i], t, gauss(rng)});

  const KrigingConfig cfg = make_config(1.0, 400.0, 2.5, 0.05, 12);
  const SiteLocation target{"t", 10.0, 47.0};
  const double tt = 6.0;

  const KrigePrediction base = krige_point(recs, cfg, target, tt);

  std::vector<SpaceTimeRecord> shifted = recs;
  for (auto& r : shifted) r.value = 2.0 * r.value + 5.0;
  const KrigePrediction aff = krige_point(shifted, cfg, target, tt);
  CHECK(aff.value == doctest::Approx(2.0 * base.value + 5.0).epsilon(1e-9));

  std::vector<SpaceTimeRecord> constant = recs;
  for (auto& r : constant) r.value = 4.25;
  const KrigePrediction c = krige_point(constant, cfg, target, tt);
  CHECK(c.value == doctest::Approx(4.25).epsilon(1e-12));
}

TEST_CASE("krige_curves fills the grid for every target site") {
  const auto sites = oracles::random_sites(6, 23);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss(3.0, 1.0);
  std::vector<SpaceTimeRecord> recs;
  for (const auto& s : sites)
    for (double t : {1.0, 6.0, 12.0}) recs.push_back({s, t, gauss(rng)});

  KrigingConfig cfg = make_config(1.0, 400.0, 3.0, 0.0, 10);
  cfg.grid = {0.0, 3.0, 6.0, 9.0, 12.0, 15.0};
  const std::vector<SiteLocation> targets(sites.begin(), sites.begin() + 3);
  const auto curves = krige_curves(recs, cfg, targets);
  REQUIRE(curves.size() == 3);
  for (std::size_t i = 0; i < curves.size(); ++i) {
    CHECK(curves[i].curve.site_id == targets[i].site_id);
    REQUIRE(curves[i].curve.times.size() == cfg.grid.size());
    REQUIRE(curves[i].variances.size() == cfg.grid.size());
    for (std::size_t g = 0; g < cfg.grid.size(); ++g) {
      CHECK(curves[i].curve.times[g] == cfg.grid[g]);
      CHECK(std::isfinite(curves[i].curve.values[g]));
      CHECK(curves[i].variances[g] >= 0.0);
    }
    // grid times 1, 6, 12 coincide with records at this site: exact with no nugget
    const auto& c = curves[i].curve;
    for (std::size_t g = 0; g < c.times.size(); ++g)
      for (const auto& r : recs)
        if (r.site.site_id == targets[i].site_id && r.time == c.times[g])
          CHECK(c.values[g] == doctest::Approx(r.value).epsilon(1e-8));
  }

  KrigingConfig no_grid = cfg;
  no_grid.grid.clear();
  CHECK_THROWS_AS(krige_curves(recs, no_grid, targets), ConfigError);
}

TEST_CASE("kriging beats nearest-neighbor carryover on a smooth field") {
  // smooth deterministic field sampled at scattered sites/times, held-out points
  const auto sites = oracles::random_sites(25, 31);
  auto field = [](const SiteLocation& s, double t) {
    return 10.0 + 0.08 * s.lon + 0.12 * s.lat + 0.5 * std::sin(0.4 * t) +
           0.01 * s.lon * std::cos(0.3 * t);
  };
  std::vector<SpaceTimeRecord> train;
  for (int i = 0; i < 20; ++i)
    for (double t : {0.5, 3.0, 5.5, 8.0, 10.5, 13.0})
      train.push_back({sites[i], t, field(sites[i], t)});

  const KrigingConfig cfg = make_config(1.0, 600.0, 4.0, 0.0, 15);
  double sse_krige = 0.0;
  double sse_nn = 0.0;
  int n_eval = 0;
  const SeparableCovariance metric = cfg.covariance;
  for (int i = 20; i < 25; ++i)
    for (double t : {2.0, 7.0, 12.0}) {
      const double truth = field(sites[i], t);
      const KrigePrediction p = krige_point(train, cfg, sites[i], t);
      sse_krige += (p.value - truth) * (p.value - truth);
      double best = 1e300;
      double nn = 0.0;
      for (const auto& r : train) {
        const double d =
            metric.scaled_distance(great_circle_distance(r.site, sites[i]), t - r.time);
        if (d < best) {
          best = d;
          nn = r.value;
        }
      }
      sse_nn += (nn - truth) * (nn - truth);
      ++n_eval;
    }
  REQUIRE(n_eval == 15);
  CHECK(sse_krige < sse_nn);
}

TEST_CASE("fit_separable_covariance recovers the generating parameters") {
  const SeparableCovariance truth{1.0, 400.0, 2.0, 0.05};
  std::vector<double> times;
  for (int i = 0; i < 30; ++i) times.push_back(0.25 + i * 0.5);
  const int ns = 100, nt = static_cast<int>(times.size());

  int ok = 0;
  const int reps = 10;
  for (int rep = 0; rep < reps; ++rep) {
    const auto sites = oracles::random_sites(ns, 900 + rep);
    const Eigen::MatrixXd sdist = distance_matrix(sites);
    Eigen::MatrixXd cs(ns, ns), ct(nt, nt);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < ns; ++j)
        cs(i, j) = truth.sigma2 * std::exp(-sdist(i, j) / truth.range_s);
    for (int i = 0; i < nt; ++i)
      for (int j = 0; j < nt; ++j)
        ct(i, j) = std::exp(-std::fabs(times[i] - times[j]) / truth.range_t);
    cs.diagonal().array() += 1e-10;
    ct.diagonal().array() += 1e-10;
    Eigen::LLT<Eigen::MatrixXd> ls(cs), lt(ct);
    REQUIRE(ls.info() == Eigen::Success);
    REQUIRE(lt.info() == Eigen::Success);

    // L_s Z L_t^T draws from the separable covariance without forming it
    std::mt19937_64 rng(900 + rep);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd z(ns, nt);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j) z(i, j) = gauss(rng);
    const Eigen::MatrixXd field = Eigen::MatrixXd(ls.matrixL()) * z *
                                  Eigen::MatrixXd(lt.matrixL()).transpose();

    const double sn = std::sqrt(truth.nugget);
    std::vector<SpaceTimeRecord> recs;
    recs.reserve(static_cast<std::size_t>(ns) * nt);
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < nt; ++j)
        recs.push_back({sites[i], times[j], field(i, j) + sn * gauss(rng)});

    const SeparableCovariance est = fit_separable_covariance(recs);
    const bool good = oracles::rel_err(est.sigma2, truth.sigma2) < 0.30 &&
                      oracles::rel_err(est.range_s, truth.range_s) < 0.30 &&
                      oracles::rel_err(est.range_t, truth.range_t) < 0.30;
    if (good) ++ok;
  }
  // one realization per rep, so allow estimation noise
  CHECK(ok >= 6);
}

TEST_CASE("fit_separable_covariance precondition failures") {
  // constant values: no variance to model
  std::vector<SpaceTimeRecord> flat;
  const auto sites = oracles::random_sites(5, 3);
  for (const auto& s : sites)
    for (double t : {1.0, 2.0, 3.0, 4.0, 5.0, 6.0}) flat.push_back({s, t, 2.0});
  CHECK_THROWS_AS(fit_separable_covariance(flat), NumericError);

  // single site: no cross-site pairs for the spatial margin
  std::vector<SpaceTimeRecord> lone;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int i = 0; i < 40; ++i) lone.push_back({{"s", 5.0, 45.0}, 0.2 * i, gauss(rng)});
  CHECK_THROWS_AS(fit_separable_covariance(lone), NumericError);

  // too few records
  std::vector<SpaceTimeRecord> tiny(flat.begin(), flat.begin() + 10);
  CHECK_THROWS_AS(fit_separable_covariance(tiny), NumericError);
}
