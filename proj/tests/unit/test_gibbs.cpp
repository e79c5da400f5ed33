#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bfas/errors.hpp"
#include "bfas/gibbs.hpp"
#include "synthetic.hpp"

using namespace bfas;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// A small dataset with a random current state: p symptoms, K = 1, L causes.
struct Fixture {
  VaDataset data;
  ModelState state;
};

Fixture make_fixture(int L, int p, int n, std::uint64_t seed, double missing = 0.2) {
  testing::SyntheticSpec spec;
  spec.L = L;
  spec.p = p;
  spec.K = 1;
  spec.n_train = n;
  spec.n_target = 0;
  spec.symptom_missing = missing;
  spec.demog_missing = 0.1;
  spec.seed = seed;
  Fixture f;
  f.data = testing::generate(spec).data;
  ChainConfig config;
  RngStream rng(seed);
  f.state = initialize_state(f.data, config, rng);

  std::mt19937_64 gen(seed + 100);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::gamma_distribution<double> gd(2.0, 1.0);
  auto& l = f.state.loadings;
  for (int y = 0; y < L; ++y)
    for (int j = 0; j < p; ++j) {
      for (int c = 0; c < 3; ++c) l.B[y](j, c) = nd(gen);
      l.Lambda[y](j, 0) = nd(gen);
      for (int q = 0; q < 3; ++q) l.C[y][q](j, 0) = 0.5 * nd(gen);
    }
  for (int j = 0; j < p; ++j) {
    for (int c = 0; c < 3; ++c) f.state.precisions.phi_B(j, c) = gd(gen);
    f.state.precisions.phi_Lambda[j] = gd(gen);
    for (int c = 0; c < 3; ++c) f.state.precisions.phi_C(j, c) = gd(gen);
  }
  for (int i = 0; i < f.data.n(); ++i) {
    for (int k = 0; k < 2; ++k) f.state.latent.eta(i, k) = nd(gen);
    for (int j = 0; j < p; ++j)
      if (!f.data.missing(i, j)) f.state.latent.z(i, j) = (f.data.x(i, j) ? 1.0 : -1.0) * std::abs(nd(gen));
  }
  return f;
}

// Hand-built design row for K = 1: (1, a, s, eta, gamma, a gamma, s gamma).
Eigen::VectorXd design_row(const ModelState& st, int i) {
  const auto& sd = st.standardizer;
  const double a = (st.age[i] - sd.age_mean) / sd.age_sd;
  const double s = (st.sex[i] - sd.sex_mean) / sd.sex_sd;
  const double eta = st.latent.eta(i, 0), gamma = st.latent.eta(i, 1);
  Eigen::VectorXd v(7);
  v << 1.0, a, s, eta, gamma, a * gamma, s * gamma;
  return v;
}

}  // namespace

TEST_CASE("step 1: loadings conditional matches an augmented least-squares oracle") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto f = make_fixture(3, 3, 40, seed);
    const auto& st = f.state;
    for (int y = 0; y < 3; ++y) {
      std::vector<int> rows;
      for (int i = 0; i < f.data.n(); ++i)
        if (st.cause[i] == y) rows.push_back(i);
      for (int j = 0; j < 3; ++j) {
        std::vector<int> obs;
        for (int i : rows)
          if (!f.data.missing(i, j)) obs.push_back(i);
        const int m = int(obs.size());
        // [A; D^{1/2}] beta ~ [z; 0]
        Eigen::MatrixXd X = Eigen::MatrixXd::Zero(m + 7, 7);
        Eigen::VectorXd r = Eigen::VectorXd::Zero(m + 7);
        for (int k = 0; k < m; ++k) {
          X.row(k) = design_row(st, obs[std::size_t(k)]).transpose();
          r(k) = st.latent.z(obs[std::size_t(k)], j);
        }
        Eigen::VectorXd prior(7);
        prior << st.precisions.phi_B(j, 0), st.precisions.phi_B(j, 1), st.precisions.phi_B(j, 2),
            st.precisions.phi_Lambda[j], st.precisions.phi_C(j, 0), st.precisions.phi_C(j, 1),
            st.precisions.phi_C(j, 2);
        for (int k = 0; k < 7; ++k) X(m + k, k) = std::sqrt(prior(k));
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        const Eigen::VectorXd mean = qr.solve(r);
        const Eigen::MatrixXd R = qr.matrixQR().topRows(7).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd Rinv = R.inverse();
        const Eigen::MatrixXd cov = Rinv * Rinv.transpose();

        const auto g = loadings_conditional(st, f.data, rows, j);
        CHECK((g.mean() - mean).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((g.covariance() - cov).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("step 1: scalar slice of the conditional matches the unnormalized posterior") {
  auto f = make_fixture(2, 3, 30, 9);
  const auto& st = f.state;
  const int y = 1, j = 2;
  std::vector<int> rows;
  for (int i = 0; i < f.data.n(); ++i)
    if (st.cause[i] == y) rows.push_back(i);
  const auto g = loadings_conditional(st, f.data, rows, j);
  const Eigen::VectorXd base = g.mean();
  const Eigen::VectorXd prior = loadings_prior_precision(st.precisions, j, 1);

  auto log_post = [&](const Eigen::VectorXd& beta) {
    double s = 0.0;
    for (int i : rows) {
      if (f.data.missing(i, j)) continue;
      const double e = st.latent.z(i, j) - design_row(st, i).dot(beta);
      s += -0.5 * e * e;
    }
    for (int k = 0; k < beta.size(); ++k) s += -0.5 * prior(k) * beta(k) * beta(k);
    return s;
  };
  auto log_gauss = [&](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd d = beta - base;
    return -0.5 * d.dot(g.precision * d);
  };
  for (int coord : {0, 3, 5}) {
    for (double t = -2.0; t <= 2.0; t += 0.25) {
      Eigen::VectorXd b = base;
      b(coord) += t;
      CHECK((log_post(b) - log_post(base)) == doctest::Approx(log_gauss(b) - log_gauss(base)).epsilon(1e-10));
    }
  }
}

TEST_CASE("step 1: empty cause draws from the prior") {
  auto f = make_fixture(3, 2, 20, 4);
  const std::vector<int> none;
  const auto g = loadings_conditional(f.state, f.data, none, 1);
  const Eigen::VectorXd prior = loadings_prior_precision(f.state.precisions, 1, 1);
  CHECK(g.linear.isZero(0.0));
  CHECK((g.precision - Eigen::MatrixXd(prior.asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("step 1: single observation with unit precisions is ridge regression") {
  auto f = make_fixture(2, 1, 10, 5, 0.0);
  f.state.precisions = ShrinkagePrecisions::ones(1);
  const std::vector<int> one = {3};
  const auto g = loadings_conditional(f.state, f.data, one, 0);
  const Eigen::VectorXd a = design_row(f.state, 3);
  const double z = f.state.latent.z(3, 0);
  // (a a' + I)^{-1} a z = a z / (1 + a'a) by Sherman-Morrison
  const Eigen::VectorXd expected = a * z / (1.0 + a.squaredNorm());
  CHECK((g.mean() - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("step 1: the batched update draws from the same conditional") {
  auto f = make_fixture(3, 3, 50, 6);
  const auto active = active_rows(f.data, false);
  const auto sweep = sweep_stream(77, 4);
  auto expected = f.state;
  for (int y = 0; y < 3; ++y) {
    std::vector<int> rows;
    for (int i : active)
      if (f.state.cause[i] == y) rows.push_back(i);
    for (int j = 0; j < 3; ++j) {
      auto rng = step_stream(sweep, StepKey::loadings, std::uint64_t(y) * 3 + std::uint64_t(j));
      set_loading_row(expected.loadings, y, j, sample_canonical(loadings_conditional(f.state, f.data, rows, j), rng));
    }
  }
  NumericalEvents ev;
  update_loadings(f.state, f.data, active, sweep, ev);
  for (int y = 0; y < 3; ++y)
    for (int j = 0; j < 3; ++j)
      CHECK((loading_row(f.state.loadings, y, j) - loading_row(expected.loadings, y, j)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("step 1: loading row packing round-trips") {
  auto l = Loadings::zeros(2, 3, 2);
  Eigen::VectorXd beta(3 + 8);
  for (int k = 0; k < beta.size(); ++k) beta(k) = k + 1;
  set_loading_row(l, 1, 2, beta);
  CHECK(loading_row(l, 1, 2) == beta);
  CHECK(l.B[1](2, 2) == 3.0);
  CHECK(l.Lambda[1](2, 1) == 5.0);
  CHECK(l.C[1][0](2, 0) == 6.0);
  CHECK(l.C[1][2](2, 1) == 11.0);
}

TEST_CASE("step 2: factor conditional matches the direct formula") {
  auto f = make_fixture(2, 3, 30, 11);
  const auto& st = f.state;
  for (int i = 0; i < f.data.n(); ++i) {
    const int y = st.cause[i];
    const auto& sd = st.standardizer;
    const double a = (st.age[i] - sd.age_mean) / sd.age_sd;
    const double s = (st.sex[i] - sd.sex_mean) / sd.sex_sd;
    // observed rows of Lambda~ and the residual, built by hand
    double q00 = 1, q01 = 0, q11 = 1, b0 = 0, b1 = 0;
    for (int j = 0; j < 3; ++j) {
      if (f.data.missing(i, j)) continue;
      const double l0 = st.loadings.Lambda[y](j, 0);
      const double l1 = st.loadings.C[y][0](j, 0) + a * st.loadings.C[y][1](j, 0) + s * st.loadings.C[y][2](j, 0);
      const double bw = st.loadings.B[y](j, 0) + a * st.loadings.B[y](j, 1) + s * st.loadings.B[y](j, 2);
      const double r = st.latent.z(i, j) - bw;
      q00 += l0 * l0;
      q01 += l0 * l1;
      q11 += l1 * l1;
      b0 += l0 * r;
      b1 += l1 * r;
    }
    const double det = q00 * q11 - q01 * q01;
    const Eigen::Vector2d mean((q11 * b0 - q01 * b1) / det, (q00 * b1 - q01 * b0) / det);
    Eigen::Matrix2d cov;
    cov << q11 / det, -q01 / det, -q01 / det, q00 / det;

    const auto g = factor_conditional(st, f.data, i);
    CHECK((g.mean() - mean).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.covariance() - cov).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("step 2: no information gives the standard normal prior") {
  auto f = make_fixture(2, 2, 10, 12, 0.0);
  SUBCASE("all symptoms missing") {
    f.data.missing.row(0).setOnes();
    f.data.x.row(0).setZero();
    const auto g = factor_conditional(f.state, f.data, 0);
    CHECK(g.precision.isIdentity(0.0));
    CHECK(g.linear.isZero(0.0));
  }
  SUBCASE("zero loadings") {
    f.state.loadings = Loadings::zeros(2, 2, 1);
    const auto g = factor_conditional(f.state, f.data, 0);
    CHECK(g.precision.isIdentity(0.0));
    CHECK(g.linear.isZero(0.0));
  }
}

TEST_CASE("steps 3-5: precision conditionals") {
  auto f = make_fixture(3, 2, 10, 13);
  const auto& l = f.state.loadings;
  const auto c = precision_conditionals(l);
  CHECK(c.shape_B == 2.0);
  CHECK(c.shape_factor == 2.0);
  for (int j = 0; j < 2; ++j) {
    for (int q = 0; q < 3; ++q) {
      double sb = 0, sc = 0;
      for (int y = 0; y < 3; ++y) {
        sb += l.B[y](j, q) * l.B[y](j, q);
        sc += l.C[y][q](j, 0) * l.C[y][q](j, 0);
      }
      CHECK(c.rate_B(j, q) == doctest::Approx(0.5 * (sb + 1.0)).epsilon(1e-14));
      CHECK(c.rate_C(j, q) == doctest::Approx(0.5 * (sc + 1.0)).epsilon(1e-14));
    }
    double sl = 0;
    for (int y = 0; y < 3; ++y) sl += l.Lambda[y](j, 0) * l.Lambda[y](j, 0);
    CHECK(c.rate_Lambda(j) == doctest::Approx(0.5 * (sl + 1.0)).epsilon(1e-14));
  }

  SUBCASE("zero loadings, L = 5, K = 2: phi_Lambda ~ Ga(5.5, 0.5)") {
    ModelState st;
    st.loadings = Loadings::zeros(5, 1, 2);
    st.precisions = ShrinkagePrecisions::ones(1);
    const auto cz = precision_conditionals(st.loadings);
    CHECK(cz.shape_factor == 5.5);
    CHECK(cz.rate_Lambda(0) == 0.5);
    double sum = 0;
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
      update_precisions(st, sweep_stream(3, s));
      sum += st.precisions.phi_Lambda(0);
    }
    CHECK(std::abs(sum / n - 11.0) < 0.1);
  }
  SUBCASE("L = 1, B = 1: phi_B ~ Ga(1, 1)") {
    ModelState st;
    st.loadings = Loadings::zeros(1, 1, 1);
    st.loadings.B[0].setOnes();
    st.precisions = ShrinkagePrecisions::ones(1);
    const auto cb = precision_conditionals(st.loadings);
    CHECK(cb.shape_B == 1.0);
    CHECK(cb.rate_B(0, 0) == 1.0);
    double sum = 0;
    const int n = 100000;
    for (int s = 0; s < n; ++s) {
      update_precisions(st, sweep_stream(4, s));
      sum += st.precisions.phi_B(0, 1);
    }
    CHECK(std::abs(sum / n - 1.0) < 0.02);
  }
  SUBCASE("shapes never depend on the loading values") {
    auto l2 = l;
    l2.B[0] *= 100.0;
    l2.Lambda[1] *= -3.0;
    const auto c2 = precision_conditionals(l2);
    CHECK(c2.shape_B == c.shape_B);
    CHECK(c2.shape_factor == c.shape_factor);
  }
}

TEST_CASE("step 6: latent utilities") {
  auto f = make_fixture(2, 3, 40, 14, 0.3);
  const auto active = active_rows(f.data, false);
  const Eigen::MatrixXd before = f.state.latent.z;
  update_latent_z(f.state, f.data, active, sweep_stream(1, 0));
  for (int i = 0; i < f.data.n(); ++i)
    for (int j = 0; j < 3; ++j) {
      if (f.data.missing(i, j)) {
        CHECK(f.state.latent.z(i, j) == before(i, j));
      } else if (f.data.x(i, j) == 1) {
        CHECK(f.state.latent.z(i, j) >= 0.0);
      } else {
        CHECK(f.state.latent.z(i, j) <= 0.0);
      }
    }

  SUBCASE("latent mean matches B w + Lambda~ eta~") {
    for (int i = 0; i < 5; ++i) {
      const auto& st = f.state;
      const int y = st.cause[i];
      const Eigen::VectorXd a = design_row(st, i);
      for (int j = 0; j < 3; ++j) {
        Eigen::VectorXd beta(7);
        beta << st.loadings.B[y](j, 0), st.loadings.B[y](j, 1), st.loadings.B[y](j, 2), st.loadings.Lambda[y](j, 0),
            st.loadings.C[y][0](j, 0), st.loadings.C[y][1](j, 0), st.loadings.C[y][2](j, 0);
        CHECK(latent_mean(st, i, j) == doctest::Approx(a.dot(beta)).epsilon(1e-13));
      }
    }
  }
  SUBCASE("zero linear predictor gives a half-normal") {
    f.state.loadings = Loadings::zeros(2, 3, 1);
    double sum = 0;
    long count = 0;
    for (int s = 0; s < 2000; ++s) {
      update_latent_z(f.state, f.data, active, sweep_stream(2, s));
      for (int i = 0; i < f.data.n(); ++i)
        for (int j = 0; j < 3; ++j)
          if (!f.data.missing(i, j)) {
            sum += std::abs(f.state.latent.z(i, j));
            ++count;
          }
    }
    CHECK(std::abs(sum / double(count) - std::sqrt(2.0 / M_PI)) < 0.005);
  }
}

TEST_CASE("step 7: demographic table") {
  const auto data = testing::make_dataset(
      {{0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}, {0}},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1},
      {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 1, 1},
      std::vector<int>(20, 0), 2);
  ChainConfig config;
  RngStream rng(1);
  auto st = initialize_state(data, config, rng);
  const auto active = active_rows(data, false);
  const auto conc = demog_conditional(st, active);
  CHECK(conc.row(0) == Eigen::RowVector4d(11, 6, 4, 3));
  CHECK(conc.row(1) == Eigen::RowVector4d(1, 1, 1, 1));

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 4);
  const int n = 50000;
  for (int s = 0; s < n; ++s) {
    update_demog_probs(st, active, sweep_stream(5, s));
    for (int y = 0; y < 2; ++y) REQUIRE(std::abs(st.categorical.demog.row(y).sum() - 1.0) < 1e-12);
    sum += st.categorical.demog;
  }
  sum /= n;
  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(sum(0, c) - conc(0, c) / 24.0) < 0.005);
    CHECK(std::abs(sum(1, c) - 0.25) < 0.005);
  }
}

TEST_CASE("step 8: imputation conditional") {
  SUBCASE("p = 1 Bayes ratio") {
    auto f = make_fixture(2, 1, 20, 15, 0.0);
    auto& st = f.state;
    st.categorical.demog << 0.1, 0.2, 0.3, 0.4, 0.25, 0.15, 0.35, 0.25;
    for (int i = 0; i < f.data.n(); ++i) {
      const int y = st.cause[i], b = st.sex[i];
      const auto& sd = st.standardizer;
      double w[2];
      for (int a = 0; a < 2; ++a) {
        const double as = (a - sd.age_mean) / sd.age_sd, ss = (b - sd.sex_mean) / sd.sex_sd;
        const auto& l = st.loadings;
        const double lin = l.B[y](0, 0) + as * l.B[y](0, 1) + ss * l.B[y](0, 2) + l.Lambda[y](0, 0) * st.latent.eta(i, 0) +
                           (l.C[y][0](0, 0) + as * l.C[y][1](0, 0) + ss * l.C[y][2](0, 0)) * st.latent.eta(i, 1);
        w[a] = Phi(f.data.x(i, 0) ? lin : -lin) * st.categorical.demog(y, demog_cell(a, b));
      }
      const auto pr = age_conditional(st, f.data, i);
      CHECK(pr[1] == doctest::Approx(w[1] / (w[0] + w[1])).epsilon(1e-12));
      CHECK(pr[0] + pr[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("no symptom information reduces to the cell ratio") {
    auto f = make_fixture(2, 2, 10, 16, 0.0);
    f.state.loadings = Loadings::zeros(2, 2, 1);
    f.state.categorical.demog << 0.1, 0.2, 0.3, 0.4, 0.25, 0.15, 0.35, 0.25;
    for (int i = 0; i < 10; ++i) {
      const int y = f.state.cause[i], a = f.state.age[i], b = f.state.sex[i];
      const auto& d = f.state.categorical.demog;
      CHECK(age_conditional(f.state, f.data, i)[1] ==
            doctest::Approx(d(y, demog_cell(1, b)) / (d(y, demog_cell(0, b)) + d(y, demog_cell(1, b)))));
      CHECK(sex_conditional(f.state, f.data, i)[1] ==
            doctest::Approx(d(y, demog_cell(a, 1)) / (d(y, demog_cell(a, 0)) + d(y, demog_cell(a, 1)))));
    }
  }
  SUBCASE("uniform table and all symptoms missing gives a fair coin") {
    auto f = make_fixture(2, 2, 10, 17, 0.0);
    f.data.missing.row(2).setOnes();
    f.data.x.row(2).setZero();
    f.state.categorical.demog.setConstant(0.25);
    CHECK(age_conditional(f.state, f.data, 2)[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sex_conditional(f.state, f.data, 2)[1] == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("observed age and sex are never changed") {
    auto f = make_fixture(2, 2, 40, 18, 0.0);
    const auto before_age = f.state.age, before_sex = f.state.sex;
    NumericalEvents ev;
    impute_demographics(f.state, f.data, active_rows(f.data, false), sweep_stream(1, 1), ev);
    for (int i = 0; i < f.data.n(); ++i) {
      if (f.data.age[i] != kMissing) CHECK(f.state.age[i] == before_age[i]);
      if (f.data.sex[i] != kMissing) CHECK(f.state.sex[i] == before_sex[i]);
    }
  }
}

TEST_CASE("relevance-mode cause conditional") {
  const auto data = testing::make_dataset({{0}, {1}, {0}, {1}}, {0, 1, 0, 1}, {0, 0, 1, 1}, {0, 0, 0, 1}, 2);
  ChainConfig config;
  RngStream rng(2);
  const auto st = initialize_state(data, config, rng);
  auto c = relevance_cause_conditional(st, data, config);
  CHECK(c(0) == doctest::Approx(1.75));
  CHECK(c(1) == doctest::Approx(1.25));
  config.relevance_cause_weights = RelevanceCauseWeights::counts;
  c = relevance_cause_conditional(st, data, config);
  CHECK(c(0) == 4.0);
  CHECK(c(1) == 2.0);
}

TEST_CASE("chain bookkeeping and reproducibility") {
  testing::SyntheticSpec spec;
  spec.L = 2;
  spec.p = 3;
  spec.n_train = 40;
  spec.n_target = 20;
  spec.symptom_missing = 0.1;
  spec.demog_missing = 0.1;
  const auto syn = testing::generate(spec);
  ChainConfig config;
  config.iterations = 100;
  config.burn_in = 10;
  config.thin = 10;
  config.R = 50;
  config.seed = 123;
  int observed = 0;
  const auto a = run_chain(syn.data, config, ChainMode::fit, [&](int, const ModelState&, const RngStream&) { ++observed; });
  CHECK(a.kept_sweeps.size() == 10);
  CHECK(observed == 10);
  CHECK(a.csmf_draws.size() == 10);
  CHECK(a.kept_sweeps.front() == 19);
  CHECK(a.kept_sweeps.back() == 109);
  for (const auto& d : a.csmf_draws) CHECK(std::abs(d.sum() - 1.0) < 1e-12);

  const auto b = run_chain(syn.data, config);
  REQUIRE(b.csmf_draws.size() == a.csmf_draws.size());
  for (std::size_t k = 0; k < a.csmf_draws.size(); ++k) CHECK(a.csmf_draws[k] == b.csmf_draws[k]);
  CHECK(a.target_prob_sum == b.target_prob_sum);

  config.seed = 124;
  const auto c = run_chain(syn.data, config);
  CHECK(c.target_prob_sum != a.target_prob_sum);

  SUBCASE("transductive and fixed-prior variants run") {
    config.transductive = true;
    CHECK(run_chain(syn.data, config).csmf_draws.size() == 10);
    config.transductive = false;
    config.cause_prior_update = CausePriorUpdate::fixed;
    CHECK(run_chain(syn.data, config).csmf_draws.size() == 10);
  }
  SUBCASE("relevance mode keeps no CSMF draws") {
    const auto r = run_chain(syn.data, config, ChainMode::relevance);
    CHECK(r.kept_sweeps.size() == 10);
    CHECK(r.csmf_draws.empty());
  }
}

TEST_CASE("chain configuration validation") {
  ChainConfig c;
  CHECK_NOTHROW(c.validate(3));
  c.thin = 0;
  CHECK_THROWS_AS(c.validate(3), DomainError);
  c = ChainConfig{};
  c.K = 0;
  CHECK_THROWS_AS(c.validate(3), DomainError);
  c = ChainConfig{};
  c.dirichlet_cause_concentration = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(c.validate(3), DomainError);
  c = ChainConfig{};
  c.dirichlet_demog_concentration(2) = 0.0;
  CHECK_THROWS_AS(c.validate(3), DomainError);
  CHECK(ChainConfig{}.cause_concentration(4) == Eigen::VectorXd::Ones(4));
}
