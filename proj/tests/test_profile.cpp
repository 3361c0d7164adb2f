#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "shockduct/error.hpp"
#include "shockduct/profile.hpp"

using namespace shockduct;

namespace {

GasModel unit_gamma2() {
  GasModel g;
  g.gamma = 2.0;
  g.mu = 0.25;
  g.lambda = 0.5;  // mu_tilde = 1
  return g;
}

const Profile& default_profile() {
  static const Profile p = [] {
    const GasModel g;
    return solve_profile(solve_shock(1.2, 1.0, g), g);
  }();
  return p;
}

}  // namespace

TEST(ProfileRhs, FixedPointsAndSign) {
  const GasModel g = unit_gamma2();
  const ShockTriple t = solve_shock(2.0, 1.0, g);
  EXPECT_NEAR(profile_rhs(t.u1_minus, t, g), 0.0, 1e-12);
  EXPECT_NEAR(profile_rhs(t.u1_plus, t, g), 0.0, 1e-12);
  const double mid = 0.5 * (t.u1_minus + t.u1_plus);
  EXPECT_LT(profile_rhs(mid, t, g), 0.0);

  // Formula with K taken from either end state.
  const double j = t.rho_minus * (t.u1_minus - t.s);
  const double Km = j * t.u1_minus + t.rho_minus * t.rho_minus;
  const double Kp = t.rho_plus * (t.u1_plus - t.s) * t.u1_plus + t.rho_plus * t.rho_plus;
  EXPECT_NEAR(Km, Kp, 1e-12);
  const double rho = j / (mid - t.s);
  EXPECT_NEAR(profile_rhs(mid, t, g), j * mid + rho * rho - Km, 1e-12);
}

TEST(ProfileRhs, Errors) {
  const GasModel g;
  const ShockTriple t = solve_shock(1.2, 1.0, g);
  try {
    profile_rhs(t.u1_minus + 0.1, t, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
  EXPECT_THROW(profile_rhs(t.u1_plus - 0.1, t, g), Error);
  ShockTriple bad = t;
  bad.s = 0.5 * (t.u1_minus + t.u1_plus);
  try {
    profile_rhs(bad.s, bad, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Pole);
  }
}

TEST(Profile, RejectsNonAdmissibleTriple) {
  const GasModel g;
  ShockTriple t = solve_shock(1.2, 1.0, g);
  std::swap(t.u1_minus, t.u1_plus);
  try {
    solve_profile(t, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotAdmissible);
  }
}

TEST(Profile, Normalization) {
  const Profile& p = default_profile();
  EXPECT_DOUBLE_EQ(eval_profile(p, 0.0).eta, 0.5);
  EXPECT_NEAR(eta_prime_integral(p), 1.0, 1e-8);
  EXPECT_NEAR(p.xi_min(), -p.xi_max(), 1e-9);
}

TEST(Profile, MonotoneAndEndpoints) {
  // rho_s and u1_s are strictly monotone wherever one grid step moves them
  // by more than a few ulps; in the far tails they are flat in double.
  const Profile& p = default_profile();
  const ShockTriple& t = p.triple;
  const double eps = std::numeric_limits<double>::epsilon();
  std::size_t strict = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    ASSERT_GT(p.eta[i], p.eta[i - 1]) << i;
    ASSERT_LE(p.rho_s[i], p.rho_s[i - 1]) << i;
    ASSERT_LE(p.u1_s[i], p.u1_s[i - 1]) << i;
    if ((p.eta[i] - p.eta[i - 1]) * t.delta() > 8.0 * eps * t.rho_minus) {
      ASSERT_LT(p.rho_s[i], p.rho_s[i - 1]) << i;
      ASSERT_LT(p.u1_s[i], p.u1_s[i - 1]) << i;
      ++strict;
    }
  }
  EXPECT_GT(strict, p.size() / 2);
  const double delta = t.delta();
  EXPECT_LE(std::abs(p.rho_s.front() - t.rho_minus), 1e-10 * delta);
  EXPECT_LE(std::abs(p.rho_s.back() - t.rho_plus), 1e-10 * delta);
  EXPECT_LE(std::abs(p.m1_s.front() - t.m1_minus()), 1e-10 * delta);
  EXPECT_LE(std::abs(p.m1_s.back() - t.m1_plus()), 1e-10 * delta);
}

TEST(Profile, FirstIntegralAndSigEta) {
  const Profile& p = default_profile();
  const ShockTriple& t = p.triple;
  const double j = t.rho_minus * (t.u1_minus - t.s);
  double worst = 0.0, sig = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, std::abs(p.m1_s[i] - t.s * p.rho_s[i] - j));
    const double a = (p.rho_s[i] - t.rho_minus) / (t.rho_plus - t.rho_minus);
    const double b = (p.m1_s[i] - t.m1_minus()) / (t.m1_plus() - t.m1_minus());
    sig = std::max(sig, std::abs(a - b));
  }
  EXPECT_LE(worst, 1e-10 * std::abs(j));
  EXPECT_LE(sig, 1e-12);
}

TEST(Profile, SigEtaAtRandomPoints) {
  const Profile& p = default_profile();
  const ShockTriple& t = p.triple;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(p.xi_min() * 1.1, p.xi_max() * 1.1);
  for (int i = 0; i < 1000; ++i) {
    const ProfileSample s = eval_profile(p, x(rng));
    const double a = (s.rho - t.rho_minus) / (t.rho_plus - t.rho_minus);
    const double b = (s.m1 - t.m1_minus()) / (t.m1_plus() - t.m1_minus());
    ASSERT_NEAR(a, b, 1e-10);
    ASSERT_GE(s.eta, 0.0);
    ASSERT_LE(s.eta, 1.0);
  }
}

TEST(Profile, OdeDefectByDifferences) {
  // Fourth-order central differences of the sampled u1 and eta against the
  // first-order ODE.
  const Profile& p = default_profile();
  const ShockTriple& t = p.triple;
  const GasModel& g = p.gas;
  const double j = t.rho_minus * (t.u1_minus - t.s);
  const double K = j * t.u1_minus + std::pow(t.rho_minus, g.gamma);
  auto d4 = [&](const std::vector<double>& f, std::size_t i) {
    const double h = p.xi[i + 1] - p.xi[i];
    return (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
  };
  double worst = 0.0, worst_eta = 0.0;
  for (std::size_t i = 2; i + 2 < p.size(); ++i) {
    const double rhs = (j * p.u1_s[i] + std::pow(p.rho_s[i], g.gamma) - K) / g.mu_tilde();
    worst = std::max(worst, std::abs(d4(p.u1_s, i) - rhs));
    worst_eta = std::max(worst_eta, std::abs(d4(p.eta, i) - p.eta_p[i]));
  }
  EXPECT_LE(worst, 1e-8);
  EXPECT_LE(worst_eta, 1e-8);
}

TEST(Profile, FarFieldEvaluation) {
  const Profile& p = default_profile();
  const ShockTriple& t = p.triple;
  const ProfileSample l = eval_profile(p, -1e6);
  EXPECT_EQ(l.rho, t.rho_minus);
  EXPECT_EQ(l.m1, t.m1_minus());
  EXPECT_EQ(l.u1, t.u1_minus);
  EXPECT_EQ(l.eta, 0.0);
  EXPECT_EQ(l.eta_p, 0.0);
  EXPECT_EQ(l.eta_pp, 0.0);
  const ProfileSample r = eval_profile(p, 1e6);
  EXPECT_EQ(r.rho, t.rho_plus);
  EXPECT_EQ(r.eta, 1.0);
}

TEST(Profile, ShiftCovariance) {
  const GasModel g;
  const ShockTriple t = solve_shock(1.2, 1.0, g);
  ProfileSpec spec;
  spec.center = 1.3;
  const Profile& p0 = default_profile();
  const Profile p1 = solve_profile(t, g, spec);
  EXPECT_DOUBLE_EQ(eval_profile(p1, 1.3).eta, 0.5);
  double worst = 0.0;
  for (double x = -60.0; x <= 60.0; x += 0.37) {
    worst = std::max(worst, std::abs(eval_profile(p1, x + 1.3).rho - eval_profile(p0, x).rho));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(TailRates, SyntheticExponential) {
  const double delta = 0.2, c = 0.8;
  std::vector<double> xi, mag;
  for (int i = -400; i <= 400; ++i) {
    const double x = 0.25 * i;
    xi.push_back(x);
    mag.push_back(delta * delta * std::exp(-c * delta * std::abs(x)));
  }
  const TailRates r = tail_rates(xi, mag);
  EXPECT_NEAR(r.rate_minus, c * delta, 1e-6);
  EXPECT_NEAR(r.rate_plus, c * delta, 1e-6);
  EXPECT_GT(r.r2, 0.999999);
}

TEST(TailRates, TooFewSamples) {
  std::vector<double> xi{-2, -1, 0, 1, 2};
  std::vector<double> mag{0.1, 0.3, 1.0, 0.3, 0.1};
  try {
    tail_rates(xi, mag);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientTail);
  }
}

TEST(TailRates, ProportionalToStrength) {
  const GasModel g = unit_gamma2();
  const TailRates a = tail_rates(solve_profile(solve_shock(1.2, 1.0, g), g));
  const TailRates b = tail_rates(solve_profile(solve_shock(1.4, 1.0, g), g));
  EXPECT_GT(a.rate_minus, 0.0);
  EXPECT_GT(a.rate_plus, 0.0);
  const double rm = b.rate_minus / a.rate_minus, rp = b.rate_plus / a.rate_plus;
  EXPECT_GE(rm, 1.6);
  EXPECT_LE(rm, 2.4);
  EXPECT_GE(rp, 1.6);
  EXPECT_LE(rp, 2.4);

  const GasModel d;
  const TailRates c1 = tail_rates(solve_profile(solve_shock(1.1, 1.0, d), d));
  const TailRates c2 = tail_rates(solve_profile(solve_shock(1.2, 1.0, d), d));
  EXPECT_NEAR(c2.rate_minus / c1.rate_minus, 2.0, 0.4);
  EXPECT_NEAR(c2.rate_plus / c1.rate_plus, 2.0, 0.4);
}

TEST(Profile, SecondDerivativeBoundedByStrength) {
  const GasModel g;
  std::vector<double> cs;
  for (double delta : {0.1, 0.2, 0.4}) {
    const Profile p = solve_profile(solve_shock(1.0 + delta, 1.0, g), g);
    double c = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (std::abs(p.u1_p[i]) < 1e-300) continue;
      c = std::max(c, std::abs(p.u1_pp[i]) / (delta * std::abs(p.u1_p[i])));
    }
    cs.push_back(c);
  }
  const double cmax = *std::max_element(cs.begin(), cs.end());
  const double cmin = *std::min_element(cs.begin(), cs.end());
  EXPECT_LT(cmax / cmin, 2.0);
}

TEST(Profile, CsvExport) {
  const Profile& p = default_profile();
  const auto path = std::filesystem::temp_directory_path() / "shockduct_profile_test.csv";
  write_profile_csv(p, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "xi,rho_s,m1_s,u1_s,eta,eta_p,eta_pp");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, p.size());
  std::filesystem::remove(path);
}
