#include "pstrat/estimands.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace pstrat;

namespace {

PotentialState pots(std::vector<double> p0, std::vector<double> p1, std::vector<double> y0,
                    std::vector<double> y1) {
  PotentialState s;
  auto v = [](const std::vector<double>& x) { return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size()).eval(); };
  s.P = {v(p0), v(p1)};
  s.Y = {v(y0), v(y1)};
  return s;
}

} // namespace

TEST_CASE("boundary points belong to the associative strata") {
  CHECK(classify_gain(0.01, 0.01) == Stratum::Positive);
  CHECK(classify_gain(-0.01, 0.01) == Stratum::Negative);
  CHECK(classify_gain(0.0099, 0.01) == Stratum::Dissociative);
  CHECK(classify_gain(-0.0099, 0.01) == Stratum::Dissociative);
  CHECK(classify_gain(0.0, 0.01) == Stratum::Dissociative);
  CHECK_THROWS_AS(classify_strata(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2), 0.0), std::domain_error);
}

TEST_CASE("effects of one draw") {
  const auto s = pots({0, 0, 0, 0, 0}, {1, 2, -1, 0, 0.005}, {0, 0, 0, 0, 0}, {2, 4, -3, 1, 5});
  const auto e = effects_for_draw(s, 0.01);
  CHECK(e.counts == std::array<int, 3>{1, 2, 2});
  CHECK(*e.eae_plus == doctest::Approx(3.0));
  CHECK(*e.eae_minus == doctest::Approx(-3.0));
  CHECK(*e.ede == doctest::Approx(3.0));
  CHECK(e.ate_p == doctest::Approx(0.401));
  CHECK(e.ate_y == doctest::Approx(1.8));
  const double lhs = *e.eae_plus * e.counts[2] + *e.eae_minus * e.counts[0] + *e.ede * e.counts[1];
  CHECK(std::abs(lhs - e.n() * e.ate_y) < 1e-12);
}

TEST_CASE("empty stratum is undefined, not zero") {
  const auto s = pots({0, 0}, {1, 2}, {0, 0}, {1, 1});
  const auto e = effects_for_draw(s, 0.01);
  CHECK_FALSE(e.eae_minus.has_value());
  CHECK_FALSE(e.ede.has_value());
  CHECK(e.eae_plus.has_value());
}

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{10, 1, 3, 2, 4};
  CHECK(quantile_type7(v, 0.025) == doctest::Approx(1.1));
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(3.0));
  CHECK(quantile_type7(v, 0.975) == doctest::Approx(9.4));
  CHECK(quantile_type7({5.0}, 0.3) == 5.0);
  CHECK(std::isnan(quantile_type7({}, 0.5)));
}

TEST_CASE("posterior summary counts empty draws and breaks ties") {
  PosteriorDraws d;
  // Unit 0: negative once, dissociative once -> dissociative.
  // Unit 1: negative once, positive once -> negative.
  const auto a = pots({0, 0}, {-1, -1}, {0, 0}, {1, 2});
  const auto b = pots({0, 0}, {0, 1}, {0, 0}, {3, 5});
  for (const auto* s : {&a, &b}) {
    d.iteration.push_back(static_cast<int>(d.size()));
    d.effects.push_back(effects_for_draw(*s, 0.01));
    d.strata.push_back(classify_strata(s->P[0], s->P[1], 0.01));
  }
  const auto sum = summarize_posterior(d);
  CHECK(sum.rows[1].name == "EAE-");
  CHECK(sum.rows[1].empty_frac == doctest::Approx(0.5)); // EAE- only in draw a
  CHECK(sum.rows[0].empty_frac == doctest::Approx(0.5)); // EAE+ only in draw b
  CHECK(sum.rows[2].empty_frac == doctest::Approx(0.5));
  CHECK(sum.rows[4].mean == doctest::Approx((1.5 + 4.0) / 2));
  CHECK(sum.modal[0] == Stratum::Dissociative);
  CHECK(sum.modal[1] == Stratum::Negative);
  CHECK(sum.label_freq(1, 2) == doctest::Approx(0.5));
}

TEST_CASE("posterior-mean strata are fixed across draws") {
  PosteriorDraws d;
  const auto a = pots({0, 0}, {0.5, -0.3}, {0, 0}, {1, 2});
  const auto b = pots({0, 0}, {-0.1, -0.5}, {0, 0}, {3, 4});
  for (const auto* s : {&a, &b}) {
    d.iteration.push_back(0);
    d.effects.push_back(effects_for_draw(*s, 0.01));
    d.strata.push_back(classify_strata(s->P[0], s->P[1], 0.01));
    d.p_gain.push_back(s->P[1] - s->P[0]);
    d.y_gain.push_back(s->Y[1] - s->Y[0]);
  }
  const auto sum = summarize_posterior(d, StrataMode::PosteriorMean, 0.01);
  // Mean gains 0.2 and -0.4: unit 0 positive, unit 1 negative in every draw.
  CHECK(sum.modal[0] == Stratum::Positive);
  CHECK(sum.modal[1] == Stratum::Negative);
  CHECK(sum.rows[0].mean == doctest::Approx(2.0));
  CHECK(sum.rows[0].empty_frac == 0.0);
  CHECK(sum.rows[1].mean == doctest::Approx(3.0));
  PosteriorDraws missing = d;
  missing.p_gain.clear();
  CHECK_THROWS(summarize_posterior(missing, StrataMode::PosteriorMean, 0.01));
}

TEST_CASE("summary csv layout") {
  PosteriorDraws d;
  const auto a = pots({0}, {1}, {0}, {2});
  d.iteration.push_back(0);
  d.effects.push_back(effects_for_draw(a, 0.01));
  d.strata.push_back(classify_strata(a.P[0], a.P[1], 0.01));
  std::ostringstream out;
  write_summary_csv(out, summarize_posterior(d));
  const std::string s = out.str();
  CHECK(s.rfind("estimand,mean,median,q2.5,q97.5,empty_frac\r\n", 0) == 0);
  CHECK(s.find("EAE-,NA,NA,NA,NA,1\r\n") != std::string::npos);
  CHECK(s.find("ATE_Y,2,2,2,2,0\r\n") != std::string::npos);
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::nan("")) == "NA");
}
