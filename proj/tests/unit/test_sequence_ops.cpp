#include <random>
#include <sstream>

#include "doctest.h"
#include "mgsched/error.hpp"
#include "mgsched/sequence_ops.hpp"
#include "mgsched/stochastic_models.hpp"
#include "oracles.hpp"

using namespace mgsched;
using doctest::Approx;

namespace {

double sum(const ProbSeq& s) {
  double t = 0.0;
  for (double p : s.probs()) t += p;
  return t;
}

// Distribution of d - c by listing every index pair, zero-truncated.
std::vector<double> brute_sub(const ProbSeq& d, const ProbSeq& c) {
  std::vector<double> e(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < c.size(); ++j) e[i > j ? i - j : 0] += d[i] * c[j];
  }
  return e;
}

}  // namespace

TEST_CASE("ProbSeq validation") {
  CHECK_THROWS_AS(ProbSeq({0.5, 0.4}, 1.0), Error);
  CHECK_THROWS_AS(ProbSeq({1.2, -0.2}, 1.0), Error);
  CHECK_THROWS_AS(ProbSeq({1.0}, 0.0), Error);
  CHECK_NOTHROW(ProbSeq({0.25, 0.75}, 2.5));
}

TEST_CASE("expectation") {
  CHECK(expectation(ProbSeq({1.0}, 2.5)) == 0.0);
  CHECK(expectation(ProbSeq({0.5, 0.5}, 10.0)) == Approx(5.0));
}

TEST_CASE("discretize: sequence length and point mass") {
  const PvModel pv{2.0, 2.0, 120.0};
  const ProbSeq s = discretize(pv, 2.5);
  CHECK(s.max_index() == 48);
  const PvModel night{2.0, 2.0, 0.0};
  const ProbSeq z = discretize(night, 2.5);
  CHECK(z.size() == 1);
  CHECK(z[0] == 1.0);
}

TEST_CASE("discretize: bins match per-bin quadrature") {
  const PvModel m{2.0, 2.0, 10.0};
  const ProbSeq s = discretize(m, 2.5);
  REQUIRE(s.size() == 5);
  const double edges[] = {0.0, 1.25, 3.75, 6.25, 8.75, 10.0};
  for (std::size_t i = 0; i < 5; ++i) {
    const double ref =
        oracle::integrate([&](double p) { return pv_output_pdf(m, p); }, edges[i], edges[i + 1], 1e-13);
    CHECK(s[i] == Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("discretize: wind atoms land in the end bins") {
  const WtModel m{2.0, 9.0};
  const ProbSeq s = discretize(m, 2.5);
  const double first = oracle::integrate([&](double p) { return wt_output_pdf(m, p); }, 0.0, 1.25);
  const double last = oracle::integrate([&](double p) { return wt_output_pdf(m, p); }, 58.75, 60.0);
  CHECK(s[0] == Approx(wt_zero_mass(m) + first).epsilon(1e-8));
  CHECK(s[s.max_index()] == Approx(wt_rated_mass(m) + last).epsilon(1e-8));
  CHECK(sum(s) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("discretize preserves the mean within one step") {
  const double q = 2.5;
  const PvModel pv{2.2, 1.8, 96.0};
  CHECK(std::abs(expectation(discretize(pv, q)) - 96.0 * 2.2 / 4.0) <= q);
  const LoadModel load = LoadModel::from_fluctuation(100.0, 0.1, 195.0);
  CHECK(expectation(discretize(load, q)) == Approx(100.0).epsilon(0.005));
  const WtModel wt{2.0, 8.0};
  const double wt_mean =
      oracle::integrate([&](double p) { return p * wt_output_pdf(wt, p); }, 0.0, 60.0) + 60.0 * wt_rated_mass(wt);
  CHECK(std::abs(expectation(discretize(wt, q)) - wt_mean) <= q);
}

TEST_CASE("discretized truncated load mean agrees with sampling") {
  const LoadModel load = LoadModel::from_fluctuation(100.0, 0.1, 195.0);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(100.0, 10.0);
  double acc = 0.0;
  int kept = 0;
  while (kept < 1000000) {
    const double x = n(rng);
    if (x < 0.0 || x > 195.0) continue;
    acc += x;
    ++kept;
  }
  CHECK(std::abs(expectation(discretize(load, 2.5)) - acc / kept) <= 0.5);
}

TEST_CASE("add_convolve") {
  const ProbSeq half({0.5, 0.5}, 1.0);
  const ProbSeq r = add_convolve(half, half);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == Approx(0.25));
  CHECK(r[1] == Approx(0.5));
  CHECK(r[2] == Approx(0.25));

  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const ProbSeq a = oracle::random_seq(rng, 1 + rng() % 15, 2.5);
    const ProbSeq b = oracle::random_seq(rng, 1 + rng() % 15, 2.5);
    const ProbSeq c = oracle::random_seq(rng, 1 + rng() % 15, 2.5);
    CHECK(add_convolve(ProbSeq::point_mass(2.5), a).probs() == a.probs());
    const ProbSeq ab = add_convolve(a, b);
    const ProbSeq ba = add_convolve(b, a);
    for (std::size_t k = 0; k < ab.size(); ++k) CHECK(ab[k] == Approx(ba[k]).epsilon(1e-12));
    const ProbSeq l = add_convolve(ab, c);
    const ProbSeq r2 = add_convolve(a, add_convolve(b, c));
    for (std::size_t k = 0; k < l.size(); ++k) CHECK(std::abs(l[k] - r2[k]) <= 1e-12);
    CHECK(expectation(ab) == Approx(expectation(a) + expectation(b)).epsilon(1e-12));
  }
}

TEST_CASE("add_convolve rejects mismatched steps") {
  CHECK_THROWS_AS(add_convolve(ProbSeq({1.0}, 2.5), ProbSeq({1.0}, 2.0)), Error);
}

TEST_CASE("sub_convolve") {
  const ProbSeq half({0.5, 0.5}, 1.0);
  const ProbSeq e = sub_convolve(half, half);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == Approx(0.75));
  CHECK(e[1] == Approx(0.25));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const ProbSeq d = oracle::random_seq(rng, 1 + rng() % 20, 2.5);
    const ProbSeq c = oracle::random_seq(rng, 1 + rng() % 20, 2.5);
    CHECK(sub_convolve(d, ProbSeq::point_mass(2.5)).probs() == d.probs());
    const ProbSeq out = sub_convolve(d, c);
    CHECK(out.size() == d.size());
    CHECK(sum(out) == Approx(1.0).epsilon(1e-12));
    const auto ref = brute_sub(d, c);
    for (std::size_t k = 0; k < ref.size(); ++k) CHECK(out[k] == Approx(ref[k]).epsilon(1e-12));
  }
}

TEST_CASE("el_sequence") {
  std::mt19937_64 rng(3);
  const ProbSeq d = oracle::random_seq(rng, 12, 2.5);
  const ProbSeq zero = ProbSeq::point_mass(2.5);
  const ElSequence id = el_sequence(d, zero, zero);
  CHECK(id.seq.probs() == d.probs());
  CHECK(id.expected_el == Approx(expectation(d)));
  CHECK(id.truncated_expectation == Approx(expectation(d)));

  // Load strictly above any renewable outcome: truncation never binds.
  std::vector<double> load(20, 0.0);
  load[15] = 0.3;
  load[18] = 0.7;
  const ProbSeq a({0.2, 0.5, 0.3}, 2.5);
  const ProbSeq b({0.6, 0.4}, 2.5);
  const ElSequence el = el_sequence(ProbSeq(load, 2.5), a, b);
  CHECK(el.truncated_expectation == Approx(el.expected_el).epsilon(1e-12));

  for (int i = 0; i < 30; ++i) {
    const ProbSeq dd = oracle::random_seq(rng, 1 + rng() % 10, 2.5);
    const ProbSeq aa = oracle::random_seq(rng, 1 + rng() % 6, 2.5);
    const ProbSeq bb = oracle::random_seq(rng, 1 + rng() % 6, 2.5);
    double brute = 0.0;
    for (std::size_t x = 0; x < dd.size(); ++x)
      for (std::size_t y = 0; y < aa.size(); ++y)
        for (std::size_t z = 0; z < bb.size(); ++z)
          brute += dd[x] * aa[y] * bb[z] * 2.5 * std::max<double>(0.0, double(x) - double(y) - double(z));
    const ElSequence e = el_sequence(dd, aa, bb);
    CHECK(e.truncated_expectation == Approx(brute).epsilon(1e-12));
    CHECK(e.truncated_expectation >= e.expected_el - 1e-12);
  }
}

TEST_CASE("sequence csv dump") {
  std::ostringstream out;
  write_sequence_csv(out, ProbSeq({0.25, 0.75}, 2.5));
  CHECK(out.str().rfind("index,power_kw,probability\n0,0,0.25\n", 0) == 0);
}
