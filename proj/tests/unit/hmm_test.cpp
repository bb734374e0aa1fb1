#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gamette/error.hpp"
#include "gamette/hmm.hpp"
#include "oracles.hpp"

using namespace gamette;
using namespace gamette::hmm;

TEST_SUITE("hmm") {
  TEST_CASE("forward likelihood equals the brute-force sum over paths") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 1 + trial % 3;
      const std::size_t T = 1 + rng() % 8;
      const auto m = oracle::random_model(n, rng);
      const std::vector<Sequence> seqs{oracle::sample(m, T, rng)};
      const double expect = oracle::brute_force_log_likelihood(m, seqs[0]);
      const double got = log_likelihood(m, seqs);
      CHECK(std::abs(got - expect) <= 1e-9 * std::abs(expect));
    }
  }

  TEST_CASE("likelihood of several sequences is the sum") {
    std::mt19937_64 rng(2);
    const auto m = oracle::random_model(3, rng);
    std::vector<Sequence> seqs{oracle::sample(m, 5, rng), oracle::sample(m, 7, rng)};
    const double expect =
        oracle::brute_force_log_likelihood(m, seqs[0]) + oracle::brute_force_log_likelihood(m, seqs[1]);
    CHECK(log_likelihood(m, seqs) == doctest::Approx(expect).epsilon(1e-10));
  }

  TEST_CASE("Viterbi finds the brute-force best path") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
      const std::size_t n = 2 + trial % 2;
      const std::size_t T = 1 + rng() % 7;
      const auto m = oracle::random_model(n, rng);
      const auto xs = oracle::sample(m, T, rng);
      const auto best = oracle::brute_force_viterbi(m, xs);
      const auto path = viterbi(m, xs);
      CHECK(path == best.path);
      CHECK(path_log_probability(m, path, xs) == doctest::Approx(best.log_prob).epsilon(1e-10));
      CHECK(oracle::path_log_prob(m, path, xs) == doctest::Approx(best.log_prob).epsilon(1e-10));
    }
  }

  TEST_CASE("EM never decreases the likelihood") {
    std::mt19937_64 rng(4);
    const auto truth = oracle::planted_three_state();
    std::vector<Sequence> seqs;
    for (int i = 0; i < 20; ++i) seqs.push_back(oracle::sample(truth, 35, rng));
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      FitOptions o;
      o.n_states = 3;
      o.restarts = 3;
      o.seed = seed;
      const auto fit = fit_em(seqs, o);
      for (std::size_t i = 1; i < fit.trace.size(); ++i) {
        if (fit.reinitialized && i == fit.trace_reset) continue;
        CHECK(fit.trace[i] >= fit.trace[i - 1] - 1e-8);
      }
      CHECK_NOTHROW(fit.model.validate(1e-9));
      CHECK(fit.log_likelihood == doctest::Approx(log_likelihood(fit.model, seqs)).epsilon(1e-9));
    }
  }

  TEST_CASE("EM recovers a planted chain") {
    std::mt19937_64 rng(5);
    const auto truth = oracle::planted_three_state();
    std::vector<Sequence> seqs;
    for (int i = 0; i < 100; ++i) seqs.push_back(oracle::sample(truth, 35, rng));
    FitOptions o;
    o.n_states = 3;
    o.restarts = 5;
    o.seed = 5;
    const auto fit = fit_em(seqs, o);
    std::vector<std::size_t> order{0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return fit.model.emissions[a].mean < fit.model.emissions[b].mean; });
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(fit.model.emissions[order[i]].mean - truth.emissions[i].mean) < 0.1);
      for (std::size_t j = 0; j < 3; ++j)
        CHECK(std::abs(fit.model.transition(order[i], order[j]) - truth.transition(i, j)) < 0.1);
    }
  }

  TEST_CASE("restarts give the same answer on any thread count") {
    std::mt19937_64 rng(6);
    const auto truth = oracle::planted_three_state();
    std::vector<Sequence> seqs;
    for (int i = 0; i < 15; ++i) seqs.push_back(oracle::sample(truth, 20, rng));
    FitOptions o;
    o.n_states = 3;
    o.restarts = 4;
    o.seed = 9;
    const auto a = fit_em(seqs, o);
    o.jobs = 3;
    const auto b = fit_em(seqs, o);
    CHECK(a.log_likelihood == b.log_likelihood);
    CHECK(a.trace == b.trace);
    CHECK(a.restart == b.restart);
  }

  TEST_CASE("free parameter count") {
    CHECK(free_parameters(1) == 2);
    CHECK(free_parameters(2) == 7);
    CHECK(free_parameters(3) == 14);
  }

  TEST_CASE("BIC sweep uses D = observation count") {
    std::mt19937_64 rng(7);
    const auto truth = oracle::planted_three_state();
    std::vector<Sequence> seqs;
    for (int i = 0; i < 30; ++i) seqs.push_back(oracle::sample(truth, 35, rng));
    const std::vector<std::size_t> ks{2, 3, 4};
    const auto sweep = bic_sweep(seqs, ks, 3, 11);
    REQUIRE(sweep.entries.size() == 3);
    for (const auto& e : sweep.entries) {
      CHECK(e.data_size == 30u * 35u);
      CHECK(e.bic == doctest::Approx(-2.0 * e.log_likelihood + e.free_parameters * std::log(30.0 * 35.0)));
    }
    CHECK(sweep.entries[sweep.selected].n_states == 3);
  }

  TEST_CASE("state labels relative to the no-deviation origin") {
    HmmModel m;
    m.pi = {0.2, 0.2, 0.2, 0.2, 0.2};
    m.transition = numkit::Matrix(5, 5, 0.2);
    m.emissions = {{3.0, 1}, {-0.1, 1}, {-4.0, 1}, {1.0, 1}, {-1.5, 1}};
    const auto l = label_states(m);
    CHECK(l.labels == std::vector<std::string>{"P2", "C", "N2", "P1", "N1"});
    CHECK(l.alphabet == std::vector<std::string>{"N2", "N1", "C", "P1", "P2"});
    CHECK(l.control_state == 1);
    CHECK_FALSE(l.control_tie);
    const auto shifted = label_states(m, 1.2);
    CHECK(shifted.labels[3] == "C");
    m.emissions[0].mean = 0.1;
    CHECK(label_states(m).control_tie);
  }

  TEST_CASE("model file round trip") {
    std::mt19937_64 rng(8);
    const auto m = oracle::random_model(4, rng);
    std::stringstream io;
    write_model(io, m, -0.25);
    const auto stored = read_model(io);
    CHECK(stored.model.pi == m.pi);
    CHECK(stored.model.transition == m.transition);
    for (std::size_t s = 0; s < 4; ++s) {
      CHECK(stored.model.emissions[s].mean == m.emissions[s].mean);
      CHECK(stored.model.emissions[s].stddev == m.emissions[s].stddev);
    }
    CHECK(stored.zero == -0.25);
    CHECK(stored.labeling.labels == label_states(m, -0.25).labels);

    std::string text = io.str();
    const auto at = text.find("labels");
    text = text.substr(0, at) + "labels C C C C\n";
    std::istringstream bad(text);
    CHECK_THROWS_AS(read_model(bad), Error);
  }

  TEST_CASE("input validation") {
    const std::vector<Sequence> none;
    CHECK_THROWS_AS(log_likelihood(oracle::planted_three_state(), none), Error);
    const std::vector<Sequence> tiny{{1.0, 2.0}};
    FitOptions o;
    o.n_states = 2;
    CHECK_THROWS_AS(fit_em(tiny, o), Error);
    const std::vector<Sequence> nan{{1.0, std::nan("")}};
    CHECK_THROWS_AS(log_likelihood(oracle::planted_three_state(), nan), Error);
    auto bad = oracle::planted_three_state();
    bad.pi[0] = 0.9;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}
