#include <doctest.h>

#include <random>

#include "gamette/error.hpp"
#include "gamette/seqtype.hpp"

using namespace gamette;
using namespace gamette::seqtype;

namespace {

ModeSequence seq(const std::string& id, const std::string& letters) {
  ModeSequence s{id, {}};
  for (char c : letters) s.labels.push_back(c == 'C' ? "C" : c == 'P' ? "P1" : "N1");
  return s;
}

}  // namespace

TEST_SUITE("seqtype") {
  TEST_CASE("LCP distances match a hand-computed table") {
    const std::vector<ModeSequence> s{seq("a", "CCCC"), seq("b", "CCCP"), seq("c", "CCPP"),
                                      seq("d", "PCCC"), seq("e", "CCCC"), seq("f", "CPCC")};
    const double expect[6][6] = {{0, 1, 2, 4, 0, 3}, {1, 0, 2, 4, 1, 3}, {2, 2, 0, 4, 2, 3},
                                 {4, 4, 4, 0, 4, 4}, {0, 1, 2, 4, 0, 3}, {3, 3, 3, 4, 3, 0}};
    for (unsigned jobs : {1u, 4u}) {
      const auto d = lcp_distances(s, jobs);
      for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = i + 1; j < 6; ++j) CHECK(d(i, j) == expect[i][j]);
    }
    CHECK(lcp_similarity(s[0].labels, s[1].labels) == 3);
    const std::vector<ModeSequence> ragged{seq("a", "CC"), seq("b", "CCC")};
    CHECK_THROWS_AS(lcp_distances(ragged), Error);
  }

  TEST_CASE("mode frequencies") {
    const std::vector<ModeSequence> s{seq("a", "CCPN"), seq("b", "PPPP")};
    const std::vector<std::string> alphabet{"N1", "C", "P1"};
    const auto f = mode_frequencies(s, alphabet);
    CHECK(f(0, 0) == 0.25);
    CHECK(f(0, 1) == 0.5);
    CHECK(f(1, 2) == 1.0);
  }

  TEST_CASE("phases follow the weekly modal state and split at the announcement") {
    // Three players, eight weeks from 21.
    const std::vector<std::vector<int>> labels{{0, 0, 0, 0, 1, 1, 2, 0},
                                               {0, 0, 0, 0, 1, 2, 2, 0},
                                               {0, 1, 0, 0, 2, 1, 2, 0}};
    const auto p = derive_phases(labels, 21, 23);
    CHECK(p.dominant_per_week == std::vector<int>{0, 0, 0, 0, 1, 1, 2, 0});
    CHECK(p.announcement_split);
    REQUIRE(p.phases.size() == 5);
    CHECK(p.phases[0].start_week == 21);
    CHECK(p.phases[0].end_week == 22);
    CHECK(p.phases[1].start_week == 23);
    CHECK(p.phases[1].end_week == 24);
    CHECK(p.phases[2].dominant_state == 1);
    CHECK(p.phases[2].end_week == 26);
    CHECK(p.phases[4].start_week == 28);
    CHECK(p.phase_at(26)->id == 3);
    CHECK(p.phase_at(40) == nullptr);

    // Modal ties go to the lower label; no split when the state changes anyway.
    const auto q = derive_phases({{0, 1}, {1, 0}}, 21, 22);
    CHECK(q.dominant_per_week == std::vector<int>{0, 0});
    const auto r = derive_phases({{0, 1}}, 21, 22);
    CHECK_FALSE(r.announcement_split);
    CHECK(r.phases.size() == 2);
  }

  TEST_CASE("cluster naming") {
    // Cluster 0 never controls, 1 controls only early, 2 always controls.
    const std::vector<ModeSequence> s{seq("a", "PPPPPP"), seq("b", "PPPPPN"), seq("c", "CCCPPN"),
                                      seq("d", "CCCNNP"), seq("e", "CCCCCC"), seq("f", "CCCCCP")};
    const std::vector<int> labels{0, 0, 1, 1, 2, 2};
    const auto names = name_clusters(s, labels, 3, 21, 24);
    CHECK(names == std::vector<PlayerType>{PlayerType::Hoarder, PlayerType::Reactor, PlayerType::Follower});
    const std::vector<int> bad{0, 0, 1, 1, 2, 3};
    CHECK_THROWS_AS(name_clusters(s, bad, 3, 21, 24), Error);
  }

  TEST_CASE("matched accuracy uses the best one-to-one assignment") {
    const std::vector<int> c{2, 2, 0, 0, 1, 1};
    const std::vector<int> t{0, 0, 1, 1, 2, 2};
    CHECK(matched_accuracy(c, t) == 1.0);
    const std::vector<int> merged{0, 0, 0, 0, 1, 1};
    CHECK(matched_accuracy(merged, t) == doctest::Approx(4.0 / 6.0));
    const std::vector<int> one{0, 0, 0, 0, 0, 0};
    CHECK(matched_accuracy(one, t) == doctest::Approx(2.0 / 6.0));
    const std::vector<int> shorter{0};
    CHECK_THROWS_AS(matched_accuracy(shorter, t), Error);
  }

  TEST_CASE("average-linkage player clustering separates distinct prefixes") {
    const std::vector<ModeSequence> s{seq("a", "PPPPPP"), seq("b", "PPPPPN"), seq("c", "NCCCCC"),
                                      seq("d", "NCCCCP"), seq("e", "CCCCCC"), seq("f", "CCCCCP")};
    const std::vector<std::string> alphabet{"N1", "C", "P1"};
    const std::vector<std::size_t> ks{2, 3, 4, 10};
    const auto c = cluster_players(s, alphabet, ks, 3);
    CHECK(c.labels == std::vector<int>{0, 0, 1, 1, 2, 2});
    CHECK(c.quality.ks == std::vector<std::size_t>{2, 3, 4});
    const std::vector<ModeSequence> same{seq("a", "CC"), seq("b", "CC"), seq("c", "CC")};
    const auto flat = cluster_players(same, alphabet, ks, 2);
    CHECK(flat.all_identical);
    CHECK_FALSE(flat.tree.has_value());
  }

  TEST_CASE("interaction tables count presence per phase") {
    const std::vector<ModeSequence> s{seq("a", "PPCC"), seq("b", "PPPC"), seq("c", "CCCC"), seq("d", "NCCC")};
    PhaseSegmentation phases;
    phases.first_week = 21;
    phases.phases = {{1, 21, 22, 0}, {2, 23, 24, 1}, {3, 30, 31, 0}};
    const std::vector<PlayerType> types{PlayerType::Hoarder, PlayerType::Hoarder, PlayerType::Follower,
                                        PlayerType::Reactor};
    const std::vector<Condition> conds{Condition::NoInfo, Condition::Info, Condition::Info, Condition::NoInfo};
    const std::vector<std::string> alphabet{"N1", "C", "P1"};
    const auto r = interaction_report(s, phases, types, conds, alphabet);
    CHECK(r.skipped_phases == std::vector<int>{3});
    REQUIRE(r.phases.size() == 2);
    const auto& first = r.phases[0].by_type.counts;
    // Rows: Hoarder, Reactor, Follower.
    CHECK(first(0, 2) == 2.0);
    CHECK(first(0, 1) == 0.0);
    CHECK(first(1, 0) == 1.0);
    CHECK(first(1, 1) == 1.0);
    CHECK(first(2, 1) == 1.0);
    const auto& split = r.phases[0].by_type_condition;
    CHECK(split.row_names[0] == "Hoarder/NoInfo");
    CHECK(split.row_names[1] == "Hoarder/Info");
    CHECK(split.counts(0, 2) == 1.0);
    CHECK(split.counts(1, 2) == 1.0);
    CHECK(split.counts(5, 1) == 1.0);
    CHECK(r.phases[0].by_type.test.has_value());

    const std::vector<std::string> small{"C"};
    CHECK_THROWS_AS(interaction_report(s, phases, types, conds, small), Error);
  }
}
