#include <doctest.h>

#include <set>

#include "gertis/explanation.hpp"
#include "support/fixtures.hpp"

using namespace gertis;

TEST_CASE("explanations list only rules whose roles name the hypothesis") {
  auto kb = knowledge_base_from_text(fixtures::filtering_kb(), "f");
  auto wm = forward_chain(kb, EvidenceMap{{{"S", "present"}, 1.0}});
  REQUIRE(wm.frame_state("D").history.size() == 10);
  ExplanationNode node = explain(wm, "H");
  REQUIRE(node.contributions.size() == 2);
  CHECK(node.contributions[0].rule_id == "R8");
  CHECK(node.contributions[1].rule_id == "R3");
  CHECK(node.contributions[0].inferred_degree == doctest::Approx(0.08));

  std::set<std::string> expected;
  for (const auto& t : wm.triggered_b_rules("H")) expected.insert(t.rule_id);
  std::set<std::string> listed;
  for (const auto& c : node.contributions) CHECK(listed.insert(c.rule_id).second);
  CHECK(listed == expected);

  BeliefInterval direct = interval(wm.bpa("D"), kb->hypothesis("H").members);
  CHECK(node.interval == direct);
  REQUIRE(node.parent);
  CHECK(node.parent->hypothesis == "All");
}

TEST_CASE("expansion climbs to the root") {
  auto kb = fixtures::sample_kb();
  auto wm = forward_chain(kb, fixtures::evidence_file("data/E4"));
  for (const auto& h : kb->hypotheses()) {
    ExplanationNode node = explain(wm, h.name);
    int steps = 0;
    while (node.parent) {
      node = expand(wm, node);
      REQUIRE(++steps <= 4);
    }
    CHECK(node.hypothesis == "PA");
    CHECK_THROWS_AS(expand(wm, node), NoParentError);
  }
  CHECK_THROWS_AS(explain(wm, "Nope"), UnknownHypothesisError);
}

TEST_CASE("text rendering") {
  auto kb = fixtures::sample_kb();
  auto wm = forward_chain(kb, fixtures::evidence_file("data/E4"));
  std::string ne = render_text(explain(wm, "Ne"));
  CHECK(ne ==
        "The belief interval of seronegative rheumatoid arthritis is [0.560, 1.000]\n"
        "is based on\n"
        "(1) Rule1 and the observations that\n"
        "    latex agglutination test is negative\n"
        "                                         with degree of belief = 1.000,\n"
        "and\n"
        "(2) the belief interval of rheumatoid arthritis is [0.560, 1.000].\n"
        "\n"
        "Do you want a further explanation of rheumatoid arthritis? (y or n)");

  std::string rh = render_text(explain(wm, "Rh"));
  CHECK(rh.find("    (At least 5 of the following symptoms are present:\n") != std::string::npos);
  CHECK(rh.find("      radiographic changes typical of rheumatoid arthritis is present\n"
                "                                         with degree of belief = 0.700,\n") != std::string::npos);
  CHECK(rh.find("    )\n    infers that the degree of belief in rheumatoid arthritis is 0.560,\nand\n") !=
        std::string::npos);

  std::string root = render_text(explain(wm, "PA"));
  CHECK(root ==
        "The belief interval of unspecified polyarthritis is [1.000, 1.000]\n"
        "is based on no rules whose roles refer to it.\n");

  std::string po = render_text(explain(wm, "Po"));
  CHECK(po ==
        "The belief interval of seropositive rheumatoid arthritis is [0.000, 0.000]\n"
        "is based on\n"
        "(1) the belief interval of rheumatoid arthritis is [0.560, 1.000].\n"
        "\n"
        "Do you want a further explanation of rheumatoid arthritis? (y or n)");
}

TEST_CASE("negated and grouped observations") {
  auto kb = knowledge_base_from_text(
      "frame D \"d\" { elements: x, y; }\n"
      "frame A \"fever\" { elements: present, absent; }\n"
      "frame B \"rash\" { elements: present, absent; }\n"
      "hypothesis X \"x\" in D = x;\n"
      "rule Neg { consequent: D; if: (and (not (A)) (or (A) (B))); then: x : 0.5; t-role: supportive X; }\n",
      "n");
  auto wm = forward_chain(kb, EvidenceMap{{{"A", "present"}, 0.25}, {{"B", "present"}, 1.0}});
  ExplanationNode node = explain(wm, "X");
  REQUIRE(node.contributions.size() == 1);
  const auto& obs = node.contributions[0].observations;
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].text == "fever is not present");
  CHECK(obs[0].degree == doctest::Approx(0.75));
  CHECK(obs[1].kind == Observation::Kind::group);
  CHECK(obs[1].children.size() == 2);
  CHECK(node.contributions[0].inferred_degree == doctest::Approx(0.375));
}

TEST_CASE("number formatting") {
  CHECK(format_degree(0.5604) == "0.560");
  CHECK(format_degree(1.0) == "1.000");
  CHECK(format_interval({0.423, 1.0}) == "[0.423, 1.000]");
}
