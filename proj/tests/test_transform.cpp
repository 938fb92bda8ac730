#include <gtest/gtest.h>

#include <algorithm>

#include "procbox/scenarios.hpp"
#include "procbox/transform.hpp"

using namespace procbox;

namespace {

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

void expect_all_properties(const TransformCertificate& c) {
  EXPECT_TRUE(c.equivalence.pass) << c.equivalence.max_diff;
  for (auto& n : property_names()) EXPECT_TRUE(has(c.properties, n)) << n;
  EXPECT_TRUE(validate(c.output).pass);
  EXPECT_TRUE(is_process_box(certify(c.output)));
}

}  // namespace

TEST(Properties, Predicates) {
  Protocol v;
  v.st = Spacetime({1, 2, 3}, {{1, 2}, {1, 3}});
  EXPECT_FALSE(prop_total_order(v).pass);
  EXPECT_FALSE(prop_nontrivial_input(trivial_input_protocol()).pass);
  EXPECT_TRUE(prop_nontrivial_input(coherence_switch()).pass);
  EXPECT_FALSE(prop_time_independent(time_dependent_protocol(5)).pass);
  EXPECT_TRUE(prop_total_order(coherence_switch()).pass);
}

TEST(Relabel, DynamicalParBecomesSequential) {
  auto p = dynamicalpar();
  auto c = relabel(p, dynamicalpar_sequential());
  EXPECT_TRUE(c.equivalence.pass);
  EXPECT_TRUE(c.output.st.is_chain());
  EXPECT_TRUE(prop_total_order(c.output).pass);
}

TEST(Relabel, RandomPairsAndInverse) {
  int inverted = 0;
  for (unsigned long long s = 1; s <= 4; ++s) {
    auto rr = random_relabel_pair(s);
    ASSERT_TRUE(validate_relabelling(rr.relabel.maps, rr.p.st, rr.relabel.st2).pass) << "seed " << s;
    auto c = relabel(rr.p, rr.relabel);
    EXPECT_TRUE(c.equivalence.pass) << "seed " << s;
    auto inv = inverse_relabelling(rr.p, rr.relabel);
    // An input and an output sharing a slot get distinct images, so the way back is not order preserving.
    if (!validate_relabelling(inv.maps, rr.relabel.st2, rr.p.st).pass) {
      EXPECT_THROW(relabelled(c.output, inv), TransformError);
      continue;
    }
    ++inverted;
    auto back = relabelled(c.output, inv);
    EXPECT_TRUE(behavioural_equivalence(rr.p, back, Correspondence::identity(rr.p)).pass) << "seed " << s;
    for (auto& a : rr.p.agents) EXPECT_EQ(back.agents[back.agent_index(a.name)].in.positions, a.in.positions);
  }
  EXPECT_GT(inverted, 0);
}

TEST(Stages, TrivialInputElimination) {
  auto p = trivial_input_protocol();
  bool applied = false;
  auto q = eliminate_trivial_inputs(p, &applied);
  EXPECT_TRUE(applied);
  EXPECT_TRUE(prop_nontrivial_input(q).pass);
  EXPECT_TRUE(behavioural_equivalence(p, q, Correspondence::identity(p)).pass);
  bool again = true;
  eliminate_trivial_inputs(q, &again);
  EXPECT_FALSE(again);
}

TEST(Stages, AloConversionOfLoOnly) {
  auto p = lo_only_protocol(3);
  auto c = to_alo(p);
  EXPECT_TRUE(c.equivalence.pass);
  auto o = certified_order(c.output);
  for (auto& a : c.output.agents) {
    auto it = o.find(a.name);
    if (it == o.end()) continue;
    for (auto& op : a.ops) EXPECT_TRUE(check_ALO(a, op, it->second).pass);
  }
}

TEST(Stages, TimeIndependence) {
  auto p = time_dependent_protocol(5);
  auto c = make_time_independent(p);
  EXPECT_TRUE(c.equivalence.pass) << c.equivalence.max_diff;
  EXPECT_TRUE(prop_time_independent(c.output).pass);
}

TEST(Stages, EvenOddRelabelling) {
  auto p = coherence_switch();
  auto r = even_odd_relabelling(p);
  auto q = relabelled(p, r);
  EXPECT_TRUE(prop_disjoint_even_odd(q).pass);
  EXPECT_TRUE(behavioural_equivalence(p, q, Correspondence::identity(p)).pass);
}

TEST(Simplify, SmallFixtures) {
  for (auto p : {trivial_input_protocol(), lo_only_protocol(3), time_dependent_protocol(5)}) {
    SCOPED_TRACE(p.name);
    expect_all_properties(simplify(p));
  }
}

TEST(Simplify, RejectsViolators) { EXPECT_ANY_THROW(simplify(trivvio())); }
