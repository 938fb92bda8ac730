#include <gtest/gtest.h>

#include "procbox/certify.hpp"
#include "procbox/scenarios.hpp"

using namespace procbox;

TEST(Certify, TrivvioIsStrongLO) {
  auto r = certify(trivvio());
  EXPECT_TRUE(r.ao.pass);
  EXPECT_LE(r.ao.trace_deficit, 1e-9);
  EXPECT_FALSE(r.lo.pass);
  EXPECT_EQ(r.classification, "strong-LO");
  EXPECT_THROW(certified_order(trivvio()), CertificationError);
}

TEST(Certify, SwitchIsProcessBox) {
  auto p = coherence_switch();
  auto r = certify(p);
  EXPECT_TRUE(is_process_box(r)) << r.classification;
  auto o = certified_order(p);
  EXPECT_EQ(o.at("A").at(2), 3);
  EXPECT_EQ(o.at("A").at(4), 5);
}

TEST(Certify, LuganoUnrestrictedIsStrongAO) {
  auto r = certify(lugano(false));
  EXPECT_FALSE(r.ao.pass);
  EXPECT_GT(r.ao.trace_deficit, 1e-9);
  EXPECT_EQ(r.ao.agent, "C");
  EXPECT_EQ(r.classification, "strong-AO");
  bool multi = false;
  for (auto& s : r.stats)
    if (s.agent == "C") multi = s.p_in_multi > 1e-9;
  EXPECT_TRUE(multi);
}

TEST(Certify, LuganoRestrictedIsProcessBox) { EXPECT_TRUE(is_process_box(certify(lugano(true)))); }

TEST(Certify, NoloIsWeakOnBothCounts) {
  auto r = certify(nolo());
  EXPECT_FALSE(r.ao.pass);
  EXPECT_FALSE(r.lo.pass);
  EXPECT_EQ(r.classification, "weak-both");
}

TEST(Certify, AddingAnOpBreaksAO) {
  EXPECT_TRUE(is_process_box(certify(norestriction(false))));
  EXPECT_FALSE(certify(norestriction(true)).ao.pass);
}

TEST(Certify, AloImpliesLo) {
  for (unsigned long long s = 1; s <= 6; ++s) {
    auto ra = random_alo_protocol(s);
    EXPECT_TRUE(validate(ra.p).pass) << "seed " << s;
    for (auto& a : ra.p.agents) {
      auto it = ra.order.find(a.name);
      if (it == ra.order.end()) continue;
      for (auto& op : a.ops) EXPECT_TRUE(check_ALO(a, op, it->second).pass) << "seed " << s;
    }
    EXPECT_TRUE(check_LO(ra.p, ra.order).pass) << "seed " << s;
  }
}

TEST(Certify, LoDoesNotImplyAlo) {
  auto p = lo_only_protocol(3);
  OrderFunction o{{"A", {{2, 3}, {4, 5}}}};
  EXPECT_TRUE(check_LO(p, o).pass);
  int a = p.agent_index("A");
  bool any_fail = false;
  for (auto& op : p.agents[a].ops) any_fail = any_fail || !check_ALO(p.agents[a], op, o.at("A")).pass;
  EXPECT_TRUE(any_fail);
}

TEST(Certify, PEffNetworkMatchesDirectSum) {
  auto p = coherence_switch();
  auto o = certified_order(p);
  for (auto& a : p.agents) {
    if (a.trivial_in() || a.trivial_out()) continue;
    for (auto& op : a.ops) EXPECT_LT(choi_distance(p_eff(a, op, o.at(a.name)), p_eff_direct(a, op, o.at(a.name))), 1e-10);
  }
}

TEST(Certify, OrderMapValidity) {
  Agent a = make_agent("A", 2, {2, 4}, 2, {3, 5});
  auto st = Spacetime::chain(1, 6);
  EXPECT_TRUE(valid_order_map(a, {{2, 3}, {4, 5}}, st));
  EXPECT_FALSE(valid_order_map(a, {{2, 3}, {4, 3}}, st));
  EXPECT_FALSE(valid_order_map(a, {{2, 5}, {4, 3}}, st));
  // 2 -> 5 leaves no later slot for 4.
  EXPECT_EQ(order_candidates(a, st).size(), 1u);
}

TEST(Certify, ClassificationTable) {
  AOReport ao;
  LOReport lo;
  std::vector<MessageStats> clean{{"A", 0, 0, 0, 0, 0}};
  EXPECT_EQ(classify_violation(ao, lo, clean), "process-box");
  ao.pass = false;
  EXPECT_EQ(classify_violation(ao, lo, clean), "weak-AO");
  lo.pass = false;
  EXPECT_EQ(classify_violation(ao, lo, clean), "weak-both");
  std::vector<MessageStats> multi{{"A", 0, 0.1, 0, 0, 0}};
  EXPECT_EQ(classify_violation(ao, lo, multi), "strong-AO");
}
