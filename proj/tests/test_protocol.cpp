#include <gtest/gtest.h>

#include "procbox/io.hpp"
#include "procbox/qmap.hpp"
#include "procbox/scenarios.hpp"

using namespace procbox;

namespace {

// trivvio, but B's message reaches A at the slot where B sends it.
Protocol same_time_relay() {
  Protocol p;
  p.name = "sametime";
  p.st = Spacetime::chain(1, 5);
  p.st.result = 5;
  Agent a = make_agent("A", 2, {3}, 2, {1}, 1);
  Agent b = make_agent("B", 2, {2}, 2, {3}, 1);
  a.ops.push_back(make_op("0", {state_channel({{"A.O@1", 3}}, {basis_vec({{"A.O@1", 3}}, {1})}),
                                discard({{"A.I@3", 3}}), result_state(a, 0)}));
  b.ops.push_back(make_op("0", {identity_channel({{"B.O@3", 3}}, {{"B.I@2", 3}}), result_state(b, 0)}));
  p.agents = {a, b};
  p.process = {identity_channel({{"B.I@2", 3}}, {{"A.O@1", 3}}), identity_channel({{"A.I@3", 3}}, {{"B.O@3", 3}})};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

}  // namespace

TEST(Protocol, TrivvioValidatesAndWins) {
  auto p = trivvio();
  EXPECT_TRUE(validate(p).pass);
  EXPECT_NEAR(gyni_value(p, "A", "B"), 1.0, 1e-12);
}

TEST(Protocol, SameTimeRelayIsNotCausal) {
  auto r = validate(same_time_relay());
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.message.find("3"), std::string::npos) << r.message;
}

TEST(Protocol, OneWayBoundBruteForce) {
  auto b = one_way_gyni_bound();
  EXPECT_EQ(b.strategies, 256);
  EXPECT_DOUBLE_EQ(b.max_value, 0.5);
  // Independent check on a handful of strategies: none beats one half.
  for (int s : {0, 17, 99, 255}) EXPECT_LE(gyni_value(one_way_protocol(s), "A", "B"), 0.5 + 1e-12);
}

TEST(Protocol, SigprojDistanceMatchesOracle) {
  auto s = sigproj();
  EXPECT_NEAR(s.distance, s.oracle_distance, 1e-12);
  EXPECT_NEAR(s.distance, kSigprojDistance, 1e-12);
  EXPECT_LT(s.oracle_residual, 1e-12);
}

TEST(Protocol, DistributionsNormalised) {
  for (auto p : {trivvio(), nolo(), norestriction(false)}) {
    auto d = outcome_distribution(p);
    for (auto& row : d.probs) {
      double t = 0;
      for (double x : row) t += x;
      EXPECT_NEAR(t, 1.0, 1e-10) << p.name;
    }
  }
}

TEST(Protocol, SwitchValidatesAndComposes) {
  auto p = coherence_switch();
  EXPECT_TRUE(validate(p).pass);
  auto cs = all_choices(p);
  ASSERT_FALSE(cs.empty());
  Mat rho = compose_protocol(p, cs.front());
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
  EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
}

TEST(Equivalence, SelfIsZero) {
  auto p = trivvio();
  auto e = behavioural_equivalence(p, p, Correspondence::identity(p));
  EXPECT_TRUE(e.pass);
  EXPECT_EQ(e.checked, 4);
}

TEST(Equivalence, SwappedSettingsDetected) {
  auto p = trivvio();
  auto c = Correspondence::identity(p);
  c.ops[0] = {1, 0};
  auto e = behavioural_equivalence(p, p, c);
  EXPECT_FALSE(e.pass);
  ASSERT_TRUE(e.witness.has_value());
}

TEST(Json, ProtocolRoundTrip) {
  for (auto p : {trivvio(), nolo()}) {
    auto q = protocol_from_json(json::parse(protocol_to_json(p).dump()));
    EXPECT_EQ(q.name, p.name);
    EXPECT_EQ(q.agents.size(), p.agents.size());
    EXPECT_TRUE(behavioural_equivalence(p, q, Correspondence::identity(p)).pass) << p.name;
    EXPECT_EQ(protocol_to_json(q).dump(), protocol_to_json(p).dump());
  }
}

TEST(Json, OneMessageKrausForm) {
  auto p = trivvio();
  auto j = protocol_to_json(p);
  // Replace B's ops by "send x, guess the level" written on the one-message space.
  json ops = json::array();
  for (int x = 0; x < 2; ++x) {
    std::vector<Mat> ks;
    for (int l = 0; l < 2; ++l) {
      Mat k = Mat::Zero(3 * 2, 2);
      k((x + 1) * 2 + l, l) = 1.0;
      ks.push_back(k);
    }
    json kj = json::array();
    for (auto& k : ks) kj.push_back(mat_to_json(k));
    ops.push_back({{"setting", "x=" + std::to_string(x)}, {"kraus", kj}});
  }
  j["agents"][1]["ops"] = ops;
  auto q = protocol_from_json(j);
  EXPECT_NEAR(gyni_value(q, "A", "B"), 1.0, 1e-12);
}

TEST(Json, ErrorsCarryPath) {
  auto j = protocol_to_json(trivvio());
  j["agents"][1]["Ti"] = json::array({"two"});
  try {
    protocol_from_json(j);
    FAIL() << "no error";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "$.agents[1].Ti[0]");
  }
  auto k = protocol_to_json(trivvio());
  k["process"][0]["kraus"][0].erase(0);
  try {
    protocol_from_json(k);
    FAIL() << "no error";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "$.process[0].kraus[0]");
  }
  json s{{"elements", {1, 2}}, {"order", {{1, 2}, {2, 1}}}};
  EXPECT_THROW(spacetime_from_json(s), IoError);
}

TEST(Json, SpacetimeRoundTrip) {
  Spacetime st({1, 2, 3, 4}, {{1, 2}, {1, 3}, {2, 4}, {3, 4}}, 1, 4);
  auto r = spacetime_from_json(spacetime_to_json(st));
  for (Pos a : st.elements())
    for (Pos b : st.elements()) EXPECT_EQ(st.leq(a, b), r.leq(a, b));
  EXPECT_EQ(*r.past, 1);
  EXPECT_EQ(*r.future, 4);
  EXPECT_FALSE(r.result.has_value());
}
