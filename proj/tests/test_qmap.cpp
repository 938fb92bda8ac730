#include <gtest/gtest.h>

#include "procbox/qmap.hpp"

using namespace procbox;

namespace {

// a@1 -> b@2 (+ memory), then (memory, x@2) -> c@3.
Channel random_causal(Rng& rng) {
  auto k1 = random_kraus(2 * 2, 2, 2, rng);
  auto k2 = random_kraus(2, 2 * 2, 2, rng);
  Channel c1{{{"b@2", 2}, {"m", 2}}, {{"a@1", 2}}, k1, "k1"};
  Channel c2{{{"c@3", 2}}, {{"m", 2}, {"x@2", 2}}, k2, "k2"};
  return close({c1, c2});
}

Channel random_unitary_channel(Rng& rng) {
  return single_kraus({{"b@2", 2}, {"c@3", 2}}, {{"a@1", 2}, {"x@2", 2}}, random_unitary(4, rng));
}

}  // namespace

TEST(Channel, ChoiTraceAndCptp) {
  Rng rng(3);
  Channel c{{{"o", 3}}, {{"i", 2}}, random_kraus(3, 2, 3, rng), ""};
  Mat j = choi(c);
  EXPECT_NEAR(j.trace().real(), 2.0, 1e-10);
  EXPECT_TRUE(is_cptp(c));
  EXPECT_TRUE(is_trace_nonincreasing(c));
  EXPECT_FALSE(is_cptp(scale_kraus(c, 1.1)));
}

TEST(Channel, MinimalKrausAndPurify) {
  Rng rng(4);
  Channel c{{{"o", 2}}, {{"i", 2}}, random_kraus(2, 2, 6, rng), ""};
  auto m = minimal_kraus(c);
  EXPECT_LE(m.kraus.size(), 4u);
  EXPECT_LT(choi_distance(c, m), 1e-10);
  auto p = purify(c);
  EXPECT_EQ(p.kraus.size(), 1u);
  EXPECT_LT(choi_distance(trace_outputs(p, {"anc"}), c), 1e-10);
}

TEST(Causality, CausalMapPasses) {
  Rng rng(5);
  auto st = Spacetime::chain(1, 3);
  auto chi = remove_maximal_chi(st);
  for (int i = 0; i < 5; ++i) EXPECT_TRUE(check_causality(random_causal(rng), st, chi).pass);
}

TEST(Causality, SameTimeSignallingFails) {
  Rng rng(6);
  auto st = Spacetime::chain(1, 3);
  auto r = check_causality(random_unitary_channel(rng), st, remove_maximal_chi(st));
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_FALSE(r.message.empty());
}

TEST(Causality, SequenceRepresentationRecomposes) {
  Rng rng(7);
  auto st = Spacetime::chain(1, 3);
  auto c = random_causal(rng);
  auto s = sequence_representation(c, st, remove_maximal_chi(st));
  EXPECT_LT(choi_distance(recompose(s), c), 1e-9);
  for (auto& v : s.isometries) EXPECT_TRUE(is_cptp(v));
}

TEST(Causality, FactorizeRejectsNonCausal) {
  Rng rng(8);
  auto c = random_unitary_channel(rng);
  // a@1 and x@2 are groups 0 and 1, b@2 is emitted with group 0.
  EXPECT_THROW(factorize(c, {0, 1}, {0, 1}, 2, "f"), CausalityError);
}

TEST(OneMessage, COneSlicesMatchDirect) {
  Wire w{"A.I", 2, {1, 3, 5}, 1};
  auto direct = build_C_one(w, "B");
  auto net = C_one_slices(w, "B", "c");
  EXPECT_LT(choi_distance(align_to(close(net), direct), direct), 1e-10);
  EXPECT_TRUE(is_trace_nonincreasing(direct));
}

TEST(OneMessage, ExtensionAgreesWithNetworkForm) {
  Rng rng(9);
  Wire in{"A.I", 2, {1, 3}, 1}, out{"A.O", 2, {2, 4}, 1};
  Mat u = random_unitary(2, rng);
  Mat k = Mat::Zero(out.total_dim(), in.one_msg_dim());
  Mat e = one_msg_embedding(out);
  // |l, t_i> -> U|l> at the i-th output slot.
  for (int i = 0; i < 2; ++i)
    for (int l = 0; l < 2; ++l)
      for (int m = 0; m < 2; ++m)
        k.col(in.one_msg_index(in.positions[i], l)) += u(m, l) * e.col(out.one_msg_index(out.positions[i], m));
  auto ext = extend_to_fock({k}, in, out, {}, true);
  auto net = extend_to_fock_net({k}, in, out, {}, true, "x");
  EXPECT_LT(choi_distance(align_to(close(net), ext), ext), 1e-9);
  EXPECT_TRUE(is_trace_nonincreasing(ext));
}

TEST(Isometry, CompleteToIsometry) {
  Rng rng(10);
  Mat q = random_isometry(4, 2, rng);
  Mat vq = random_isometry(3, 2, rng);
  auto c = complete_to_isometry(vq, q);
  EXPECT_LT((c.U.adjoint() * c.U - Mat::Identity(4, 4)).norm(), 1e-9);
  EXPECT_GE(c.junk, 2);
  Mat img = c.U * q;
  for (int r = 0; r < 3; ++r)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(img(r * c.junk, j) - vq(r, j)), 0.0, 1e-9);
}

TEST(Isometry, FromRules) {
  std::vector<Reg> ins{{"a", 2}}, outs{{"b", 2}};
  std::vector<std::pair<std::vector<int>, Vec>> rules{{{0}, basis_vec(outs, {1})}};
  auto c = isometry_from_rules(outs, ins, rules, "~j");
  EXPECT_TRUE(is_cptp(c));
  Mat k = c.kraus[0];
  EXPECT_NEAR(std::abs(k.col(0).norm() - 1.0), 0.0, 1e-12);
}

TEST(Isometry, TraceReplaceVacuum) {
  auto c = trace_replace_vacuum_op({{"s", 3}});
  EXPECT_TRUE(is_cptp(c));
  for (auto& k : c.kraus) EXPECT_NEAR(k.row(0).norm(), 1.0, 1e-12);
}
