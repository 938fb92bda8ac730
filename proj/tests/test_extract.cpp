#include <gtest/gtest.h>

#include <algorithm>

#include "procbox/extract.hpp"
#include "procbox/io.hpp"
#include "procbox/scenarios.hpp"

using namespace procbox;

TEST(Extract, Switch) {
  auto p = coherence_switch();
  auto r = extract_qcqc(p);
  EXPECT_TRUE(r.validity.pass) << r.validity.defect;
  EXPECT_TRUE(r.equivalence.pass) << r.equivalence.max_diff;
  EXPECT_EQ(r.qp.q.N, 2);
  EXPECT_EQ(r.alpha, (std::vector<int>{1, 1, 1}));
  auto& c = r.control;
  EXPECT_TRUE(c.pass) << c.message;
  EXPECT_LT(c.orthogonality, 1e-9);
  EXPECT_LT(c.off_block, 1e-9);
  EXPECT_LT(c.traced_distance, 1e-9);
  ASSERT_GE(c.traced_choi_distance, 0.0);
  EXPECT_LT(c.traced_choi_distance, 1e-9);
  std::vector<std::string> order;
  for (auto& cur : c.cursors) order.push_back(cur.receiver);
  EXPECT_EQ(order, (std::vector<std::string>{"A", "B", "A", "B", "F"}));
  // The report serialises.
  auto j = extract_report_json(r);
  EXPECT_TRUE(j["validity"]["pass"].get<bool>());
}

TEST(Extract, RejectsViolators) {
  EXPECT_ANY_THROW(extract_qcqc(trivvio()));
  EXPECT_ANY_THROW(extract_qcqc(nolo()));
}

TEST(Extract, Nolo) {
  auto p = nolo();
  auto rw = rewrite_weak_violator(p, nolo_reencodings());
  EXPECT_TRUE(is_process_box(rw.certification)) << rw.certification.classification;
  EXPECT_TRUE(rw.equivalence.pass) << rw.equivalence.max_diff;
  auto r = extract_qcqc(rw.p);
  EXPECT_TRUE(r.validity.pass);
  EXPECT_TRUE(r.equivalence.pass);
  auto e = qcqc_behavioural_equivalence(r.qp, p, Correspondence::identity(p));
  EXPECT_TRUE(e.pass) << e.max_diff;
}

TEST(Extract, RewriteNeedsAnIsomorphism) {
  auto enc = nolo_reencodings();
  ASSERT_FALSE(enc.empty());
  // Two old configurations sent to the same new one.
  ASSERT_GE(enc[0].table.size(), 2u);
  enc[0].table[1].second = enc[0].table[0].second;
  EXPECT_ANY_THROW(rewrite_weak_violator(nolo(), enc));
}

TEST(Extract, FinalSimplify) {
  auto c = final_simplify(coherence_switch());
  EXPECT_TRUE(c.equivalence.pass) << c.equivalence.max_diff;
  for (std::string n :
       {"total-order", "nontrivial-input", "time-independent", "shared-stamps", "message-number-preserving"})
    EXPECT_NE(std::find(c.properties.begin(), c.properties.end(), n), c.properties.end()) << n;
  EXPECT_EQ(c.output.st.size(), 7);
  auto& a = c.output.agents[c.output.agent_index("A")];
  EXPECT_EQ(a.in.positions, (std::vector<Pos>{2, 4}));
  EXPECT_EQ(a.out.positions, (std::vector<Pos>{3, 5}));
}
