#include <gtest/gtest.h>

#include "procbox/io.hpp"
#include "procbox/qcqc.hpp"
#include "procbox/scenarios.hpp"

using namespace procbox;

namespace {

Mat pauli_x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat pauli_z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Target |0>, control |+>, index 2 l + c.
Vec plus_control() {
  Vec v = Vec::Zero(4);
  v(0) = v(1) = 1 / std::sqrt(2.0);
  return v;
}

Mat choi_of(const Mat& u) {
  Vec v(u.size());
  for (int i = 0; i < u.cols(); ++i)
    for (int o = 0; o < u.rows(); ++o) v(i * u.rows() + o) = u(o, i);
  return v * v.adjoint();
}

}  // namespace

TEST(Qcqc, SwitchValidates) {
  auto q = quantum_switch(2);
  auto r = validate_qcqc(q);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.defect, 1e-12);
  EXPECT_TRUE(validate_qcqc(quantum_switch(3)).pass);
}

TEST(Qcqc, ScaledOperatorFailsValidation) {
  auto q = quantum_switch(2);
  q.V[{0, 0, 1}] *= 1.1;
  auto r = validate_qcqc(q);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.defect, 0.1);
}

TEST(Qcqc, LabelsAndTargets) {
  auto q = quantum_switch(2);
  EXPECT_EQ(q.labels(0).size(), 1u);
  EXPECT_EQ(q.labels(1).size(), 2u);
  EXPECT_EQ(q.labels(2).size(), 2u);
  EXPECT_EQ(q.targets({0, -1}).size(), 2u);
  EXPECT_EQ(q.targets({1u, 1}), std::vector<int>{q.N});
}

TEST(Qcqc, CommutatorWitness) {
  Mat i2 = Mat::Identity(2, 2);
  auto qp = switch_protocol(2, {i2, pauli_x()}, {i2, pauli_z()}, {plus_control()});
  Mat anti = compose_qcqc(qp, {0, 1, 1, 0});
  Mat comm = compose_qcqc(qp, {0, 0, 1, 0});
  // F op 0 reads (target, +/- control) as 2 l + s; sum F's minus outcomes.
  auto marg = [](const Mat& rho, int o) {
    double s = 0;
    for (int i = 0; i < rho.rows(); ++i)
      if (i % 4 == o) s += rho(i, i).real();
    return s;
  };
  double minus_anti = marg(anti, 1) + marg(anti, 3), minus_comm = marg(comm, 1) + marg(comm, 3);
  EXPECT_NEAR(minus_anti, 1.0, 1e-12);
  EXPECT_NEAR(minus_comm, 0.0, 1e-12);
}

TEST(Qcqc, MatchesProcessBoxSwitch) {
  Mat i2 = Mat::Identity(2, 2);
  auto qp = switch_protocol(2, {i2, pauli_x()}, {i2, pauli_z()}, {plus_control()});
  SwitchParams sp;
  sp.ua = {i2, pauli_x()};
  sp.ub = {i2, pauli_z()};
  Vec t0 = Vec::Zero(2), c(2);
  t0(0) = 1;
  c << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  sp.past = {{t0, c}};
  auto pb = coherence_switch(sp);
  auto e = qcqc_behavioural_equivalence(qp, pb, Correspondence::identity(pb));
  EXPECT_TRUE(e.pass) << e.max_diff;
}

TEST(Qcqc, LinkProductOfProcessChoi) {
  auto q = quantum_switch(2);
  Mat W = qcqc_process_choi(q);
  EXPECT_NEAR(W.trace().real(), 16.0, 1e-10);
  Rng rng(3);
  Mat ua = random_unitary(2, rng), ub = random_unitary(2, rng);
  Mat J = link_agents(q, W, {choi_of(ua), choi_of(ub)});
  Mat J2 = Mat::Zero(16, 16);
  for (auto& k : qcqc_apply(q, {{ua}, {ub}})) {
    Vec v(16);
    for (int p = 0; p < 4; ++p)
      for (int f = 0; f < 4; ++f) v(p * 4 + f) = k(f, p);
    J2 += v * v.adjoint();
  }
  EXPECT_LT((J - J2).norm(), 1e-10);
}

TEST(Qcqc, SpanningSetIsTomographicallyComplete) {
  auto a = spanning_agent("A", 2, 2);
  // Real span of the (summed) Choi matrices of the settings x outcomes covers all 16 dimensions.
  Mat m(16, (Eigen::Index)a.ops.size() * a.outcome_dim);
  int col = 0;
  for (auto& op : a.ops)
    for (int r = 0; r < a.outcome_dim; ++r) {
      Mat s = Mat::Zero(4, 4);
      for (auto& k : op) {
        Mat kr(2, 2);
        for (int o = 0; o < 2; ++o)
          for (int i = 0; i < 2; ++i) kr(o, i) = k(o * a.outcome_dim + r, i);
        s += choi_of(kr);
      }
      m.col(col++) = Eigen::Map<Vec>(s.data(), 16);
    }
  Eigen::JacobiSVD<Mat> svd(m);
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i) rank += svd.singularValues()(i) > 1e-9;
  EXPECT_EQ(rank, 16);
}

TEST(Qcqc, ToProcessBox) {
  Mat i2 = Mat::Identity(2, 2);
  auto qp = switch_protocol(2, {i2, pauli_x()}, {i2, pauli_z()}, {plus_control()});
  auto t = qcqc_to_pb(qp);
  EXPECT_TRUE(t.equivalence.pass) << t.equivalence.max_diff;
  EXPECT_TRUE(validate(t.p).pass);
  EXPECT_TRUE(is_process_box(certify(t.p)));
  EXPECT_TRUE(t.p.st.is_chain());
  EXPECT_EQ(t.p.st.size(), 2 * 2 + 3);
}

TEST(Qcqc, JsonRoundTrip) {
  auto q = quantum_switch(2);
  auto r = qcqc_from_json(json::parse(qcqc_to_json(q).dump()));
  EXPECT_EQ(r.V.size(), q.V.size());
  for (auto& [k, m] : q.V) EXPECT_LT((r.op(k) - m).norm(), 1e-15);
  Mat i2 = Mat::Identity(2, 2);
  auto qp = switch_protocol(2, {i2, pauli_x()}, {i2, pauli_z()}, {plus_control()});
  auto qp2 = qcqc_protocol_from_json(qcqc_protocol_to_json(qp));
  Correspondence c;
  for (auto& p : qp.parties) {
    c.ops.emplace_back();
    for (int i = 0; i < (int)p.ops.size(); ++i) c.ops.back().push_back(i);
  }
  EXPECT_TRUE(qcqc_equivalence(qp, qp2, c).pass);
}

TEST(Qcqc, JsonShapeErrors) {
  auto j = qcqc_to_json(quantum_switch(2));
  j["internal"][0]["matrix"].erase(0);
  try {
    qcqc_from_json(j);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), "$.internal[0].matrix");
  }
}
