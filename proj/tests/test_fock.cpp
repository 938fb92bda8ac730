#include <gtest/gtest.h>

#include "procbox/fock.hpp"

using namespace procbox;

namespace {

std::int64_t binom(std::int64_t n, std::int64_t k) {
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

bool is_isometry(const Mat& v, double tol = 1e-12) {
  return (v.adjoint() * v - Mat::Identity(v.cols(), v.cols())).norm() < tol;
}

std::vector<WireSpec> two_wires() {
  return {{"a", 2, {1, 2}, Role::AgentIn}, {"b", 1, {1, 2, 3}, Role::AgentOut}};
}

}  // namespace

TEST(Fock, DimensionFormula) {
  for (int k = 1; k <= 6; ++k)
    for (int n = 0; n <= 3; ++n) EXPECT_EQ(fock_dimension(k, n), binom(k + n, n));
}

TEST(Fock, EnumerationSize) {
  for (int n = 0; n <= 3; ++n) {
    auto b = enumerate_basis(two_wires(), n);
    EXPECT_EQ(b.size(), fock_dimension(2 * 2 + 1 * 3, n));
    for (int i = 0; i < b.size(); ++i) EXPECT_EQ(b.index_of(b.labels[i]), i);
  }
}

TEST(Fock, TrivialWireOnlyVacuum) {
  auto b = enumerate_basis({{"z", 0, {1, 2}, Role::Ancilla}}, 2);
  EXPECT_EQ(b.size(), 1);
}

TEST(Fock, OneMessageProjector) {
  auto b = enumerate_basis(two_wires(), 2);
  auto p = one_message_projector(b, "a", {1});
  EXPECT_LT((p.matrix * p.matrix - p.matrix).norm(), 1e-12);
  // Wire b is untouched: vacuum or one message on its 3 slots.
  EXPECT_NEAR(p.matrix.trace().real(), 2.0 * 4, 1e-12);
  auto q = one_message_projector(b, "a", {1, 2});
  EXPECT_NEAR(q.matrix.trace().real(), 4.0 * 4, 1e-12);
  EXPECT_LT((p.matrix * q.matrix - p.matrix).norm(), 1e-12);
}

TEST(Fock, MergeSplitRoundTrip) {
  std::vector<WireSpec> w{{"a", 2, {1, 2}, Role::AgentIn}, {"b", 1, {1, 2}, Role::AgentIn}};
  auto b = enumerate_basis(w, 2);
  auto m = wire_merge(b, "a", "b", "c");
  Mat M = m.matrix();
  EXPECT_TRUE(is_isometry(M));
  EXPECT_EQ(m.target.size(), b.size());
  auto s = wire_split(m.target, "c", "a", 2, "b");
  Mat S = s.matrix();
  EXPECT_LT((S * M - Mat::Identity(b.size(), b.size())).norm(), 1e-12);
}

TEST(Fock, EmbedRegionIsIsometry) {
  auto small = enumerate_basis({{"a", 2, {1}, Role::AgentIn}}, 2);
  auto big = enumerate_basis({{"a", 2, {1, 2}, Role::AgentIn}}, 2);
  auto e = embed_region(small, big);
  EXPECT_TRUE(is_isometry(e.matrix()));
}

TEST(Fock, CountIsometry) {
  auto b = enumerate_basis(two_wires(), 2);
  auto c = message_count_isometry(b, "a", {1});
  EXPECT_TRUE(is_isometry(c.V));
  EXPECT_EQ(c.V.rows(), (Eigen::Index)b.size() * c.counter_dim);
}

TEST(Slots, SlotDimIsFockDimension) {
  for (int d = 1; d <= 3; ++d)
    for (int n = 1; n <= 3; ++n) EXPECT_EQ(slot_dim(d, n), fock_dimension(d, n));
}

TEST(Slots, FockToSlotsIsIsometry) {
  auto b = enumerate_basis(two_wires(), 2);
  Mat v = fock_to_slots(b);
  EXPECT_TRUE(is_isometry(v));
}

TEST(Slots, OneMessageEmbedding) {
  Wire w{"A.I", 3, {2, 4, 6}, 2};
  Mat e = one_msg_embedding(w);
  EXPECT_EQ(e.cols(), 9);
  EXPECT_TRUE(is_isometry(e));
  Mat p = one_msg_projector_matrix(w, {2, 4, 6});
  EXPECT_LT((p - e * e.adjoint()).norm(), 1e-12);
  EXPECT_EQ(w.one_msg_index(4, 2), 5);
}

TEST(Slots, Occupation) {
  Wire w{"A.I", 2, {1, 2}, 1};
  EXPECT_EQ(occupation(w, vacuum_index(w)), (std::vector<int>{0, 0}));
  Pos t;
  EXPECT_TRUE(slot_time(w.slot(2), t));
  EXPECT_EQ(t, 2);
  EXPECT_EQ(slot_wire(w.slot(2)), "A.I");
}
