#include <gtest/gtest.h>

#include "procbox/spacetime.hpp"

using namespace procbox;

namespace {

// Oracle: every subset by bitmask, filtered for bottom closure.
std::vector<PosSet> brute_downsets(const Spacetime& st) {
  std::vector<PosSet> out;
  const auto& e = st.elements();
  for (unsigned m = 0; m < (1u << e.size()); ++m) {
    PosSet s;
    for (std::size_t i = 0; i < e.size(); ++i)
      if (m >> i & 1) s.push_back(e[i]);
    bool ok = true;
    for (Pos b : s)
      for (Pos a : e)
        if (st.leq(a, b) && std::find(s.begin(), s.end(), a) == s.end()) ok = false;
    if (ok) out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Spacetime, TransitiveClosure) {
  Spacetime st({1, 2, 3, 4}, {{1, 2}, {2, 3}, {1, 4}});
  EXPECT_TRUE(st.leq(1, 3));
  EXPECT_TRUE(st.lt(1, 4));
  EXPECT_FALSE(st.leq(4, 3));
  EXPECT_FALSE(st.leq(3, 4));
  EXPECT_FALSE(st.is_chain());
  EXPECT_TRUE(Spacetime::chain(1, 5).is_chain());
}

TEST(Spacetime, RejectsCycles) {
  EXPECT_THROW(Spacetime({1, 2}, {{1, 2}, {2, 1}}), std::invalid_argument);
  EXPECT_THROW(Spacetime({1, 1}, {}), std::invalid_argument);
}

TEST(Spacetime, DistinguishedSlots) {
  EXPECT_THROW(Spacetime({1, 2, 3}, {{1, 2}, {3, 2}}, 2), std::invalid_argument);
  Spacetime st({1, 2, 3}, {{1, 2}, {2, 3}}, 1, 3);
  EXPECT_EQ(*st.past, 1);
  EXPECT_EQ(*st.future, 3);
}

TEST(Spacetime, CoversRoundTrip) {
  Spacetime st({1, 2, 3, 4}, {{1, 2}, {2, 3}, {1, 3}, {1, 4}});
  auto c = st.covers();
  EXPECT_EQ(c.size(), 3u);
  Spacetime st2(st.elements(), c);
  for (Pos a : st.elements())
    for (Pos b : st.elements()) EXPECT_EQ(st.leq(a, b), st2.leq(a, b));
}

TEST(Spacetime, DownsetsMatchBruteForce) {
  for (unsigned long long seed = 1; seed <= 20; ++seed) {
    auto st = random_poset(5, 0.4, seed);
    auto a = bottom_closed_subsets(st);
    auto b = brute_downsets(st);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b) << "seed " << seed;
  }
}

TEST(Spacetime, ChainDownsets) {
  EXPECT_EQ(bottom_closed_subsets(Spacetime::chain(1, 4)).size(), 5u);
  Spacetime anti({1, 2, 3}, {});
  EXPECT_EQ(bottom_closed_subsets(anti).size(), 8u);
}

TEST(Spacetime, MaximalElements) {
  Spacetime st({1, 2, 3, 4}, {{1, 2}, {1, 3}});
  auto m = maximal_elements(st, {1, 2, 3, 4});
  EXPECT_EQ(m, (std::vector<Pos>{2, 3, 4}));
}

TEST(Causality, RemoveMaximalIsValid) {
  for (unsigned long long seed = 1; seed <= 10; ++seed) {
    auto st = random_poset(5, 0.5, seed);
    auto chi = remove_maximal_chi(st);
    EXPECT_TRUE(validate_causality_function(st, chi).pass);
    EXPECT_TRUE(maximal_elements_removed(st, chi));
  }
}

TEST(Causality, IdentityIsRejected) {
  auto st = Spacetime::chain(1, 3);
  CausalityFunction chi;
  for (auto& s : bottom_closed_subsets(st)) chi.table[s] = s;
  auto r = validate_causality_function(st, chi);
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.witness.has_value());
}

TEST(Causality, RandomFunctionsKillMaxima) {
  for (unsigned long long seed = 1; seed <= 40; ++seed) {
    auto st = random_poset(1 + seed % 6, 0.4, seed);
    auto chi = random_causality_function(st, seed * 7 + 1);
    ASSERT_TRUE(validate_causality_function(st, chi).pass) << "seed " << seed;
    EXPECT_TRUE(maximal_elements_removed(st, chi)) << "seed " << seed;
  }
}

TEST(Relabelling, LinearExtensionIsValid) {
  Spacetime st({1, 2, 3, 4}, {{1, 2}, {1, 3}, {3, 4}});
  auto r = linear_extension(st);
  std::vector<Pos> img;
  for (Pos t : st.elements()) img.push_back(r.apply("X.I", t));
  auto st2 = Spacetime::chain(*std::min_element(img.begin(), img.end()), *std::max_element(img.begin(), img.end()));
  EXPECT_TRUE(validate_relabelling(r, st, st2).pass);
}

TEST(Relabelling, OrderReversalFails) {
  auto st = Spacetime::chain(1, 2);
  RelabellingMap r;
  r.common = {{1, 2}, {2, 1}};
  EXPECT_FALSE(validate_relabelling(r, st, st).pass);
}
