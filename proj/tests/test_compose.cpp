#include <gtest/gtest.h>

#include "procbox/compose.hpp"

using namespace procbox;

namespace {

double loop_gap(const LoopInstance& inst) {
  auto l = loop_compose(inst.c, inst.match, inst.st, inst.chi);
  auto oracle = loop_by_link_product(inst);
  std::vector<std::string> order;
  for (auto& r : oracle.sys) order.push_back(r.name);
  return (reorder(choi_labeled(l), order).m - oracle.m).norm();
}

}  // namespace

TEST(Loop, MatchesLinkProduct) {
  for (unsigned long long s = 1; s <= 10; ++s) EXPECT_LT(loop_gap(random_loop_instance(s)), 1e-9) << "seed " << s;
}

TEST(Loop, ResultIsCptp) {
  auto inst = random_loop_instance(11);
  EXPECT_TRUE(is_cptp(loop_compose(inst.c, inst.match, inst.st, inst.chi)));
}

TEST(Loop, RejectsNonCausal) {
  Rng rng(2);
  auto st = Spacetime::chain(1, 3);
  auto c = single_kraus({{"y@2", 2}, {"c@3", 2}}, {{"a@1", 2}, {"x@2", 2}}, random_unitary(4, rng));
  EXPECT_THROW(loop_compose(c, {{{"y@2", "x@2"}}}, st, remove_maximal_chi(st)), std::invalid_argument);
}

TEST(Loop, RejectsMismatchedPositions) {
  auto inst = random_loop_instance(3);
  auto c = rename(inst.c, {{"x@2", "x@1"}});
  EXPECT_THROW(loop_compose(c, {{{"y@2", "x@1"}}}, inst.st, inst.chi), std::invalid_argument);
}

TEST(Link, SequentialCompositionOracle) {
  Rng rng(4);
  Channel a{{{"m", 2}}, {{"i", 3}}, random_kraus(2, 3, 2, rng), ""};
  Channel b{{{"o", 2}}, {{"m", 2}}, random_kraus(2, 2, 2, rng), ""};
  auto l = link_product(choi_labeled(a), choi_labeled(b));
  auto direct = choi_labeled(then(a, b));
  std::vector<std::string> order;
  for (auto& r : l.sys) order.push_back(r.name);
  EXPECT_LT((reorder(direct, order).m - l.m).norm(), 1e-10);
}

TEST(Link, ParallelIsTensor) {
  Rng rng(5);
  Channel a{{{"o1", 2}}, {{"i1", 2}}, random_kraus(2, 2, 2, rng), ""};
  Channel b{{{"o2", 2}}, {{"i2", 2}}, random_kraus(2, 2, 1, rng), ""};
  auto l = link_product(choi_labeled(a), choi_labeled(b));
  auto p = choi_labeled(parallel(a, b));
  std::vector<std::string> order;
  for (auto& r : l.sys) order.push_back(r.name);
  EXPECT_LT((reorder(p, order).m - l.m).norm(), 1e-10);
}

TEST(Link, DimensionMismatchThrows) {
  LabeledChoi a{{{"x", 2}}, Mat::Identity(2, 2)}, b{{{"x", 3}}, Mat::Identity(3, 3)};
  EXPECT_THROW(link_product(a, b), std::invalid_argument);
}

TEST(FullLoop, AmbiguousOutputsThrow) {
  Channel a{{{"x", 2}}, {}, {Mat::Identity(2, 1)}, ""};
  EXPECT_THROW(full_loop({a, a}), std::invalid_argument);
}
