#pragma once

#include <string>
#include <utility>
#include <vector>

#include "procbox/qmap.hpp"

namespace procbox {

// (output register, input register) pairs to be fed back into each other.
struct WireMatch {
  std::vector<std::pair<std::string, std::string>> pairs;
};

Channel parallel(const Channel& a, const Channel& b);
// Feed the matched outputs back into the inputs. The map must be causal for chi on st.
Channel loop_compose(const Channel& c, const WireMatch& m, const Spacetime& st, const CausalityFunction& chi,
                     double tol = 1e-9);
// Tensor all maps and loop every register name that occurs as both output and input.
Channel full_loop(const std::vector<Channel>& maps);

// Choi matrix with named subsystems (row/col order = sys order).
struct LabeledChoi {
  std::vector<Reg> sys;
  Mat m;
};
LabeledChoi choi_labeled(const Channel& c);
LabeledChoi reorder(const LabeledChoi& j, const std::vector<std::string>& order);
// Link product contracting all subsystems with equal names.
LabeledChoi link_product(const LabeledChoi& a, const LabeledChoi& b);

// Causal channel on the chain 1..3 with one fed-back wire (y@2 -> x@2): a@1 -> (y@2, memory),
// then (memory, x@2) -> c@3. dim a <= 3 and the rest <= 2, so in and out dims stay <= 8.
struct LoopInstance {
  Channel c;
  WireMatch match;
  Spacetime st;
  CausalityFunction chi;
};
LoopInstance random_loop_instance(unsigned long long seed);
// Choi of the loop built independently: link product of Choi(c) with the identity wire on each pair.
LabeledChoi loop_by_link_product(const LoopInstance& inst);

}  // namespace procbox
