#pragma once

#include <compare>
#include <map>
#include <string>
#include <vector>

#include "procbox/spacetime.hpp"
#include "procbox/tensor.hpp"

namespace procbox {

enum class Role { AgentIn, AgentOut, Past, Future, Result, Ancilla };

struct WireSpec {
  std::string name;
  int dim = 1;  // 0 encodes a trivial wire
  std::vector<Pos> positions;
  Role role = Role::Ancilla;
};

struct FockSlot {
  int wire = 0;
  int level = 0;
  Pos pos = 0;
  auto operator<=>(const FockSlot&) const = default;
};
using FockLabel = std::vector<FockSlot>;

// Truncated symmetric Fock space over a wire set, enumerated explicitly.
struct FockBasis {
  std::vector<WireSpec> wires;
  int n_max = 0;
  std::vector<FockLabel> labels;
  std::map<FockLabel, int> index;

  int size() const { return (int)labels.size(); }
  int wire_index(const std::string& name) const;
  int index_of(const FockLabel& l) const;
  std::string dump() const;
};

FockBasis enumerate_basis(const std::vector<WireSpec>& wires, int n_max, std::size_t cap = 100000);
// Number of multisets of size <= n over k single-message slots.
std::int64_t fock_dimension(std::int64_t k, int n);

struct OneMessageProjector {
  WireSpec wire;
  PosSet region;
  Mat matrix;
};
OneMessageProjector one_message_projector(const FockBasis& b, const std::string& wire, const PosSet& region);

struct BasisMap {
  FockBasis target;
  std::vector<int> map;  // source index -> target index
  Mat matrix() const;    // |target| x |source| partial permutation
  int source_size = 0;
};
// Merge wires a, b (same positions) into c with H^c = H^a (+) H^b.
BasisMap wire_merge(const FockBasis& b, const std::string& a, const std::string& bw, const std::string& c);
BasisMap wire_split(const FockBasis& merged, const std::string& c, const std::string& a, int dim_a,
                    const std::string& bw);
// Embed a basis over smaller position sets into one over larger ones (vacuum appended).
BasisMap embed_region(const FockBasis& sub, const FockBasis& ambient);

struct CountIsometry {
  Mat V;  // (|basis| * counter_dim) x |basis|, counter register least significant
  int counter_dim = 1;
  int n_max = 0;
  int counter_index(int in_region, int outside) const { return in_region * (n_max + 1) + outside; }
};
CountIsometry message_count_isometry(const FockBasis& b, const std::string& wire, const PosSet& region);

// Per-position slot registers. A wire with message dimension d at positions T is the
// tensor product of one slot register per position; slot index 0 is the vacuum,
// 1..d are single messages, higher indices multi-message states (multisets of levels).
int slot_dim(int d, int n_slot);
const std::vector<std::vector<int>>& slot_labels(int d, int n_slot);
int slot_count(int d, int n_slot, int idx);

struct Wire {
  std::string name;
  int dim = 0;  // message dimension; 0 = trivial wire
  std::vector<Pos> positions;
  int n_slot = 1;

  bool trivial() const { return dim == 0 || positions.empty(); }
  int sdim() const { return slot_dim(dim, n_slot); }
  std::string slot(Pos t) const;
  std::vector<Reg> regs() const;
  std::int64_t total_dim() const;
  int one_msg_dim() const { return dim * (int)positions.size(); }
  // Index of |level, t> in the one-message space (time major).
  int one_msg_index(Pos t, int level) const;
};

// Parse "W@t" slot names; returns false if the name carries no time stamp.
bool slot_time(const std::string& reg, Pos& t);
std::string slot_wire(const std::string& reg);

// Isometry from the one-message space (dim d*|T|) into the slot product of the wire.
Mat one_msg_embedding(const Wire& w);
// Diagonal projector onto "exactly one message, located in region, vacuum elsewhere".
Mat one_msg_projector_matrix(const Wire& w, const PosSet& region);
Channel one_msg_projector_channel(const Wire& w, const PosSet& region);
// Slot occupation pattern of a basis state of the wire's slot product.
std::vector<int> occupation(const Wire& w, std::int64_t idx);
std::int64_t vacuum_index(const Wire& w);

// Isometry from a FockBasis into the product of slot registers (n_slot = n_max),
// registers ordered by wire then position.
Mat fock_to_slots(const FockBasis& b);

}  // namespace procbox
