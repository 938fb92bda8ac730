#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace procbox {

using Pos = int;
// Position set kept in the spacetime's element order.
using PosSet = std::vector<Pos>;

class Spacetime {
 public:
  Spacetime() = default;
  // covers: pairs (a, b) meaning a precedes b; the reflexive-transitive closure is taken.
  Spacetime(std::vector<Pos> elements, const std::vector<std::pair<Pos, Pos>>& covers,
            std::optional<Pos> past = std::nullopt, std::optional<Pos> future = std::nullopt,
            std::optional<Pos> result = std::nullopt);
  static Spacetime chain(Pos first, Pos last);

  const std::vector<Pos>& elements() const { return elems_; }
  int size() const { return (int)elems_.size(); }
  bool contains(Pos p) const { return idx_.count(p) > 0; }
  int index_of(Pos p) const;
  bool leq(Pos a, Pos b) const;
  bool lt(Pos a, Pos b) const { return a != b && leq(a, b); }
  bool is_chain() const;
  std::vector<std::pair<Pos, Pos>> covers() const;
  PosSet sorted(PosSet s) const;

  std::optional<Pos> past, future, result;

 private:
  std::vector<Pos> elems_;
  std::map<Pos, int> idx_;
  std::vector<std::vector<char>> le_;
};

struct Report {
  bool pass = true;
  std::string message;
  std::optional<PosSet> witness;
  double value = 0.0;
};

std::vector<PosSet> bottom_closed_subsets(const Spacetime& st);
bool is_bottom_closed(const Spacetime& st, const PosSet& s);
std::vector<Pos> maximal_elements(const Spacetime& st, const PosSet& s);

struct CausalityFunction {
  std::map<PosSet, PosSet> table;
  PosSet operator()(const PosSet& s) const;
};

// T' -> T' minus its maximal elements; valid on every finite poset.
CausalityFunction remove_maximal_chi(const Spacetime& st);
Report validate_causality_function(const Spacetime& st, const CausalityFunction& chi);
bool maximal_elements_removed(const Spacetime& st, const CausalityFunction& chi);
// Random valid causality function: iterate monotone shrink rules built from random
// per-element delays. Used by property tests.
CausalityFunction random_causality_function(const Spacetime& st, unsigned long long seed);
Spacetime random_poset(int n, double p, unsigned long long seed);

// Per-system position maps. Systems are named by wire (e.g. "A.I", "A.O").
struct SystemMap {
  std::string agent;
  bool input = true;
  std::map<Pos, Pos> map;
};

struct RelabellingMap {
  std::map<std::string, SystemMap> systems;
  std::map<Pos, Pos> common;  // used by systems without an explicit entry
  std::optional<Pos> result;
  Pos apply(const std::string& system, Pos t) const;
  bool has(const std::string& system, Pos t) const;
};

// A relabelling together with its target spacetime.
struct RelabellingSpec {
  RelabellingMap maps;
  Spacetime st2;
};

RelabellingMap linear_extension(const Spacetime& st);
Report validate_relabelling(const RelabellingMap& maps, const Spacetime& st, const Spacetime& st2);

}  // namespace procbox
