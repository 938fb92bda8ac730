#include "procbox/spacetime.hpp"

#include "procbox/linalg.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>

namespace procbox {

Spacetime::Spacetime(std::vector<Pos> elements, const std::vector<std::pair<Pos, Pos>>& covers,
                     std::optional<Pos> past_, std::optional<Pos> future_, std::optional<Pos> result_)
    : past(past_), future(future_), result(result_), elems_(std::move(elements)) {
  if (elems_.empty()) throw std::invalid_argument("spacetime needs at least one element");
  for (int i = 0; i < (int)elems_.size(); ++i) {
    if (!idx_.emplace(elems_[i], i).second)
      throw std::invalid_argument("duplicate position id " + std::to_string(elems_[i]));
  }
  int n = (int)elems_.size();
  le_.assign(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) le_[i][i] = 1;
  for (auto [a, b] : covers) le_[index_of(a)][index_of(b)] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (le_[i][k])
        for (int j = 0; j < n; ++j)
          if (le_[k][j]) le_[i][j] = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (le_[i][j] && le_[j][i])
        throw std::invalid_argument("order relation is not antisymmetric (cycle through " +
                                    std::to_string(elems_[i]) + ")");
  auto check_before = [&](Pos a, Pos b) {
    if (!lt(a, b))
      throw std::invalid_argument("distinguished slot order violated: " + std::to_string(a) +
                                  " must precede " + std::to_string(b));
  };
  std::set<Pos> special;
  for (auto o : {past, future, result})
    if (o) special.insert(*o);
  for (Pos t : elems_) {
    if (special.count(t)) continue;
    if (past) check_before(*past, t);
    if (future) check_before(t, *future);
    if (result) check_before(t, *result);
  }
  if (past && future) check_before(*past, *future);
  if (future && result) check_before(*future, *result);
  if (past && result) check_before(*past, *result);
}

Spacetime Spacetime::chain(Pos first, Pos last) {
  std::vector<Pos> e;
  std::vector<std::pair<Pos, Pos>> c;
  for (Pos t = first; t <= last; ++t) {
    e.push_back(t);
    if (t > first) c.push_back({t - 1, t});
  }
  return Spacetime(e, c);
}

int Spacetime::index_of(Pos p) const {
  auto it = idx_.find(p);
  if (it == idx_.end()) throw std::out_of_range("position " + std::to_string(p) + " not in spacetime");
  return it->second;
}

bool Spacetime::leq(Pos a, Pos b) const { return le_[index_of(a)][index_of(b)] != 0; }

bool Spacetime::is_chain() const {
  for (int i = 0; i < size(); ++i)
    for (int j = 0; j < size(); ++j)
      if (!le_[i][j] && !le_[j][i]) return false;
  return true;
}

std::vector<std::pair<Pos, Pos>> Spacetime::covers() const {
  std::vector<std::pair<Pos, Pos>> c;
  int n = size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || !le_[i][j]) continue;
      bool cover = true;
      for (int k = 0; k < n && cover; ++k)
        if (k != i && k != j && le_[i][k] && le_[k][j]) cover = false;
      if (cover) c.push_back({elems_[i], elems_[j]});
    }
  return c;
}

PosSet Spacetime::sorted(PosSet s) const {
  std::sort(s.begin(), s.end(), [&](Pos a, Pos b) { return index_of(a) < index_of(b); });
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

bool is_bottom_closed(const Spacetime& st, const PosSet& s) {
  std::set<Pos> in(s.begin(), s.end());
  for (Pos t : s)
    for (Pos u : st.elements())
      if (st.leq(u, t) && !in.count(u)) return false;
  return true;
}

std::vector<Pos> maximal_elements(const Spacetime& st, const PosSet& s) {
  std::vector<Pos> r;
  for (Pos t : s) {
    bool maximal = true;
    for (Pos u : s)
      if (st.lt(t, u)) maximal = false;
    if (maximal) r.push_back(t);
  }
  return r;
}

std::vector<PosSet> bottom_closed_subsets(const Spacetime& st) {
  // Decide elements in a linear extension order: an element may be included only if
  // all its predecessors are, which enumerates each downset exactly once.
  RelabellingMap lin = linear_extension(st);
  std::vector<Pos> order(st.size());
  for (Pos t : st.elements()) order[lin.common.at(t) - 1] = t;
  std::vector<PosSet> out;
  std::vector<char> chosen(st.size(), 0);
  std::function<void(int)> rec = [&](int i) {
    if (i == st.size()) {
      PosSet s;
      for (Pos t : st.elements())
        if (chosen[st.index_of(t)]) s.push_back(t);
      out.push_back(s);
      return;
    }
    Pos t = order[i];
    rec(i + 1);
    bool ok = true;
    for (Pos u : st.elements())
      if (st.lt(u, t) && !chosen[st.index_of(u)]) ok = false;
    if (ok) {
      chosen[st.index_of(t)] = 1;
      rec(i + 1);
      chosen[st.index_of(t)] = 0;
    }
  };
  rec(0);
  auto key = [&](const PosSet& s) {
    std::vector<int> k;
    for (Pos t : s) k.push_back(st.index_of(t));
    return k;
  };
  std::sort(out.begin(), out.end(), [&](const PosSet& a, const PosSet& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return key(a) < key(b);
  });
  return out;
}

PosSet CausalityFunction::operator()(const PosSet& s) const {
  auto it = table.find(s);
  if (it == table.end()) throw std::out_of_range("causality function undefined on subset");
  return it->second;
}

CausalityFunction remove_maximal_chi(const Spacetime& st) {
  CausalityFunction chi;
  for (const auto& s : bottom_closed_subsets(st)) {
    auto mx = maximal_elements(st, s);
    PosSet r;
    for (Pos t : s)
      if (std::find(mx.begin(), mx.end(), t) == mx.end()) r.push_back(t);
    chi.table[s] = r;
  }
  return chi;
}

namespace {
bool subset(const PosSet& a, const PosSet& b) {
  std::set<Pos> sb(b.begin(), b.end());
  for (Pos t : a)
    if (!sb.count(t)) return false;
  return true;
}
std::string show(const PosSet& s) {
  std::string r = "{";
  for (size_t i = 0; i < s.size(); ++i) r += (i ? "," : "") + std::to_string(s[i]);
  return r + "}";
}
}  // namespace

Report validate_causality_function(const Spacetime& st, const CausalityFunction& chi) {
  Report rep;
  auto downs = bottom_closed_subsets(st);
  std::set<PosSet> dset(downs.begin(), downs.end());
  for (const auto& [k, v] : chi.table) {
    if (!dset.count(st.sorted(k)) || st.sorted(k) != k)
      throw std::invalid_argument("causality table key " + show(k) + " is not a bottom-closed subset");
    if (!is_bottom_closed(st, v))
      throw std::invalid_argument("causality table value " + show(v) + " is not bottom-closed");
  }
  for (const auto& s : downs)
    if (!chi.table.count(s)) throw std::invalid_argument("causality function undefined on " + show(s));
  for (const auto& a : downs) {
    PosSet ca = chi(a);
    if (!a.empty() && (!subset(ca, a) || ca.size() >= a.size())) {
      return {false, "strict-subset axiom fails", a, 0.0};
    }
    if (a.empty() && !ca.empty()) return {false, "strict-subset axiom fails", a, 0.0};
  }
  for (const auto& a : downs)
    for (const auto& b : downs) {
      PosSet u = a;
      u.insert(u.end(), b.begin(), b.end());
      u = st.sorted(u);
      PosSet cu = chi(u);
      PosSet ca = chi(a), cb = chi(b);
      PosSet un = ca;
      un.insert(un.end(), cb.begin(), cb.end());
      un = st.sorted(un);
      if (cu != un) return {false, "union axiom fails", u, 0.0};
      if (subset(a, b) && !subset(ca, cb)) return {false, "monotonicity axiom fails", a, 0.0};
    }
  rep.message = "ok";
  return rep;
}

bool maximal_elements_removed(const Spacetime& st, const CausalityFunction& chi) {
  for (const auto& s : bottom_closed_subsets(st)) {
    PosSet c = chi(s);
    for (Pos m : maximal_elements(st, s))
      if (std::find(c.begin(), c.end(), m) != c.end()) return false;
  }
  return true;
}

Spacetime random_poset(int n, double p, unsigned long long seed) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Pos> e;
  std::vector<std::pair<Pos, Pos>> c;
  for (int i = 1; i <= n; ++i) e.push_back(i);
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      if (coin(rng)) c.push_back({i, j});
  return Spacetime(e, c);
}

CausalityFunction random_causality_function(const Spacetime& st, unsigned long long seed) {
  // chi(T') = union of D_t over t in T', with D_t a downset of the strict past of t and
  // D_s contained in D_t whenever s precedes t.
  Rng rng(seed);
  std::bernoulli_distribution coin(0.5);
  RelabellingMap lin = linear_extension(st);
  std::vector<Pos> order(st.size());
  for (Pos t : st.elements()) order[lin.common.at(t) - 1] = t;
  std::map<Pos, std::set<Pos>> D;
  for (Pos t : order) {
    std::set<Pos> d;
    for (Pos s : st.elements())
      if (st.lt(s, t)) d.insert(D[s].begin(), D[s].end());
    for (Pos s : order) {
      if (!st.lt(s, t) || d.count(s)) continue;
      bool pred_in = true;
      for (Pos u : st.elements())
        if (st.lt(u, s) && !d.count(u)) pred_in = false;
      if (pred_in && coin(rng)) d.insert(s);
    }
    D[t] = d;
  }
  CausalityFunction chi;
  for (const auto& s : bottom_closed_subsets(st)) {
    std::set<Pos> u;
    for (Pos t : s) u.insert(D[t].begin(), D[t].end());
    chi.table[s] = st.sorted(PosSet(u.begin(), u.end()));
  }
  return chi;
}

Pos RelabellingMap::apply(const std::string& system, Pos t) const {
  auto it = systems.find(system);
  if (it != systems.end()) {
    auto jt = it->second.map.find(t);
    if (jt != it->second.map.end()) return jt->second;
  }
  auto ct = common.find(t);
  if (ct != common.end()) return ct->second;
  throw std::out_of_range("relabelling undefined for " + system + " at " + std::to_string(t));
}

bool RelabellingMap::has(const std::string& system, Pos t) const {
  auto it = systems.find(system);
  if (it != systems.end() && it->second.map.count(t)) return true;
  return common.count(t) > 0;
}

RelabellingMap linear_extension(const Spacetime& st) {
  // Kahn's algorithm, always emitting the ready element earliest in element order.
  int n = st.size();
  std::vector<int> indeg(n, 0);
  const auto& el = st.elements();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && st.leq(el[j], el[i])) ++indeg[i];
  std::vector<char> done(n, 0);
  RelabellingMap r;
  for (int step = 1; step <= n; ++step) {
    int pick = -1;
    for (int i = 0; i < n; ++i)
      if (!done[i] && indeg[i] == 0) {
        pick = i;
        break;
      }
    done[pick] = 1;
    r.common[el[pick]] = step;
    for (int j = 0; j < n; ++j)
      if (j != pick && st.leq(el[pick], el[j])) --indeg[j];
  }
  if (st.result) r.result = r.common.at(*st.result);
  return r;
}

Report validate_relabelling(const RelabellingMap& maps, const Spacetime& st, const Spacetime& st2) {
  // Collect systems; with only a common map every system behaves identically.
  std::vector<std::pair<std::string, SystemMap>> sys;
  for (const auto& kv : maps.systems) sys.push_back(kv);
  if (sys.empty()) {
    SystemMap in{"*", true, maps.common}, out{"*", false, maps.common};
    sys.push_back({"*.I", in});
    sys.push_back({"*.O", out});
  }
  for (const auto& [name, sm] : sys) {
    std::set<Pos> img;
    for (auto [a, b] : sm.map) {
      if (!st.contains(a)) throw std::invalid_argument("relabelling domain position not in source: " + std::to_string(a));
      if (!st2.contains(b)) throw std::invalid_argument("relabelling image not in target: " + std::to_string(b));
      if (!img.insert(b).second)
        return {false, "relabelling of " + name + " is not injective", PosSet{a}, 0.0};
    }
  }
  auto fail = [&](const std::string& what, Pos t1, Pos t2) {
    return Report{false, what, PosSet{t1, t2}, 0.0};
  };
  for (const auto& [n1, s1] : sys)
    for (const auto& [n2, s2] : sys) {
      bool same_agent = s1.agent == s2.agent;
      // Families: I_k<I_k, I_k<O_k, O_k<O_k (same agent), O_k<I_l (all agents).
      bool needed = false;
      std::string fam;
      if (same_agent && s1.input && s2.input && n1 == n2) needed = true, fam = "R_I(t1) < R_I(t2)";
      if (same_agent && s1.input && !s2.input) needed = true, fam = "R_I(t1) < R_O(t2)";
      if (same_agent && !s1.input && !s2.input && n1 == n2) needed = true, fam = "R_O(t1) < R_O(t2)";
      if (!s1.input && s2.input) needed = true, fam = "R_O(t1) < R_I'(t2)";
      if (!needed) continue;
      for (auto [t1, r1] : s1.map)
        for (auto [t2, r2] : s2.map)
          if (st.lt(t1, t2) && !st2.lt(r1, r2))
            return fail(fam + " violated for " + n1 + "/" + n2, t1, t2);
    }
  return {true, "ok", std::nullopt, 0.0};
}

}  // namespace procbox
