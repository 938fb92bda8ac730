#include "procbox/compose.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace procbox {

Channel parallel(const Channel& a, const Channel& b) { return tensor_product(a, b); }

Channel loop_compose(const Channel& c, const WireMatch& m, const Spacetime& st, const CausalityFunction& chi,
                     double tol) {
  std::set<std::string> used;
  std::vector<std::pair<std::string, std::string>> rn;
  for (const auto& [o, i] : m.pairs) {
    int oi = c.find_out(o), ii = c.find_in(i);
    if (oi < 0 || ii < 0) throw std::invalid_argument("loop_compose: unknown register in match " + o + "/" + i);
    if (!used.insert("o:" + o).second || !used.insert("i:" + i).second)
      throw std::invalid_argument("loop_compose: register matched twice");
    if (c.outs[oi].dim != c.ins[ii].dim) throw std::invalid_argument("loop_compose: dimension mismatch " + o + "/" + i);
    auto to = reg_time(o), ti = reg_time(i);
    if (to.has_value() != ti.has_value() || (to && *to != *ti))
      throw std::invalid_argument("loop_compose: matched registers " + o + "/" + i + " sit at different positions");
  }
  Report v = validate_causality_function(st, chi);
  if (!v.pass) throw std::invalid_argument("loop_compose: invalid causality function");
  Report r = check_causality(c, st, chi, tol);
  if (!r.pass) throw std::invalid_argument("loop_compose: no compatible slicing, map is not causal: " + r.message);
  Channel d = c;
  for (const auto& [o, i] : m.pairs)
    for (auto& x : d.ins)
      if (x.name == i) x.name = o;
  return close({d});
}

Channel full_loop(const std::vector<Channel>& maps) {
  std::map<std::string, int> no, ni;
  for (const auto& c : maps) {
    for (const auto& r : c.outs)
      if (r.name.empty() || r.name[0] != '~')
        if (++no[r.name] > 1)
          throw std::invalid_argument("full_loop: register " + r.name +
                                      " is output by two maps; the loop would be ambiguous");
    for (const auto& r : c.ins)
      if (++ni[r.name] > 1)
        throw std::invalid_argument("full_loop: register " + r.name +
                                    " is input to two maps; the loop would be ambiguous");
  }
  return close(maps);
}

LabeledChoi choi_labeled(const Channel& c) {
  LabeledChoi j;
  j.sys = c.outs;
  j.sys.insert(j.sys.end(), c.ins.begin(), c.ins.end());
  j.m = choi(c);
  return j;
}

namespace {
std::vector<int> dims_of(const std::vector<Reg>& s) {
  std::vector<int> d;
  for (const auto& r : s) d.push_back(r.dim);
  return d;
}
}  // namespace

LabeledChoi reorder(const LabeledChoi& j, const std::vector<std::string>& order) {
  if (order.size() != j.sys.size()) throw std::invalid_argument("reorder: wrong number of subsystems");
  std::vector<int> perm;
  LabeledChoi r;
  for (const auto& n : order) {
    int f = -1;
    for (int i = 0; i < (int)j.sys.size(); ++i)
      if (j.sys[i].name == n) f = i;
    if (f < 0) throw std::invalid_argument("reorder: no subsystem " + n);
    perm.push_back(f);
    r.sys.push_back(j.sys[f]);
  }
  auto od = dims_of(j.sys), nd = dims_of(r.sys);
  std::int64_t D = product(od);
  std::vector<std::int64_t> map(D);
  for (std::int64_t x = 0; x < D; ++x) {
    auto dg = digits(x, nd);
    std::vector<int> og(od.size());
    for (size_t k = 0; k < perm.size(); ++k) og[perm[k]] = dg[k];
    map[x] = flat_index(og, od);
  }
  r.m.resize(D, D);
  for (std::int64_t a = 0; a < D; ++a)
    for (std::int64_t b = 0; b < D; ++b) r.m(a, b) = j.m(map[a], map[b]);
  return r;
}

LabeledChoi link_product(const LabeledChoi& a, const LabeledChoi& b) {
  std::vector<std::string> shared, ra, rb;
  for (const auto& s : a.sys) {
    bool sh = false;
    for (const auto& t : b.sys)
      if (t.name == s.name) {
        if (t.dim != s.dim) throw std::invalid_argument("link_product: dimension mismatch on " + s.name);
        sh = true;
      }
    (sh ? shared : ra).push_back(s.name);
  }
  for (const auto& t : b.sys) {
    bool sh = false;
    for (const auto& s : a.sys)
      if (s.name == t.name) sh = true;
    if (!sh) rb.push_back(t.name);
  }
  std::vector<std::string> oa = ra, ob = shared;
  oa.insert(oa.end(), shared.begin(), shared.end());
  ob.insert(ob.end(), rb.begin(), rb.end());
  LabeledChoi A = reorder(a, oa), B = reorder(b, ob);
  std::int64_t da = 1, ds = 1, db = 1;
  for (size_t i = 0; i < ra.size(); ++i) da *= A.sys[i].dim;
  for (size_t i = ra.size(); i < A.sys.size(); ++i) ds *= A.sys[i].dim;
  for (size_t i = shared.size(); i < B.sys.size(); ++i) db *= B.sys[i].dim;
  // R[(x,y),(x',y')] = sum_{s,s'} A[(x,s'),(x',s)] B[(s',y),(s,y')]
  Mat X(da * da, ds * ds), Y(ds * ds, db * db);
  for (std::int64_t x = 0; x < da; ++x)
    for (std::int64_t x2 = 0; x2 < da; ++x2)
      for (std::int64_t s2 = 0; s2 < ds; ++s2)
        for (std::int64_t s = 0; s < ds; ++s) X(x * da + x2, s2 * ds + s) = A.m(x * ds + s2, x2 * ds + s);
  for (std::int64_t s2 = 0; s2 < ds; ++s2)
    for (std::int64_t s = 0; s < ds; ++s)
      for (std::int64_t y = 0; y < db; ++y)
        for (std::int64_t y2 = 0; y2 < db; ++y2) Y(s2 * ds + s, y * db + y2) = B.m(s2 * db + y, s * db + y2);
  Mat Z = X * Y;
  LabeledChoi r;
  for (size_t i = 0; i < ra.size(); ++i) r.sys.push_back(A.sys[i]);
  for (size_t i = shared.size(); i < B.sys.size(); ++i) r.sys.push_back(B.sys[i]);
  r.m.resize(da * db, da * db);
  for (std::int64_t x = 0; x < da; ++x)
    for (std::int64_t x2 = 0; x2 < da; ++x2)
      for (std::int64_t y = 0; y < db; ++y)
        for (std::int64_t y2 = 0; y2 < db; ++y2) r.m(x * db + y, x2 * db + y2) = Z(x * da + x2, y * db + y2);
  return r;
}

LoopInstance random_loop_instance(unsigned long long seed) {
  Rng rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  int da = pick(1, 2), dx = pick(1, 2), dc = pick(1, 2), dm = pick(1, 2);
  if (pick(0, 1)) da = 3;
  auto rank = [&](int dout, int din) { return std::max(pick(1, 3), (din + dout - 1) / dout); };
  Channel k1{{{"y@2", dx}, {"m", dm}}, {{"a@1", da}}, random_kraus(dx * dm, da, rank(dx * dm, da), rng), "k1"};
  Channel k2{{{"c@3", dc}}, {{"m", dm}, {"x@2", dx}}, random_kraus(dc, dm * dx, rank(dc, dm * dx), rng), "k2"};
  LoopInstance inst;
  inst.c = close({k1, k2});
  inst.match.pairs = {{"y@2", "x@2"}};
  inst.st = Spacetime::chain(1, 3);
  inst.chi = remove_maximal_chi(inst.st);
  return inst;
}

LabeledChoi loop_by_link_product(const LoopInstance& inst) {
  LabeledChoi r = choi_labeled(inst.c);
  for (const auto& [o, i] : inst.match.pairs) {
    int d = inst.c.outs[inst.c.find_out(o)].dim;
    Vec phi = Vec::Zero(d * d);
    for (int k = 0; k < d; ++k) phi(k * d + k) = 1.0;
    r = link_product(r, LabeledChoi{{{o, d}, {i, d}}, phi * phi.adjoint()});
  }
  return r;
}

}  // namespace procbox
