#include "procbox/fock.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace procbox {

int FockBasis::wire_index(const std::string& name) const {
  for (int i = 0; i < (int)wires.size(); ++i)
    if (wires[i].name == name) return i;
  throw std::invalid_argument("no wire named " + name);
}

int FockBasis::index_of(const FockLabel& l) const {
  FockLabel s = l;
  std::sort(s.begin(), s.end());
  auto it = index.find(s);
  if (it == index.end()) throw std::out_of_range("label not in basis");
  return it->second;
}

std::string FockBasis::dump() const {
  std::ostringstream os;
  for (int i = 0; i < size(); ++i) {
    os << i << ": [";
    for (size_t j = 0; j < labels[i].size(); ++j) {
      const auto& s = labels[i][j];
      os << (j ? "," : "") << "(" << wires[s.wire].name << "," << s.level << "," << s.pos << ")";
    }
    os << "]\n";
  }
  return os.str();
}

std::int64_t fock_dimension(std::int64_t k, int n) {
  // C(k+n, n)
  double r = 1;
  for (int j = 1; j <= n; ++j) r = r * (double)(k + j) / j;
  return (std::int64_t)std::llround(r);
}

FockBasis enumerate_basis(const std::vector<WireSpec>& wires, int n_max, std::size_t cap) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  FockBasis b;
  b.wires = wires;
  b.n_max = n_max;
  std::vector<FockSlot> slots;
  for (int w = 0; w < (int)wires.size(); ++w) {
    if (wires[w].dim < 0) throw std::invalid_argument("negative wire dimension");
    for (int l = 0; l < wires[w].dim; ++l)
      for (Pos p : wires[w].positions) slots.push_back({w, l, p});
  }
  std::sort(slots.begin(), slots.end());
  std::int64_t total = fock_dimension((std::int64_t)slots.size(), n_max);
  if (total > (std::int64_t)cap)
    throw std::length_error("Fock basis size " + std::to_string(total) + " exceeds cap " + std::to_string(cap));
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      FockLabel l;
      for (int i : cur) l.push_back(slots[i]);
      b.index[l] = (int)b.labels.size();
      b.labels.push_back(l);
      return;
    }
    for (int i = start; i < (int)slots.size(); ++i) {
      cur.push_back(i);
      rec(i, left - 1);
      cur.pop_back();
    }
  };
  for (int n = 0; n <= n_max; ++n) rec(0, n);
  return b;
}

OneMessageProjector one_message_projector(const FockBasis& b, const std::string& wire, const PosSet& region) {
  int w = b.wire_index(wire);
  OneMessageProjector p{b.wires[w], region, Mat::Zero(b.size(), b.size())};
  if (b.wires[w].dim == 0) {
    p.matrix = Mat::Identity(b.size(), b.size());
    return p;
  }
  for (int i = 0; i < b.size(); ++i) {
    int cnt = 0;
    bool inside = false;
    for (const auto& s : b.labels[i])
      if (s.wire == w) {
        ++cnt;
        inside = std::find(region.begin(), region.end(), s.pos) != region.end();
      }
    if (cnt == 1 && inside) p.matrix(i, i) = 1.0;
  }
  return p;
}

Mat BasisMap::matrix() const {
  Mat m = Mat::Zero(target.size(), source_size);
  for (int i = 0; i < source_size; ++i)
    if (map[i] >= 0) m(map[i], i) = 1.0;
  return m;
}

BasisMap wire_merge(const FockBasis& b, const std::string& a, const std::string& bw, const std::string& c) {
  int ia = b.wire_index(a), ib = b.wire_index(bw);
  auto pa = b.wires[ia].positions, pb = b.wires[ib].positions;
  std::sort(pa.begin(), pa.end());
  std::sort(pb.begin(), pb.end());
  if (pa != pb) throw std::invalid_argument("wire_merge: position sets differ");
  std::vector<WireSpec> nw;
  std::vector<int> remap(b.wires.size(), -1);
  for (int i = 0; i < (int)b.wires.size(); ++i) {
    if (i == ib) continue;
    if (i == ia) {
      WireSpec s = b.wires[ia];
      s.name = c;
      s.dim = b.wires[ia].dim + b.wires[ib].dim;
      remap[i] = (int)nw.size();
      nw.push_back(s);
    } else {
      remap[i] = (int)nw.size();
      nw.push_back(b.wires[i]);
    }
  }
  remap[ib] = remap[ia];
  BasisMap m{enumerate_basis(nw, b.n_max), {}, b.size()};
  for (const auto& l : b.labels) {
    FockLabel t;
    for (auto s : l) {
      FockSlot x{remap[s.wire], s.level + (s.wire == ib ? b.wires[ia].dim : 0), s.pos};
      t.push_back(x);
    }
    m.map.push_back(m.target.index_of(t));
  }
  return m;
}

BasisMap wire_split(const FockBasis& merged, const std::string& c, const std::string& a, int dim_a,
                    const std::string& bw) {
  int ic = merged.wire_index(c);
  const WireSpec& wc = merged.wires[ic];
  if (dim_a < 0 || dim_a > wc.dim) throw std::invalid_argument("wire_split: bad dimension");
  std::vector<WireSpec> nw;
  std::vector<int> remap(merged.wires.size());
  for (int i = 0; i < (int)merged.wires.size(); ++i) {
    remap[i] = (int)nw.size();
    if (i == ic) {
      WireSpec sa = wc, sb = wc;
      sa.name = a, sa.dim = dim_a;
      sb.name = bw, sb.dim = wc.dim - dim_a;
      nw.push_back(sa);
      nw.push_back(sb);
    } else {
      nw.push_back(merged.wires[i]);
    }
  }
  BasisMap m{enumerate_basis(nw, merged.n_max), {}, merged.size()};
  for (const auto& l : merged.labels) {
    FockLabel t;
    for (auto s : l) {
      if (s.wire == ic && s.level >= dim_a)
        t.push_back({remap[ic] + 1, s.level - dim_a, s.pos});
      else
        t.push_back({remap[s.wire], s.level, s.pos});
    }
    m.map.push_back(m.target.index_of(t));
  }
  return m;
}

BasisMap embed_region(const FockBasis& sub, const FockBasis& ambient) {
  if (sub.n_max > ambient.n_max) throw std::invalid_argument("embed_region: truncation larger than ambient");
  std::vector<int> remap;
  for (const auto& w : sub.wires) {
    int j = ambient.wire_index(w.name);
    if (ambient.wires[j].dim != w.dim) throw std::invalid_argument("embed_region: dimension mismatch on " + w.name);
    for (Pos p : w.positions)
      if (std::find(ambient.wires[j].positions.begin(), ambient.wires[j].positions.end(), p) ==
          ambient.wires[j].positions.end())
        throw std::invalid_argument("embed_region: region not contained in ambient positions");
    remap.push_back(j);
  }
  BasisMap m{ambient, {}, sub.size()};
  for (const auto& l : sub.labels) {
    FockLabel t;
    for (auto s : l) t.push_back({remap[s.wire], s.level, s.pos});
    m.map.push_back(ambient.index_of(t));
  }
  return m;
}

CountIsometry message_count_isometry(const FockBasis& b, const std::string& wire, const PosSet& region) {
  int w = b.wire_index(wire);
  CountIsometry c;
  c.n_max = b.n_max;
  c.counter_dim = (b.n_max + 1) * (b.n_max + 1);
  c.V = Mat::Zero((std::int64_t)b.size() * c.counter_dim, b.size());
  for (int i = 0; i < b.size(); ++i) {
    int n = 0, m = 0;
    for (const auto& s : b.labels[i])
      if (s.wire == w) {
        if (std::find(region.begin(), region.end(), s.pos) != region.end())
          ++n;
        else
          ++m;
      }
    c.V((std::int64_t)i * c.counter_dim + c.counter_index(n, m), i) = 1.0;
  }
  return c;
}

const std::vector<std::vector<int>>& slot_labels(int d, int n_slot) {
  static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(d, n_slot);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int, int)> rec = [&](int start, int left) {
    if (left == 0) {
      out.push_back(cur);
      return;
    }
    for (int l = start; l < d; ++l) {
      cur.push_back(l);
      rec(l, left - 1);
      cur.pop_back();
    }
  };
  for (int n = 0; n <= n_slot; ++n) rec(0, n);
  return cache[key] = out;
}

int slot_dim(int d, int n_slot) {
  if (d == 0) return 1;
  return (int)fock_dimension(d, n_slot);
}

int slot_count(int d, int n_slot, int idx) { return (int)slot_labels(d, n_slot).at(idx).size(); }

std::string Wire::slot(Pos t) const { return name + "@" + std::to_string(t); }

std::vector<Reg> Wire::regs() const {
  std::vector<Reg> r;
  if (trivial()) return r;
  for (Pos t : positions) r.push_back({slot(t), sdim()});
  return r;
}

std::int64_t Wire::total_dim() const {
  std::int64_t d = 1;
  if (trivial()) return 1;
  for (size_t i = 0; i < positions.size(); ++i) d *= sdim();
  return d;
}

int Wire::one_msg_index(Pos t, int level) const {
  for (int i = 0; i < (int)positions.size(); ++i)
    if (positions[i] == t) return i * dim + level;
  throw std::out_of_range("position not on wire " + name);
}

bool slot_time(const std::string& reg, Pos& t) {
  auto at = reg.rfind('@');
  if (at == std::string::npos || at + 1 >= reg.size()) return false;
  try {
    size_t used = 0;
    t = std::stoi(reg.substr(at + 1), &used);
    return used == reg.size() - at - 1;
  } catch (...) {
    return false;
  }
}

std::string slot_wire(const std::string& reg) {
  auto at = reg.rfind('@');
  return at == std::string::npos ? reg : reg.substr(0, at);
}

Mat one_msg_embedding(const Wire& w) {
  Mat e = Mat::Zero(w.total_dim(), w.one_msg_dim());
  int n = (int)w.positions.size(), sd = w.sdim();
  std::vector<int> dims(n, sd);
  for (int ti = 0; ti < n; ++ti)
    for (int l = 0; l < w.dim; ++l) {
      std::vector<int> dg(n, 0);
      dg[ti] = 1 + l;
      e(flat_index(dg, dims), ti * w.dim + l) = 1.0;
    }
  return e;
}

std::vector<int> occupation(const Wire& w, std::int64_t idx) {
  int n = (int)w.positions.size();
  std::vector<int> dims(n, w.sdim());
  auto dg = digits(idx, dims);
  for (auto& x : dg) x = slot_count(w.dim, w.n_slot, x);
  return dg;
}

std::int64_t vacuum_index(const Wire&) { return 0; }

Mat one_msg_projector_matrix(const Wire& w, const PosSet& region) {
  std::int64_t D = w.total_dim();
  Mat p = Mat::Zero(D, D);
  if (w.trivial()) return Mat::Identity(D, D);
  for (std::int64_t i = 0; i < D; ++i) {
    auto occ = occupation(w, i);
    int total = 0, where = -1;
    for (int k = 0; k < (int)occ.size(); ++k)
      if (occ[k]) total += occ[k], where = k;
    if (total == 1 && std::find(region.begin(), region.end(), w.positions[where]) != region.end())
      p(i, i) = 1.0;
  }
  return p;
}

Channel one_msg_projector_channel(const Wire& w, const PosSet& region) {
  auto r = w.regs();
  return single_kraus(r, r, one_msg_projector_matrix(w, region), "P1[" + w.name + "]");
}

Mat fock_to_slots(const FockBasis& b) {
  struct SlotKey {
    int wire;
    Pos pos;
  };
  std::vector<SlotKey> keys;
  std::vector<int> dims;
  for (int w = 0; w < (int)b.wires.size(); ++w)
    for (Pos p : b.wires[w].positions) {
      keys.push_back({w, p});
      dims.push_back(slot_dim(b.wires[w].dim, b.n_max));
    }
  Mat m = Mat::Zero(product(dims), b.size());
  for (int i = 0; i < b.size(); ++i) {
    std::vector<int> dg(keys.size(), 0);
    for (size_t k = 0; k < keys.size(); ++k) {
      std::vector<int> lv;
      for (const auto& s : b.labels[i])
        if (s.wire == keys[k].wire && s.pos == keys[k].pos) lv.push_back(s.level);
      std::sort(lv.begin(), lv.end());
      const auto& labs = slot_labels(b.wires[keys[k].wire].dim, b.n_max);
      dg[k] = (int)(std::find(labs.begin(), labs.end(), lv) - labs.begin());
    }
    m(flat_index(dg, dims), i) = 1.0;
  }
  return m;
}

}  // namespace procbox
