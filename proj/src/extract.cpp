#include "procbox/extract.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "procbox/qmap.hpp"

namespace procbox {

namespace {

// Amplitudes of the process network: rows over named legs, columns over the
// input basis of the current circuit block.
struct St {
  std::vector<Reg> legs;
  RowMat m;
};

struct NeedKeep {
  std::string leg;
};

std::vector<std::int64_t> strides(const std::vector<Reg>& legs) {
  std::vector<std::int64_t> s(legs.size(), 1);
  for (int i = (int)legs.size() - 2; i >= 0; --i) s[i] = s[i + 1] * legs[i + 1].dim;
  return s;
}

int find_leg(const St& s, const std::string& n) {
  for (int i = 0; i < (int)s.legs.size(); ++i)
    if (s.legs[i].name == n) return i;
  return -1;
}

St permute_legs(const St& s, const std::vector<int>& order) {
  bool ident = true;
  for (int i = 0; i < (int)order.size(); ++i) ident = ident && order[i] == i;
  if (ident) return s;
  auto os = strides(s.legs);
  St r;
  for (int i : order) r.legs.push_back(s.legs[i]);
  const int n = (int)order.size();
  r.m.resize(s.m.rows(), s.m.cols());
  std::vector<int> ctr(n, 0);
  std::int64_t off = 0;
  for (std::int64_t k = 0; k < s.m.rows(); ++k) {
    r.m.row(k) = s.m.row(off);
    for (int i = n - 1; i >= 0; --i) {
      if (++ctr[i] < r.legs[i].dim) {
        off += os[order[i]];
        break;
      }
      off -= os[order[i]] * (r.legs[i].dim - 1);
      ctr[i] = 0;
    }
  }
  return r;
}

// Legs sorted by name, keeping the first `fixed` legs in front.
St canonical(const St& s, int fixed = 0) {
  std::vector<int> o(s.legs.size());
  std::iota(o.begin(), o.end(), 0);
  std::sort(o.begin() + fixed, o.end(), [&](int a, int b) { return s.legs[a].name < s.legs[b].name; });
  return permute_legs(s, o);
}

void add_vacuum_leg(St& s, const Reg& r) {
  RowMat m = RowMat::Zero(s.m.rows() * r.dim, s.m.cols());
  for (std::int64_t i = 0; i < s.m.rows(); ++i) m.row(i * r.dim) = s.m.row(i);
  s.m = std::move(m);
  s.legs.push_back(r);
}

// Project dead legs that carry no weight outside index 0.
void prune(St& s, const std::set<std::string>& keep) {
  for (int i = 0; i < (int)s.legs.size(); ++i) {
    const auto& L = s.legs[i];
    if (L.name[0] != '~' || keep.count(L.name)) continue;
    auto st = strides(s.legs);
    double w = 0.0, tot = s.m.squaredNorm();
    for (std::int64_t r = 0; r < s.m.rows(); ++r)
      if ((r / st[i]) % L.dim) w += s.m.row(r).squaredNorm();
    if (w > 1e-22 * std::max(tot, 1.0)) throw NeedKeep{L.name};
    RowMat m(s.m.rows() / L.dim, s.m.cols());
    std::int64_t k = 0;
    for (std::int64_t r = 0; r < s.m.rows(); ++r)
      if ((r / st[i]) % L.dim == 0) m.row(k++) = s.m.row(r);
    s.m = std::move(m);
    s.legs.erase(s.legs.begin() + i);
    --i;
  }
}

struct Schedule {
  std::vector<Channel> net;
  std::vector<Pos> stamps;
  std::map<Pos, int> stamp_index;
  std::map<Pos, std::vector<int>> at;
  std::map<Pos, int> receiver;        // protocol agent receiving at the stamp
  std::set<std::string> agent_outs;   // agent output slots, fed vacuum when absent
  std::map<Pos, std::vector<Reg>> outs_at;
};

Schedule schedule(const Protocol& p) {
  Schedule s;
  s.net = process_network(p);
  s.stamps = p.st.elements();
  std::sort(s.stamps.begin(), s.stamps.end(), [&](Pos a, Pos b) { return p.st.lt(a, b); });
  for (int i = 0; i < (int)s.stamps.size(); ++i) s.stamp_index[s.stamps[i]] = i;
  std::map<std::string, Pos> in_slot, out_slot;
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    const auto& a = p.agents[k];
    if (!a.trivial_in())
      for (Pos t : a.in.positions) {
        if (s.receiver.count(t)) throw ExtractError("stamp " + std::to_string(t) + " has two receivers");
        s.receiver[t] = k;
        in_slot[a.in.slot(t)] = t;
      }
    if (!a.trivial_out())
      for (Pos t : a.out.positions) {
        out_slot[a.out.slot(t)] = t;
        s.agent_outs.insert(a.out.slot(t));
        s.outs_at[t].push_back({a.out.slot(t), a.out.sdim()});
      }
  }
  const int nc = (int)s.net.size();
  std::map<std::string, int> producer;
  for (int i = 0; i < nc; ++i)
    for (const auto& r : s.net[i].outs)
      if (r.name[0] != '~') producer[r.name] = i;
  std::vector<std::vector<int>> deps(nc);
  std::vector<int> indeg(nc, 0);
  std::vector<std::vector<int>> users(nc);
  for (int i = 0; i < nc; ++i)
    for (const auto& r : s.net[i].ins) {
      auto it = producer.find(r.name);
      if (it != producer.end()) {
        deps[i].push_back(it->second);
        users[it->second].push_back(i);
        ++indeg[i];
      }
    }
  std::vector<int> topo, ready;
  for (int i = 0; i < nc; ++i)
    if (!indeg[i]) ready.push_back(i);
  while (!ready.empty()) {
    std::sort(ready.begin(), ready.end(), std::greater<int>());
    int i = ready.back();
    ready.pop_back();
    topo.push_back(i);
    for (int u : users[i])
      if (--indeg[u] == 0) ready.push_back(u);
  }
  if ((int)topo.size() != nc) throw ExtractError("process network has a feedback loop");
  std::vector<int> slice(nc, 0);
  for (int i : topo) {
    int need = 0, emit = -1;
    bool consumes = false;
    for (const auto& r : s.net[i].ins) {
      auto it = out_slot.find(r.name);
      if (it != out_slot.end()) need = std::max(need, s.stamp_index.at(it->second)), consumes = true;
    }
    for (int d : deps[i]) need = std::max(need, slice[d]);
    for (const auto& r : s.net[i].outs) {
      auto it = in_slot.find(r.name);
      if (it != in_slot.end()) {
        int e = s.stamp_index.at(it->second);
        emit = emit < 0 ? e : std::min(emit, e);
      }
    }
    if (emit >= 0) {
      for (const auto& r : s.net[i].ins) {
        auto it = out_slot.find(r.name);
        if (it != out_slot.end() && s.stamp_index.at(it->second) >= emit)
          throw ExtractError("channel " + s.net[i].tag + " answers an output without delay");
      }
      if (need > emit) throw ExtractError("channel " + s.net[i].tag + " emits before its inputs are ready");
      slice[i] = emit;
    } else {
      slice[i] = need;
    }
    (void)consumes;
    s.at[s.stamps[slice[i]]].push_back(i);
  }
  return s;
}

void apply(St& s, const Channel& c, int cid, const Schedule& sc, const std::set<std::string>& keep) {
  for (const auto& r : c.ins) {
    int i = find_leg(s, r.name);
    if (i < 0) {
      if (!sc.agent_outs.count(r.name)) throw ExtractError("register " + r.name + " consumed before it is produced");
      add_vacuum_leg(s, r);
    } else if (s.legs[i].dim != r.dim) {
      throw ExtractError("dimension mismatch on " + r.name);
    }
  }
  std::vector<int> order;
  std::vector<char> used(s.legs.size(), 0);
  for (const auto& r : c.ins) {
    int i = find_leg(s, r.name);
    order.push_back(i);
    used[i] = 1;
  }
  for (int i = 0; i < (int)s.legs.size(); ++i)
    if (!used[i]) order.push_back(i);
  St p = permute_legs(s, order);
  const std::int64_t ni = c.in_dim(), no = c.out_dim(), C = p.m.cols();
  const std::int64_t rest = p.m.rows() / ni;
  const int ne = (int)c.kraus.size();
  St r;
  if (ne > 1) r.legs.push_back({"~kr." + std::to_string(cid), ne});
  for (const auto& o : c.outs) r.legs.push_back(o);
  for (size_t i = c.ins.size(); i < p.legs.size(); ++i) r.legs.push_back(p.legs[i]);
  r.m.resize(ne * no * rest, C);
  Eigen::Map<const RowMat> X(p.m.data(), ni, rest * C);
  for (int e = 0; e < ne; ++e) {
    Eigen::Map<RowMat> Y(r.m.data() + e * no * rest * C, no, rest * C);
    Y.noalias() = c.kraus[e] * X;
  }
  prune(r, keep);
  s = std::move(r);
}

struct Event {
  int target;  // circuit index, N for the future
  Pos t;
  St s;  // legs: "msg" then the memory legs in canonical order
};

using Observer = std::function<void(Pos t, int target, unsigned U, const St& s, int leg)>;

struct Roles {
  int past = -1, future = -1;
  std::vector<int> circ;                 // protocol index of circuit agent k
  std::map<int, int> circ_of;            // protocol index -> circuit index (future -> N)
};

struct Sweep {
  double double_receipt = 0.0, multi = 0.0, leftover = 0.0, early_future = 0.0, future_weight = 0.0;
};

void run(const Protocol& p, const Schedule& sc, const Roles& ro, St s, int start, unsigned U, std::vector<Event>& ev,
         Sweep& sw, const std::set<std::string>& keep, const Observer& obs) {
  const int N = (int)ro.circ.size();
  for (int idx = start; idx < (int)sc.stamps.size(); ++idx) {
    Pos t = sc.stamps[idx];
    auto os = sc.outs_at.find(t);
    if (os != sc.outs_at.end())
      for (const auto& r : os->second)
        if (find_leg(s, r.name) < 0) add_vacuum_leg(s, r);
    auto at = sc.at.find(t);
    if (at != sc.at.end())
      for (int c : at->second) apply(s, sc.net[c], c, sc, keep);
    auto rc = sc.receiver.find(t);
    if (rc == sc.receiver.end()) continue;
    const Agent& a = p.agents[rc->second];
    int j = ro.circ_of.at(rc->second);
    int li = find_leg(s, a.in.slot(t));
    if (obs) obs(t, j, U, s, li);
    if (li < 0) continue;
    std::vector<int> o{li};
    for (int i = 0; i < (int)s.legs.size(); ++i)
      if (i != li) o.push_back(i);
    St q = permute_legs(s, o);
    const int sd = q.legs[0].dim, d = a.in.dim;
    const std::int64_t rest = q.m.rows() / sd;
    St msg;
    msg.legs.push_back({"msg", d});
    for (size_t i = 1; i < q.legs.size(); ++i) msg.legs.push_back(q.legs[i]);
    msg.m = q.m.middleRows(rest, d * rest);
    if (sd > d + 1) sw.multi += q.m.bottomRows((sd - d - 1) * rest).squaredNorm();
    double w = msg.m.squaredNorm();
    bool done = j == N ? U == (1u << N) - 1 : !(U >> j & 1u);
    if (j == N) {
      sw.future_weight += w;
      if (!done) sw.early_future += w;
    }
    if (!done && j < N) sw.double_receipt += w;
    if (w > 1e-28 && done) ev.push_back({j, t, canonical(msg, 1)});
    St vac;
    vac.legs.assign(q.legs.begin() + 1, q.legs.end());
    vac.m = q.m.topRows(rest);
    s = std::move(vac);
    if (s.m.squaredNorm() < 1e-28) return;
  }
  sw.leftover += s.m.squaredNorm();
}

struct Sector {
  Pos t = 0;
  std::vector<Reg> legs;
  Mat Q;
  int off = 0;
};

struct Target {
  std::vector<Sector> sectors;
  int total = 0;
};

// Memory part of an event as legs x (msg, column).
Mat memory_matrix(const St& e) {
  const std::int64_t d = e.legs[0].dim, C = e.m.cols(), L = e.m.rows() / d;
  Mat M(L, d * C);
  for (std::int64_t i = 0; i < d; ++i)
    for (std::int64_t l = 0; l < L; ++l)
      for (std::int64_t c = 0; c < C; ++c) M(l, i * C + c) = e.m(i * L + l, c);
  return M;
}

Mat hcat(const Mat& a, const Mat& b) {
  if (a.cols() == 0) return b;
  Mat r(a.rows(), a.cols() + b.cols());
  r << a, b;
  return r;
}

Roles roles_of(const Protocol& p) {
  Roles ro;
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    if (is_past_agent(p, k)) {
      if (ro.past >= 0) throw ExtractError("more than one past agent");
      ro.past = k;
    } else if (is_future_agent(p, k)) {
      if (ro.future >= 0) throw ExtractError("more than one future agent");
      ro.future = k;
    } else {
      if (p.agents[k].trivial_in() || p.agents[k].trivial_out())
        throw ExtractError("agent " + p.agents[k].name + " needs nontrivial input and output wires");
      ro.circ_of[k] = (int)ro.circ.size();
      ro.circ.push_back(k);
    }
  }
  if (ro.past < 0 || ro.future < 0) throw ExtractError("a past and a future agent are required");
  if (p.agents[ro.future].in.positions.size() != 1) throw ExtractError("the future must receive at one stamp");
  ro.circ_of[ro.future] = (int)ro.circ.size();
  return ro;
}

struct SweepResult {
  QcQc q;
  Roles roles;
  Sweep sw;
  int kept = 0;
};

SweepResult sweep(const Protocol& p, double tol, const Observer& obs, const std::function<void()>& restart) {
  Schedule sc = schedule(p);
  Roles ro = roles_of(p);
  const int N = (int)ro.circ.size();
  if (N < 1) throw ExtractError("no agents between past and future");
  if (N > 20) throw ExtractError("too many agents");
  const Agent& P = p.agents[ro.past];
  const Agent& F = p.agents[ro.future];
  std::set<std::string> keep;
  for (int attempt = 0;; ++attempt) {
    try {
      if (restart) restart();
      SweepResult out;
      out.roles = ro;
      QcQc& q = out.q;
      q.N = N;
      for (int k : ro.circ) {
        q.names.push_back(p.agents[k].name);
        q.din.push_back(p.agents[k].in.dim);
        q.dout.push_back(p.agents[k].out.dim);
      }
      q.dP = P.out.dim;
      q.dF = F.in.dim;
      q.alpha = {1};
      if (P.out.positions.size() != 1) throw ExtractError("the past must send at one stamp");
      Pos tP = P.out.positions[0];
      // Sources of the current step with their column dimension and sectors.
      struct Source {
        ControlLabel l;
        int cols = 0;
        std::vector<Sector> sectors;
      };
      std::vector<Source> src;
      std::vector<std::pair<ControlLabel, std::vector<Event>>> events;
      {
        St s0;
        s0.legs = {{P.out.slot(tP), P.out.sdim()}};
        s0.m = RowMat::Zero(P.out.sdim(), q.dP);
        for (int x = 0; x < q.dP; ++x) s0.m(1 + x, x) = 1.0;
        std::vector<Event> ev;
        run(p, sc, ro, s0, sc.stamp_index.at(tP), 0u, ev, out.sw, keep, obs);
        events.push_back({ControlLabel{0, -1}, std::move(ev)});
        src.push_back({ControlLabel{0, -1}, q.dP, {}});
      }
      for (int n = 0; n <= N; ++n) {
        // Group events by target label and stamp; one basis per (label, stamp).
        std::map<ControlLabel, std::map<Pos, Mat>> span;
        std::map<std::pair<ControlLabel, Pos>, std::vector<Reg>> legs_of;
        for (const auto& [l, ev] : events) {
          unsigned U = l.k >= 0 ? (l.K | 1u << l.k) : 0u;
          for (const auto& e : ev) {
            ControlLabel t{U, e.target};
            std::vector<Reg> lg(e.s.legs.begin() + 1, e.s.legs.end());
            auto key = std::make_pair(t, e.t);
            auto it = legs_of.find(key);
            if (it == legs_of.end())
              legs_of[key] = lg;
            else if (!(it->second == lg))
              throw ExtractError("memory legs differ between branches at stamp " + std::to_string(e.t));
            Mat& sp = span[t][e.t];
            sp = orth(hcat(sp.cols() ? sp : Mat(memory_matrix(e.s).rows(), 0), memory_matrix(e.s)), 1e-10);
          }
        }
        std::map<ControlLabel, Target> tg;
        int amax = 1;
        for (auto& [t, by] : span) {
          Target T;
          for (auto& [pos, Q] : by) {
            T.sectors.push_back({pos, legs_of.at({t, pos}), Q, T.total});
            T.total += (int)Q.cols();
          }
          amax = std::max(amax, T.total);
          tg[t] = std::move(T);
        }
        const bool last = n == N;
        for (const auto& [t, T] : tg)
          if ((t.k == N) != last) throw ExtractError("the future is reached before every agent acted");
        if (last) {
          q.alphaF = amax;
        } else {
          q.alpha.push_back(amax);
        }
        // Internal operations into the targets.
        for (const auto& [l, ev] : events) {
          int cols = 0;
          for (const auto& s : src)
            if (s.l == l) cols = s.cols;
          unsigned U = l.k >= 0 ? (l.K | 1u << l.k) : 0u;
          for (const auto& e : ev) {
            ControlLabel t{U, e.target};
            const Target& T = tg.at(t);
            const Sector* sec = nullptr;
            for (const auto& s : T.sectors)
              if (s.t == e.t) sec = &s;
            const int d = e.target == N ? q.dF : q.din[e.target];
            const int a = last ? q.alphaF : amax;
            QcqcKey key{l.K, l.k, e.target};
            auto it = q.V.find(key);
            if (it == q.V.end()) it = q.V.emplace(key, Mat::Zero(d * a, cols)).first;
            Mat B = sec->Q.adjoint() * memory_matrix(e.s);
            for (int i = 0; i < d; ++i)
              for (int r = 0; r < B.rows(); ++r)
                for (int c = 0; c < cols; ++c) it->second(i * a + sec->off + r, c) += B(r, i * cols + c);
          }
        }
        if (last) break;
        // Continue every reached label from the stamp after its receipt.
        src.clear();
        events.clear();
        for (const auto& [t, T] : tg) {
          const int k = t.k;
          const Agent& a = p.agents[ro.circ[k]];
          const int cols = q.dout[k] * amax, so = a.out.sdim();
          std::vector<Event> ev;
          for (const auto& sec : T.sectors) {
            Pos tn = sc.stamp_index.at(sec.t) + 1 < (int)sc.stamps.size() ? sc.stamps[sc.stamp_index.at(sec.t) + 1] : -1;
            if (std::find(a.out.positions.begin(), a.out.positions.end(), tn) == a.out.positions.end())
              throw ExtractError("agent " + a.name + " does not answer at the stamp after " + std::to_string(sec.t));
            St s;
            s.legs = sec.legs;
            s.legs.push_back({a.out.slot(tn), so});
            s.m = RowMat::Zero(sec.Q.rows() * so, cols);
            for (int l = 0; l < sec.Q.rows(); ++l)
              for (int o = 0; o < q.dout[k]; ++o)
                for (int r = 0; r < sec.Q.cols(); ++r) s.m(l * so + 1 + o, o * amax + sec.off + r) = sec.Q(l, r);
            run(p, sc, ro, s, sc.stamp_index.at(tn), t.K | 1u << k, ev, out.sw, keep, obs);
          }
          src.push_back({t, cols, T.sectors});
          events.push_back({t, std::move(ev)});
        }
      }
      out.kept = (int)keep.size();
      (void)tol;
      return out;
    } catch (const NeedKeep& k) {
      if (!keep.insert(k.leg).second || attempt > 256) throw ExtractError("cannot settle discarded register " + k.leg);
    }
  }
}

std::vector<Mat> message_kraus(const Agent& a, const AgentOp& op) {
  Pos t0 = a.in.positions[0];
  auto it = std::find(a.out.positions.begin(), a.out.positions.end(), t0 + 1);
  if (it == a.out.positions.end()) throw ExtractError("agent " + a.name + " does not answer one stamp later");
  const int pi = (int)(it - a.out.positions.begin());
  Channel tmpl;
  tmpl.outs = a.out.regs();
  tmpl.outs.push_back(a.result_reg());
  tmpl.ins = {{a.name + ".msg", a.in.dim}};
  Channel c = align_to(restricted_at(a, op, t0), tmpl);
  const int R = a.outcome_dim;
  std::vector<int> dims(a.out.positions.size(), a.out.sdim());
  std::vector<Mat> out;
  for (const auto& K : c.kraus) {
    Mat m(a.out.dim * R, a.in.dim);
    for (int o = 0; o < a.out.dim; ++o) {
      std::vector<int> dg(dims.size(), 0);
      dg[pi] = 1 + o;
      std::int64_t row = flat_index(dg, dims);
      for (int r = 0; r < R; ++r) m.row(o * R + r) = K.row(row * R + r);
    }
    if (m.norm() > 1e-14) out.push_back(m);
  }
  if (out.empty()) out.push_back(Mat::Zero(a.out.dim * R, a.in.dim));
  return out;
}

QcqcProtocol parties_of(const Protocol& p, const Roles& ro, const QcQc& q) {
  QcqcProtocol qp;
  qp.q = q;
  qp.past = ro.past;
  qp.future = ro.future;
  qp.agent_party = ro.circ;
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    const Agent& a = p.agents[k];
    QcqcParty pa;
    pa.name = a.name;
    pa.outcome_dim = a.outcome_dim;
    const int R = a.outcome_dim;
    for (const auto& op : a.ops) {
      pa.settings.push_back(op.setting);
      std::vector<Mat> ks;
      if (k == ro.past) {
        Channel tmpl;
        tmpl.outs = a.out.regs();
        tmpl.outs.push_back(a.result_reg());
        Channel c = align_to(op.closed(), tmpl);
        for (const auto& K : c.kraus) {
          Mat v(a.out.dim * R, 1);
          for (int x = 0; x < a.out.dim; ++x)
            for (int r = 0; r < R; ++r) v(x * R + r, 0) = K((1 + x) * R + r, 0);
          ks.push_back(v);
        }
      } else if (k == ro.future) {
        Channel tmpl;
        tmpl.outs = {a.result_reg()};
        tmpl.ins = {{a.name + ".msg", a.in.one_msg_dim()}};
        Channel c = align_to(restricted_one(a, op), tmpl);
        ks = c.kraus;
      } else {
        ks = message_kraus(a, op);
      }
      pa.ops.push_back(ks);
    }
    qp.parties.push_back(pa);
  }
  return qp;
}

void require_simplified(const Protocol& p, double tol) {
  auto props = attained_properties(p, tol);
  if (props.size() != property_names().size()) {
    std::string miss;
    for (const auto& n : property_names())
      if (std::find(props.begin(), props.end(), n) == props.end()) miss += (miss.empty() ? "" : ", ") + n;
    throw ExtractError("protocol is not in simplified form (missing " + miss + ")");
  }
}

}  // namespace

QcqcProtocol build_qcqc(const Protocol& simplified, double tol, int* dead_legs_kept) {
  require_simplified(simplified, tol);
  auto r = sweep(simplified, tol, nullptr, nullptr);
  double bad = std::sqrt(r.sw.double_receipt + r.sw.multi + r.sw.leftover + r.sw.early_future);
  if (bad > std::sqrt(tol)) throw ExtractError("acting-once defect " + std::to_string(bad) + " during extraction");
  if (dead_legs_kept) *dead_legs_kept = r.kept;
  return parties_of(simplified, r.roles, r.q);
}

ControlledSequenceRep add_control(const Protocol& q, double tol) {
  require_simplified(q, tol);
  ControlledSequenceRep rep;
  Roles ro = roles_of(q);
  const int N = (int)ro.circ.size();
  for (int k : ro.circ) rep.control_agents.push_back(q.agents[k].name);
  rep.control_agents.push_back(q.agents[ro.future].name);
  // Reached memory subspaces per (stamp, executed set); memory = every leg but
  // the receiver's slot.
  std::map<Pos, std::map<unsigned, Mat>> spans;
  std::map<Pos, std::vector<Reg>> legs_at;
  std::map<Pos, std::string> who;
  auto add = [&](Pos t, unsigned K, const Mat& M, const std::vector<Reg>& legs) {
    auto it = legs_at.find(t);
    if (it == legs_at.end())
      legs_at[t] = legs;
    else if (!(it->second == legs))
      throw ExtractError("memory legs differ between branches at stamp " + std::to_string(t));
    Mat& s = spans[t][K];
    s = orth(hcat(s.cols() ? s : Mat(M.rows(), 0), M), 1e-10);
  };
  Observer obs = [&](Pos t, int j, unsigned U, const St& s, int li) {
    who[t] = j == N ? q.agents[ro.future].name : q.agents[ro.circ[j]].name;
    if (li < 0) {
      St c = canonical(s);
      add(t, U, Mat(c.m), c.legs);
      return;
    }
    std::vector<int> o{li};
    for (int i = 0; i < (int)s.legs.size(); ++i)
      if (i != li) o.push_back(i);
    St p = canonical(permute_legs(s, o), 1);
    St mem;
    mem.legs.assign(p.legs.begin() + 1, p.legs.end());
    mem.m = p.m.topRows(p.m.rows() / p.legs[0].dim);
    add(t, U, Mat(mem.m), mem.legs);
    St msg = p;
    msg.m = p.m.bottomRows(p.m.rows() - mem.m.rows());
    msg.legs[0].dim -= 1;
    if (msg.m.squaredNorm() > 1e-28) add(t, U | 1u << j, memory_matrix(msg), mem.legs);
  };
  auto sr = sweep(q, tol, obs, [&] {
    spans.clear();
    legs_at.clear();
  });
  for (const auto& [t, byK] : spans) {
    ControlCursor cc;
    cc.t = t;
    cc.receiver = who[t];
    for (const auto& [K, Q] : byK) cc.rank[K] = (int)Q.cols();
    for (auto a = byK.begin(); a != byK.end(); ++a)
      for (auto b = std::next(a); b != byK.end(); ++b) {
        if (!a->second.cols() || !b->second.cols()) continue;
        Eigen::JacobiSVD<Mat> svd(a->second.adjoint() * b->second);
        double ov = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        if (ov > cc.orthogonality) cc.orthogonality = ov, cc.worst_K = a->first, cc.worst_K2 = b->first;
      }
    rep.orthogonality = std::max(rep.orthogonality, cc.orthogonality);
    rep.cursors.push_back(cc);
  }
  rep.off_block = std::sqrt(sr.sw.double_receipt + sr.sw.multi + sr.sw.early_future);
  rep.final_vacuum = std::sqrt(sr.sw.leftover);
  rep.final_control_purity = sr.sw.future_weight > 0 ? 1.0 - sr.sw.early_future / sr.sw.future_weight : 1.0;

  // Splice control update channels behind every receiving slot.
  Protocol c = q;
  c.name = q.name + "_controlled";
  const int CD = 1 << (N + 1);
  std::vector<std::pair<Pos, int>> cur;
  for (const auto& [t, byK] : spans) {
    (void)byK;
    for (int k = 0; k < (int)q.agents.size(); ++k)
      if (!q.agents[k].trivial_in() && std::count(q.agents[k].in.positions.begin(), q.agents[k].in.positions.end(), t))
        cur.push_back({t, k});
  }
  std::sort(cur.begin(), cur.end(), [&](auto a, auto b) { return q.st.lt(a.first, b.first); });
  std::vector<Reg> c0{{"ctl.0", CD}};
  Vec e0 = Vec::Zero(CD);
  e0(0) = 1.0;
  c.process.push_back(state_channel(c0, {e0}, "ctl.init"));
  std::string prev = "ctl.0";
  for (size_t m = 0; m < cur.size(); ++m) {
    auto [t, k] = cur[m];
    const Agent& a = q.agents[k];
    const std::string slot = a.in.slot(t), pre = slot + "#pc";
    for (auto& ch : c.process)
      for (auto& r : ch.outs)
        if (r.name == slot) r.name = pre;
    const int bit = ro.circ_of.at(k);
    const int sd = a.in.sdim();
    std::string next = m + 1 == cur.size() ? "~ctl" : "ctl." + std::to_string(m + 1);
    std::vector<Reg> ins{{pre, sd}, {prev, CD}}, outs{{slot, sd}, {next, CD}, {"~ctl.flag." + std::to_string(m), 2}};
    Mat U = Mat::Zero(sd * CD * 2, sd * CD);
    for (int x = 0; x < sd; ++x)
      for (int K = 0; K < CD; ++K) {
        int K2 = K, flag = 0;
        if (x > 0) {
          if (K >> bit & 1)
            flag = 1;
          else
            K2 = K | 1 << bit;
        }
        U((x * CD + K2) * 2 + flag, x * CD + K) = 1.0;
      }
    c.process.push_back(single_kraus(outs, ins, U, "ctl." + std::to_string(m)));
    prev = next;
  }
  rep.controlled = c;
  for (const auto& ch : all_choices(q))
    rep.traced_distance = std::max(rep.traced_distance, (compose_protocol(q, ch) - compose_protocol(c, ch)).norm());
  try {
    OrderFunction o;
    for (int k : ro.circ) {
      OrderMap m;
      for (Pos t : q.agents[k].in.positions) m[t] = t + 1;
      o[q.agents[k].name] = m;
    }
    auto e1 = effective_choi(q, o), e2 = effective_choi(c, o);
    rep.traced_choi_distance = (e1.m - e2.m).norm();
  } catch (const std::exception&) {
    rep.traced_choi_distance = -1.0;
  }
  double worst = std::max({rep.orthogonality, rep.off_block, rep.final_vacuum, rep.traced_distance,
                           std::max(0.0, rep.traced_choi_distance)});
  rep.pass = worst <= tol;
  if (rep.orthogonality > tol) {
    for (const auto& cc : rep.cursors)
      if (cc.orthogonality == rep.orthogonality)
        throw ExtractError("reached subspaces overlap at stamp " + std::to_string(cc.t) + " for executed sets " +
                           std::to_string(cc.worst_K) + " and " + std::to_string(cc.worst_K2) + " (" +
                           std::to_string(cc.orthogonality) + ")");
  }
  rep.message = rep.pass ? "control extracted" : "control structure defect " + std::to_string(worst);
  return rep;
}

ExtractResult extract_qcqc(const Protocol& p, double tol) {
  ExtractResult r;
  r.simplification = simplify(p, tol);
  if (!r.simplification.equivalence.pass) throw ExtractError("simplification changed the behaviour");
  const Protocol& q = r.simplification.output;
  r.control = add_control(q, tol);
  if (!r.control.pass) throw ExtractError("add_control failed: " + r.control.message);
  r.qp = build_qcqc(q, tol, &r.dead_legs_kept);
  r.validity = validate_qcqc(r.qp.q, tol);
  if (!r.validity.pass) throw ExtractError("extracted circuit is not valid: " + r.validity.message);
  r.correspondence = Correspondence::identity(p);
  r.equivalence = qcqc_behavioural_equivalence(r.qp, p, r.correspondence, tol);
  if (!r.equivalence.pass)
    throw ExtractError("extracted circuit differs from the protocol (" + std::to_string(r.equivalence.max_diff) + ")");
  for (int n = 1; n <= r.qp.q.N; ++n) r.alpha.push_back(r.qp.q.alpha[n]);
  r.alpha.push_back(r.qp.q.alphaF);
  return r;
}

namespace {

std::vector<std::pair<std::vector<int>, Vec>> table_rules(const std::vector<Reg>& outs, const std::vector<std::pair<std::vector<int>, std::vector<int>>>& t,
                  bool reverse) {
  std::vector<std::pair<std::vector<int>, Vec>> r;
  for (const auto& [a, b] : t) {
    const auto& from = reverse ? b : a;
    const auto& to = reverse ? a : b;
    r.push_back({from, basis_vec(outs, to)});
  }
  return r;
}

}  // namespace

RewriteResult rewrite_weak_violator(const Protocol& p, const std::vector<WireReencoding>& enc, double tol) {
  RewriteResult out;
  Protocol q = p;
  q.name = p.name + "_reencoded";
  for (size_t ei = 0; ei < enc.size(); ++ei) {
    const auto& e = enc[ei];
    int k = q.agent_index(e.agent);
    if (k < 0) throw ExtractError("re-encoding names unknown agent " + e.agent);
    Agent& a = q.agents[k];
    Wire old = e.input ? a.in : a.out;
    Wire nw = e.target;
    nw.name = old.name;
    auto oregs = old.regs(), nregs = nw.regs();
    {
      std::set<std::vector<int>> sa, sb;
      for (const auto& [x, y] : e.table) {
        if (x.size() != oregs.size() || y.size() != nregs.size())
          throw ExtractError("re-encoding table entry has the wrong number of slots for " + old.name);
        for (size_t i = 0; i < x.size(); ++i)
          if (x[i] < 0 || x[i] >= oregs[i].dim) throw ExtractError("re-encoding digit out of range on " + old.name);
        for (size_t i = 0; i < y.size(); ++i)
          if (y[i] < 0 || y[i] >= nregs[i].dim) throw ExtractError("re-encoding digit out of range on " + old.name);
        if (!sa.insert(x).second || !sb.insert(y).second)
          throw ExtractError("re-encoding of " + old.name + " is not an isomorphism");
      }
    }
    const std::string tag = "re" + std::to_string(ei) + "." + old.name;
    auto suffixed = [](std::vector<Reg> r, const std::string& s) {
      for (auto& x : r) x.name += s;
      return r;
    };
    auto oold = suffixed(oregs, "#old"), ocod = suffixed(oregs, "#cod");
    auto ren_old = [&](std::vector<Channel>& net, bool outs) {
      for (auto& c : net)
        for (auto& r : outs ? c.outs : c.ins)
          for (size_t i = 0; i < oregs.size(); ++i)
            if (r.name == oregs[i].name) r.name = oold[i].name;
    };
    auto ren_cod = [&](std::vector<Channel>& net, bool outs) {
      for (auto& c : net)
        for (auto& r : outs ? c.outs : c.ins)
          for (size_t i = 0; i < oregs.size(); ++i)
            if (r.name == oregs[i].name) r.name = ocod[i].name;
    };
    if (e.input) {
      ren_old(q.process, true);
      q.process.push_back(isometry_from_rules(nregs, oold, table_rules(nregs, e.table, false), "~" + tag + ".j", tag));
      for (auto& op : a.ops) {
        ren_cod(op.net, false);
        op.net.insert(op.net.begin(), isometry_from_rules(ocod, nregs, table_rules(ocod, e.table, true),
                                                          "~" + tag + ".d", tag + ".dec"));
      }
      a.in = nw;
    } else {
      ren_old(q.process, false);
      q.process.insert(q.process.begin(), isometry_from_rules(oold, nregs, table_rules(oold, e.table, true),
                                                              "~" + tag + ".d", tag + ".dec"));
      for (auto& op : a.ops) {
        ren_cod(op.net, true);
        op.net.push_back(isometry_from_rules(nregs, ocod, table_rules(nregs, e.table, false), "~" + tag + ".j", tag));
      }
      a.out = nw;
    }
  }
  q.chi = remove_maximal_chi(q.st);
  auto v = validate(q, tol);
  if (!v.pass) throw ExtractError("re-encoded protocol is invalid: " + v.message);
  out.correspondence = Correspondence::identity(p);
  out.equivalence = behavioural_equivalence(p, q, out.correspondence, tol);
  out.certification = certify(q, tol);
  out.p = std::move(q);
  return out;
}

std::vector<WireReencoding> nolo_reencodings() {
  WireReencoding ai{"A", true, Wire{"A.I", 2, {4}, 1}, {{{1, 0}, {1}}, {{0, 1}, {2}}, {{0, 0}, {0}}}};
  WireReencoding bi{"B", true, Wire{"B.I", 2, {2}, 1}, {{{0}, {1}}, {{1}, {2}}}};
  WireReencoding bo{"B", false, Wire{"B.O", 2, {3}, 1}, {{{0}, {1}}, {{1}, {2}}}};
  return {ai, bi, bo};
}

}  // namespace procbox

namespace procbox {

TransformCertificate final_simplify(const Protocol& p, double tol) {
  auto ex = extract_qcqc(p, tol);
  auto back = qcqc_to_pb(ex.qp, tol);
  TransformCertificate c;
  c.input = p;
  c.output = back.p;
  c.output.name = p.name + "_final";
  c.correspondence = Correspondence::identity(p);
  c.stages.push_back({"simplify", true, ""});
  c.stages.push_back({"extract-qcqc", true, "circuit agents " + std::to_string(ex.qp.q.N)});
  c.stages.push_back({"qcqc-to-pb", true, ""});
  const Protocol& o = c.output;
  const int N = ex.qp.q.N;
  // Shared stamps on {1..2N+3}: everyone receives on {2..2N} and answers one stamp later.
  bool shared = o.st.is_chain() && o.st.size() == 2 * N + 3 && o.st.elements().front() == 1;
  std::vector<Pos> tin, tout;
  for (int n = 1; n <= N; ++n) tin.push_back(2 * n), tout.push_back(2 * n + 1);
  auto order = certified_order(o, tol);
  for (int k = 0; k < (int)o.agents.size(); ++k) {
    const auto& a = o.agents[k];
    if (is_past_agent(o, k)) shared = shared && a.trivial_in() && a.out.positions == std::vector<Pos>{1};
    else if (is_future_agent(o, k)) shared = shared && a.trivial_out() && a.in.positions == std::vector<Pos>{2 * N + 2};
    else {
      shared = shared && a.in.positions == tin && a.out.positions == tout;
      for (auto [t, u] : order.at(a.name)) shared = shared && u == t + 1;
    }
  }
  c.stages.push_back({"shared-stamps", shared, ""});
  // With AO certified, the projected and plain loop compositions agree on every op tuple.
  auto ao = check_AO(o, tol);
  bool preserving = ao.pass && ao.disturbance <= tol;
  c.stages.push_back({"message-number-preserving", preserving, "disturbance " + std::to_string(ao.disturbance)});
  c.equivalence = behavioural_equivalence(p, o, c.correspondence, tol);
  for (auto& n : attained_properties(o, tol))
    if (n == "total-order" || n == "nontrivial-input" || n == "time-independent") c.properties.push_back(n);
  if (shared) c.properties.push_back("shared-stamps");
  if (preserving) c.properties.push_back("message-number-preserving");
  return c;
}

}  // namespace procbox
