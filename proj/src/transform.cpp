#include "procbox/transform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "procbox/qmap.hpp"

namespace procbox {

namespace {

using Renames = std::vector<std::pair<std::string, std::string>>;
using Rules = std::vector<std::pair<std::vector<int>, Vec>>;

void rename_all(std::vector<Channel>& net, const Renames& r) {
  for (auto& c : net) c = rename(c, r);
}

void rename_protocol(Protocol& q, const Renames& r) {
  rename_all(q.process, r);
  for (auto& a : q.agents)
    for (auto& op : a.ops) rename_all(op.net, r);
}

std::vector<Pos> chain_order(const Spacetime& st) { return st.sorted(st.elements()); }

std::optional<Pos> successor(const Spacetime& st, Pos t) {
  auto el = chain_order(st);
  auto it = std::find(el.begin(), el.end(), t);
  if (it == el.end() || it + 1 == el.end()) return std::nullopt;
  return *(it + 1);
}

int chain_rank(const Spacetime& st, Pos t) {
  auto el = chain_order(st);
  return (int)(std::find(el.begin(), el.end(), t) - el.begin()) + 1;
}

// The op on the one-message space, rows over (out slots, result), one column block per input slot.
Channel aligned_one(const Agent& a, const AgentOp& op) {
  Channel tmpl;
  tmpl.outs = a.out.regs();
  tmpl.outs.push_back(a.result_reg());
  tmpl.ins = {Reg{a.name + ".msg", a.in.one_msg_dim()}};
  return align_to(restricted_one(a, op), tmpl);
}

std::int64_t single_index(const Wire& w, int pi, int level) {
  std::vector<int> dims(w.positions.size(), w.sdim());
  std::vector<int> dg(w.positions.size(), 0);
  dg[pi] = 1 + level;
  return flat_index(dg, dims);
}

int pos_index(const Wire& w, Pos t) {
  auto it = std::find(w.positions.begin(), w.positions.end(), t);
  if (it == w.positions.end()) throw TransformError("position not on wire " + w.name);
  return (int)(it - w.positions.begin());
}

Mat psd_sqrt(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  Vec ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cplx>();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

// Extra Kraus operators sending the missing weight of block `cols` to output row `row`.
void complete_block(std::vector<Mat>& kraus, Eigen::Index row, Eigen::Index c0, Eigen::Index n) {
  if (kraus.empty()) return;
  Mat s = Mat::Zero(n, n);
  for (const auto& k : kraus) s += k.middleCols(c0, n).adjoint() * k.middleCols(c0, n);
  Mat d = psd_sqrt(Mat::Identity(n, n) - s);
  if (d.norm() < 1e-12) return;
  Eigen::Index rows = kraus.front().rows(), cols = kraus.front().cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (d.row(j).norm() < 1e-14) continue;
    Mat k = Mat::Zero(rows, cols);
    k.block(row, c0, 1, n) = d.row(j);
    kraus.push_back(std::move(k));
  }
}

TransformCertificate certificate(const Protocol& in, Protocol out, const std::string& stage, bool applied,
                                 double tol) {
  TransformCertificate c;
  c.input = in;
  c.output = std::move(out);
  c.correspondence = Correspondence::identity(in);
  c.stages.push_back({stage, applied, applied ? "" : "already satisfied"});
  c.equivalence = behavioural_equivalence(c.input, c.output, c.correspondence, tol);
  c.properties = attained_properties(c.output, tol);
  return c;
}

}  // namespace

bool is_past_agent(const Protocol& p, int k) {
  const auto& a = p.agents[k];
  if (!a.trivial_in() || a.trivial_out() || !p.st.past) return false;
  for (Pos s : a.out.positions)
    if (s != *p.st.past) return false;
  return true;
}

bool is_future_agent(const Protocol& p, int k) {
  const auto& a = p.agents[k];
  if (a.trivial_in() || !a.trivial_out() || !p.st.future) return false;
  for (Pos s : a.in.positions)
    if (s != *p.st.future) return false;
  return true;
}

PropertyCheck prop_total_order(const Protocol& p) {
  PropertyCheck r;
  r.pass = p.st.is_chain();
  if (!r.pass) r.message = "spacetime is not totally ordered";
  return r;
}

PropertyCheck prop_nontrivial_input(const Protocol& p) {
  PropertyCheck r;
  for (int k = 0; k < (int)p.agents.size(); ++k)
    if (p.agents[k].trivial_in() && !is_past_agent(p, k)) {
      r.pass = false;
      r.message = p.agents[k].name + " has trivial input";
      return r;
    }
  return r;
}

PropertyCheck prop_time_independent(const Protocol& p, double tol) {
  PropertyCheck r;
  if (!p.st.is_chain()) {
    r.pass = false;
    r.message = "needs a total order";
    return r;
  }
  for (const auto& a : p.agents) {
    if (a.trivial_in() || a.trivial_out()) continue;
    int di = a.in.dim, R = a.outcome_dim;
    for (const auto& op : a.ops) {
      Channel m = aligned_one(a, op);
      std::optional<Mat> ref;
      for (int j = 0; j < (int)a.in.positions.size(); ++j) {
        auto nx = successor(p.st, a.in.positions[j]);
        if (!nx || std::find(a.out.positions.begin(), a.out.positions.end(), *nx) == a.out.positions.end()) {
          r.pass = false;
          r.residual = 1.0;
          r.message = a.name + " has no output slot after " + std::to_string(a.in.positions[j]);
          return r;
        }
        int si = pos_index(a.out, *nx);
        Mat choi_j = Mat::Zero((Eigen::Index)a.out.dim * R * di, (Eigen::Index)a.out.dim * R * di);
        double kept = 0.0, total = 0.0;
        for (const auto& k : m.kraus) {
          Mat blk = k.middleCols((Eigen::Index)j * di, di);
          total += blk.squaredNorm();
          Mat msg(a.out.dim * R, di);
          for (int lo = 0; lo < a.out.dim; ++lo)
            for (int rr = 0; rr < R; ++rr) msg.row(lo * R + rr) = blk.row(single_index(a.out, si, lo) * R + rr);
          kept += msg.squaredNorm();
          Eigen::Map<const Vec> v(msg.data(), msg.size());
          choi_j += v * v.adjoint();
        }
        r.residual = std::max(r.residual, std::abs(total - kept));
        if (!ref)
          ref = choi_j;
        else
          r.residual = std::max(r.residual, (choi_j - *ref).norm());
      }
    }
  }
  r.pass = r.residual <= tol;
  if (!r.pass) r.message = "time dependence residual " + std::to_string(r.residual);
  return r;
}

PropertyCheck prop_one_message_output(const Protocol& p, double tol) {
  PropertyCheck r;
  auto net = process_network(p);
  for (const auto& a : p.agents) {
    if (a.trivial_out()) continue;
    Mat e = one_msg_embedding(a.out) / std::sqrt((double)a.out.one_msg_dim());
    Channel c{a.out.regs(), {}, {}, a.name + ".mix"};
    for (Eigen::Index j = 0; j < e.cols(); ++j) c.kraus.push_back(e.col(j));
    net.push_back(std::move(c));
  }
  // The process is trace preserving, so only the projected weight is needed.
  for (const auto& a : p.agents) {
    if (a.trivial_in()) continue;
    auto outs = a.in.regs();
    for (auto& x : outs) x.name = "~" + x.name + "#kept";
    net.push_back(single_kraus(outs, a.in.regs(), one_msg_projector_matrix(a.in, a.in.positions)));
  }
  double total = 1.0, kept = kraus_sum(close(net)).trace().real();
  r.residual = std::abs(total - kept);
  r.pass = r.residual <= tol;
  if (!r.pass) r.message = "weight outside one-message inputs " + std::to_string(r.residual);
  return r;
}

PropertyCheck prop_disjoint_even_odd(const Protocol& p) {
  PropertyCheck r;
  auto fail = [&](const std::string& m) {
    r.pass = false;
    r.message = m;
    return r;
  };
  if (!p.st.is_chain()) return fail("needs a total order");
  std::map<Pos, std::string> seen;
  for (const auto& a : p.agents) {
    for (const auto* w : {&a.in, &a.out}) {
      if (w->trivial()) continue;
      bool input = w == &a.in;
      for (Pos t : w->positions) {
        int par = ((t % 2) + 2) % 2;
        if (input && par != 0) return fail(w->slot(t) + " is an input at an odd stamp");
        if (!input && par != 1) return fail(w->slot(t) + " is an output at an even stamp");
        auto [it, fresh] = seen.insert({t, w->slot(t)});
        if (!fresh) return fail("stamp " + std::to_string(t) + " shared by " + it->second + " and " + w->slot(t));
      }
    }
  }
  return r;
}

std::vector<std::string> attained_properties(const Protocol& p, double tol) {
  std::vector<std::string> out;
  const auto& n = property_names();
  if (prop_total_order(p).pass) out.push_back(n[0]);
  if (prop_nontrivial_input(p).pass) out.push_back(n[1]);
  if (prop_time_independent(p, tol).pass) out.push_back(n[2]);
  if (prop_one_message_output(p, tol).pass) out.push_back(n[3]);
  if (prop_disjoint_even_odd(p).pass) out.push_back(n[4]);
  return out;
}

namespace {

// Per-system maps made explicit on every agent wire of p.
RelabellingMap explicit_maps(const Protocol& p, const RelabellingMap& m) {
  RelabellingMap e;
  e.result = m.result;
  for (const auto& a : p.agents)
    for (const auto* w : {&a.in, &a.out}) {
      if (w->trivial()) continue;
      SystemMap s{a.name, w == &a.in, {}};
      for (Pos t : w->positions) s.map[t] = m.apply(w->name, t);
      e.systems[w->name] = s;
    }
  return e;
}

}  // namespace

Protocol relabelled(const Protocol& p, const RelabellingSpec& r) {
  RelabellingMap e = explicit_maps(p, r.maps);
  auto rep = validate_relabelling(e, p.st, r.st2);
  if (!rep.pass) throw TransformError("invalid relabelling: " + rep.message);
  Protocol q = p;
  q.st = r.st2;
  q.chi = remove_maximal_chi(q.st);
  Renames ren;
  for (auto& a : q.agents)
    for (auto* w : {&a.in, &a.out}) {
      if (w->trivial()) continue;
      std::vector<Pos> np;
      for (Pos t : w->positions) {
        Pos t2 = e.apply(w->name, t);
        ren.push_back({w->slot(t), w->name + "@" + std::to_string(t2)});
        np.push_back(t2);
      }
      w->positions = q.st.sorted(np);
    }
  rename_protocol(q, ren);
  return q;
}

RelabellingSpec inverse_relabelling(const Protocol& p, const RelabellingSpec& r) {
  RelabellingMap e = explicit_maps(p, r.maps);
  RelabellingSpec inv;
  inv.st2 = p.st;
  for (const auto& [name, s] : e.systems) {
    SystemMap si{s.agent, s.input, {}};
    for (auto [a, b] : s.map) si.map[b] = a;
    inv.maps.systems[name] = si;
  }
  if (r.maps.result && p.st.result) inv.maps.result = *p.st.result;
  return inv;
}

TransformCertificate relabel(const Protocol& p, const RelabellingSpec& r, double tol) {
  return certificate(p, relabelled(p, r), "relabel", true, tol);
}

Protocol eliminate_trivial_inputs(const Protocol& p, bool* applied) {
  Protocol q = p;
  bool any = false;
  for (int k = 0; k < (int)q.agents.size(); ++k) {
    auto& a = q.agents[k];
    if (!a.trivial_in() || a.trivial_out() || is_past_agent(p, k)) continue;
    // Latest stamp strictly before every output.
    std::optional<Pos> tau;
    for (Pos x : chain_order(p.st)) {
      bool ok = true;
      for (Pos s : a.out.positions) ok = ok && p.st.lt(x, s);
      if (ok && (!tau || p.st.lt(*tau, x))) tau = x;
    }
    if (!tau) throw TransformError("no stamp before the outputs of " + a.name);
    a.in = Wire{a.name + ".I", 1, {*tau}, 1};
    for (auto& op : a.ops) op.net.push_back(discard(a.in.regs()));
    Vec one = Vec::Zero(2);
    one(1) = 1.0;
    q.process.push_back(state_channel(a.in.regs(), {one}, "dummy." + a.name));
    any = true;
  }
  if (applied) *applied = any;
  return q;
}

Protocol to_alo_protocol(const Protocol& p, const OrderFunction& o, bool* applied, double tol) {
  Protocol q = p;
  bool any = false;
  for (int k : lo_agents(p)) {
    auto& a = q.agents[k];
    const auto& om = o.at(a.name);
    bool all = true;
    for (const auto& op : a.ops) all = all && check_ALO(a, op, om, tol).pass;
    if (all) continue;
    any = true;
    int di = a.in.dim, R = a.outcome_dim;
    std::int64_t rows = a.out.total_dim() * R;
    for (auto& op : a.ops) {
      Channel m = aligned_one(a, op);
      std::vector<Mat> kr;
      for (const auto& K : m.kraus) {
        Mat kp = Mat::Zero(rows, K.cols());
        for (int ti = 0; ti < (int)a.in.positions.size(); ++ti) {
          int si = pos_index(a.out, om.at(a.in.positions[ti]));
          for (int lo = 0; lo < a.out.dim; ++lo)
            for (int rr = 0; rr < R; ++rr) {
              Eigen::Index row = single_index(a.out, si, lo) * R + rr;
              kp.block(row, (Eigen::Index)ti * di, 1, di) = K.block(row, (Eigen::Index)ti * di, 1, di);
            }
        }
        if (kp.norm() > 1e-14) kr.push_back(std::move(kp));
      }
      if (kr.empty()) kr.push_back(Mat::Zero(rows, a.in.one_msg_dim()));
      for (int ti = 0; ti < (int)a.in.positions.size(); ++ti) {
        int si = pos_index(a.out, om.at(a.in.positions[ti]));
        complete_block(kr, single_index(a.out, si, 0) * R, (Eigen::Index)ti * di, di);
      }
      op = one_msg_op(a, op.setting, kr, true);
    }
  }
  if (applied) *applied = any;
  return q;
}

namespace {

void make_agent_time_independent(Protocol& q, int k, const OrderMap& o) {
  Agent& a = q.agents[k];
  if (a.in.n_slot != 1 || a.out.n_slot != 1) throw TransformError("time independence needs single-message slots");
  const Wire oin = a.in, oout = a.out;
  const int d = oin.dim, dO = oout.dim, nTI = (int)oin.positions.size(), nTO = (int)oout.positions.size();
  const int R = a.outcome_dim;
  std::vector<Pos> newTO;
  for (Pos r : oin.positions) {
    auto nx = successor(q.st, r);
    if (!nx) throw TransformError("no stamp after " + std::to_string(r));
    newTO.push_back(*nx);
  }
  Wire nin{oin.name, d * nTI, oin.positions, 1};
  Wire nout{oout.name, dO * nTO, newTO, 1};

  // Agent operations: (l, ti) at any slot r -> (l', u) at the next slot.
  std::vector<AgentOp> ops;
  Agent na = a;
  na.in = nin;
  na.out = nout;
  for (const auto& op : a.ops) {
    Channel m = aligned_one(a, op);
    std::vector<Mat> msg;  // (dO nTO R) x (d nTI)
    for (const auto& K : m.kraus) {
      Mat A = Mat::Zero((Eigen::Index)dO * nTO * R, (Eigen::Index)d * nTI);
      for (int ti = 0; ti < nTI; ++ti)
        for (int l = 0; l < d; ++l)
          for (int u = 0; u < nTO; ++u)
            for (int lo = 0; lo < dO; ++lo)
              for (int rr = 0; rr < R; ++rr)
                A(((Eigen::Index)lo * nTO + u) * R + rr, (Eigen::Index)l * nTI + ti) =
                    K(single_index(oout, u, lo) * R + rr, (Eigen::Index)ti * d + l);
      if (A.norm() > 1e-14) msg.push_back(std::move(A));
    }
    if (msg.empty()) msg.push_back(Mat::Zero((Eigen::Index)dO * nTO * R, (Eigen::Index)d * nTI));
    complete_block(msg, 0, 0, d * nTI);
    std::vector<Mat> kr;
    std::int64_t rows = nout.total_dim() * R;
    for (const auto& A : msg) {
      Mat K = Mat::Zero(rows, nin.one_msg_dim());
      for (int j = 0; j < nTI; ++j)
        for (int L = 0; L < d * nTI; ++L)
          for (int Lo = 0; Lo < dO * nTO; ++Lo)
            for (int rr = 0; rr < R; ++rr)
              K(single_index(nout, j, Lo) * R + rr, (Eigen::Index)j * d * nTI + L) = A((Eigen::Index)Lo * R + rr, L);
      kr.push_back(std::move(K));
    }
    ops.push_back(one_msg_op(na, op.setting, kr, true));
  }

  // Process side: rename the old slots, COPY the arrival time into the message.
  Renames ren;
  for (Pos t : oin.positions) ren.push_back({oin.slot(t), oin.slot(t) + "#ti"});
  for (Pos s : oout.positions) ren.push_back({oout.slot(s), oout.slot(s) + "#ti"});
  rename_all(q.process, ren);
  const std::string pre = "ti." + a.name;
  for (int ti = 0; ti < nTI; ++ti) {
    Pos t = oin.positions[ti];
    std::vector<Reg> ins{{oin.slot(t) + "#ti", d + 1}}, outs{{nin.slot(t), d * nTI + 1}};
    Rules rules;
    rules.push_back({{0}, basis_vec(outs, {0})});
    for (int l = 0; l < d; ++l) rules.push_back({{1 + l}, basis_vec(outs, {1 + l * nTI + ti})});
    q.process.push_back(isometry_from_rules(outs, ins, rules, "~" + pre + ".cj" + std::to_string(ti), pre + ".copy"));
  }

  // Delay line from the new output slots to the old ones. The target slot u of a
  // message fixes its arrival slot, so the memory only holds pending messages.
  std::set<Pos> uset(newTO.begin(), newTO.end());
  uset.insert(oout.positions.begin(), oout.positions.end());
  std::vector<Pos> U = q.st.sorted(std::vector<Pos>(uset.begin(), uset.end()));
  std::vector<std::optional<Pos>> arrival(nTO);
  for (int ti = 0; ti < nTI; ++ti) arrival[pos_index(oout, o.at(oin.positions[ti]))] = newTO[ti];
  const int Dm = 1 + dO * nTO;
  auto pending = [&](int l, int u) { return 1 + l * nTO + u; };
  for (int si = 0; si < (int)U.size(); ++si) {
    Pos s = U[si];
    bool has_new = std::find(newTO.begin(), newTO.end(), s) != newTO.end();
    bool has_old = std::find(oout.positions.begin(), oout.positions.end(), s) != oout.positions.end();
    std::vector<Reg> ins, outs;
    if (has_new) ins.push_back({nout.slot(s), dO * nTO + 1});
    if (si > 0) ins.push_back({pre + ".m" + std::to_string(si - 1), Dm});
    if (has_old) outs.push_back({oout.slot(s) + "#ti", dO + 1});
    bool last = si + 1 == (int)U.size();
    outs.push_back({(last ? "~" : "") + pre + ".m" + std::to_string(si), Dm});
    Rules rules;
    auto rule = [&](int msg, int mem, int emit, int mem2) {
      std::vector<int> in;
      if (has_new) in.push_back(msg);
      if (si > 0) in.push_back(mem);
      std::vector<int> out;
      if (has_old) out.push_back(emit);
      out.push_back(mem2);
      rules.push_back({in, basis_vec(outs, out)});
    };
    rule(0, 0, 0, 0);
    for (int u = 0; u < nTO; ++u) {
      if (!arrival[u]) continue;
      Pos target = oout.positions[u], arr = *arrival[u];
      for (int l = 0; l < dO; ++l) {
        if (has_new && arr == s) {
          if (target == s)
            rule(1 + l * nTO + u, 0, 1 + l, 0);
          else
            rule(1 + l * nTO + u, 0, 0, pending(l, u));
        } else if (si > 0 && q.st.lt(arr, s) && q.st.leq(s, target)) {
          if (target == s)
            rule(0, pending(l, u), 1 + l, 0);
          else
            rule(0, pending(l, u), 0, pending(l, u));
        }
      }
    }
    q.process.push_back(isometry_from_rules(outs, ins, rules, "~" + pre + ".dj" + std::to_string(si),
                                            pre + ".delay"));
  }
  a.in = nin;
  a.out = nout;
  a.ops = std::move(ops);
}

}  // namespace

Protocol time_independent_protocol(const Protocol& p, const OrderFunction& o, bool* applied, double tol) {
  if (!p.st.is_chain()) throw TransformError("time independence needs a total order");
  Protocol q = p;
  bool any = false;
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    const auto& a = p.agents[k];
    if (a.trivial_in() || a.trivial_out()) continue;
    Protocol one;
    one.st = p.st;
    one.agents = {a};
    if (prop_time_independent(one, tol).pass) continue;
    make_agent_time_independent(q, k, o.at(a.name));
    any = true;
  }
  if (applied) *applied = any;
  return q;
}

Protocol one_message_output_protocol(const Protocol& p, bool* applied, double tol) {
  if (prop_one_message_output(p, tol).pass) {
    if (applied) *applied = false;
    return p;
  }
  Protocol q = p;
  for (const auto& a : q.agents) {
    if (a.trivial_in()) continue;
    Wire pre{a.in.name + "#pre", a.in.dim, a.in.positions, a.in.n_slot};
    Renames ren;
    for (Pos t : a.in.positions) ren.push_back({a.in.slot(t), pre.slot(t)});
    rename_all(q.process, ren);
    auto sl = C_one_slices(pre, a.in.name, "one." + a.name);
    q.process.insert(q.process.end(), sl.begin(), sl.end());
  }
  if (applied) *applied = true;
  return q;
}

RelabellingSpec even_odd_relabelling(const Protocol& p) {
  if (!p.st.is_chain()) throw TransformError("even/odd relabelling needs a total order");
  std::vector<int> regular;
  int past = -1, fut = -1;
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    if (is_past_agent(p, k) && past < 0)
      past = k;
    else if (is_future_agent(p, k) && fut < 0)
      fut = k;
    else
      regular.push_back(k);
  }
  const int N = (int)regular.size();
  RelabellingSpec r;
  Pos last = 1;
  auto put = [&](const Wire& w, const std::string& agent, bool input, const std::function<Pos(int)>& f) {
    if (w.trivial()) return;
    SystemMap s{agent, input, {}};
    for (Pos t : w.positions) {
      Pos v = f(chain_rank(p.st, t));
      if (v < 1) throw TransformError("no even/odd slot for " + w.slot(t));
      s.map[t] = v;
      last = std::max(last, v);
    }
    r.maps.systems[w.name] = s;
  };
  for (int i = 0; i < N; ++i) {
    const auto& a = p.agents[regular[i]];
    int kk = i + 1;
    put(a.in, a.name, true, [&](int m) { return 2 * (m - 1) * N + 2 * kk; });
    put(a.out, a.name, false, [&](int m) { return 2 * (m - 2) * N + 2 * kk + 1; });
  }
  if (past >= 0) put(p.agents[past].out, p.agents[past].name, false, [](int) { return 1; });
  if (fut >= 0) put(p.agents[fut].in, p.agents[fut].name, true, [&](int m) { return 2 * (m - 1) * N + 2; });
  Pos res = last + 1;
  r.st2 = Spacetime::chain(1, res);
  if (past >= 0) r.st2.past = 1;
  if (fut >= 0) r.st2.future = r.maps.systems.at(p.agents[fut].in.name).map.begin()->second;
  r.st2.result = res;
  if (p.st.result) r.maps.result = res;
  return r;
}

namespace {

// Order function of an ALO form: the ops of every LO agent must pass ALO.
OrderFunction to_alo_order(const Protocol& p, double tol) {
  auto o = certified_order(p, tol);
  for (int k : lo_agents(p))
    for (const auto& op : p.agents[k].ops)
      if (!check_ALO(p.agents[k], op, o.at(p.agents[k].name), tol).pass)
        throw TransformError("time independence needs ALO operations; run to_alo first");
  return o;
}

}  // namespace

TransformCertificate to_alo(const Protocol& p, double tol) {
  auto o = certified_order(p, tol);
  bool applied = false;
  Protocol q = to_alo_protocol(p, o, &applied, tol);
  return certificate(p, std::move(q), "to-alo", applied, tol);
}

TransformCertificate make_time_independent(const Protocol& p, double tol) {
  bool applied = false;
  Protocol q = time_independent_protocol(p, to_alo_order(p, tol), &applied, tol);
  return certificate(p, std::move(q), "time-independent", applied, tol);
}

TransformCertificate one_message_output(const Protocol& p, double tol) {
  bool applied = false;
  Protocol q = one_message_output_protocol(p, &applied, tol);
  return certificate(p, std::move(q), "one-message-output", applied, tol);
}

TransformCertificate simplify(const Protocol& p, double tol) {
  auto report = certify(p, tol);
  if (!is_process_box(report)) throw CertificationError("simplify needs a process box, got " + report.classification);
  TransformCertificate c;
  c.input = p;
  c.correspondence = Correspondence::identity(p);
  Protocol q = p;
  OrderFunction order;
  // Total order on consecutive stamps.
  {
    bool need = !q.st.is_chain();
    if (need) {
      RelabellingSpec r;
      r.maps = linear_extension(q.st);
      r.st2 = Spacetime::chain(1, q.st.size());
      if (q.st.past) r.st2.past = r.maps.common.at(*q.st.past);
      if (q.st.future) r.st2.future = r.maps.common.at(*q.st.future);
      if (q.st.result) r.st2.result = r.maps.common.at(*q.st.result);
      q = relabelled(q, r);
    }
    c.stages.push_back({"linear-extension", need, need ? "" : "already totally ordered"});
  }
  {
    bool applied = false;
    q = eliminate_trivial_inputs(q, &applied);
    c.stages.push_back({"trivial-input-elimination", applied, applied ? "" : "no trivial inputs"});
  }
  {
    bool applied = false;
    order = certified_order(q, tol);
    q = to_alo_protocol(q, order, &applied, tol);
    c.stages.push_back({"to-alo", applied, applied ? "" : "operations already ALO"});
  }
  {
    bool applied = false;
    q = time_independent_protocol(q, order, &applied, tol);
    c.stages.push_back({"time-independent", applied, applied ? "" : "operations already time independent"});
  }
  {
    bool applied = false;
    q = one_message_output_protocol(q, &applied, tol);
    c.stages.push_back({"one-message-output", applied, applied ? "" : "process already one-message imaged"});
  }
  {
    bool applied = !prop_disjoint_even_odd(q).pass;
    if (applied) q = relabelled(q, even_odd_relabelling(q));
    c.stages.push_back({"even-odd-relabelling", applied, applied ? "" : "stamps already disjoint"});
  }
  q.name = p.name + "_simplified";
  c.output = std::move(q);
  c.equivalence = behavioural_equivalence(c.input, c.output, c.correspondence, tol);
  c.properties = attained_properties(c.output, tol);
  return c;
}

}  // namespace procbox
