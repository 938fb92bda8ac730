#include "procbox/certify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

#include "procbox/qmap.hpp"

namespace procbox {

namespace {

using Renames = std::vector<std::pair<std::string, std::string>>;

std::vector<Reg> suffixed(const Wire& w, const std::string& sfx) {
  auto r = w.regs();
  for (auto& x : r) x.name += sfx;
  return r;
}

Renames wire_renames(const Wire& w, const std::string& sfx) {
  Renames r;
  for (const auto& x : w.regs()) r.push_back({x.name, x.name + sfx});
  return r;
}

std::vector<Channel> rename_net(std::vector<Channel> net, const Renames& r) {
  for (auto& c : net) c = rename(c, r);
  return net;
}

std::vector<std::string> result_names(const Protocol& p) {
  std::vector<std::string> k;
  for (const auto& a : p.agents) k.push_back(a.result());
  return k;
}

Mat results_of(const Protocol& p, const Choice& ch, const OpWrapper& w) {
  return reduced_state(compose_channel(p, ch, w), result_names(p));
}

// Slot-product index of a single message at position index pi with the given level.
std::int64_t single_index(const Wire& w, int pi, int level) {
  std::vector<int> dims(w.positions.size(), w.sdim());
  std::vector<int> dg(w.positions.size(), 0);
  dg[pi] = 1 + level;
  return flat_index(dg, dims);
}

int pos_index(const Wire& w, Pos t) {
  auto it = std::find(w.positions.begin(), w.positions.end(), t);
  if (it == w.positions.end()) throw std::out_of_range("position not on wire " + w.name);
  return (int)(it - w.positions.begin());
}

// Position index of the single occupied slot, -1 if the state is not a single message.
int single_position(const Wire& w, std::int64_t idx) {
  auto occ = occupation(w, idx);
  int total = 0, where = -1;
  for (int k = 0; k < (int)occ.size(); ++k)
    if (occ[k]) total += occ[k], where = k;
  return total == 1 ? where : -1;
}

std::vector<Channel> projected(const Agent& a, std::vector<Channel> net, bool pin, bool pout) {
  if (pin && !a.trivial_in()) {
    net = rename_net(std::move(net), wire_renames(a.in, "#pj"));
    net.push_back(single_kraus(suffixed(a.in, "#pj"), a.in.regs(), one_msg_projector_matrix(a.in, a.in.positions),
                               a.name + ".PI"));
  }
  if (pout && !a.trivial_out()) {
    net = rename_net(std::move(net), wire_renames(a.out, "#pj"));
    net.push_back(single_kraus(a.out.regs(), suffixed(a.out, "#pj"),
                               one_msg_projector_matrix(a.out, a.out.positions), a.name + ".PO"));
  }
  return net;
}

}  // namespace

AOReport check_AO(const Protocol& p, double tol) {
  AOReport r;
  for (const auto& ch : all_choices(p)) {
    Mat plain = compose_protocol(p, ch);
    Mat proj = results_of(p, ch, [&](int k, std::vector<Channel> net) {
      return projected(p.agents[k], std::move(net), true, true);
    });
    double def = 1.0 - proj.trace().real();
    double dist = frob(proj - plain);
    if (def > r.trace_deficit || !r.witness) {
      if (def > r.trace_deficit) r.trace_deficit = def;
      if (def > tol || !r.witness) r.witness = ch;
    }
    r.disturbance = std::max(r.disturbance, dist);
  }
  r.pass = r.trace_deficit <= tol && r.disturbance <= tol;
  if (!r.pass) {
    double worst = -1;
    for (int k = 0; k < (int)p.agents.size(); ++k) {
      Mat s = results_of(p, *r.witness, [&](int j, std::vector<Channel> net) {
        return j == k ? projected(p.agents[j], std::move(net), true, true) : net;
      });
      double d = 1.0 - s.trace().real();
      if (d > worst) worst = d, r.agent = p.agents[k].name;
    }
    r.message = "projected trace deficit " + std::to_string(r.trace_deficit) + ", largest loss at " + r.agent;
  } else {
    r.witness.reset();
  }
  return r;
}

bool valid_order_map(const Agent& a, const OrderMap& o, const Spacetime& st, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (a.trivial_in() || a.trivial_out()) {
    if (!o.empty()) return fail("order map on a trivial wire");
    return true;
  }
  std::set<Pos> used;
  for (Pos t : a.in.positions) {
    auto it = o.find(t);
    if (it == o.end()) return fail("no image for input position " + std::to_string(t));
    Pos s = it->second;
    if (std::find(a.out.positions.begin(), a.out.positions.end(), s) == a.out.positions.end())
      return fail("image " + std::to_string(s) + " is not an output position");
    if (!st.lt(t, s)) return fail("image " + std::to_string(s) + " is not after " + std::to_string(t));
    if (!used.insert(s).second) return fail("not injective at " + std::to_string(s));
  }
  if (o.size() != a.in.positions.size()) return fail("map defined outside the input positions");
  return true;
}

std::vector<OrderMap> order_candidates(const Agent& a, const Spacetime& st, std::size_t cap) {
  std::vector<OrderMap> out;
  if (a.trivial_in() || a.trivial_out()) return {OrderMap{}};
  const auto& ti = a.in.positions;
  OrderMap cur;
  std::set<Pos> used;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == ti.size()) {
      if (out.size() >= cap) throw std::length_error("order candidates exceed the combinatorial cap");
      out.push_back(cur);
      return;
    }
    for (Pos s : a.out.positions) {
      if (used.count(s) || !st.lt(ti[i], s)) continue;
      used.insert(s);
      cur[ti[i]] = s;
      rec(i + 1);
      cur.erase(ti[i]);
      used.erase(s);
    }
  };
  rec(0);
  return out;
}

ALOResult check_ALO(const Agent& a, const AgentOp& op, const OrderMap& o, double tol) {
  ALOResult r;
  if (a.trivial_in() || a.trivial_out()) return r;
  for (Pos t : a.in.positions) {
    if (!o.count(t)) {
      r.pass = false;
      r.message = "order map undefined at " + std::to_string(t);
      r.residual = std::numeric_limits<double>::infinity();
      return r;
    }
    Channel m = restricted_at(a, op, t);
    Mat perp = Mat::Identity(a.out.total_dim(), a.out.total_dim()) - one_msg_projector_matrix(a.out, {o.at(t)});
    Channel leak = then_inplace(m, single_kraus(a.out.regs(), a.out.regs(), perp));
    double res = frob(kraus_sum(leak));
    r.residual = std::max(r.residual, res);
  }
  r.pass = r.residual <= tol;
  if (!r.pass) r.message = "output weight outside O(t): " + std::to_string(r.residual);
  return r;
}

std::vector<Channel> p_eff_network(const Agent& a, const AgentOp& op, const OrderMap& o) {
  auto net = op.net;
  if (a.trivial_in()) return net;
  int nT = (int)a.in.positions.size();
  Reg anc{a.name + ".pe.a", nT};
  std::int64_t Di = a.in.total_dim();
  Mat pi = Mat::Zero(Di * nT, Di);
  for (std::int64_t x = 0; x < Di; ++x) {
    int w = single_position(a.in, x);
    if (w >= 0) pi(x * nT + w, x) = 1.0;
  }
  auto pi_outs = suffixed(a.in, "#pe");
  pi_outs.push_back(anc);
  net = rename_net(std::move(net), wire_renames(a.in, "#pe"));
  net.insert(net.begin(), single_kraus(pi_outs, a.in.regs(), pi, a.name + ".PI"));
  if (a.trivial_out()) {
    net.push_back(discard({anc}));
    return net;
  }
  std::int64_t Do = a.out.total_dim();
  Mat po = Mat::Zero(Do, Do * nT);
  for (std::int64_t y = 0; y < Do; ++y) {
    int w = single_position(a.out, y);
    if (w < 0) continue;
    for (int ti = 0; ti < nT; ++ti) {
      auto it = o.find(a.in.positions[ti]);
      if (it != o.end() && it->second == a.out.positions[w]) po(y, y * nT + ti) = 1.0;
    }
  }
  auto po_ins = suffixed(a.out, "#pe");
  po_ins.push_back(anc);
  net = rename_net(std::move(net), wire_renames(a.out, "#pe"));
  net.push_back(single_kraus(a.out.regs(), po_ins, po, a.name + ".PO"));
  return net;
}

Channel p_eff(const Agent& a, const AgentOp& op, const OrderMap& o) { return close(p_eff_network(a, op, o)); }

Channel p_eff_direct(const Agent& a, const AgentOp& op, const OrderMap& o) {
  Channel tmpl;
  tmpl.outs = a.out.regs();
  tmpl.outs.push_back(a.result_reg());
  tmpl.ins = a.in.regs();
  Channel m = align_to(op.closed(), tmpl);
  Channel r{m.outs, m.ins, {}, a.name + ".Peff"};
  std::int64_t R = a.outcome_dim;
  for (const auto& k : m.kraus) {
    Mat acc = Mat::Zero(k.rows(), k.cols());
    if (a.trivial_in()) {
      acc = k;
    } else {
      for (Pos t : a.in.positions) {
        Mat pin = one_msg_projector_matrix(a.in, {t});
        Mat pout = a.trivial_out() ? Mat::Identity(1, 1) : one_msg_projector_matrix(a.out, {o.at(t)});
        acc += kron(pout, Mat::Identity(R, R)) * k * pin;
      }
    }
    r.kraus.push_back(acc);
  }
  return r;
}

std::vector<int> lo_agents(const Protocol& p) {
  std::vector<int> r;
  for (int k = 0; k < (int)p.agents.size(); ++k)
    if (!p.agents[k].trivial_in() && !p.agents[k].trivial_out()) r.push_back(k);
  return r;
}

double lo_deficit(const Protocol& p, int agent, const OrderMap& o, std::optional<Choice>* witness) {
  const auto& a = p.agents[agent];
  if (!valid_order_map(a, o, p.st)) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& ch : all_choices(p)) {
    Mat eff = results_of(p, ch, [&](int k, std::vector<Channel> net) {
      if (k != agent) return net;
      AgentOp tmp{"", net};
      return p_eff_network(a, tmp, o);
    });
    Mat ref = results_of(p, ch, [&](int k, std::vector<Channel> net) {
      return k == agent ? projected(a, std::move(net), true, false) : net;
    });
    double d = frob(eff - ref);
    if (d > worst) {
      worst = d;
      if (witness) *witness = ch;
    }
  }
  return worst;
}

LOReport check_LO(const Protocol& p, const OrderFunction& o, double tol) {
  LOReport r;
  r.order = o;
  for (int k : lo_agents(p)) {
    const auto& a = p.agents[k];
    auto it = o.find(a.name);
    std::string why;
    if (it == o.end() || !valid_order_map(a, it->second, p.st, &why)) {
      r.pass = false;
      r.agent = a.name;
      r.deficit = std::numeric_limits<double>::infinity();
      r.message = "invalid order map for " + a.name + (why.empty() ? "" : ": " + why);
      return r;
    }
    std::optional<Choice> w;
    double d = lo_deficit(p, k, it->second, &w);
    if (d > r.deficit) r.deficit = d;
    if (d > tol && r.pass) {
      r.pass = false;
      r.agent = a.name;
      r.witness = w;
      r.message = "LO deficit " + std::to_string(d) + " at " + a.name;
    }
  }
  return r;
}

OrderSearch search_order_functions(const Protocol& p, double tol, std::size_t cap) {
  OrderSearch s;
  auto ags = lo_agents(p);
  for (int k : ags) {
    const auto& a = p.agents[k];
    auto& pass = s.passing[a.name];
    for (const auto& o : order_candidates(a, p.st, cap)) {
      ++s.tested;
      if (lo_deficit(p, k, o) <= tol) pass.push_back(o);
    }
  }
  std::vector<OrderFunction> acc{OrderFunction{}};
  for (int k : ags) {
    const auto& pass = s.passing[p.agents[k].name];
    std::vector<OrderFunction> next;
    for (const auto& f : acc)
      for (const auto& o : pass) {
        if (next.size() >= cap) throw std::length_error("order functions exceed the combinatorial cap");
        auto g = f;
        g[p.agents[k].name] = o;
        next.push_back(std::move(g));
      }
    acc = std::move(next);
  }
  s.functions = std::move(acc);
  return s;
}

namespace {

// Per agent: block entries (row index into the agent's one-message input space or -1,
// column index into its one-message output space or -1, input position index).
struct Block {
  std::vector<int> in_idx, out_idx, t_idx, lo, li;
};

Block agent_block(const Agent& a, const OrderMap& o) {
  Block b;
  bool hi = !a.trivial_in(), ho = !a.trivial_out();
  if (hi && ho) {
    for (int ti = 0; ti < (int)a.in.positions.size(); ++ti) {
      int si = pos_index(a.out, o.at(a.in.positions[ti]));
      for (int li = 0; li < a.in.dim; ++li)
        for (int lo = 0; lo < a.out.dim; ++lo) {
          b.in_idx.push_back(ti * a.in.dim + li);
          b.out_idx.push_back(si * a.out.dim + lo);
          b.t_idx.push_back(ti);
          b.li.push_back(li);
          b.lo.push_back(lo);
        }
    }
  } else if (hi) {
    for (int i = 0; i < a.in.one_msg_dim(); ++i) {
      b.in_idx.push_back(i);
      b.out_idx.push_back(-1);
      b.t_idx.push_back(i / a.in.dim);
      b.li.push_back(i % a.in.dim);
      b.lo.push_back(-1);
    }
  } else if (ho) {
    for (int i = 0; i < a.out.one_msg_dim(); ++i) {
      b.in_idx.push_back(-1);
      b.out_idx.push_back(i);
      b.t_idx.push_back(-1);
      b.li.push_back(-1);
      b.lo.push_back(i % a.out.dim);
    }
  } else {
    b.in_idx.push_back(-1);
    b.out_idx.push_back(-1);
    b.t_idx.push_back(-1);
    b.li.push_back(-1);
    b.lo.push_back(-1);
  }
  return b;
}

}  // namespace

EffectiveChoi effective_choi(const Protocol& p, const OrderFunction& o, std::int64_t cap) {
  EffectiveChoi e;
  e.order = o;
  std::vector<Block> blocks;
  std::int64_t total = 1;
  for (const auto& a : p.agents) {
    OrderMap om;
    if (!a.trivial_in() && !a.trivial_out()) {
      auto it = o.find(a.name);
      if (it == o.end() || !valid_order_map(a, it->second, p.st))
        throw CertificationError("effective_choi: no valid order map for " + a.name);
      om = it->second;
    }
    blocks.push_back(agent_block(a, om));
    e.dims.push_back((int)blocks.back().in_idx.size());
    total *= e.dims.back();
  }
  if (total > cap) throw std::length_error("effective_choi: dimension " + std::to_string(total) + " exceeds cap");

  auto net = process_network(p);
  Channel tmpl;
  for (const auto& a : p.agents) {
    if (!a.trivial_in()) {
      Reg r{"eff.i." + a.name, a.in.one_msg_dim()};
      net.push_back(single_kraus({r}, a.in.regs(), one_msg_embedding(a.in).adjoint()));
      tmpl.outs.push_back(r);
    }
    if (!a.trivial_out()) {
      Reg r{"eff.o." + a.name, a.out.one_msg_dim()};
      net.push_back(single_kraus(a.out.regs(), {r}, one_msg_embedding(a.out)));
      tmpl.ins.push_back(r);
    }
  }
  Channel c = align_to(close(net), tmpl);
  std::vector<int> rd, cd;
  for (const auto& r : tmpl.outs) rd.push_back(r.dim);
  for (const auto& r : tmpl.ins) cd.push_back(r.dim);
  Mat V(total, (Eigen::Index)c.kraus.size());
  std::vector<int> edims = e.dims;
  for (std::int64_t x = 0; x < total; ++x) {
    auto ed = digits(x, edims);
    std::vector<int> rdg, cdg;
    for (int k = 0; k < (int)p.agents.size(); ++k) {
      const auto& b = blocks[k];
      if (!p.agents[k].trivial_in()) rdg.push_back(b.in_idx[ed[k]]);
      if (!p.agents[k].trivial_out()) cdg.push_back(b.out_idx[ed[k]]);
    }
    std::int64_t row = flat_index(rdg, rd), col = flat_index(cdg, cd);
    for (int j = 0; j < (int)c.kraus.size(); ++j) V(x, j) = c.kraus[j](row, col);
  }
  e.m = V * V.adjoint();
  return e;
}

Mat effective_compose(const Protocol& p, const EffectiveChoi& e, const Choice& choice) {
  int N = (int)p.agents.size();
  Eigen::SelfAdjointEigenSolver<Mat> es(e.m);
  double mx = std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  std::vector<int> keep;
  for (int j = 0; j < es.eigenvalues().size(); ++j)
    if (es.eigenvalues()(j) > 1e-13 * mx) keep.push_back(j);
  Tensor t;
  for (int k = 0; k < N; ++k) t.legs.push_back({"e" + std::to_string(k), e.dims[k], LegKind::Free, k});
  t.legs.push_back({"j", (int)std::max<std::size_t>(1, keep.size()), LegKind::Free, N});
  std::int64_t total = e.m.rows();
  std::int64_t nj = t.legs.back().dim;
  t.data.assign(total * nj, cplx(0));
  for (std::int64_t x = 0; x < total; ++x)
    for (int jj = 0; jj < (int)keep.size(); ++jj)
      t.data[x * nj + jj] = std::sqrt(es.eigenvalues()(keep[jj])) * es.eigenvectors()(x, keep[jj]);

  for (int k = 0; k < N; ++k) {
    const auto& a = p.agents[k];
    OrderMap om;
    if (!a.trivial_in() && !a.trivial_out()) om = e.order.at(a.name);
    Block b = agent_block(a, om);
    const auto& op = a.ops[choice[k]];
    Channel tmpl;
    tmpl.outs = a.out.regs();
    tmpl.outs.push_back(a.result_reg());
    if (!a.trivial_in()) tmpl.ins = {Reg{a.name + ".msg", a.in.one_msg_dim()}};
    Channel m = a.trivial_in() ? close(agent_network(a, op)) : restricted_one(a, op);
    m = align_to(m, tmpl);
    int R = a.outcome_dim, nK = (int)m.kraus.size();
    Mat W = Mat::Zero((Eigen::Index)b.in_idx.size(), (Eigen::Index)R * nK);
    for (int x = 0; x < (int)b.in_idx.size(); ++x) {
      std::int64_t orow = 0;
      if (!a.trivial_out()) orow = single_index(a.out, b.out_idx[x] / a.out.dim, b.out_idx[x] % a.out.dim);
      int icol = a.trivial_in() ? 0 : b.in_idx[x];
      for (int r = 0; r < R; ++r)
        for (int q = 0; q < nK; ++q) W(x, r * nK + q) = m.kraus[q](orow * R + r, icol);
    }
    int pos = t.find("e" + std::to_string(k), LegKind::Free);
    std::vector<int> perm{pos};
    for (int i = 0; i < (int)t.legs.size(); ++i)
      if (i != pos) perm.push_back(i);
    t = permute(t, perm);
    std::int64_t Ek = t.legs[0].dim, rest = t.size() / Ek;
    Eigen::Map<const RowMat> M(t.data.data(), Ek, rest);
    RowMat out = W.transpose() * M;
    Tensor nt;
    nt.legs.push_back({"r" + std::to_string(k), R, LegKind::Free, 0});
    nt.legs.push_back({"q" + std::to_string(k), nK, LegKind::Free, 0});
    nt.legs.insert(nt.legs.end(), t.legs.begin() + 1, t.legs.end());
    nt.data.assign(out.data(), out.data() + out.size());
    t = std::move(nt);
  }
  std::vector<int> perm;
  std::int64_t dr = 1;
  for (int k = 0; k < N; ++k) {
    int i = t.find("r" + std::to_string(k), LegKind::Free);
    perm.push_back(i);
    dr *= t.legs[i].dim;
  }
  for (int i = 0; i < (int)t.legs.size(); ++i)
    if (std::find(perm.begin(), perm.end(), i) == perm.end()) perm.push_back(i);
  t = permute(t, perm);
  Eigen::Map<const RowMat> A(t.data.data(), dr, t.size() / dr);
  return A * A.adjoint();
}

namespace {

int pattern_dim(const Wire& w) {
  int d = 1;
  for (size_t i = 0; i < w.positions.size(); ++i) d *= 3;
  return d;
}

int pattern_of(const Wire& w, std::int64_t idx) {
  int p = 0;
  for (int c : occupation(w, idx)) p = p * 3 + std::min(c, 2);
  return p;
}

std::vector<int> decode_pattern(int p, int n) {
  std::vector<int> c(n);
  for (int i = n - 1; i >= 0; --i) c[i] = p % 3, p /= 3;
  return c;
}

}  // namespace

std::vector<MessageStats> message_statistics(const Protocol& p) {
  std::vector<MessageStats> out;
  auto choices = all_choices(p);
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    const auto& a = p.agents[k];
    if (a.trivial_in() && a.trivial_out()) continue;
    MessageStats s;
    s.agent = a.name;
    std::vector<std::string> keep;
    std::vector<Channel> rec_in, rec_out;
    if (!a.trivial_in()) {
      Reg rr{"REC." + a.name + ".I", pattern_dim(a.in)};
      std::int64_t D = a.in.total_dim();
      Mat v = Mat::Zero(D * rr.dim, D);
      for (std::int64_t x = 0; x < D; ++x) v(x * rr.dim + pattern_of(a.in, x), x) = 1.0;
      auto outs = suffixed(a.in, "#rc");
      outs.push_back(rr);
      rec_in.push_back(single_kraus(outs, a.in.regs(), v));
      keep.push_back(rr.name);
    }
    if (!a.trivial_out()) {
      Reg rr{"REC." + a.name + ".O", pattern_dim(a.out)};
      std::int64_t D = a.out.total_dim();
      Mat v = Mat::Zero(D * rr.dim, D);
      for (std::int64_t x = 0; x < D; ++x) v(x * rr.dim + pattern_of(a.out, x), x) = 1.0;
      auto outs = a.out.regs();
      outs.push_back(rr);
      rec_out.push_back(single_kraus(outs, suffixed(a.out, "#rc"), v));
      keep.push_back(rr.name);
    }
    int pin = a.trivial_in() ? 1 : pattern_dim(a.in), pout = a.trivial_out() ? 1 : pattern_dim(a.out);
    for (const auto& ch : choices) {
      Channel c = compose_channel(p, ch, [&](int j, std::vector<Channel> net) {
        if (j != k) return net;
        if (!a.trivial_in()) {
          net = rename_net(std::move(net), wire_renames(a.in, "#rc"));
          net.insert(net.end(), rec_in.begin(), rec_in.end());
        }
        if (!a.trivial_out()) {
          net = rename_net(std::move(net), wire_renames(a.out, "#rc"));
          net.insert(net.end(), rec_out.begin(), rec_out.end());
        }
        return net;
      });
      Mat rho = reduced_state(c, keep);
      double in0 = 0, inm = 0, out0 = 0, outm = 0, early = 0;
      for (int i = 0; i < pin; ++i)
        for (int o = 0; o < pout; ++o) {
          double pr = std::max(0.0, rho((Eigen::Index)i * pout + o, (Eigen::Index)i * pout + o).real());
          if (pr == 0.0) continue;
          int ni = 0, no = 0;
          std::vector<int> ci, co;
          if (!a.trivial_in()) {
            ci = decode_pattern(i, (int)a.in.positions.size());
            for (int c2 : ci) ni += c2;
            if (ni == 0) in0 += pr;
            if (ni >= 2) inm += pr;
          }
          if (!a.trivial_out()) {
            co = decode_pattern(o, (int)a.out.positions.size());
            for (int c2 : co) no += c2;
            if (no == 0) out0 += pr;
            if (no >= 2) outm += pr;
          }
          if (ni > 0 && no > 0) {
            bool found = false;
            for (int so = 0; so < (int)co.size() && !found; ++so) {
              if (!co[so]) continue;
              bool before_all = true;
              for (int ti = 0; ti < (int)ci.size(); ++ti)
                if (ci[ti] && !p.st.lt(a.out.positions[so], a.in.positions[ti])) before_all = false;
              found = before_all;
            }
            if (found) early += pr;
          }
        }
      s.p_in_zero = std::max(s.p_in_zero, in0);
      s.p_in_multi = std::max(s.p_in_multi, inm);
      s.p_out_zero = std::max(s.p_out_zero, out0);
      s.p_out_multi = std::max(s.p_out_multi, outm);
      s.p_early = std::max(s.p_early, early);
    }
    out.push_back(s);
  }
  return out;
}

std::string classify_violation(const AOReport& ao, const LOReport& lo, const std::vector<MessageStats>& stats,
                               double tol) {
  if (ao.pass && lo.pass) return "process-box";
  bool sao = false, slo = false;
  for (const auto& s : stats) {
    if (s.p_in_multi > tol || s.p_out_multi > tol) sao = true;
    if (s.p_early > tol) slo = true;
  }
  sao = sao && !ao.pass;
  slo = slo && !lo.pass;
  if (sao && slo) return "strong-both";
  if (sao) return "strong-AO";
  if (slo) return "strong-LO";
  if (!ao.pass && !lo.pass) return "weak-both";
  return ao.pass ? "weak-LO" : "weak-AO";
}

CertificationReport certify(const Protocol& p, double tol) {
  CertificationReport r;
  r.ao = check_AO(p, tol);
  auto s = search_order_functions(p, tol);
  r.orders_tested = s.tested;
  if (!s.functions.empty()) {
    r.lo = check_LO(p, s.functions.front(), tol);
  } else {
    r.lo.pass = false;
    r.lo.deficit = std::numeric_limits<double>::infinity();
    for (int k : lo_agents(p)) {
      const auto& a = p.agents[k];
      if (!s.passing[a.name].empty()) continue;
      r.lo.agent = a.name;
      double best = std::numeric_limits<double>::infinity();
      std::optional<Choice> w;
      for (const auto& o : order_candidates(a, p.st)) {
        std::optional<Choice> wc;
        double d = lo_deficit(p, k, o, &wc);
        if (d < best) best = d, w = wc, r.lo.order = {{a.name, o}};
      }
      r.lo.deficit = best;
      r.lo.witness = w;
      r.lo.message = std::isinf(best) ? "no admissible order map for " + a.name
                                      : "no order map passes LO for " + a.name;
      break;
    }
  }
  for (int k : lo_agents(p)) {
    const auto& a = p.agents[k];
    auto it = r.lo.order.find(a.name);
    if (it == r.lo.order.end()) continue;
    auto& row = r.alo[a.name];
    for (const auto& op : a.ops) row.push_back(check_ALO(a, op, it->second, tol).pass);
  }
  if (!is_process_box(r)) r.stats = message_statistics(p);
  r.classification = classify_violation(r.ao, r.lo, r.stats, tol);
  return r;
}

OrderFunction certified_order(const Protocol& p, double tol) {
  auto r = certify(p, tol);
  if (!is_process_box(r)) throw CertificationError("protocol is not a process box: " + r.classification);
  return r.lo.order;
}

}  // namespace procbox
