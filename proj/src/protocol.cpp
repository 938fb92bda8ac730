#include "procbox/protocol.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "procbox/qmap.hpp"

namespace procbox {

Channel AgentOp::closed() const { return close(net); }

Agent make_agent(const std::string& name, int din, std::vector<Pos> tin, int dout, std::vector<Pos> tout,
                 int outcome_dim, int n_slot) {
  Agent a;
  a.name = name;
  a.in = Wire{name + ".I", din, std::move(tin), n_slot};
  a.out = Wire{name + ".O", dout, std::move(tout), n_slot};
  a.outcome_dim = outcome_dim;
  return a;
}

int Protocol::agent_index(const std::string& n) const {
  for (int i = 0; i < (int)agents.size(); ++i)
    if (agents[i].name == n) return i;
  throw std::invalid_argument("no agent " + n);
}

Channel Protocol::closed_process() const { return close(process_network(*this)); }

AgentOp make_op(const std::string& setting, std::vector<Channel> net) { return AgentOp{setting, std::move(net)}; }

Channel result_state(const Agent& a, int value) {
  Vec v = Vec::Zero(a.outcome_dim);
  v(value) = 1.0;
  return state_channel({a.result_reg()}, {v}, a.name + ".r");
}

AgentOp per_slot_op(const Agent& a, const std::string& setting, const std::vector<std::vector<Mat>>& kraus,
                    int shift, int value) {
  if (a.in.n_slot != 1 || a.out.n_slot != 1) throw std::invalid_argument("per_slot_op: needs single-message slots");
  if (kraus.size() != a.in.positions.size()) throw std::invalid_argument("per_slot_op: one map per input slot");
  std::vector<Channel> net;
  std::set<Pos> covered;
  for (size_t i = 0; i < kraus.size(); ++i) {
    Pos t = a.in.positions[i], s = t + shift;
    if (std::find(a.out.positions.begin(), a.out.positions.end(), s) == a.out.positions.end())
      throw std::invalid_argument("per_slot_op: no output slot at " + std::to_string(s));
    Channel c;
    c.outs = {{a.out.slot(s), a.out.sdim()}};
    c.ins = {{a.in.slot(t), a.in.sdim()}};
    c.tag = a.name + ".slot@" + std::to_string(t);
    for (size_t j = 0; j < kraus[i].size(); ++j) {
      const Mat& u = kraus[i][j];
      if (u.cols() != a.in.dim || u.rows() != a.out.dim) throw std::invalid_argument("per_slot_op: shape mismatch");
      Mat k = Mat::Zero(a.out.sdim(), a.in.sdim());
      if (j == 0) k(0, 0) = 1.0;
      k.bottomRightCorner(a.out.dim, a.in.dim) = u;
      c.kraus.push_back(std::move(k));
    }
    net.push_back(std::move(c));
    covered.insert(s);
  }
  for (Pos s : a.out.positions)
    if (!covered.count(s)) {
      Vec v = Vec::Zero(a.out.sdim());
      v(0) = 1.0;
      net.push_back(state_channel({{a.out.slot(s), a.out.sdim()}}, {v}));
    }
  net.push_back(result_state(a, value));
  return make_op(setting, std::move(net));
}

AgentOp unitary_slot_op(const Agent& a, const std::string& setting, const std::vector<Mat>& per_time, int shift) {
  std::vector<std::vector<Mat>> k;
  for (const auto& u : per_time) k.push_back({u});
  return per_slot_op(a, setting, k, shift, 0);
}

AgentOp one_msg_op(const Agent& a, const std::string& setting, const std::vector<Mat>& kraus_one, bool strict,
                   double tol) {
  auto net = extend_to_fock_net(kraus_one, a.in, a.out, {a.result_reg()}, strict, "ext", tol);
  return make_op(setting, std::move(net));
}

AgentOp prepare_op(const Agent& a, const std::string& setting, const std::vector<Vec>& states) {
  auto outs = a.out.regs();
  outs.push_back(a.result_reg());
  return make_op(setting, {state_channel(outs, states, a.name + ".prep")});
}

AgentOp measure_op(const Agent& a, const std::string& setting, const std::vector<Mat>& kraus_one) {
  Wire none{a.name + ".O", 0, {}, 1};
  auto net = extend_to_fock_net(kraus_one, a.in, none, {a.result_reg()}, false, "ext");
  return make_op(setting, std::move(net));
}

namespace {

std::string prefixed(const std::string& owner, const std::string& n) {
  if (!n.empty() && n[0] == '~') return "~" + owner + "/" + n.substr(1);
  return owner + "/" + n;
}

void prefix_internal(std::vector<Channel>& net, const std::set<std::string>& keep, const std::string& owner) {
  for (auto& c : net) {
    for (auto& r : c.outs)
      if (!keep.count(r.name)) r.name = prefixed(owner, r.name);
    for (auto& r : c.ins)
      if (!keep.count(r.name)) r.name = prefixed(owner, r.name);
  }
}

std::set<std::string> agent_regs(const Agent& a) {
  std::set<std::string> s;
  for (const auto& r : a.in.regs()) s.insert(r.name);
  for (const auto& r : a.out.regs()) s.insert(r.name);
  s.insert(a.result());
  return s;
}

struct Ports {
  std::map<std::string, int> ins, outs;
};

Ports open_ports(const std::vector<Channel>& net) {
  std::map<std::string, int> o, i;
  for (const auto& c : net) {
    for (const auto& r : c.outs)
      if (r.name.empty() || r.name[0] != '~') o[r.name] = r.dim;
    for (const auto& r : c.ins) i[r.name] = r.dim;
  }
  Ports p;
  for (auto& [n, d] : o)
    if (!i.count(n)) p.outs[n] = d;
  for (auto& [n, d] : i)
    if (!o.count(n)) p.ins[n] = d;
  return p;
}

}  // namespace

std::vector<Channel> agent_network(const Agent& a, const AgentOp& op) {
  auto net = op.net;
  prefix_internal(net, agent_regs(a), a.name);
  return net;
}

std::vector<Channel> process_network(const Protocol& p) {
  std::set<std::string> keep;
  for (const auto& a : p.agents)
    for (const auto& n : agent_regs(a)) keep.insert(n);
  auto net = p.process;
  prefix_internal(net, keep, "C");
  return net;
}

Channel embed_channel(const Wire& w, const std::string& msg, const PosSet& region) {
  Mat e = one_msg_embedding(w);
  Mat sel(e.rows(), (std::int64_t)region.size() * w.dim);
  for (size_t r = 0; r < region.size(); ++r) {
    int ti = -1;
    for (int i = 0; i < (int)w.positions.size(); ++i)
      if (w.positions[i] == region[r]) ti = i;
    if (ti < 0) throw std::invalid_argument("embed_channel: position not on wire");
    sel.middleCols(r * w.dim, w.dim) = e.middleCols((std::int64_t)ti * w.dim, w.dim);
  }
  return single_kraus(w.regs(), {{msg, (int)sel.cols()}}, sel, "E[" + w.name + "]");
}

Channel restricted_at(const Agent& a, const AgentOp& op, Pos t) {
  auto net = agent_network(a, op);
  net.push_back(embed_channel(a.in, a.name + ".msg", {t}));
  return close(net);
}

Channel restricted_one(const Agent& a, const AgentOp& op) {
  auto net = agent_network(a, op);
  net.push_back(embed_channel(a.in, a.name + ".msg", a.in.positions));
  return close(net);
}

Report structural_causality(const std::vector<Channel>& net, const Spacetime& st) {
  std::map<std::string, int> producer;
  std::set<std::string> consumed;
  for (int i = 0; i < (int)net.size(); ++i) {
    for (const auto& r : net[i].outs)
      if (r.name[0] != '~') producer[r.name] = i;
    for (const auto& r : net[i].ins) consumed.insert(r.name);
  }
  std::vector<int> state(net.size(), 0);
  std::vector<std::set<Pos>> up(net.size());
  bool cyclic = false;
  std::function<void(int)> visit = [&](int i) {
    if (state[i] == 2) return;
    if (state[i] == 1) {
      cyclic = true;
      return;
    }
    state[i] = 1;
    for (const auto& r : net[i].ins) {
      auto it = producer.find(r.name);
      if (it != producer.end()) {
        visit(it->second);
        up[i].insert(up[it->second].begin(), up[it->second].end());
      } else {
        Pos t;
        if (slot_time(r.name, t)) up[i].insert(t);
      }
    }
    state[i] = 2;
  };
  for (int i = 0; i < (int)net.size(); ++i) visit(i);
  if (cyclic) return {false, "network has a feedback loop", std::nullopt, 0.0};
  for (int i = 0; i < (int)net.size(); ++i)
    for (const auto& r : net[i].outs) {
      if (r.name[0] == '~' || consumed.count(r.name)) continue;
      Pos t;
      if (!slot_time(r.name, t)) return {false, "open output without time stamp: " + r.name, std::nullopt, 0.0};
      for (Pos s : up[i])
        if (!st.lt(s, t))
          return {false, "output " + r.name + " depends on the input at " + std::to_string(s), PosSet{s, t}, 0.0};
    }
  return {true, "causal by construction", std::nullopt, 0.0};
}

Report validate(const Protocol& p, double tol) {
  Report rep;
  auto fail = [&](const std::string& m) {
    rep.pass = false;
    if (rep.message.empty()) rep.message = m;
  };
  std::map<std::string, int> want_in, want_out;
  for (const auto& a : p.agents) {
    if (a.in.name != a.name + ".I" || a.out.name != a.name + ".O") fail("agent " + a.name + ": wire names");
    for (Pos t : a.in.positions)
      if (!p.st.contains(t)) fail("agent " + a.name + ": input position " + std::to_string(t) + " not in spacetime");
    for (Pos t : a.out.positions)
      if (!p.st.contains(t)) fail("agent " + a.name + ": output position " + std::to_string(t) + " not in spacetime");
    for (const auto& r : a.in.regs()) want_out[r.name] = r.dim;
    for (const auto& r : a.out.regs()) want_in[r.name] = r.dim;
    if (a.ops.empty()) fail("agent " + a.name + ": no operations");
    for (const auto& op : a.ops) {
      auto ports = open_ports(op.net);
      std::map<std::string, int> ei, eo;
      for (const auto& r : a.in.regs()) ei[r.name] = r.dim;
      for (const auto& r : a.out.regs()) eo[r.name] = r.dim;
      eo[a.result()] = a.outcome_dim;
      if (ports.ins != ei) fail("agent " + a.name + " op " + op.setting + ": input registers do not match the wire");
      if (ports.outs != eo)
        fail("agent " + a.name + " op " + op.setting + ": output registers do not match the wire and result");
    }
  }
  auto ports = open_ports(p.process);
  if (ports.ins != want_in) fail("process inputs do not match the agent output slots");
  if (ports.outs != want_out) fail("process outputs do not match the agent input slots");
  if (rep.pass && p.chi) {
    auto net = process_network(p);
    Report sr = structural_causality(net, p.st);
    bool remove_max = p.chi->table == remove_maximal_chi(p.st).table;
    if (!(sr.pass && remove_max)) {
      Channel c = close(net);
      if ((double)c.in_dim() * (double)c.out_dim() <= (double)(1 << 16)) {
        Report cr = check_causality(c, p.st, *p.chi, tol);
        if (!cr.pass) {
          rep.pass = false;
          rep.message = "process: " + cr.message;
          rep.witness = cr.witness;
        }
      } else {
        rep.pass = false;
        rep.message = "process: " + (sr.pass ? std::string("too large for the numeric causality check") : sr.message);
        rep.witness = sr.witness;
      }
    }
  }
  if (rep.pass) rep.message = "ok";
  return rep;
}

std::vector<Choice> all_choices(const Protocol& p) {
  std::vector<Choice> out{Choice{}};
  for (const auto& a : p.agents) {
    std::vector<Choice> nx;
    for (const auto& c : out)
      for (int i = 0; i < (int)a.ops.size(); ++i) {
        auto d = c;
        d.push_back(i);
        nx.push_back(std::move(d));
      }
    out = std::move(nx);
  }
  return out;
}

Channel compose_channel(const Protocol& p, const Choice& choice, const OpWrapper& wrap,
                        const std::vector<Channel>& extra) {
  if (choice.size() != p.agents.size()) throw std::invalid_argument("compose: one setting per agent required");
  auto net = process_network(p);
  for (int k = 0; k < (int)p.agents.size(); ++k) {
    const auto& a = p.agents[k];
    if (choice[k] < 0 || choice[k] >= (int)a.ops.size())
      throw std::invalid_argument("compose: setting out of range for " + a.name);
    auto an = agent_network(a, a.ops[choice[k]]);
    if (wrap) an = wrap(k, std::move(an));
    net.insert(net.end(), an.begin(), an.end());
  }
  net.insert(net.end(), extra.begin(), extra.end());
  return close(net);
}

std::vector<int> result_dims(const Protocol& p) {
  std::vector<int> d;
  for (const auto& a : p.agents) d.push_back(a.outcome_dim);
  return d;
}

Mat compose_protocol(const Protocol& p, const Choice& choice) {
  Channel c = compose_channel(p, choice);
  if (!c.ins.empty()) throw std::invalid_argument("compose: wire mismatch, unmatched input " + c.ins[0].name);
  std::vector<std::string> keep;
  for (const auto& a : p.agents) keep.push_back(a.result());
  for (const auto& r : c.outs)
    if (r.name[0] != '~' && std::find(keep.begin(), keep.end(), r.name) == keep.end())
      throw std::invalid_argument("compose: wire mismatch, unmatched output " + r.name);
  return reduced_state(c, keep);
}

Distribution outcome_distribution(const Protocol& p, const std::vector<Choice>& choices) {
  Distribution d;
  d.outcome_dims = result_dims(p);
  d.choices = choices.empty() ? all_choices(p) : choices;
  for (const auto& c : d.choices) {
    Mat rho = compose_protocol(p, c);
    std::vector<double> pr(rho.rows());
    for (Eigen::Index i = 0; i < rho.rows(); ++i) pr[i] = std::max(0.0, rho(i, i).real());
    d.probs.push_back(std::move(pr));
  }
  return d;
}

double gyni_value(const Protocol& p, const std::string& an, const std::string& bn) {
  int ia = p.agent_index(an), ib = p.agent_index(bn);
  for (int i : {ia, ib})
    if (p.agents[i].outcome_dim != 2 || p.agents[i].ops.size() != 2)
      throw std::invalid_argument("gyni_value: agent " + p.agents[i].name + " needs bit settings and outcomes");
  auto dims = result_dims(p);
  double win = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      Choice c(p.agents.size(), 0);
      c[ia] = x, c[ib] = y;
      Mat rho = compose_protocol(p, c);
      for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        auto dg = digits(i, dims);
        if (dg[ia] == y && dg[ib] == x) win += rho(i, i).real();
      }
    }
  return win / 4.0;
}

Correspondence Correspondence::identity(const Protocol& p) {
  Correspondence c;
  for (const auto& a : p.agents) {
    std::vector<int> m;
    for (int i = 0; i < (int)a.ops.size(); ++i) m.push_back(i);
    c.ops.push_back(std::move(m));
  }
  return c;
}

EquivalenceReport behavioural_equivalence(const Protocol& p1, const Protocol& p2, const Correspondence& c,
                                          double tol, const std::vector<Choice>& choices) {
  if (p1.agents.size() != p2.agents.size() || c.ops.size() != p1.agents.size())
    throw std::invalid_argument("behavioural_equivalence: agent count mismatch");
  for (size_t k = 0; k < p1.agents.size(); ++k) {
    if (c.ops[k].size() != p1.agents[k].ops.size() || p2.agents[k].ops.size() != p1.agents[k].ops.size())
      throw std::invalid_argument("behavioural_equivalence: correspondence not bijective for " + p1.agents[k].name);
    std::set<int> img(c.ops[k].begin(), c.ops[k].end());
    if ((int)img.size() != (int)c.ops[k].size() || *img.begin() < 0 ||
        *img.rbegin() >= (int)p2.agents[k].ops.size())
      throw std::invalid_argument("behavioural_equivalence: correspondence not bijective for " + p1.agents[k].name);
  }
  EquivalenceReport rep;
  auto list = choices.empty() ? all_choices(p1) : choices;
  for (const auto& ch : list) {
    Choice ch2(ch.size());
    for (size_t k = 0; k < ch.size(); ++k) ch2[k] = c.ops[k][ch[k]];
    Mat r1 = compose_protocol(p1, ch), r2 = compose_protocol(p2, ch2);
    if (c.result_iso) r1 = (*c.result_iso) * r1 * c.result_iso->adjoint();
    if (r1.rows() != r2.rows()) throw std::invalid_argument("behavioural_equivalence: result dimensions differ");
    double d = (r1 - r2).norm();
    ++rep.checked;
    if (d > rep.max_diff) rep.max_diff = d;
    if (d > tol && rep.pass) {
      rep.pass = false;
      rep.witness = ch;
    }
  }
  rep.message = rep.pass ? "equivalent" : "result states differ";
  return rep;
}

}  // namespace procbox
