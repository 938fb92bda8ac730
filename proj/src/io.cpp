#include "procbox/io.hpp"

#include <fstream>
#include <sstream>

namespace procbox {

namespace {

std::string sub(const std::string& path, const std::string& key) { return path + "." + key; }
std::string sub(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw IoError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw IoError(sub(path, key), "missing");
  return *it;
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw IoError(path, "expected an array");
  return j;
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw IoError(path, "expected an integer");
  return j.get<int>();
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) throw IoError(path, "expected a number");
  return j.get<double>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw IoError(path, "expected a string");
  return j.get<std::string>();
}

std::vector<int> int_list(const json& j, const std::string& path) {
  std::vector<int> v;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) v.push_back(as_int(j[i], sub(path, i)));
  return v;
}

std::optional<Pos> opt_pos(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return as_int(*it, sub(path, key));
}

cplx scalar(const json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw IoError(path, "expected [re, im]");
  return {as_double(j[0], sub(path, 0)), as_double(j[1], sub(path, 1))};
}

json regs_json(const std::vector<Reg>& rs) {
  json a = json::array();
  for (auto& r : rs) a.push_back({{"name", r.name}, {"dim", r.dim}});
  return a;
}

std::vector<Reg> regs_from(const json& j, const std::string& path) {
  std::vector<Reg> rs;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) {
    auto p = sub(path, i);
    Reg r{as_string(field(j[i], "name", p), sub(p, "name")), as_int(field(j[i], "dim", p), sub(p, "dim"))};
    if (r.dim < 1) throw IoError(sub(p, "dim"), "dimension must be positive");
    rs.push_back(r);
  }
  return rs;
}

json net_json(const std::vector<Channel>& net) {
  json a = json::array();
  for (auto& c : net) a.push_back(channel_to_json(c));
  return a;
}

std::vector<Channel> net_from(const json& j, const std::string& path) {
  std::vector<Channel> net;
  for (std::size_t i = 0; i < array(j, path).size(); ++i) net.push_back(channel_from_json(j[i], sub(path, i)));
  return net;
}

json posset_json(const PosSet& s) { return json(s); }

json sized_mat(const Mat& m) { return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", mat_to_json(m)}}; }

Mat sized_mat_from(const json& j, const std::string& path) {
  int r = as_int(field(j, "rows", path), sub(path, "rows"));
  int c = as_int(field(j, "cols", path), sub(path, "cols"));
  return mat_from_json(field(j, "data", path), r, c, sub(path, "data"));
}

json choice_json(const std::optional<Choice>& c) { return c ? json(*c) : json(nullptr); }

}  // namespace

json load_json(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw IoError(file, "cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(file, std::string("parse error at byte ") + std::to_string(e.byte));
  }
}

void save_json(const std::string& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw IoError(file, "cannot write");
  out << j.dump(2) << "\n";
}

json mat_to_json(const Mat& m) {
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back({m(r, c).real(), m(r, c).imag()});
  return a;
}

Mat mat_from_json(const json& j, int rows, int cols, const std::string& path) {
  array(j, path);
  if ((std::int64_t)j.size() != (std::int64_t)rows * cols)
    throw IoError(path, "expected " + std::to_string((std::int64_t)rows * cols) + " entries, got " +
                            std::to_string(j.size()));
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::size_t i = (std::size_t)r * cols + c;
      m(r, c) = scalar(j[i], sub(path, i));
    }
  return m;
}

json spacetime_to_json(const Spacetime& st) {
  json order = json::array();
  for (auto [a, b] : st.covers()) order.push_back({a, b});
  json j{{"elements", st.elements()}, {"order", order}};
  j["past"] = st.past ? json(*st.past) : json(nullptr);
  j["future"] = st.future ? json(*st.future) : json(nullptr);
  j["result"] = st.result ? json(*st.result) : json(nullptr);
  return j;
}

Spacetime spacetime_from_json(const json& j, const std::string& path) {
  auto elems = int_list(field(j, "elements", path), sub(path, "elements"));
  std::vector<std::pair<Pos, Pos>> covers;
  std::string op = sub(path, "order");
  auto& order = array(field(j, "order", path), op);
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto ab = int_list(order[i], sub(op, i));
    if (ab.size() != 2) throw IoError(sub(op, i), "expected a pair [a, b]");
    covers.push_back({ab[0], ab[1]});
  }
  try {
    return Spacetime(elems, covers, opt_pos(j, "past", path), opt_pos(j, "future", path), opt_pos(j, "result", path));
  } catch (const std::exception& e) {
    throw IoError(path, e.what());
  }
}

json channel_to_json(const Channel& c) {
  json kraus = json::array();
  for (auto& k : c.kraus) kraus.push_back(mat_to_json(k));
  return {{"tag", c.tag}, {"in_wires", regs_json(c.ins)}, {"out_wires", regs_json(c.outs)}, {"n_max", 1},
          {"kraus", kraus}};
}

Channel channel_from_json(const json& j, const std::string& path) {
  Channel c;
  if (j.contains("tag")) c.tag = as_string(j["tag"], sub(path, "tag"));
  c.ins = regs_from(field(j, "in_wires", path), sub(path, "in_wires"));
  c.outs = regs_from(field(j, "out_wires", path), sub(path, "out_wires"));
  std::string kp = sub(path, "kraus");
  auto& ks = array(field(j, "kraus", path), kp);
  if (ks.empty()) throw IoError(kp, "no Kraus operators");
  for (std::size_t i = 0; i < ks.size(); ++i)
    c.kraus.push_back(mat_from_json(ks[i], (int)c.out_dim(), (int)c.in_dim(), sub(kp, i)));
  return c;
}

json protocol_to_json(const Protocol& p) {
  json agents = json::array();
  for (auto& a : p.agents) {
    json ops = json::array();
    for (auto& op : a.ops) ops.push_back({{"setting", op.setting}, {"net", net_json(op.net)}});
    agents.push_back({{"name", a.name},
                      {"Ti", a.in.positions},
                      {"To", a.out.positions},
                      {"dims", {{"in", a.in.dim}, {"out", a.out.dim}, {"n_slot", a.in.n_slot}}},
                      {"outcome_dim", a.outcome_dim},
                      {"ops", ops}});
  }
  json j{{"name", p.name}, {"spacetime", spacetime_to_json(p.st)}, {"process", net_json(p.process)},
         {"agents", agents}};
  if (p.chi) {
    json t = json::array();
    for (auto& [s, v] : p.chi->table) t.push_back({posset_json(s), posset_json(v)});
    j["chi"] = t;
  }
  return j;
}

Protocol protocol_from_json(const json& j, const std::string& path) {
  Protocol p;
  if (j.contains("name")) p.name = as_string(j["name"], sub(path, "name"));
  p.st = spacetime_from_json(field(j, "spacetime", path), sub(path, "spacetime"));
  auto& pj = field(j, "process", path);
  if (pj.is_object())
    p.process.push_back(channel_from_json(pj, sub(path, "process")));
  else
    p.process = net_from(pj, sub(path, "process"));
  std::string ap = sub(path, "agents");
  auto& aj = array(field(j, "agents", path), ap);
  for (std::size_t i = 0; i < aj.size(); ++i) {
    std::string pa = sub(ap, i);
    auto& x = aj[i];
    auto name = as_string(field(x, "name", pa), sub(pa, "name"));
    auto ti = int_list(field(x, "Ti", pa), sub(pa, "Ti"));
    auto to = int_list(field(x, "To", pa), sub(pa, "To"));
    auto& dims = field(x, "dims", pa);
    std::string dp = sub(pa, "dims");
    int din = as_int(field(dims, "in", dp), sub(dp, "in"));
    int dout = as_int(field(dims, "out", dp), sub(dp, "out"));
    int n_slot = dims.contains("n_slot") ? as_int(dims["n_slot"], sub(dp, "n_slot")) : 1;
    int r = x.contains("outcome_dim") ? as_int(x["outcome_dim"], sub(pa, "outcome_dim")) : 1;
    for (Pos t : ti)
      if (!p.st.contains(t)) throw IoError(sub(pa, "Ti"), "position " + std::to_string(t) + " not in spacetime");
    for (Pos t : to)
      if (!p.st.contains(t)) throw IoError(sub(pa, "To"), "position " + std::to_string(t) + " not in spacetime");
    Agent a = make_agent(name, din, ti, dout, to, r, n_slot);
    std::string op = sub(pa, "ops");
    auto& ops = array(field(x, "ops", pa), op);
    for (std::size_t o = 0; o < ops.size(); ++o) {
      std::string oo = sub(op, o);
      auto setting = ops[o].contains("setting") ? as_string(ops[o]["setting"], sub(oo, "setting")) : std::to_string(o);
      if (ops[o].contains("net")) {
        a.ops.push_back(make_op(setting, net_from(ops[o]["net"], sub(oo, "net"))));
        continue;
      }
      std::string kp = sub(oo, "kraus");
      auto& ks = array(field(ops[o], "kraus", oo), kp);
      int orows = (int)(a.out.total_dim() * a.outcome_dim);
      int icols = a.trivial_in() ? 1 : a.in.one_msg_dim();
      if (a.trivial_out()) orows = a.outcome_dim;
      std::vector<Mat> km;
      for (std::size_t k = 0; k < ks.size(); ++k) km.push_back(mat_from_json(ks[k], orows, icols, sub(kp, k)));
      try {
        if (a.trivial_in()) {
          std::vector<Vec> vs;
          for (auto& m : km) vs.push_back(m.col(0));
          a.ops.push_back(prepare_op(a, setting, vs));
        } else if (a.trivial_out()) {
          a.ops.push_back(measure_op(a, setting, km));
        } else {
          a.ops.push_back(one_msg_op(a, setting, km));
        }
      } catch (const std::exception& e) {
        throw IoError(oo, e.what());
      }
    }
    p.agents.push_back(a);
  }
  if (j.contains("chi")) {
    std::string cp = sub(path, "chi");
    CausalityFunction chi;
    auto& t = array(j["chi"], cp);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_array() || t[i].size() != 2) throw IoError(sub(cp, i), "expected [set, image]");
      chi.table[int_list(t[i][0], sub(sub(cp, i), 0))] = int_list(t[i][1], sub(sub(cp, i), 1));
    }
    p.chi = chi;
  }
  return p;
}

json qcqc_to_json(const QcQc& q) {
  json internal = json::array();
  for (auto& [key, m] : q.V) {
    std::vector<int> K;
    for (int i = 0; i < q.N; ++i)
      if (key.K >> i & 1) K.push_back(i);
    internal.push_back({{"K", K},
                        {"k", key.k < 0 ? json(nullptr) : json(key.k)},
                        {"to", key.to == q.N ? json("F") : json(key.to)},
                        {"matrix", mat_to_json(m)}});
  }
  return {{"N", q.N},
          {"names", q.names},
          {"dims",
           {{"P", q.dP}, {"F", q.dF}, {"in", q.din}, {"out", q.dout}, {"alpha", q.alpha}, {"alphaF", q.alphaF}}},
          {"internal", internal}};
}

QcQc qcqc_from_json(const json& j, const std::string& path) {
  QcQc q;
  q.N = as_int(field(j, "N", path), sub(path, "N"));
  if (j.contains("names"))
    for (std::size_t i = 0; i < array(j["names"], sub(path, "names")).size(); ++i)
      q.names.push_back(as_string(j["names"][i], sub(sub(path, "names"), i)));
  while ((int)q.names.size() < q.N) q.names.push_back("A" + std::to_string(q.names.size() + 1));
  std::string dp = sub(path, "dims");
  auto& d = field(j, "dims", path);
  q.dP = as_int(field(d, "P", dp), sub(dp, "P"));
  q.dF = as_int(field(d, "F", dp), sub(dp, "F"));
  q.din = int_list(field(d, "in", dp), sub(dp, "in"));
  q.dout = int_list(field(d, "out", dp), sub(dp, "out"));
  if (d.contains("alpha")) q.alpha = int_list(d["alpha"], sub(dp, "alpha"));
  else q.alpha.assign(q.N + 1, 1);
  if (d.contains("alphaF")) q.alphaF = as_int(d["alphaF"], sub(dp, "alphaF"));
  if ((int)q.din.size() != q.N || (int)q.dout.size() != q.N || (int)q.alpha.size() != q.N + 1)
    throw IoError(dp, "dimension lists do not match N");
  std::string ip = sub(path, "internal");
  auto& in = array(field(j, "internal", path), ip);
  for (std::size_t i = 0; i < in.size(); ++i) {
    std::string p = sub(ip, i);
    QcqcKey key;
    for (int a : int_list(field(in[i], "K", p), sub(p, "K"))) {
      if (a < 0 || a >= q.N) throw IoError(sub(p, "K"), "agent index out of range");
      key.K |= 1u << a;
    }
    auto& k = field(in[i], "k", p);
    key.k = k.is_null() ? -1 : as_int(k, sub(p, "k"));
    auto& to = field(in[i], "to", p);
    key.to = to.is_string() && to.get<std::string>() == "F" ? q.N : as_int(to, sub(p, "to"));
    if (key.k >= q.N || key.to < 0 || key.to > q.N) throw IoError(p, "agent index out of range");
    q.V[key] = mat_from_json(field(in[i], "matrix", p), q.rows(key), q.cols(key), sub(p, "matrix"));
  }
  try {
    q.check_dims();
  } catch (const std::exception& e) {
    throw IoError(path, e.what());
  }
  return q;
}

json qcqc_protocol_to_json(const QcqcProtocol& qp) {
  json parties = json::array();
  for (auto& pa : qp.parties) {
    json ops = json::array();
    for (auto& op : pa.ops) {
      json ks = json::array();
      for (auto& k : op) ks.push_back(sized_mat(k));
      ops.push_back(ks);
    }
    parties.push_back({{"name", pa.name}, {"outcome_dim", pa.outcome_dim}, {"settings", pa.settings}, {"ops", ops}});
  }
  return {{"qcqc", qcqc_to_json(qp.q)},
          {"parties", parties},
          {"past", qp.past},
          {"future", qp.future},
          {"agent_party", qp.agent_party}};
}

QcqcProtocol qcqc_protocol_from_json(const json& j, const std::string& path) {
  QcqcProtocol qp;
  qp.q = qcqc_from_json(field(j, "qcqc", path), sub(path, "qcqc"));
  std::string pp = sub(path, "parties");
  auto& ps = array(field(j, "parties", path), pp);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::string p = sub(pp, i);
    QcqcParty pa;
    pa.name = as_string(field(ps[i], "name", p), sub(p, "name"));
    pa.outcome_dim = as_int(field(ps[i], "outcome_dim", p), sub(p, "outcome_dim"));
    if (ps[i].contains("settings"))
      for (auto& s : ps[i]["settings"]) pa.settings.push_back(as_string(s, sub(p, "settings")));
    std::string op = sub(p, "ops");
    auto& ops = array(field(ps[i], "ops", p), op);
    for (std::size_t o = 0; o < ops.size(); ++o) {
      std::vector<Mat> ks;
      for (std::size_t k = 0; k < array(ops[o], sub(op, o)).size(); ++k)
        ks.push_back(sized_mat_from(ops[o][k], sub(sub(op, o), k)));
      pa.ops.push_back(ks);
    }
    qp.parties.push_back(pa);
  }
  qp.past = as_int(field(j, "past", path), sub(path, "past"));
  qp.future = as_int(field(j, "future", path), sub(path, "future"));
  qp.agent_party = int_list(field(j, "agent_party", path), sub(path, "agent_party"));
  try {
    qp.check();
  } catch (const std::exception& e) {
    throw IoError(path, e.what());
  }
  return qp;
}

json report_json(const Report& r) {
  json j{{"pass", r.pass}, {"message", r.message}, {"value", r.value}};
  j["witness"] = r.witness ? json(*r.witness) : json(nullptr);
  return j;
}

json equivalence_json(const EquivalenceReport& r) {
  return {{"pass", r.pass}, {"max_diff", r.max_diff}, {"checked", r.checked}, {"witness", choice_json(r.witness)},
          {"message", r.message}};
}

json distribution_json(const Distribution& d) {
  json rows = json::array();
  for (std::size_t i = 0; i < d.choices.size(); ++i) rows.push_back({{"settings", d.choices[i]}, {"p", d.probs[i]}});
  return {{"outcome_dims", d.outcome_dims}, {"rows", rows}};
}

json certification_json(const CertificationReport& r) {
  json ao{{"pass", r.ao.pass}, {"trace_deficit", r.ao.trace_deficit}, {"disturbance", r.ao.disturbance},
          {"agent", r.ao.agent}, {"witness", choice_json(r.ao.witness)}, {"message", r.ao.message}};
  json order = json::object();
  for (auto& [a, m] : r.lo.order) {
    json mm = json::array();
    for (auto [t, u] : m) mm.push_back({t, u});
    order[a] = mm;
  }
  json lo{{"pass", r.lo.pass}, {"deficit", r.lo.deficit}, {"order", order}, {"agent", r.lo.agent},
          {"witness", choice_json(r.lo.witness)}, {"message", r.lo.message}};
  json alo = json::object();
  for (auto& [a, v] : r.alo) alo[a] = v;
  json stats = json::array();
  for (auto& s : r.stats)
    stats.push_back({{"agent", s.agent}, {"p_in_zero", s.p_in_zero}, {"p_in_multi", s.p_in_multi},
                     {"p_out_zero", s.p_out_zero}, {"p_out_multi", s.p_out_multi}, {"p_early", s.p_early}});
  return {{"process_box", is_process_box(r)}, {"classification", r.classification}, {"ao", ao}, {"lo", lo},
          {"alo", alo}, {"stats", stats}, {"orders_tested", r.orders_tested}};
}

json certificate_json(const TransformCertificate& c) {
  json stages = json::array();
  for (auto& s : c.stages) stages.push_back({{"name", s.name}, {"applied", s.applied}, {"note", s.note}});
  json corr = json::array();
  for (auto& o : c.correspondence.ops) corr.push_back(o);
  return {{"input", c.input.name}, {"output", c.output.name}, {"properties", c.properties}, {"stages", stages},
          {"correspondence", corr}, {"equivalence", equivalence_json(c.equivalence)}};
}

json qcqc_report_json(const QcqcReport& r) {
  return {{"pass", r.pass}, {"defect", r.defect}, {"worst_step", r.worst_step}, {"step_defects", r.step_defects},
          {"message", r.message}};
}

json extract_report_json(const ExtractResult& r) {
  json cursors = json::array();
  for (auto& c : r.control.cursors)
    cursors.push_back({{"t", c.t}, {"receiver", c.receiver}, {"orthogonality", c.orthogonality},
                       {"off_block", c.off_block}});
  json control{{"pass", r.control.pass},
               {"agents", r.control.control_agents},
               {"orthogonality", r.control.orthogonality},
               {"off_block", r.control.off_block},
               {"final_vacuum", r.control.final_vacuum},
               {"traced_distance", r.control.traced_distance},
               {"traced_choi_distance", r.control.traced_choi_distance},
               {"final_control_purity", r.control.final_control_purity},
               {"cursors", cursors},
               {"message", r.control.message}};
  return {{"validity", qcqc_report_json(r.validity)}, {"equivalence", equivalence_json(r.equivalence)},
          {"alpha", r.alpha}, {"dead_legs_kept", r.dead_legs_kept},
          {"simplification", certificate_json(r.simplification)}, {"control", control}};
}

}  // namespace procbox
