#include "procbox/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "procbox/qmap.hpp"

namespace procbox {

namespace {

using Rules = std::vector<std::pair<std::vector<int>, Vec>>;

const double kR2 = 1.0 / std::sqrt(2.0);

Mat hadamard() {
  Mat h(2, 2);
  h << kR2, kR2, kR2, -kR2;
  return h;
}

Mat pauli_x() { return shift_matrix(2); }

void add_rule(Rules& r, const std::vector<Reg>& outs, std::vector<int> in, const std::vector<int>& out) {
  r.push_back({std::move(in), basis_vec(outs, out)});
}

Vec slot_state(int sdim, const std::vector<std::pair<int, cplx>>& amps) {
  Vec v = Vec::Zero(sdim);
  for (auto [i, a] : amps) v(i) += a;
  return v;
}

AgentOp measure_computational(const Agent& f, const std::string& setting) {
  return measure_op(f, setting, {Mat::Identity(f.outcome_dim, f.in.one_msg_dim())});
}

}  // namespace

Mat shift_matrix(int d) {
  Mat x = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) x((i + 1) % d, i) = 1.0;
  return x;
}

Mat clock_matrix(int d) {
  Mat z = Mat::Zero(d, d);
  const double pi = std::acos(-1.0);
  for (int i = 0; i < d; ++i) z(i, i) = std::polar(1.0, 2.0 * pi * i / d);
  return z;
}

Protocol trivvio() {
  Protocol p;
  p.name = "trivvio";
  p.st = Spacetime::chain(1, 5);
  p.st.result = 5;
  Agent a = make_agent("A", 2, {4}, 2, {1}, 2);
  Agent b = make_agent("B", 2, {2}, 2, {3}, 2);
  // Send the setting at the output slot, record the received level as the guess.
  auto op = [](const Agent& ag, int x) {
    Channel c;
    c.outs = {{ag.out.slot(ag.out.positions[0]), ag.out.sdim()}, ag.result_reg()};
    c.ins = {{ag.in.slot(ag.in.positions[0]), ag.in.sdim()}};
    c.tag = ag.name + ".send";
    for (int s = 0; s < ag.in.sdim(); ++s) {
      Mat k = Mat::Zero(ag.out.sdim() * 2, ag.in.sdim());
      int guess = s == 0 ? 0 : s - 1;
      k((x + 1) * 2 + guess, s) = 1.0;
      c.kraus.push_back(k);
    }
    return make_op("x=" + std::to_string(x), {c});
  };
  for (int x = 0; x < 2; ++x) {
    a.ops.push_back(op(a, x));
    b.ops.push_back(op(b, x));
  }
  p.agents = {a, b};
  p.process = {identity_channel({{"B.I@2", 3}}, {{"A.O@1", 3}}), identity_channel({{"A.I@4", 3}}, {{"B.O@3", 3}})};
  p.process[0].tag = "relay A->B";
  p.process[1].tag = "relay B->A";
  p.chi = remove_maximal_chi(p.st);
  return p;
}

Protocol one_way_protocol(int strategy) {
  if (strategy < 0 || strategy >= 256) throw std::invalid_argument("one_way_protocol: strategy out of range");
  auto bit = [&](int i) { return (strategy >> i) & 1; };
  Protocol p;
  p.name = "oneway";
  p.st = Spacetime::chain(1, 6);
  p.st.result = 6;
  Agent a = make_agent("A", 1, {2}, 2, {3}, 2);
  Agent b = make_agent("B", 2, {4}, 1, {5}, 2);
  for (int x = 0; x < 2; ++x) {
    int m = bit(2 * x), g = bit(2 * x + 1);
    Mat k = Mat::Zero(a.out.total_dim() * 2, 1);
    k((1 + m) * 2 + g, 0) = 1.0;
    a.ops.push_back(one_msg_op(a, "x=" + std::to_string(x), {k}));
  }
  for (int y = 0; y < 2; ++y) {
    Mat k = Mat::Zero(b.out.total_dim() * 2, 2);
    for (int m = 0; m < 2; ++m) k(1 * 2 + bit(4 + 2 * y + m), m) = 1.0;
    b.ops.push_back(one_msg_op(b, "y=" + std::to_string(y), {k}));
  }
  p.agents = {a, b};
  Vec one = Vec::Zero(2);
  one(1) = 1.0;
  p.process = {state_channel({{"A.I@2", 2}}, {one}, "constant input"),
               identity_channel({{"B.I@4", 3}}, {{"A.O@3", 3}}), discard({{"B.O@5", 2}})};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

BoundResult one_way_gyni_bound() {
  BoundResult r;
  r.max_value = -1.0;
  for (int s = 0; s < 256; ++s) {
    double v = gyni_value(one_way_protocol(s), "A", "B");
    ++r.strategies;
    if (v > r.max_value + 1e-12) r.max_value = v, r.argmax = s;
  }
  return r;
}

SigprojResult sigproj() {
  SigprojResult out;
  // Slot form: wire with two levels, up to two messages per slot.
  Wire w{"W", 2, {1, 2}, 2};
  int sd = w.sdim();
  Vec plus = slot_state(sd, {{0, kR2}, {1, kR2}});
  Vec vac = slot_state(sd, {{0, 1.0}});
  Vec msg = slot_state(sd, {{1, 1.0}});
  auto regs = w.regs();
  Mat keep = Mat::Zero(sd * sd, sd * sd), rest = Mat::Zero(sd * sd, sd * sd);
  for (int i = 0; i < sd * sd; ++i) {
    int n = slot_count(2, 2, i / sd) + slot_count(2, 2, i % sd);
    (n <= 1 ? keep : rest)(i, i) = 1.0;
  }
  Channel meas{regs, regs, {keep, rest}, "P<=1 / P2"};
  auto reduced = [&](const Vec& s2) {
    Channel prep = state_channel(regs, {kron(plus, s2)});
    return reduced_state(then_inplace(prep, meas), {"W@1"});
  };
  out.rho_a = reduced(vac);
  out.rho_b = reduced(msg);
  out.distance = trace_distance(out.rho_a, out.rho_b);

  // Oracle on the explicit truncated Fock basis.
  FockBasis fb = enumerate_basis({WireSpec{"W", 2, {1, 2}, Role::Ancilla}}, 2);
  auto lab = [&](std::vector<FockSlot> s) { return fb.index_of(s); };
  std::vector<Vec> psi(2, Vec::Zero(fb.size()));
  psi[0](lab({})) = kR2;
  psi[0](lab({{0, 0, 1}})) = kR2;
  psi[1](lab({{0, 0, 2}})) = kR2;
  psi[1](lab({{0, 0, 1}, {0, 0, 2}})) = kR2;
  std::map<FockLabel, int> part1;
  for (const auto& l : slot_labels(2, 2)) {
    FockLabel f;
    for (int lv : l) f.push_back({0, lv, 1});
    part1[f] = (int)part1.size();
  }
  std::vector<Mat> rho(2);
  for (int s = 0; s < 2; ++s) {
    rho[s] = Mat::Zero(sd, sd);
    for (int sector = 0; sector < 2; ++sector)
      for (int i = 0; i < fb.size(); ++i)
        for (int j = 0; j < fb.size(); ++j) {
          const auto& li = fb.labels[i];
          const auto& lj = fb.labels[j];
          if (((int)li.size() <= 1) != (sector == 0) || ((int)lj.size() <= 1) != (sector == 0)) continue;
          FockLabel a1, a2, b1, b2;
          for (auto x : li) (x.pos == 1 ? a1 : a2).push_back(x);
          for (auto x : lj) (x.pos == 1 ? b1 : b2).push_back(x);
          if (a2 != b2) continue;
          rho[s](part1.at(a1), part1.at(b1)) += psi[s](i) * std::conj(psi[s](j));
        }
  }
  out.oracle_distance = trace_distance(rho[0], rho[1]);
  out.oracle_residual = std::max((rho[0] - out.rho_a).norm(), (rho[1] - out.rho_b).norm());
  return out;
}

Protocol coherence_switch(const SwitchParams& spin) {
  SwitchParams sp = spin;
  const int d = sp.d;
  if (d < 1) throw std::invalid_argument("coherence_switch: d >= 1 required");
  if (sp.ua.empty()) sp.ua = {Mat::Identity(d, d), shift_matrix(d)};
  if (sp.ub.empty()) sp.ub = {Mat::Identity(d, d), clock_matrix(d)};
  if (sp.past.empty()) {
    Vec t0 = Vec::Zero(d), cp(2);
    t0(0) = 1.0;
    cp << kR2, kR2;
    sp.past.push_back({t0, cp});
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < 2; ++i) {
        Vec t = Vec::Zero(d), c = Vec::Zero(2);
        t(l) = 1.0, c(i) = 1.0;
        sp.past.push_back({t, c});
      }
  }
  Protocol p;
  p.name = "coherence_switch";
  p.st = Spacetime::chain(1, 7);
  p.st.past = 1, p.st.future = 6, p.st.result = 7;
  Agent P = make_agent("P", 0, {}, 2 * d, {1}, 1);
  Agent A = make_agent("A", d, {2, 4}, d, {3, 5}, 1);
  Agent B = make_agent("B", d, {2, 4}, d, {3, 5}, 1);
  Agent F = make_agent("F", 2 * d, {6}, 0, {}, 2 * d);
  for (const auto& [t, c] : sp.past) {
    Vec v = Vec::Zero(2 * d + 1);
    for (int l = 0; l < d; ++l)
      for (int i = 0; i < 2; ++i) v(1 + l * 2 + i) = t(l) * c(i);
    P.ops.push_back(prepare_op(P, "prep", {v}));
  }
  for (size_t i = 0; i < sp.ua.size(); ++i) A.ops.push_back(unitary_slot_op(A, "U" + std::to_string(i), {sp.ua[i], sp.ua[i]}));
  for (size_t i = 0; i < sp.ub.size(); ++i) B.ops.push_back(unitary_slot_op(B, "U" + std::to_string(i), {sp.ub[i], sp.ub[i]}));
  Mat pm = Mat::Zero(2 * d, 2 * d);
  for (int l = 0; l < d; ++l)
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < 2; ++i) pm(l * 2 + s, l * 2 + i) = (s == 1 && i == 1) ? -kR2 : kR2;
  F.ops.push_back(measure_op(F, "target+pm", {pm}));
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {P, A, B, F};

  const int sd = d + 1;
  // Slice 1 -> 2: route the target to the agent named by the control.
  std::vector<Reg> i1{{"P.O@1", 2 * d + 1}};
  std::vector<Reg> o1{{"A.I@2", sd}, {"B.I@2", sd}, {"sw.a1", sd}, {"sw.c1", 2}, {"sw.s1", 2}};
  Rules r1;
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < 2; ++i)
      add_rule(r1, o1, {1 + l * 2 + i}, {i == 0 ? l + 1 : 0, i == 1 ? l + 1 : 0, 0, i, 1});
  // Slice 3 -> 4: forward the first agent's output to the second one.
  std::vector<Reg> i2{{"A.O@3", sd}, {"B.O@3", sd}, {"sw.a1", sd}, {"sw.c1", 2}, {"sw.s1", 2}};
  std::vector<Reg> o2{{"A.I@4", sd}, {"B.I@4", sd}, {"sw.a2", sd}, {"sw.c2", 2}, {"sw.s2", 2}};
  Rules r2;
  for (int xa = 0; xa < sd; ++xa)
    for (int xb = 0; xb < sd; ++xb)
      for (int i = 0; i < 2; ++i) {
        if (i == 0)
          add_rule(r2, o2, {xa, xb, 0, i, 1}, {0, xa, xb, i, 1});
        else
          add_rule(r2, o2, {xa, xb, 0, i, 1}, {xb, 0, xa, i, 1});
      }
  for (int x = 1; x < sd; ++x)
    for (int i = 0; i < 2; ++i) add_rule(r2, o2, {0, 0, x, i, 0}, {i == 0 ? x : 0, i == 1 ? x : 0, 0, i, 1});
  // Slice 5 -> 6: hand target and control to the future.
  std::vector<Reg> i3{{"A.O@5", sd}, {"B.O@5", sd}, {"sw.a2", sd}, {"sw.c2", 2}, {"sw.s2", 2}};
  std::vector<Reg> o3{{"F.I@6", 2 * d + 1}, {"~sw.aF", 2}};
  Rules r3;
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < 2; ++i) {
      std::vector<int> in{0, 0, 0, i, 1};
      in[i == 0 ? 1 : 0] = l + 1;
      add_rule(r3, o3, in, {1 + l * 2 + i, 1});
    }
  p.process = {isometry_from_rules(o1, i1, r1, "~sw.j1", "V1"), isometry_from_rules(o2, i2, r2, "~sw.j2", "V2"),
               isometry_from_rules(o3, i3, r3, "~sw.j3", "V3")};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

Protocol lugano(bool restrict_alice) {
  Protocol p;
  p.name = restrict_alice ? "lugano_restricted" : "lugano";
  p.st = Spacetime::chain(1, 13);
  p.st.past = 1, p.st.future = 12, p.st.result = 13;
  Agent P = make_agent("P", 0, {}, 8, {1}, 1);
  Agent C = make_agent("C", 2, {2, 8, 10}, 2, {3, 9, 11}, 1);
  Agent A = make_agent("A", 2, {4, 6}, 2, {5, 7}, 1);
  Agent B = make_agent("B", 2, {4, 6}, 2, {5, 7}, 1);
  Agent F = make_agent("F", 8, {12}, 0, {}, 8);
  for (int s = 0; s < 8; ++s) {
    Vec v = Vec::Zero(9);
    v(1 + s) = 1.0;
    P.ops.push_back(prepare_op(P, "p=" + std::to_string(s), {v}));
  }
  Mat h = hadamard();
  for (const Mat& u : {h, Mat(Mat::Identity(2, 2))})
    C.ops.push_back(per_slot_op(C, "U", {{u}, {u.adjoint()}, {u}}));
  std::vector<Mat> us{Mat::Identity(2, 2), pauli_x(), h};
  for (size_t i = 0; i < us.size(); ++i) B.ops.push_back(unitary_slot_op(B, "U" + std::to_string(i), {us[i], us[i]}));
  if (restrict_alice) {
    Mat k0 = Mat::Zero(2, 2), k1 = Mat::Zero(2, 2);
    k0(1, 0) = 1.0, k1(1, 1) = 1.0;
    A.ops.push_back(per_slot_op(A, "force1", {{k0, k1}, {k0, k1}}));
  } else {
    for (size_t i = 0; i < us.size(); ++i)
      A.ops.push_back(unitary_slot_op(A, "U" + std::to_string(i), {us[i], us[i]}));
  }
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {P, C, A, B, F};

  Rules r1, r2, r3, r4, r5, r6;
  std::vector<Reg> i1{{"P.O@1", 9}}, o1{{"C.I@2", 3}, {"lu.a1", 2}, {"lu.a2", 2}};
  for (int s = 0; s < 8; ++s) add_rule(r1, o1, {1 + s}, {1 + (s & 1), s >> 2, (s >> 1) & 1});
  std::vector<Reg> i2{{"C.O@3", 3}, {"lu.a1", 2}, {"lu.a2", 2}};
  std::vector<Reg> o2{{"A.I@4", 3}, {"B.I@4", 3}, {"lu.al", 2}, {"lu.ac", 2}};
  for (int c = 0; c < 2; ++c)
    for (int a1 = 0; a1 < 2; ++a1)
      for (int a2 = 0; a2 < 2; ++a2) {
        if (c == 0)
          add_rule(r2, o2, {1 + c, a1, a2}, {1 + a1, 0, a2, 0});
        else
          add_rule(r2, o2, {1 + c, a1, a2}, {0, 1 + a2, a1, 1});
      }
  std::vector<Reg> i3{{"A.O@5", 3}, {"B.O@5", 3}, {"lu.al", 2}, {"lu.ac", 2}};
  std::vector<Reg> o3{{"A.I@6", 3}, {"B.I@6", 3}, {"lu.al2", 2}, {"lu.ac2", 2}};
  for (int x = 0; x < 2; ++x)
    for (int al = 0; al < 2; ++al)
      for (int c = 0; c < 2; ++c) {
        std::vector<int> in{0, 0, al, c}, out{0, 0, x, c};
        in[c] = 1 + x;
        out[1 - c] = 1 + (al ^ x ^ c);
        add_rule(r3, o3, in, out);
      }
  std::vector<Reg> i4{{"A.O@7", 3}, {"B.O@7", 3}, {"lu.al2", 2}, {"lu.ac2", 2}};
  std::vector<Reg> o4{{"C.I@8", 3}, {"lu.b1", 2}, {"lu.b2", 2}, {"lu.bc", 2}};
  for (int y = 0; y < 2; ++y)
    for (int al = 0; al < 2; ++al)
      for (int c = 0; c < 2; ++c) {
        std::vector<int> in{0, 0, al, c};
        in[1 - c] = 1 + y;
        bool again = c == al && al != y;
        add_rule(r4, o4, in, {again ? 1 + c : 0, y, al, c});
      }
  std::vector<Reg> i5{{"C.O@9", 3}, {"lu.b1", 2}, {"lu.b2", 2}, {"lu.bc", 2}};
  std::vector<Reg> o5{{"C.I@10", 3}, {"lu.e1", 2}, {"lu.e2", 2}, {"lu.ec", 2}};
  std::vector<Reg> i6{{"C.O@11", 3}, {"lu.e1", 2}, {"lu.e2", 2}, {"lu.ec", 2}};
  std::vector<Reg> o6{{"F.I@12", 9}, {"~lu.mem", 8}};
  for (int y = 0; y < 2; ++y)
    for (int al = 0; al < 2; ++al)
      for (int c = 0; c < 2; ++c) {
        bool again = c == al && al != y;
        int mem = y * 4 + al * 2 + c;
        if (again) {
          for (int cp = 0; cp < 2; ++cp) {
            add_rule(r5, o5, {1 + cp, y, al, c}, {1 + (cp ^ 1), y, al, c});
            add_rule(r6, o6, {1 + cp, y, al, c}, {1 + al * 4 + y * 2 + cp, mem});
          }
        } else {
          add_rule(r5, o5, {0, y, al, c}, {0, y, al, c});
          add_rule(r6, o6, {0, y, al, c}, {1 + y * 4 + al * 2 + c, mem});
        }
      }
  p.process = {isometry_from_rules(o1, i1, r1, "~lu.j1", "V1"), isometry_from_rules(o2, i2, r2, "~lu.j2", "V2"),
               isometry_from_rules(o3, i3, r3, "~lu.j3", "V3"), isometry_from_rules(o4, i4, r4, "~lu.j4", "V4"),
               isometry_from_rules(o5, i5, r5, "~lu.j5", "V5"), isometry_from_rules(o6, i6, r6, "~lu.j6", "V6")};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

Protocol nolo() {
  Protocol p;
  p.name = "nolo";
  p.st = Spacetime::chain(1, 7);
  p.st.past = 1, p.st.future = 6, p.st.result = 7;
  Agent P = make_agent("P", 0, {}, 2, {1}, 1);
  Agent A = make_agent("A", 1, {2, 4}, 2, {5}, 2);
  Agent B = make_agent("B", 1, {2}, 1, {3}, 1);
  Agent F = make_agent("F", 4, {6}, 0, {}, 4);
  for (const auto& amps : std::vector<std::vector<std::pair<int, cplx>>>{
           {{1, kR2}, {2, kR2}}, {{1, 1.0}}, {{2, 1.0}}})
    P.ops.push_back(prepare_op(P, "prep", {slot_state(3, amps)}));
  B.ops.push_back(unitary_slot_op(B, "id", {Mat::Identity(1, 1)}));
  // Alice's channel on the slot pair (2, 4): 0 = vacuum, 1 = message.
  std::vector<Reg> ain{{"A.I@2", 2}, {"A.I@4", 2}}, aout{{"A.O@5", 3}, {"R.A", 2}};
  auto col = [](int s2, int s4) { return s2 * 2 + s4; };
  auto row = [](int slot, int r) { return slot * 2 + r; };
  {
    Mat k1 = Mat::Zero(6, 4), k2 = Mat::Zero(6, 4), k3 = Mat::Zero(6, 4);
    k1(row(0, 0), col(0, 0)) = 1.0;
    k1(row(1, 0), col(1, 0)) = 1.0;
    k2(row(1, 1), col(0, 1)) = 1.0;
    k3(row(0, 0), col(1, 1)) = 1.0;
    A.ops.push_back(make_op("time", {Channel{aout, ain, {k1, k2, k3}, "A.time"}}));
  }
  {
    Mat kp = Mat::Zero(6, 4), km = Mat::Zero(6, 4), k3 = Mat::Zero(6, 4);
    kp(row(0, 0), col(0, 0)) = 1.0;
    for (int s = 0; s < 2; ++s) {
      Mat& k = s == 0 ? kp : km;
      double sg = s == 0 ? 1.0 : -1.0;
      k(row(1, s), col(1, 0)) += kR2;
      k(row(1, s), col(0, 1)) += sg * 0.5;
      k(row(2, s), col(0, 1)) += 0.5;
    }
    k3(row(0, 0), col(1, 1)) = 1.0;
    A.ops.push_back(make_op("coherent", {Channel{aout, ain, {kp, km, k3}, "A.coherent"}}));
  }
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {P, A, B, F};

  Rules r1, r3, r5;
  std::vector<Reg> i1{{"P.O@1", 3}}, o1{{"A.I@2", 2}, {"B.I@2", 2}, {"no.c", 2}};
  add_rule(r1, o1, {1}, {1, 0, 0});
  add_rule(r1, o1, {2}, {0, 1, 1});
  std::vector<Reg> i3{{"B.O@3", 2}, {"no.c", 2}}, o3{{"A.I@4", 2}, {"no.c2", 2}};
  add_rule(r3, o3, {0, 0}, {0, 0});
  for (int x = 0; x < 2; ++x) add_rule(r3, o3, {x, 1}, {x, 1});
  std::vector<Reg> i5{{"A.O@5", 3}, {"no.c2", 2}}, o5{{"F.I@6", 5}};
  for (int l = 0; l < 2; ++l)
    for (int c = 0; c < 2; ++c) add_rule(r5, o5, {1 + l, c}, {1 + l * 2 + c});
  p.process = {isometry_from_rules(o1, i1, r1, "~no.j1", "V1"), isometry_from_rules(o3, i3, r3, "~no.j3", "V3"),
               isometry_from_rules(o5, i5, r5, "~no.j5", "V5")};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

Protocol dynamicalpar() {
  Protocol p;
  p.name = "dynamicalpar";
  p.st = Spacetime::chain(1, 8);
  p.st.future = 7, p.st.result = 8;
  Agent A = make_agent("A", 2, {1}, 2, {2}, 1);
  Agent B = make_agent("B", 2, {3}, 2, {4}, 1);
  Agent C = make_agent("C", 2, {3, 5}, 2, {4, 6}, 1);
  Agent F = make_agent("F", 6, {7}, 0, {}, 6);
  Mat h = hadamard(), x = pauli_x(), id = Mat::Identity(2, 2);
  for (const Mat& u : {id, x, h}) A.ops.push_back(unitary_slot_op(A, "U", {u}));
  for (const Mat& u : {id, x}) B.ops.push_back(unitary_slot_op(B, "U", {u}));
  for (const Mat& u : {id, h}) C.ops.push_back(unitary_slot_op(C, "U", {u, u}));
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {A, B, C, F};

  Rules r2, r4, r6;
  std::vector<Reg> i2{{"A.O@2", 3}}, o2{{"B.I@3", 3}, {"C.I@3", 3}, {"dp.i", 2}};
  add_rule(r2, o2, {1}, {1, 1, 0});
  add_rule(r2, o2, {2}, {2, 0, 1});
  std::vector<Reg> i4{{"B.O@4", 3}, {"C.O@4", 3}, {"dp.i", 2}};
  std::vector<Reg> o4{{"C.I@5", 3}, {"dp.j", 3}, {"dp.k", 3}, {"dp.i2", 2}};
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) add_rule(r4, o4, {1 + j, 1 + k, 0}, {0, 1 + j, 1 + k, 0});
    add_rule(r4, o4, {1 + j, 0, 1}, {1 + j, 0, 0, 1});
  }
  std::vector<Reg> i6{{"C.O@6", 3}, {"dp.j", 3}, {"dp.k", 3}, {"dp.i2", 2}}, o6{{"F.I@7", 7}};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) add_rule(r6, o6, {0, 1 + j, 1 + k, 0}, {1 + j * 2 + k});
  for (int k = 0; k < 2; ++k) add_rule(r6, o6, {1 + k, 0, 0, 1}, {5 + k});
  p.process = {state_channel({{"A.I@1", 3}}, {slot_state(3, {{1, kR2}, {2, kR2}})}, "input of A"),
               isometry_from_rules(o2, i2, r2, "~dp.j2", "V2"), isometry_from_rules(o4, i4, r4, "~dp.j4", "V4"),
               isometry_from_rules(o6, i6, r6, "~dp.j6", "V6")};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

RelabellingSpec dynamicalpar_sequential() {
  RelabellingSpec r;
  r.st2 = Spacetime::chain(1, 10);
  r.st2.future = 9, r.st2.result = 10;
  auto sys = [&](const std::string& name, bool input, std::map<Pos, Pos> m) {
    r.maps.systems[name] = SystemMap{name.substr(0, name.find('.')), input, std::move(m)};
  };
  sys("A.I", true, {{1, 1}});
  sys("A.O", false, {{2, 2}});
  sys("B.I", true, {{3, 3}});
  sys("B.O", false, {{4, 4}});
  sys("C.I", true, {{3, 5}, {5, 7}});
  sys("C.O", false, {{4, 6}, {6, 8}});
  sys("F.I", true, {{7, 9}});
  r.maps.result = 10;
  return r;
}

Protocol norestriction(bool add_flip) {
  Protocol p;
  p.name = "norestriction";
  p.st = Spacetime::chain(1, 6);
  p.st.result = 6;
  Agent A = make_agent("A", 2, {2, 4}, 2, {3, 5}, 1);
  Mat id = Mat::Identity(2, 2);
  A.ops.push_back(unitary_slot_op(A, "id", {id, id}));
  if (add_flip) A.ops.push_back(unitary_slot_op(A, "flip", {pauli_x(), pauli_x()}));
  p.agents = {A};
  Rules r3;
  std::vector<Reg> i3{{"A.O@3", 3}}, o3{{"A.I@4", 3}};
  add_rule(r3, o3, {1}, {0});
  add_rule(r3, o3, {2}, {2});
  p.process = {state_channel({{"A.I@2", 3}}, {slot_state(3, {{1, 1.0}})}, "input of A"),
               isometry_from_rules(o3, i3, r3, "~nr.j3", "V3"), discard({{"A.O@5", 3}})};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

namespace {

// Random isometric slices: slice s consumes agent outputs at s and emits agent
// inputs at s + 1. A qubit memory is passed along; whatever does not fit goes
// into a discarded junk register.
std::vector<Channel> random_process(const std::vector<Agent>& agents, int n, Rng& rng) {
  std::vector<Channel> out;
  Reg mem{"", 1};
  for (int s = 0; s <= n; ++s) {
    std::vector<Reg> ins, outs;
    for (const auto& a : agents)
      for (Pos t : a.out.positions)
        if (t == s) ins.push_back({a.out.slot(t), a.out.sdim()});
    if (mem.dim > 1) ins.push_back(mem);
    for (const auto& a : agents)
      for (Pos t : a.in.positions)
        if (t == s + 1) outs.push_back({a.in.slot(t), a.in.sdim()});
    if (outs.empty() && ins.empty()) continue;
    std::int64_t din = 1, dout = 1;
    for (const auto& r : ins) din *= r.dim;
    for (const auto& r : outs) dout *= r.dim;
    Reg next{"rnd.m" + std::to_string(s), s == n ? 1 : 2};
    if (next.dim > 1) outs.push_back(next);
    std::int64_t ro = dout * next.dim;
    int junk = (int)((din + ro - 1) / ro);
    if (junk > 1) outs.push_back({"~rnd.j" + std::to_string(s), junk});
    Channel c;
    c.outs = outs;
    c.ins = ins;
    c.kraus = {random_isometry((int)(ro * junk), (int)din, rng)};
    c.tag = "slice" + std::to_string(s);
    out.push_back(c);
    mem = next.dim > 1 ? next : Reg{"", 1};
  }
  return out;
}

}  // namespace

RandomAlo random_alo_protocol(unsigned long long seed) {
  Rng rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomAlo r;
  const int n = 7;
  r.p.name = "random_alo";
  r.p.st = Spacetime::chain(1, n);
  int n_agents = uni(1, 2);
  for (int k = 0; k < n_agents; ++k) {
    std::string name(1, (char)('A' + k));
    // Input positions with strictly later, injective output targets.
    std::vector<Pos> tin, tout;
    OrderMap o;
    int want = uni(1, 2);
    for (Pos t = 1; t < n && (int)tin.size() < want; ++t) {
      if (uni(0, 2) == 0 && (int)tin.size() + (n - t) > want) continue;
      std::vector<Pos> cand;
      for (Pos s = t + 1; s <= n; ++s) {
        bool used = false;
        for (auto& [a, b] : o) used |= b == s;
        if (!used) cand.push_back(s);
      }
      if (cand.empty()) break;
      Pos s = cand[uni(0, (int)cand.size() - 1)];
      tin.push_back(t);
      o[t] = s;
    }
    if (tin.empty()) tin = {1}, o[1] = 2;
    for (auto& [a, b] : o) tout.push_back(b);
    for (Pos s = 2; s <= n; ++s)
      if (uni(0, 4) == 0 && std::find(tout.begin(), tout.end(), s) == tout.end()) tout.push_back(s);
    std::sort(tout.begin(), tout.end());
    int dout = uni(1, 2);
    Agent a = make_agent(name, 2, tin, dout, tout, 2);
    for (int x = 0; x < 2; ++x) {
      int rank = uni(1, 2);
      std::vector<Mat> ks(rank, Mat::Zero(a.out.total_dim() * 2, a.in.one_msg_dim()));
      for (Pos t : tin) {
        auto kr = random_kraus(dout * 2, 2, rank, rng);
        for (int i = 0; i < rank; ++i)
          for (int l = 0; l < dout; ++l)
            for (int rr = 0; rr < 2; ++rr) {
              std::vector<int> dg(a.out.positions.size(), 0);
              for (size_t j = 0; j < a.out.positions.size(); ++j)
                if (a.out.positions[j] == o[t]) dg[j] = 1 + l;
              std::vector<int> dims(a.out.positions.size(), a.out.sdim());
              std::int64_t row = flat_index(dg, dims) * 2 + rr;
              for (int li = 0; li < 2; ++li) ks[i](row, a.in.one_msg_index(t, li)) = kr[i](l * 2 + rr, li);
            }
      }
      a.ops.push_back(one_msg_op(a, "x=" + std::to_string(x), ks));
    }
    r.order[name] = o;
    r.p.agents.push_back(a);
  }
  r.p.process = random_process(r.p.agents, n, rng);
  r.p.chi = remove_maximal_chi(r.p.st);
  return r;
}

RandomRelabel random_relabel_pair(unsigned long long seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  RandomAlo base = random_alo_protocol(seed);
  RandomRelabel r;
  r.p = base.p;
  r.p.name = "random_relabel";
  const int n = r.p.st.size();
  r.relabel.st2 = Spacetime::chain(1, 3 * n + 1);
  for (const auto& a : r.p.agents)
    for (int io = 0; io < 2; ++io) {
      const Wire& w = io == 0 ? a.in : a.out;
      int delta = std::uniform_int_distribution<int>(0, 2)(rng);
      SystemMap sm{a.name, io == 0, {}};
      for (Pos t : w.positions) sm.map[t] = 3 * t - delta;
      r.relabel.maps.systems[w.name] = sm;
    }
  return r;
}

namespace {

Vec random_state(int d, Rng& rng) {
  Vec v = ginibre(d, 1, rng).col(0);
  return v / v.norm();
}

Vec padded(const Vec& v) {
  Vec w = Vec::Zero(v.size() + 1);
  w.tail(v.size()) = v;
  return w;
}

}  // namespace

Protocol lo_only_protocol(unsigned long long seed) {
  Rng rng(seed);
  Protocol p;
  p.name = "lo_only";
  p.st = Spacetime::chain(1, 7);
  p.st.past = 1, p.st.future = 6, p.st.result = 7;
  Agent P = make_agent("P", 0, {}, 2, {1}, 1);
  Agent A = make_agent("A", 2, {2, 4}, 2, {3, 5}, 1);
  Agent F = make_agent("F", 2, {6}, 0, {}, 2);
  for (int i = 0; i < 2; ++i) P.ops.push_back(prepare_op(P, "prep", {padded(random_state(2, rng))}));
  for (int i = 0; i < 2; ++i) {
    Mat u2 = random_unitary(2, rng), u4 = random_unitary(2, rng);
    Mat k = Mat::Zero(A.out.total_dim(), A.in.one_msg_dim());
    for (int lo = 0; lo < 2; ++lo)
      for (int li = 0; li < 2; ++li) {
        // Output at 5 is slot digits (0, 1 + lo).
        k(1 + lo, A.in.one_msg_index(2, li)) = u2(lo, li);
        k(1 + lo, A.in.one_msg_index(4, li)) = u4(lo, li);
      }
    A.ops.push_back(one_msg_op(A, "U" + std::to_string(i), {k}));
  }
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {P, A, F};
  std::vector<Reg> o1{{"A.I@2", 3}, {"lo.m", 3}}, i1{{"P.O@1", 3}};
  Rules r1;
  for (int x = 0; x < 3; ++x) add_rule(r1, o1, {x}, {0, x});
  std::vector<Reg> o3{{"A.I@4", 3}, {"~lo.d3", 3}}, i3{{"A.O@3", 3}, {"lo.m", 3}};
  Rules r3;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) add_rule(r3, o3, {y, x}, {x, y});
  std::vector<Reg> o5{{"F.I@6", 3}}, i5{{"A.O@5", 3}};
  p.process = {isometry_from_rules(o1, i1, r1, "~lo.j1", "L1"), isometry_from_rules(o3, i3, r3, "~lo.j3", "L3"),
               identity_channel(o5, i5)};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

Protocol time_dependent_protocol(unsigned long long seed) {
  Rng rng(seed);
  Protocol p;
  p.name = "time_dependent";
  p.st = Spacetime::chain(1, 7);
  p.st.past = 1, p.st.future = 6, p.st.result = 7;
  Agent P = make_agent("P", 0, {}, 4, {1}, 1);
  Agent A = make_agent("A", 2, {2, 4}, 2, {3, 5}, 1);
  Agent F = make_agent("F", 4, {6}, 0, {}, 4);
  for (int i = 0; i < 3; ++i) P.ops.push_back(prepare_op(P, "prep", {padded(random_state(4, rng))}));
  for (int i = 0; i < 2; ++i)
    A.ops.push_back(unitary_slot_op(A, "U" + std::to_string(i), {random_unitary(2, rng), random_unitary(2, rng)}));
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {P, A, F};
  // P's message index 1 + 2 l + c: control c = 0 delivers at 2, c = 1 at 4.
  std::vector<Reg> i1{{"P.O@1", 5}}, o1{{"A.I@2", 3}, {"td.m", 3}, {"td.c", 2}};
  Rules r1;
  for (int l = 0; l < 2; ++l) {
    add_rule(r1, o1, {1 + 2 * l}, {1 + l, 0, 0});
    add_rule(r1, o1, {2 + 2 * l}, {0, 1 + l, 1});
  }
  std::vector<Reg> i3{{"A.O@3", 3}, {"td.m", 3}, {"td.c", 2}}, o3{{"A.I@4", 3}, {"td.m2", 3}, {"td.c2", 2}};
  Rules r3;
  for (int y = 0; y < 3; ++y) {
    add_rule(r3, o3, {y, 0, 0}, {0, y, 0});
    add_rule(r3, o3, {0, y, 1}, {y, 0, 1});
  }
  std::vector<Reg> i5{{"A.O@5", 3}, {"td.m2", 3}, {"td.c2", 2}}, o5{{"F.I@6", 5}, {"~td.vac", 2}};
  Rules r5;
  for (int l = 0; l < 2; ++l) {
    add_rule(r5, o5, {0, 1 + l, 0}, {1 + 2 * l, 0});
    add_rule(r5, o5, {1 + l, 0, 1}, {2 + 2 * l, 0});
  }
  add_rule(r5, o5, {0, 0, 0}, {0, 1});
  p.process = {isometry_from_rules(o1, i1, r1, "~td.j1", "D1"), isometry_from_rules(o3, i3, r3, "~td.j3", "D3"),
               isometry_from_rules(o5, i5, r5, "~td.j5", "D5")};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

Protocol trivial_input_protocol() {
  Protocol p;
  p.name = "trivial_input";
  p.st = Spacetime::chain(1, 7);
  p.st.past = 1, p.st.future = 6, p.st.result = 7;
  Agent B = make_agent("B", 0, {}, 2, {3}, 1);
  Agent A = make_agent("A", 2, {4}, 2, {5}, 1);
  Agent F = make_agent("F", 2, {6}, 0, {}, 2);
  Vec zero = Vec::Zero(3), plus = Vec::Zero(3);
  zero(1) = 1.0;
  plus(1) = kR2, plus(2) = kR2;
  B.ops.push_back(prepare_op(B, "0", {zero}));
  B.ops.push_back(prepare_op(B, "+", {plus}));
  A.ops.push_back(unitary_slot_op(A, "1", {Mat::Identity(2, 2)}));
  A.ops.push_back(unitary_slot_op(A, "H", {hadamard()}));
  F.ops.push_back(measure_computational(F, "computational"));
  p.agents = {B, A, F};
  p.process = {identity_channel({{"A.I@4", 3}}, {{"B.O@3", 3}}), identity_channel({{"F.I@6", 3}}, {{"A.O@5", 3}})};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

std::vector<std::string> scenario_names() {
  return {"trivvio", "sigproj", "coherence_switch", "lugano", "nolo", "dynamicalpar", "norestriction"};
}

}  // namespace procbox
