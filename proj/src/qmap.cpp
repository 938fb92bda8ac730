#include "procbox/qmap.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace procbox {

namespace {


bool contains(const PosSet& s, Pos t) { return std::find(s.begin(), s.end(), t) != s.end(); }

std::string show(const PosSet& s) {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "}";
  return os.str();
}

}  // namespace

Mat choi(const Channel& c) {
  std::int64_t no = c.out_dim(), ni = c.in_dim(), D = no * ni;
  Mat j = Mat::Zero(D, D);
  for (const auto& k : c.kraus) {
    Vec v(D);
    for (std::int64_t r = 0; r < no; ++r)
      for (std::int64_t i = 0; i < ni; ++i) v(r * ni + i) = k(r, i);
    j += v * v.adjoint();
  }
  return j;
}

bool is_cptp(const Channel& c, double tol) {
  Mat s = kraus_sum(c);
  return (s - Mat::Identity(s.rows(), s.cols())).norm() <= tol;
}

bool is_trace_nonincreasing(const Channel& c, double tol) {
  Mat s = kraus_sum(c);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (s + s.adjoint()));
  return es.eigenvalues().size() == 0 || es.eigenvalues().maxCoeff() <= 1.0 + tol;
}

Channel trace_outputs(const Channel& c, const std::vector<std::string>& names) {
  if (names.empty()) return c;
  std::vector<std::pair<std::string, std::string>> rn;
  for (const auto& n : names) {
    if (c.find_out(n) < 0) throw std::invalid_argument("trace_outputs: no output " + n);
    rn.push_back({n, "~" + n});
  }
  return close({rename(c, rn)});
}

Channel then_inplace(const Channel& c, const Channel& op) {
  std::vector<std::pair<std::string, std::string>> rc, ro;
  for (const auto& r : op.ins) {
    if (c.find_out(r.name) < 0) throw std::invalid_argument("then_inplace: no output " + r.name);
    rc.push_back({r.name, r.name + "#ip"});
    ro.push_back({r.name, r.name + "#ip"});
  }
  Channel o2 = op;
  for (auto& r : o2.ins) r.name += "#ip";
  return close({rename(c, rc), o2});
}

Channel before_inplace(const Channel& op, const Channel& c) {
  std::vector<std::pair<std::string, std::string>> rc;
  for (const auto& r : op.outs) {
    if (c.find_in(r.name) < 0) throw std::invalid_argument("before_inplace: no input " + r.name);
    rc.push_back({r.name, r.name + "#ip"});
  }
  Channel o2 = op;
  for (auto& r : o2.outs) r.name += "#ip";
  Channel c2 = c;
  for (auto& r : c2.ins)
    for (const auto& [a, b] : rc)
      if (r.name == a) r.name = b;
  return close({o2, c2});
}

Channel trace_replace_vacuum_op(const std::vector<Reg>& regs) {
  Channel c{regs, regs, {}, "trv"};
  std::int64_t d = c.in_dim();
  for (std::int64_t b = 0; b < d; ++b) {
    Mat k = Mat::Zero(d, d);
    k(0, b) = 1.0;
    c.kraus.push_back(std::move(k));
  }
  return c;
}

Channel trace_replace_vacuum(const Channel& c, const std::vector<std::string>& out_regs) {
  if (out_regs.empty()) return c;
  std::vector<Reg> regs;
  for (const auto& n : out_regs) {
    int i = c.find_out(n);
    if (i < 0) throw std::invalid_argument("trace_replace_vacuum: no output " + n);
    regs.push_back(c.outs[i]);
  }
  return then_inplace(c, trace_replace_vacuum_op(regs));
}

Channel trace_replace_vacuum_inputs(const Channel& c, const std::vector<std::string>& in_regs) {
  if (in_regs.empty()) return c;
  std::vector<Reg> regs;
  for (const auto& n : in_regs) {
    int i = c.find_in(n);
    if (i < 0) throw std::invalid_argument("trace_replace_vacuum_inputs: no input " + n);
    regs.push_back(c.ins[i]);
  }
  return before_inplace(trace_replace_vacuum_op(regs), c);
}

std::optional<Pos> reg_time(const std::string& name) {
  Pos t;
  if (slot_time(name, t)) return t;
  return std::nullopt;
}

Report check_causality(const Channel& c, const Spacetime& st, const CausalityFunction& chi, double tol) {
  auto check_pos = [&](const std::string& n) {
    auto t = reg_time(n);
    if (t && !st.contains(*t)) throw std::invalid_argument("register " + n + " is stamped outside the spacetime");
    return t;
  };
  for (const auto& r : c.outs) check_pos(r.name);
  for (const auto& r : c.ins) check_pos(r.name);
  Report rep;
  for (const PosSet& tp : bottom_closed_subsets(st)) {
    PosSet kept = chi(tp);
    std::vector<std::string> drop_out, drop_in;
    for (const auto& r : c.outs) {
      if (!r.name.empty() && r.name[0] == '~') continue;
      auto t = reg_time(r.name);
      bool keep = t ? contains(tp, *t)
                    : (st.result ? contains(tp, *st.result) : (int)tp.size() == st.size());
      if (!keep) drop_out.push_back(r.name);
    }
    for (const auto& r : c.ins) {
      auto t = reg_time(r.name);
      if (t && !contains(kept, *t)) drop_in.push_back(r.name);
    }
    Channel a = trace_outputs(c, drop_out);
    if (drop_in.empty()) continue;
    Channel b = trace_replace_vacuum_inputs(a, drop_in);
    double d = choi_distance(a, b);
    rep.value = std::max(rep.value, d);
    if (d > tol) {
      rep.pass = false;
      rep.witness = tp;
      rep.message = "causality violated on downset " + show(tp) + " (distance " + std::to_string(d) + ")";
      return rep;
    }
  }
  rep.message = "causal";
  return rep;
}

Report check_pseudo_causality(const Channel& c, const Spacetime& st, double tol) {
  CausalityFunction id;
  for (const auto& s : bottom_closed_subsets(st)) id.table[s] = s;
  Report r = check_causality(c, st, id, tol);
  if (r.pass) r.message = "pseudo-causal";
  return r;
}

Channel purify(const Channel& c, const std::string& anc) {
  if (!is_cptp(c, 1e-8)) throw std::invalid_argument("purify: map is not trace preserving");
  int nk = (int)c.kraus.size();
  std::int64_t no = c.out_dim(), ni = c.in_dim();
  Mat v = Mat::Zero(no * nk, ni);
  for (int k = 0; k < nk; ++k)
    for (std::int64_t r = 0; r < no; ++r) v.row(r * nk + k) = c.kraus[k].row(r);
  auto outs = c.outs;
  outs.push_back({anc, nk});
  return single_kraus(outs, c.ins, v, "purify(" + c.tag + ")");
}

Channel minimal_kraus(const Channel& c, double tol) {
  int n = (int)c.kraus.size();
  std::int64_t D = c.out_dim() * c.in_dim();
  Mat z(D, n);
  for (int k = 0; k < n; ++k) z.col(k) = Eigen::Map<const Vec>(c.kraus[k].data(), D);
  Channel r{c.outs, c.ins, {}, c.tag};
  if (n <= D) {
    Mat g = z.adjoint() * z;
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
    for (int j = n - 1; j >= 0; --j)
      if (es.eigenvalues()(j) > tol * std::max(1.0, lmax)) {
        Vec v = z * es.eigenvectors().col(j);
        r.kraus.push_back(Eigen::Map<Mat>(v.data(), c.out_dim(), c.in_dim()));
      }
  } else {
    Mat g = z * z.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
    for (int j = (int)D - 1; j >= 0; --j)
      if (es.eigenvalues()(j) > tol * std::max(1.0, lmax)) {
        Vec v = es.eigenvectors().col(j) * std::sqrt(es.eigenvalues()(j));
        r.kraus.push_back(Eigen::Map<Mat>(v.data(), c.out_dim(), c.in_dim()));
      }
  }
  if (r.kraus.empty()) r.kraus.push_back(Mat::Zero(c.out_dim(), c.in_dim()));
  return r;
}

namespace {

// Minimal Stinespring of the prefix map: inputs of groups <= m (later inputs vacuum),
// outputs of groups <= m (later outputs traced). Rows (outs..., env), cols ins.
Mat prefix_stinespring(const Channel& c, const std::vector<int>& outs_le, const std::vector<int>& ins_le, int& E,
                       double tol) {
  std::vector<char> oin(c.outs.size(), 0), iin(c.ins.size(), 0);
  for (int o : outs_le) oin[o] = 1;
  for (int i : ins_le) iin[i] = 1;
  std::vector<int> odims, idims;
  for (const auto& r : c.outs) odims.push_back(r.dim);
  for (const auto& r : c.ins) idims.push_back(r.dim);
  std::int64_t dol = 1, dil = 1, dlater = 1;
  for (int o : outs_le) dol *= c.outs[o].dim;
  for (int i : ins_le) dil *= c.ins[i].dim;
  for (size_t o = 0; o < c.outs.size(); ++o)
    if (!oin[o]) dlater *= c.outs[o].dim;
  std::int64_t ni = c.in_dim(), no = c.out_dim();
  // Kraus of the prefix: one per (original Kraus, later-output basis state).
  std::vector<Mat> ks;
  std::vector<int> idg(c.ins.size(), 0), odg(c.outs.size(), 0);
  // column map: prefix input index -> original input index with later inputs 0
  std::vector<std::int64_t> colmap(dil);
  {
    std::vector<int> sub_dims;
    for (int i : ins_le) sub_dims.push_back(c.ins[i].dim);
    for (std::int64_t x = 0; x < dil; ++x) {
      auto dg = digits(x, sub_dims);
      std::fill(idg.begin(), idg.end(), 0);
      for (size_t k = 0; k < ins_le.size(); ++k) idg[ins_le[k]] = dg[k];
      colmap[x] = flat_index(idg, idims);
    }
  }
  std::vector<int> later_o;
  for (size_t o = 0; o < c.outs.size(); ++o)
    if (!oin[o]) later_o.push_back((int)o);
  std::vector<int> sub_o, later_d;
  for (int o : outs_le) sub_o.push_back(c.outs[o].dim);
  for (int o : later_o) later_d.push_back(c.outs[o].dim);
  // row map: (prefix out index, later index) -> original out index
  std::vector<std::int64_t> rowmap(dol * dlater);
  for (std::int64_t y = 0; y < dol; ++y) {
    auto dy = digits(y, sub_o);
    for (std::int64_t e = 0; e < dlater; ++e) {
      auto de = digits(e, later_d);
      for (size_t k = 0; k < outs_le.size(); ++k) odg[outs_le[k]] = dy[k];
      for (size_t k = 0; k < later_o.size(); ++k) odg[later_o[k]] = de[k];
      rowmap[y * dlater + e] = flat_index(odg, odims);
    }
  }
  (void)ni, (void)no;
  for (const auto& k : c.kraus)
    for (std::int64_t e = 0; e < dlater; ++e) {
      Mat m(dol, dil);
      for (std::int64_t y = 0; y < dol; ++y)
        for (std::int64_t x = 0; x < dil; ++x) m(y, x) = k(rowmap[y * dlater + e], colmap[x]);
      if (m.norm() > 0) ks.push_back(std::move(m));
    }
  Channel tmp;
  for (int o : outs_le) tmp.outs.push_back(c.outs[o]);
  for (int i : ins_le) tmp.ins.push_back(c.ins[i]);
  tmp.kraus = ks;
  if (tmp.kraus.empty()) tmp.kraus.push_back(Mat::Zero(dol, dil));
  Channel mk = minimal_kraus(tmp, tol);
  E = (int)mk.kraus.size();
  Mat w(dol * E, dil);
  for (int j = 0; j < E; ++j)
    for (std::int64_t y = 0; y < dol; ++y) w.row(y * E + j) = mk.kraus[j].row(y);
  return w;
}

}  // namespace

SequenceRep factorize(const Channel& c, const std::vector<int>& in_group, const std::vector<int>& out_group, int L,
                      const std::string& prefix, double tol) {
  if ((int)in_group.size() != (int)c.ins.size() || (int)out_group.size() != (int)c.outs.size())
    throw std::invalid_argument("factorize: group vectors do not match registers");
  SequenceRep rep;
  auto ordered = [&](const std::vector<int>& grp, int upto) {
    std::vector<int> r;
    for (int g = 0; g <= upto; ++g)
      for (int i = 0; i < (int)grp.size(); ++i)
        if (grp[i] == g) r.push_back(i);
    return r;
  };
  Mat wprev;
  int Eprev = 1;
  std::int64_t dol_prev = 1, dil_prev = 1;
  for (int m = 0; m < L; ++m) {
    auto outs_le = ordered(out_group, m), ins_le = ordered(in_group, m);
    int E = 1;
    Mat w = prefix_stinespring(c, outs_le, ins_le, E, 1e-12);
    std::vector<Reg> in_m, out_m;
    std::int64_t dim_in_m = 1, dim_out_m = 1, dol = 1, dil = 1;
    for (int i = 0; i < (int)c.ins.size(); ++i)
      if (in_group[i] == m) in_m.push_back(c.ins[i]), dim_in_m *= c.ins[i].dim;
    for (int o = 0; o < (int)c.outs.size(); ++o)
      if (out_group[o] == m) out_m.push_back(c.outs[o]), dim_out_m *= c.outs[o].dim;
    for (int o : outs_le) dol *= c.outs[o].dim;
    for (int i : ins_le) dil *= c.ins[i].dim;
    Mat v;
    if (m == 0) {
      v = w;
    } else {
      // A[e, (o,i)] = W_{m-1}[(o,e), i]
      Mat A(Eprev, dol_prev * dil_prev);
      for (std::int64_t o = 0; o < dol_prev; ++o)
        for (int e = 0; e < Eprev; ++e)
          for (std::int64_t i = 0; i < dil_prev; ++i) A(e, o * dil_prev + i) = wprev(o * Eprev + e, i);
      Mat Ap = pinv(A, 1e-10);
      v = Mat::Zero(dim_out_m * E, (std::int64_t)Eprev * dim_in_m);
      for (std::int64_t j = 0; j < dim_in_m; ++j) {
        Mat B(dim_out_m * E, dol_prev * dil_prev);
        for (std::int64_t o = 0; o < dol_prev; ++o)
          for (std::int64_t y = 0; y < dim_out_m; ++y)
            for (int e = 0; e < E; ++e)
              for (std::int64_t i = 0; i < dil_prev; ++i)
                B(y * E + e, o * dil_prev + i) = w((o * dim_out_m + y) * E + e, i * dim_in_m + j);
        Mat vj = B * Ap;
        double res = (vj * A - B).norm();
        if (res > tol * std::max(1.0, B.norm()))
          throw CausalityError("factorize: group " + std::to_string(m) + " outputs depend on later inputs (residual " +
                                   std::to_string(res) + ")",
                               m);
        for (int e = 0; e < Eprev; ++e) v.col(e * dim_in_m + j) = vj.col(e);
      }
    }
    double iso = (v.adjoint() * v - Mat::Identity(v.cols(), v.cols())).norm();
    if (iso > std::max(tol, 1e-8) * std::sqrt((double)v.cols()) * 10)
      throw CausalityError("factorize: slice " + std::to_string(m) + " is not isometric (defect " +
                               std::to_string(iso) + ")",
                           m);
    Channel s;
    s.tag = prefix + ".slice" + std::to_string(m);
    if (m > 0) s.ins.push_back({prefix + ".m" + std::to_string(m - 1), Eprev});
    for (const auto& r : in_m) s.ins.push_back(r);
    s.outs = out_m;
    std::string mem = m + 1 < L ? prefix + ".m" + std::to_string(m) : "~" + prefix + ".env";
    s.outs.push_back({mem, E});
    s.kraus.push_back(v);
    rep.isometries.push_back(std::move(s));
    rep.ancilla_dims.push_back(E);
    wprev = std::move(w);
    Eprev = E;
    dol_prev = dol;
    dil_prev = dil;
  }
  return rep;
}

SequenceRep sequence_representation(const Channel& c, const Spacetime& st, const CausalityFunction& chi, bool strict,
                                    const std::string& prefix, double tol) {
  Report vr = validate_causality_function(st, chi);
  if (!vr.pass) throw std::invalid_argument("sequence_representation: invalid causality function: " + vr.message);
  std::vector<PosSet> layers;
  PosSet s = st.elements();
  while (!s.empty()) {
    PosSet n = chi(st.sorted(s));
    PosSet layer;
    for (Pos t : s)
      if (!contains(n, t)) layer.push_back(t);
    layers.push_back(layer);
    s = n;
  }
  std::reverse(layers.begin(), layers.end());
  auto layer_of = [&](Pos t) {
    for (int i = 0; i < (int)layers.size(); ++i)
      if (contains(layers[i], t)) return i;
    throw std::invalid_argument("sequence_representation: position outside spacetime");
  };
  int L = (int)layers.size() + (strict ? 1 : 0);
  std::vector<int> gin, gout;
  for (const auto& r : c.ins) {
    auto t = reg_time(r.name);
    gin.push_back(t ? layer_of(*t) + (strict ? 1 : 0) : 0);
  }
  for (const auto& r : c.outs) {
    auto t = reg_time(r.name);
    gout.push_back(t && !(r.name[0] == '~') ? layer_of(*t) : L - 1);
  }
  SequenceRep rep = factorize(c, gin, gout, L, prefix, tol);
  rep.slices = layers;
  if (strict) rep.slices.push_back({});
  return rep;
}

Channel recompose(const SequenceRep& s) { return close(s.isometries); }

namespace {

std::vector<Channel> c_one_slices(const Wire& in, const std::string& out_name, const std::string& prefix) {
  if (out_name == in.name) throw std::invalid_argument("build_C_one: output wire must be renamed");
  int n = (int)in.positions.size(), d = in.dim, sd = in.sdim();
  std::vector<Channel> out;
  for (int k = 0; k < n; ++k) {
    bool first = k == 0, last = k + 1 == n;
    Pos t = in.positions[k];
    int fin = first ? 1 : 3;
    // inputs (f, x); outputs (y, f', j) with j = (which, x)
    std::int64_t ndom = (std::int64_t)fin * sd;
    Mat v = Mat::Zero((std::int64_t)sd * 3 * 2 * sd, ndom);
    auto put = [&](int f, int x, int y, int f2, int which, int jx) {
      std::int64_t row = (((std::int64_t)y * 3 + f2) * 2 + which) * sd + jx;
      v(row, (std::int64_t)(first ? 0 : f) * sd + x) = 1.0;
    };
    for (int f = 0; f < fin; ++f)
      for (int x = 0; x < sd; ++x) {
        bool single = x >= 1 && x <= d, vac = x == 0;
        if (f == 0) {
          if (vac) {
            if (last) put(f, x, 1, 0, 0, 0);
            else put(f, x, 0, 0, 0, 0);
          } else if (single) {
            put(f, x, x, 1, 0, 0);
          } else {
            put(f, x, last ? 1 : 0, 2, 0, x);
          }
        } else if (f == 1) {
          put(f, x, 0, 1, 0, x);
        } else {
          put(f, x, last ? 1 : 0, 2, 1, x);
        }
      }
    Channel s;
    s.tag = prefix + ".c1@" + std::to_string(t);
    if (!first) s.ins.push_back({prefix + ".f" + std::to_string(k - 1), 3});
    s.ins.push_back({in.slot(t), sd});
    s.outs.push_back({out_name + "@" + std::to_string(t), sd});
    s.outs.push_back({last ? "~" + prefix + ".f" : prefix + ".f" + std::to_string(k), 3});
    s.outs.push_back({"~" + prefix + ".j@" + std::to_string(t), 2 * sd});
    s.kraus.push_back(v);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<Channel> C_one_slices(const Wire& in, const std::string& out_name, const std::string& prefix) {
  return c_one_slices(in, out_name, prefix);
}

Channel build_C_one(const Wire& in, const std::string& out_name) {
  if (in.trivial()) throw std::invalid_argument("build_C_one: trivial wire");
  Channel c = close(c_one_slices(in, out_name, "c1"));
  c.tag = "C_one[" + in.name + "]";
  return c;
}

std::vector<Channel> extend_to_fock_net(const std::vector<Mat>& kraus_one, const Wire& in, const Wire& out,
                                        const std::vector<Reg>& extra_outs, bool strict, const std::string& prefix,
                                        double tol) {
  if (in.trivial()) throw std::invalid_argument("extend_to_fock: trivial input wire");
  int D1 = in.one_msg_dim();
  std::int64_t dout = out.total_dim();
  std::int64_t dex = 1;
  for (const auto& r : extra_outs) dex *= r.dim;
  int nout = (int)out.positions.size();
  std::vector<int> odims(nout, out.sdim());
  for (const auto& k : kraus_one) {
    if (k.rows() != dout * dex || k.cols() != D1) throw std::invalid_argument("extend_to_fock: Kraus shape mismatch");
    for (int ti = 0; ti < (int)in.positions.size(); ++ti) {
      Pos t = in.positions[ti];
      PosSet bad;
      for (int l = 0; l < in.dim; ++l) {
        int col = ti * in.dim + l;
        for (std::int64_t r = 0; r < k.rows(); ++r) {
          if (std::abs(k(r, col)) <= tol) continue;
          auto dg = out.trivial() ? std::vector<int>{} : digits(r / dex, odims);
          for (int q = 0; q < (int)dg.size(); ++q)
            if (dg[q] != 0) {
              Pos s = out.positions[q];
              bool ok = strict ? s > t : s >= t;
              if (!ok && !contains(bad, s)) bad.push_back(s);
            }
        }
      }
      if (!bad.empty())
        throw ExtensionError("extend_to_fock: input at " + std::to_string(t) + " emits at " + show(bad), t, bad);
    }
  }
  std::vector<Channel> net = c_one_slices(in, prefix + ".c1", prefix);
  Wire mid = in;
  mid.name = prefix + ".c1";
  Mat e = one_msg_embedding(mid);
  net.push_back(single_kraus({{prefix + ".msg", D1}}, mid.regs(), e.adjoint(), prefix + ".unembed"));
  Channel m;
  m.tag = prefix + ".one";
  m.outs = out.regs();
  for (const auto& r : extra_outs) m.outs.push_back(r);
  m.ins = {{prefix + ".msg", D1}};
  m.kraus = kraus_one;
  net.push_back(std::move(m));
  return net;
}

Channel extend_to_fock(const std::vector<Mat>& kraus_one, const Wire& in, const Wire& out,
                       const std::vector<Reg>& extra_outs, bool strict, double tol) {
  Channel c = close(extend_to_fock_net(kraus_one, in, out, extra_outs, strict, "ext", tol));
  c.tag = "ext";
  return c;
}

Completion complete_to_isometry(const Mat& VQ, const Mat& Q, double tol) {
  std::int64_t n = VQ.rows(), m = Q.rows(), r = Q.cols();
  if (VQ.cols() != r) throw std::invalid_argument("complete_to_isometry: shape mismatch");
  if (r > 0) {
    double dq = (Q.adjoint() * Q - Mat::Identity(r, r)).norm();
    double dv = (VQ.adjoint() * VQ - Mat::Identity(r, r)).norm();
    if (dq > tol || dv > tol)
      throw std::invalid_argument("complete_to_isometry: partial map is not isometric (defect " +
                                  std::to_string(std::max(dq, dv)) + ")");
  }
  Mat qfull = complete_basis(Q, (int)m);
  Mat qc = qfull.rightCols(m - r);
  Completion c;
  if (n - r >= m - r) {
    Mat rfull = complete_basis(VQ, (int)n);
    c.U = VQ * Q.adjoint() + rfull.middleCols(r, m - r) * qc.adjoint();
    c.junk = 1;
    return c;
  }
  std::int64_t extra = m - r;
  int J = 1 + (int)((extra + n - 1) / n);
  c.junk = J;
  c.U = Mat::Zero(n * J, m);
  Mat main = VQ * Q.adjoint();
  for (std::int64_t row = 0; row < n; ++row) c.U.row(row * J) = main.row(row);
  for (std::int64_t i = 0; i < extra; ++i) {
    std::int64_t row = i % n, j = 1 + i / n;
    c.U.row(row * J + j) += qc.col(i).adjoint();
  }
  return c;
}

Completion complete_from_basis(const std::vector<std::int64_t>& domain, const std::vector<Vec>& images,
                               std::int64_t in_dim, double tol) {
  if (domain.size() != images.size()) throw std::invalid_argument("complete_from_basis: size mismatch");
  std::set<std::int64_t> seen;
  std::int64_t n = images.empty() ? 1 : images[0].size();
  Mat Q = Mat::Zero(in_dim, domain.size()), VQ(n, domain.size());
  for (size_t i = 0; i < domain.size(); ++i) {
    if (!seen.insert(domain[i]).second) throw std::invalid_argument("complete_from_basis: repeated input");
    Q(domain[i], i) = 1.0;
    VQ.col(i) = images[i];
  }
  return complete_to_isometry(VQ, Q, tol);
}

Vec basis_vec(const std::vector<Reg>& regs, const std::vector<int>& digs) {
  std::vector<int> dims;
  for (const auto& r : regs) dims.push_back(r.dim);
  Vec v = Vec::Zero(product(dims));
  v(flat_index(digs, dims)) = 1.0;
  return v;
}

Channel isometry_from_domain(std::vector<Reg> outs, const std::vector<Reg>& ins, const Mat& VQ, const Mat& Q,
                             const std::string& junk, const std::string& tag, double tol) {
  Completion comp = complete_to_isometry(VQ, Q, tol);
  if (comp.junk > 1) outs.push_back({junk[0] == '~' ? junk : "~" + junk, comp.junk});
  Channel c;
  c.outs = std::move(outs);
  c.ins = ins;
  c.kraus = {comp.U};
  c.tag = tag;
  return c;
}

Channel isometry_from_rules(std::vector<Reg> outs, const std::vector<Reg>& ins,
                            const std::vector<std::pair<std::vector<int>, Vec>>& rules, const std::string& junk,
                            const std::string& tag, double tol) {
  std::vector<int> idims;
  for (const auto& r : ins) idims.push_back(r.dim);
  std::vector<std::int64_t> dom;
  std::vector<Vec> img;
  for (const auto& [d, v] : rules) {
    dom.push_back(flat_index(d, idims));
    img.push_back(v);
  }
  std::int64_t m = product(idims), n = 1;
  for (const auto& r : outs) n *= r.dim;
  Mat Q = Mat::Zero(m, dom.size()), VQ(n, dom.size());
  std::set<std::int64_t> seen;
  for (size_t i = 0; i < dom.size(); ++i) {
    if (!seen.insert(dom[i]).second) throw std::invalid_argument("isometry_from_rules: repeated input in " + tag);
    Q(dom[i], i) = 1.0;
    if (img[i].size() != n) throw std::invalid_argument("isometry_from_rules: image size in " + tag);
    VQ.col(i) = img[i];
  }
  return isometry_from_domain(std::move(outs), ins, VQ, Q, junk, tag, tol);
}

}  // namespace procbox
