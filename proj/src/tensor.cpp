#include "procbox/tensor.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace procbox {


std::int64_t Channel::out_dim() const {
  std::int64_t d = 1;
  for (const auto& r : outs) d *= r.dim;
  return d;
}
std::int64_t Channel::in_dim() const {
  std::int64_t d = 1;
  for (const auto& r : ins) d *= r.dim;
  return d;
}
int Channel::find_out(const std::string& n) const {
  for (int i = 0; i < (int)outs.size(); ++i)
    if (outs[i].name == n) return i;
  return -1;
}
int Channel::find_in(const std::string& n) const {
  for (int i = 0; i < (int)ins.size(); ++i)
    if (ins[i].name == n) return i;
  return -1;
}

Channel single_kraus(std::vector<Reg> outs, std::vector<Reg> ins, Mat k, std::string tag) {
  Channel c{std::move(outs), std::move(ins), {std::move(k)}, std::move(tag)};
  if (c.kraus[0].rows() != c.out_dim() || c.kraus[0].cols() != c.in_dim())
    throw std::invalid_argument("single_kraus: shape mismatch for " + c.tag);
  return c;
}

Channel identity_channel(const std::vector<Reg>& outs, const std::vector<Reg>& ins) {
  Channel c{outs, ins, {}, "id"};
  if (c.out_dim() != c.in_dim()) throw std::invalid_argument("identity_channel: dimension mismatch");
  c.kraus.push_back(Mat::Identity(c.out_dim(), c.in_dim()));
  return c;
}

Channel state_channel(std::vector<Reg> outs, const std::vector<Vec>& vs, std::string tag) {
  Channel c{std::move(outs), {}, {}, std::move(tag)};
  for (const auto& v : vs) {
    if (v.size() != c.out_dim()) throw std::invalid_argument("state_channel: dimension mismatch");
    c.kraus.push_back(v);
  }
  return c;
}

Channel discard(const std::vector<Reg>& ins) {
  std::vector<Reg> outs;
  for (const auto& r : ins) outs.push_back({"~" + r.name, r.dim});
  Channel c = identity_channel(outs, ins);
  c.tag = "discard";
  return c;
}

std::vector<int> Tensor::dims() const {
  std::vector<int> d;
  for (const auto& l : legs) d.push_back(l.dim);
  return d;
}

int Tensor::find(const std::string& name, LegKind kind) const {
  for (int i = 0; i < (int)legs.size(); ++i)
    if (legs[i].kind == kind && legs[i].name == name) return i;
  return -1;
}

Tensor channel_tensor(const Channel& c) {
  Tensor t;
  long o = 0;
  for (const auto& r : c.outs) {
    bool dropped = !r.name.empty() && r.name[0] == '~';
    t.legs.push_back({r.name, r.dim, dropped ? LegKind::Env : LegKind::Out, o++});
  }
  for (const auto& r : c.ins) t.legs.push_back({r.name, r.dim, LegKind::In, o++});
  int ne = (int)c.kraus.size();
  if (ne == 0) throw std::invalid_argument("channel without Kraus operators: " + c.tag);
  t.legs.push_back({"env", ne, LegKind::Env, o++});
  std::int64_t no = c.out_dim(), ni = c.in_dim();
  t.data.assign(no * ni * ne, cplx(0));
  for (int e = 0; e < ne; ++e) {
    const Mat& k = c.kraus[e];
    if (k.rows() != no || k.cols() != ni)
      throw std::invalid_argument("Kraus shape mismatch in channel " + c.tag);
    for (std::int64_t i = 0; i < ni; ++i)
      for (std::int64_t r = 0; r < no; ++r) t.data[(r * ni + i) * ne + e] = k(r, i);
  }
  return t;
}

Tensor permute(const Tensor& t, const std::vector<int>& order) {
  int n = (int)t.legs.size();
  bool ident = true;
  for (int i = 0; i < n; ++i)
    if (order[i] != i) ident = false;
  if (ident) return t;
  std::vector<std::int64_t> ostride(n, 1);
  for (int i = n - 2; i >= 0; --i) ostride[i] = ostride[i + 1] * t.legs[i + 1].dim;
  Tensor r;
  for (int i : order) r.legs.push_back(t.legs[i]);
  r.data.resize(t.data.size());
  std::vector<int> ndim(n);
  std::vector<std::int64_t> st(n);
  for (int i = 0; i < n; ++i) {
    ndim[i] = t.legs[order[i]].dim;
    st[i] = ostride[order[i]];
  }
  std::vector<int> ctr(n, 0);
  std::int64_t off = 0;
  std::int64_t total = (std::int64_t)t.data.size();
  for (std::int64_t k = 0; k < total; ++k) {
    r.data[k] = t.data[off];
    for (int i = n - 1; i >= 0; --i) {
      if (++ctr[i] < ndim[i]) {
        off += st[i];
        break;
      }
      off -= st[i] * (ndim[i] - 1);
      ctr[i] = 0;
    }
  }
  return r;
}

namespace {
bool pairs_with(const Leg& a, const Leg& b) {
  return a.name == b.name && ((a.kind == LegKind::Out && b.kind == LegKind::In) ||
                              (a.kind == LegKind::In && b.kind == LegKind::Out));
}

std::vector<std::pair<int, int>> shared_legs(const Tensor& a, const Tensor& b) {
  std::vector<std::pair<int, int>> s;
  for (int i = 0; i < (int)a.legs.size(); ++i)
    for (int j = 0; j < (int)b.legs.size(); ++j)
      if (pairs_with(a.legs[i], b.legs[j])) {
        if (a.legs[i].dim != b.legs[j].dim)
          throw std::invalid_argument("dimension mismatch on register " + a.legs[i].name);
        s.push_back({i, j});
      }
  return s;
}
}  // namespace

Tensor contract(const Tensor& a, const Tensor& b) {
  auto sh = shared_legs(a, b);
  std::vector<char> ua(a.legs.size(), 0), ub(b.legs.size(), 0);
  for (auto [i, j] : sh) ua[i] = ub[j] = 1;
  std::vector<int> pa, pb;
  std::int64_t fa = 1, fb = 1, s = 1;
  for (int i = 0; i < (int)a.legs.size(); ++i)
    if (!ua[i]) pa.push_back(i), fa *= a.legs[i].dim;
  for (auto [i, j] : sh) pa.push_back(i), pb.push_back(j), s *= a.legs[i].dim;
  for (int j = 0; j < (int)b.legs.size(); ++j)
    if (!ub[j]) pb.push_back(j), fb *= b.legs[j].dim;
  Tensor ta = permute(a, pa), tb = permute(b, pb);
  Tensor r;
  for (int i = 0; i < (int)a.legs.size(); ++i)
    if (!ua[i]) r.legs.push_back(a.legs[i]);
  for (int j = 0; j < (int)b.legs.size(); ++j)
    if (!ub[j]) r.legs.push_back(b.legs[j]);
  r.data.resize(fa * fb);
  Eigen::Map<const RowMat> ma(ta.data.data(), fa, s);
  Eigen::Map<const RowMat> mb(tb.data.data(), s, fb);
  Eigen::Map<RowMat> mr(r.data.data(), fa, fb);
  mr.noalias() = ma * mb;
  return r;
}

Tensor self_trace(const Tensor& t) {
  std::vector<std::pair<int, int>> pr;
  for (int i = 0; i < (int)t.legs.size(); ++i)
    if (t.legs[i].kind == LegKind::Out)
      for (int j = 0; j < (int)t.legs.size(); ++j)
        if (pairs_with(t.legs[i], t.legs[j])) {
          if (t.legs[i].dim != t.legs[j].dim)
            throw std::invalid_argument("dimension mismatch on looped register " + t.legs[i].name);
          pr.push_back({i, j});
        }
  if (pr.empty()) return t;
  std::vector<char> used(t.legs.size(), 0);
  for (auto [i, j] : pr) used[i] = used[j] = 1;
  std::vector<int> perm;
  std::int64_t rest = 1, sd = 1;
  Tensor r;
  for (int i = 0; i < (int)t.legs.size(); ++i)
    if (!used[i]) perm.push_back(i), rest *= t.legs[i].dim, r.legs.push_back(t.legs[i]);
  for (auto [i, j] : pr) perm.push_back(i), sd *= t.legs[i].dim;
  for (auto [i, j] : pr) perm.push_back(j);
  Tensor p = permute(t, perm);
  r.data.assign(rest, cplx(0));
  for (std::int64_t x = 0; x < rest; ++x) {
    cplx acc = 0;
    for (std::int64_t k = 0; k < sd; ++k) acc += p.data[(x * sd + k) * sd + k];
    r.data[x] = acc;
  }
  return r;
}

Tensor compress_env(const Tensor& t, double rel_tol) {
  std::vector<int> perm, envs;
  Tensor r;
  std::int64_t rest = 1, E = 1;
  long env_origin = 0;
  for (int i = 0; i < (int)t.legs.size(); ++i) {
    if (t.legs[i].kind == LegKind::Env) {
      envs.push_back(i);
      E *= t.legs[i].dim;
      env_origin = std::max(env_origin, t.legs[i].origin);
    } else {
      perm.push_back(i);
      rest *= t.legs[i].dim;
      r.legs.push_back(t.legs[i]);
    }
  }
  if (envs.empty()) return t;
  if (envs.size() == 1 && E == 1) return t;
  for (int e : envs) perm.push_back(e);
  Tensor p = permute(t, perm);
  if (E == 1) {
    p.legs = r.legs;
    p.legs.push_back({"env", 1, LegKind::Env, env_origin});
    return p;
  }
  Eigen::Map<const RowMat> m(p.data.data(), rest, E);
  RowMat out;
  if (E <= rest) {
    Mat g = m.adjoint() * m;
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const auto& lam = es.eigenvalues();
    double lmax = lam.size() ? std::max(0.0, lam(lam.size() - 1)) : 0.0;
    std::vector<int> keep;
    for (int i = (int)lam.size() - 1; i >= 0; --i)
      if (lam(i) > rel_tol * lmax && lam(i) > 0) keep.push_back(i);
    if (keep.empty()) keep.push_back((int)lam.size() - 1);
    Mat v(E, keep.size());
    for (size_t k = 0; k < keep.size(); ++k) v.col(k) = es.eigenvectors().col(keep[k]);
    out = m * v;
  } else {
    Mat g = m * m.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const auto& lam = es.eigenvalues();
    double lmax = lam.size() ? std::max(0.0, lam(lam.size() - 1)) : 0.0;
    std::vector<int> keep;
    for (int i = (int)lam.size() - 1; i >= 0; --i)
      if (lam(i) > rel_tol * lmax && lam(i) > 0) keep.push_back(i);
    if (keep.empty()) keep.push_back((int)lam.size() - 1);
    out.resize(rest, keep.size());
    for (size_t k = 0; k < keep.size(); ++k)
      out.col(k) = es.eigenvectors().col(keep[k]) * std::sqrt(std::max(0.0, lam(keep[k])));
  }
  r.legs.push_back({"env", (int)out.cols(), LegKind::Env, env_origin});
  r.data.assign(out.data(), out.data() + out.size());
  return r;
}

Channel tensor_channel(const Tensor& t) {
  std::vector<int> outs, ins, envs;
  for (int i = 0; i < (int)t.legs.size(); ++i) {
    switch (t.legs[i].kind) {
      case LegKind::Out: outs.push_back(i); break;
      case LegKind::In: ins.push_back(i); break;
      case LegKind::Env: envs.push_back(i); break;
      case LegKind::Free: throw std::invalid_argument("tensor_channel: free leg " + t.legs[i].name);
    }
  }
  auto by_origin = [&](int a, int b) { return t.legs[a].origin < t.legs[b].origin; };
  std::stable_sort(outs.begin(), outs.end(), by_origin);
  std::stable_sort(ins.begin(), ins.end(), by_origin);
  std::vector<int> perm = outs;
  perm.insert(perm.end(), ins.begin(), ins.end());
  perm.insert(perm.end(), envs.begin(), envs.end());
  Tensor p = permute(t, perm);
  Channel c;
  std::int64_t no = 1, ni = 1, ne = 1;
  for (int i : outs) c.outs.push_back({t.legs[i].name, t.legs[i].dim}), no *= t.legs[i].dim;
  for (int i : ins) c.ins.push_back({t.legs[i].name, t.legs[i].dim}), ni *= t.legs[i].dim;
  for (int i : envs) ne *= t.legs[i].dim;
  for (std::int64_t e = 0; e < ne; ++e) {
    Mat k(no, ni);
    for (std::int64_t r = 0; r < no; ++r)
      for (std::int64_t i = 0; i < ni; ++i) k(r, i) = p.data[(r * ni + i) * ne + e];
    c.kraus.push_back(std::move(k));
  }
  return c;
}

Channel close(const std::vector<Channel>& net, const CloseOptions& opt) {
  if (net.empty()) throw std::invalid_argument("close: empty network");
  std::map<std::string, int> nout, nin;
  for (const auto& c : net) {
    for (const auto& r : c.outs)
      if (r.name.empty() || r.name[0] != '~')
        if (++nout[r.name] > 1) throw std::invalid_argument("ambiguous network: register " + r.name + " is output twice");
    for (const auto& r : c.ins)
      if (++nin[r.name] > 1) throw std::invalid_argument("ambiguous network: register " + r.name + " is input twice");
  }
  std::vector<Tensor> ts;
  long base = 0;
  for (const auto& c : net) {
    Tensor t = channel_tensor(c);
    for (auto& l : t.legs) l.origin += base;
    base += (long)t.legs.size();
    t = self_trace(t);
    if (opt.compress) t = compress_env(t);
    ts.push_back(std::move(t));
  }
  while (ts.size() > 1) {
    int bi = -1, bj = -1;
    double best = 0;
    bool best_shared = false;
    for (int i = 0; i < (int)ts.size(); ++i)
      for (int j = i + 1; j < (int)ts.size(); ++j) {
        auto sh = shared_legs(ts[i], ts[j]);
        double sz = (double)ts[i].size() * (double)ts[j].size();
        for (auto [a, b] : sh) sz /= (double)ts[i].legs[a].dim * (double)ts[i].legs[a].dim;
        bool s = !sh.empty();
        if (bi < 0 || (s && !best_shared) || (s == best_shared && sz < best)) {
          bi = i, bj = j, best = sz, best_shared = s;
        }
      }
    Tensor r = self_trace(contract(ts[bi], ts[bj]));
    if (opt.compress) r = compress_env(r);
    ts[bi] = std::move(r);
    ts.erase(ts.begin() + bj);
  }
  Tensor fin = ts[0];
  if (!opt.compress) fin = compress_env(fin, 0.0);
  return tensor_channel(fin);
}

Channel then(const Channel& a, const Channel& b) { return close({a, b}); }

Channel tensor_product(const Channel& a, const Channel& b) {
  for (const auto& r : a.outs)
    if (b.find_in(r.name) >= 0 || b.find_out(r.name) >= 0) throw std::invalid_argument("tensor_product: name clash " + r.name);
  for (const auto& r : a.ins)
    if (b.find_in(r.name) >= 0 || b.find_out(r.name) >= 0) throw std::invalid_argument("tensor_product: name clash " + r.name);
  return close({a, b});
}

Mat state_of(const Channel& c) {
  if (!c.ins.empty()) throw std::invalid_argument("state_of: channel still has inputs (" + c.ins[0].name + ")");
  std::int64_t d = c.out_dim();
  Mat rho = Mat::Zero(d, d);
  for (const auto& k : c.kraus) rho += k * k.adjoint();
  return rho;
}

Mat reduced_state(const Channel& c, const std::vector<std::string>& keep) {
  if (!c.ins.empty()) throw std::invalid_argument("reduced_state: channel still has inputs");
  Tensor t;
  long o = 0;
  for (const auto& r : c.outs) t.legs.push_back({r.name, r.dim, LegKind::Out, o++});
  std::vector<int> perm;
  std::vector<char> used(c.outs.size(), 0);
  std::int64_t dk = 1, dr = 1;
  for (const auto& n : keep) {
    int i = c.find_out(n);
    if (i < 0) throw std::invalid_argument("reduced_state: no register " + n);
    perm.push_back(i);
    used[i] = 1;
    dk *= c.outs[i].dim;
  }
  for (int i = 0; i < (int)c.outs.size(); ++i)
    if (!used[i]) perm.push_back(i), dr *= c.outs[i].dim;
  Mat rho = Mat::Zero(dk, dk);
  for (const auto& k : c.kraus) {
    t.data.assign(k.data(), k.data() + k.size());
    Tensor p = permute(t, perm);
    Eigen::Map<const RowMat> m(p.data.data(), dk, dr);
    rho += m * m.adjoint();
  }
  return rho;
}

Channel align_to(const Channel& b, const Channel& a) {
  if (a.outs.size() != b.outs.size() || a.ins.size() != b.ins.size())
    throw std::invalid_argument("align_to: register sets differ");
  Tensor t;
  long o = 0;
  for (const auto& r : b.outs) t.legs.push_back({r.name, r.dim, LegKind::Out, o++});
  for (const auto& r : b.ins) t.legs.push_back({r.name, r.dim, LegKind::In, o++});
  std::vector<int> perm;
  for (const auto& r : a.outs) {
    int i = b.find_out(r.name);
    if (i < 0 || b.outs[i].dim != r.dim) throw std::invalid_argument("align_to: missing output " + r.name);
    perm.push_back(i);
  }
  for (const auto& r : a.ins) {
    int i = b.find_in(r.name);
    if (i < 0 || b.ins[i].dim != r.dim) throw std::invalid_argument("align_to: missing input " + r.name);
    perm.push_back((int)b.outs.size() + i);
  }
  Channel c{a.outs, a.ins, {}, b.tag};
  std::int64_t no = c.out_dim(), ni = c.in_dim();
  for (const auto& k : b.kraus) {
    // Row-major data of k over (outs, ins).
    t.data.resize(k.size());
    for (Eigen::Index r = 0; r < k.rows(); ++r)
      for (Eigen::Index i = 0; i < k.cols(); ++i) t.data[r * k.cols() + i] = k(r, i);
    Tensor p = permute(t, perm);
    Mat m(no, ni);
    for (std::int64_t r = 0; r < no; ++r)
      for (std::int64_t i = 0; i < ni; ++i) m(r, i) = p.data[r * ni + i];
    c.kraus.push_back(std::move(m));
  }
  return c;
}

double choi_distance(const Channel& a, const Channel& b0) {
  Channel b = align_to(b0, a);
  std::int64_t D = a.out_dim() * a.in_dim();
  int n = (int)(a.kraus.size() + b.kraus.size());
  Mat z(D, n);
  Eigen::VectorXd eta(n);
  int c = 0;
  for (const auto& k : a.kraus) z.col(c) = Eigen::Map<const Vec>(k.data(), D), eta(c++) = 1.0;
  for (const auto& k : b.kraus) z.col(c) = Eigen::Map<const Vec>(k.data(), D), eta(c++) = -1.0;
  if (n >= D) {
    Mat j = z * eta.asDiagonal() * z.adjoint();
    return j.norm();
  }
  Eigen::HouseholderQR<Mat> qr(z);
  Mat r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  Mat m = r * eta.asDiagonal() * r.adjoint();
  return m.norm();
}

Mat kraus_sum(const Channel& c) {
  Mat s = Mat::Zero(c.in_dim(), c.in_dim());
  for (const auto& k : c.kraus) s += k.adjoint() * k;
  return s;
}

Channel rename(const Channel& c, const std::vector<std::pair<std::string, std::string>>& names) {
  std::map<std::string, std::string> m(names.begin(), names.end());
  Channel r = c;
  for (auto& x : r.outs)
    if (m.count(x.name)) x.name = m[x.name];
  for (auto& x : r.ins)
    if (m.count(x.name)) x.name = m[x.name];
  return r;
}

Channel scale_kraus(const Channel& c, cplx s) {
  Channel r = c;
  for (auto& k : r.kraus) k *= s;
  return r;
}

}  // namespace procbox
