#include "procbox/qcqc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <set>

#include "procbox/qmap.hpp"

namespace procbox {

int QcQc::acted(const QcqcKey& key) const { return std::popcount(key.K) + (key.k >= 0 ? 1 : 0); }

int QcQc::cols(const QcqcKey& key) const {
  if (key.k < 0) return dP;
  return dout.at(key.k) * alpha.at(acted(key));
}

int QcQc::rows(const QcqcKey& key) const {
  if (key.to == N) return dF * alphaF;
  return din.at(key.to) * alpha.at(acted(key) + 1);
}

Mat QcQc::op(const QcqcKey& key) const {
  auto it = V.find(key);
  if (it != V.end()) return it->second;
  return Mat::Zero(rows(key), cols(key));
}

void QcQc::check_dims() const {
  if (N < 1) throw QcqcError("qcqc: at least one agent required");
  if ((int)din.size() != N || (int)dout.size() != N || (int)names.size() != N)
    throw QcqcError("qcqc: per-agent dimension lists must have N entries");
  if ((int)alpha.size() != N + 1) throw QcqcError("qcqc: alpha must list alpha_0..alpha_N");
  if (dP < 1 || dF < 1 || alphaF < 1) throw QcqcError("qcqc: dimensions must be positive");
  for (int k = 0; k < N; ++k)
    if (din[k] < 1 || dout[k] < 1) throw QcqcError("qcqc: agent dimensions must be positive");
  for (int a : alpha)
    if (a < 1) throw QcqcError("qcqc: ancilla dimensions must be positive");
  for (const auto& [key, m] : V) {
    bool ok = key.to >= 0 && key.to <= N && key.k >= -1 && key.k < N && key.K < (1u << N);
    if (ok && key.k >= 0) ok = !(key.K >> key.k & 1u);
    if (ok && key.k < 0) ok = key.K == 0;
    if (ok && key.to < N) ok = !(key.K >> key.to & 1u) && key.to != key.k;
    if (ok && key.to == N) ok = acted(key) == N;
    if (!ok) throw QcqcError("qcqc: internal operation with an invalid label");
    if (m.rows() != rows(key) || m.cols() != cols(key))
      throw QcqcError("qcqc: internal operation has shape " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()) + ", expected " + std::to_string(rows(key)) + "x" +
                      std::to_string(cols(key)));
  }
}

std::vector<ControlLabel> QcQc::labels(int n) const {
  std::vector<ControlLabel> out;
  if (n == 0) return {ControlLabel{0, -1}};
  for (unsigned K = 0; K < (1u << N); ++K) {
    if (std::popcount(K) != n - 1) continue;
    for (int k = 0; k < N; ++k)
      if (!(K >> k & 1u)) out.push_back({K, k});
  }
  return out;
}

std::vector<int> QcQc::targets(const ControlLabel& l) const {
  unsigned U = l.k >= 0 ? (l.K | 1u << l.k) : 0u;
  std::vector<int> t;
  for (int j = 0; j < N; ++j)
    if (!(U >> j & 1u)) t.push_back(j);
  if (t.empty()) t.push_back(N);
  return t;
}

int QcQc::label_input_dim(const ControlLabel& l) const {
  return l.k < 0 ? dP : din.at(l.k) * alpha.at(std::popcount(l.K) + 1);
}

QcQc quantum_switch(int d) {
  if (d < 1) throw QcqcError("quantum_switch: d >= 1 required");
  QcQc q;
  q.N = 2;
  q.names = {"A", "B"};
  q.dP = q.dF = 2 * d;
  q.din = q.dout = {d, d};
  q.alpha = {1, 1, 1};
  Mat toA = Mat::Zero(d, 2 * d), toB = Mat::Zero(d, 2 * d), fA = Mat::Zero(2 * d, d), fB = Mat::Zero(2 * d, d);
  for (int l = 0; l < d; ++l) {
    toA(l, 2 * l) = 1.0;
    toB(l, 2 * l + 1) = 1.0;
    fA(2 * l, l) = 1.0;
    fB(2 * l + 1, l) = 1.0;
  }
  q.V[{0, -1, 0}] = toA;
  q.V[{0, -1, 1}] = toB;
  q.V[{0, 0, 1}] = Mat::Identity(d, d);
  q.V[{0, 1, 0}] = Mat::Identity(d, d);
  q.V[{1u, 1, 2}] = fA;  // A acted first, control 0
  q.V[{2u, 0, 2}] = fB;
  return q;
}

namespace {

unsigned after_set(const ControlLabel& l) { return l.k >= 0 ? (l.K | 1u << l.k) : 0u; }

// Span of the ancilla parts of vectors in (d x a).
Mat ancilla_support(const Mat& B, int d, int a, double tol) {
  Mat v(a, B.cols() * d);
  for (int c = 0; c < B.cols(); ++c)
    for (int i = 0; i < d; ++i) v.col(c * d + i) = B.col(c).segment(i * a, a);
  return orth(v, tol);
}

double isometry_defect(const Mat& M) {
  if (M.cols() == 0) return 0.0;
  if (M.cols() > M.rows()) return 1.0;
  Eigen::JacobiSVD<Mat> svd(M);
  double w = 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    w = std::max(w, std::abs(svd.singularValues()(i) * svd.singularValues()(i) - 1.0));
  return w;
}

struct Writer {
  std::vector<Mat> blocks;  // dout x din (agents) or 1 x dF (future)
  std::int64_t stride = 1;
};

// Apply the writer's blocks (tensored with the ancilla identity) to the columns
// whose register digit is still zero.
Mat act(const Writer& w, const Mat& S, int anc, std::int64_t C) {
  int rin = (int)w.blocks[0].rows();
  Mat T = Mat::Zero(rin * anc, C);
  const std::int64_t nb = (std::int64_t)w.blocks.size();
  for (std::int64_t x = 0; x < nb; ++x) {
    Mat M = kron(w.blocks[x], Mat::Identity(anc, anc)) * S;
    for (std::int64_t c = 0; c < C; ++c) {
      if ((c / w.stride) % nb != 0) continue;
      T.col(c + x * w.stride) = M.col(c);
    }
  }
  return T;
}

// Sum over orders by label propagation. Returns the (dF * alphaF) x C output.
Mat propagate(const QcQc& q, const Mat& S0, const std::vector<Writer>& agents) {
  const std::int64_t C = S0.cols();
  std::map<ControlLabel, Mat> S;
  for (int j : q.targets({0, -1})) S[{0, j}] = q.op({0, -1, j}) * S0;
  Mat fin = Mat::Zero(q.dF * q.alphaF, C);
  for (int n = 1; n <= q.N; ++n) {
    std::map<ControlLabel, Mat> next;
    for (const auto& [l, s] : S) {
      Mat T = act(agents[l.k], s, q.alpha[n], C);
      unsigned U = after_set(l);
      for (int j : q.targets(l)) {
        Mat out = q.op({l.K, l.k, j}) * T;
        if (j == q.N) {
          fin += out;
        } else {
          auto it = next.find({U, j});
          if (it == next.end())
            next.emplace(ControlLabel{U, j}, out);
          else
            it->second += out;
        }
      }
    }
    S = std::move(next);
  }
  return fin;
}

std::vector<Mat> rows_by_result(const Mat& K, int R) {
  std::vector<Mat> b;
  for (int r = 0; r < R; ++r) {
    Mat m(K.rows() / R, K.cols());
    for (int o = 0; o < m.rows(); ++o) m.row(o) = K.row(o * R + r);
    b.push_back(m);
  }
  return b;
}

}  // namespace

EffectiveSpaces effective_input_spaces(const QcQc& q, double tol) {
  q.check_dims();
  EffectiveSpaces e;
  e.after[{0, -1}] = Mat::Identity(q.dP, q.dP);
  for (int n = 1; n <= q.N; ++n) {
    std::map<ControlLabel, std::vector<Mat>> parts;
    for (const auto& src : q.labels(n - 1))
      for (int j : q.targets(src)) parts[{after_set(src), j}].push_back(q.op({src.K, src.k, j}) * e.after.at(src));
    for (const auto& l : q.labels(n)) {
      int rows = q.label_input_dim(l);
      Mat cat(rows, 0);
      for (const auto& m : parts[l]) {
        Mat t(rows, cat.cols() + m.cols());
        t << cat, m;
        cat = t;
      }
      Mat b = cat.cols() ? orth(cat, tol) : Mat(rows, 0);
      e.before[l] = b;
      Mat sa = ancilla_support(b, q.din[l.k], q.alpha[n], tol);
      e.after[l] = kron(Mat::Identity(q.dout[l.k], q.dout[l.k]), sa);
    }
  }
  return e;
}

QcqcReport validate_qcqc(const QcQc& q, double tol) {
  QcqcReport rep;
  auto e = effective_input_spaces(q);
  for (int n = 0; n <= q.N; ++n) {
    // Rows grouped by target label, columns by source label.
    std::map<ControlLabel, int> roff;
    int nrows = 0;
    auto srcs = q.labels(n);
    for (const auto& s : srcs)
      for (int j : q.targets(s)) {
        ControlLabel t{after_set(s), j};
        if (!roff.count(t)) {
          roff[t] = nrows;
          nrows += j == q.N ? q.dF * q.alphaF : q.din[j] * q.alpha[n + 1];
        }
      }
    int ncols = 0;
    for (const auto& s : srcs) ncols += (int)e.after.at(s).cols();
    Mat M = Mat::Zero(nrows, ncols);
    int c0 = 0;
    for (const auto& s : srcs) {
      const Mat& E = e.after.at(s);
      for (int j : q.targets(s)) {
        Mat b = q.op({s.K, s.k, j}) * E;
        M.block(roff[{after_set(s), j}], c0, b.rows(), b.cols()) = b;
      }
      c0 += (int)E.cols();
    }
    double d = isometry_defect(M);
    rep.step_defects.push_back(d);
    if (d > rep.defect) rep.defect = d, rep.worst_step = n;
  }
  rep.pass = rep.defect <= tol;
  rep.message = rep.pass ? "isometric on the effective input spaces"
                         : "step " + std::to_string(rep.worst_step) + " has isometry defect " +
                               std::to_string(rep.defect);
  return rep;
}

std::vector<Mat> qcqc_apply(const QcQc& q, const std::vector<std::vector<Mat>>& kraus) {
  q.check_dims();
  if ((int)kraus.size() != q.N) throw QcqcError("qcqc_apply: one Kraus list per agent required");
  for (int k = 0; k < q.N; ++k) {
    if (kraus[k].empty()) throw QcqcError("qcqc_apply: empty Kraus list");
    for (const auto& m : kraus[k])
      if (m.rows() != q.dout[k] || m.cols() != q.din[k]) throw QcqcError("qcqc_apply: Kraus shape mismatch");
  }
  std::vector<Mat> out;
  std::vector<int> idx(q.N, 0);
  Mat S0 = Mat::Identity(q.dP, q.dP);
  while (true) {
    std::vector<Writer> w(q.N);
    for (int k = 0; k < q.N; ++k) w[k].blocks = {kraus[k][idx[k]]};
    out.push_back(propagate(q, S0, w));
    int k = 0;
    while (k < q.N && ++idx[k] == (int)kraus[k].size()) idx[k++] = 0;
    if (k == q.N) break;
  }
  return out;
}

Mat qcqc_process_choi(const QcQc& q) {
  q.check_dims();
  std::vector<int> dims{q.dP};
  for (int k = 0; k < q.N; ++k) dims.push_back(q.din[k] * q.dout[k]);
  dims.push_back(q.dF);
  std::int64_t C = product(dims);
  std::vector<std::int64_t> stride(dims.size(), 1);
  for (int i = (int)dims.size() - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];
  Mat S0 = Mat::Zero(q.dP, C);
  for (int p = 0; p < q.dP; ++p) S0(p, p * stride[0]) = 1.0;
  std::vector<Writer> w(q.N);
  for (int k = 0; k < q.N; ++k) {
    w[k].stride = stride[k + 1];
    for (int i = 0; i < q.din[k]; ++i)
      for (int o = 0; o < q.dout[k]; ++o) {
        Mat b = Mat::Zero(q.dout[k], q.din[k]);
        b(o, i) = 1.0;
        w[k].blocks.push_back(b);
      }
  }
  Mat fin = propagate(q, S0, w);
  Writer f;
  f.stride = 1;
  for (int x = 0; x < q.dF; ++x) {
    Mat b = Mat::Zero(1, q.dF);
    b(0, x) = 1.0;
    f.blocks.push_back(b);
  }
  Mat S = act(f, fin, q.alphaF, C);
  return S.transpose() * S.conjugate();
}

Mat link_agents(const QcQc& q, const Mat& W, const std::vector<Mat>& agent_chois) {
  if ((int)agent_chois.size() != q.N) throw QcqcError("link_agents: one Choi per agent required");
  Mat M = Mat::Identity(1, 1);
  for (int k = 0; k < q.N; ++k) {
    if (agent_chois[k].rows() != q.din[k] * q.dout[k]) throw QcqcError("link_agents: Choi dimension mismatch");
    M = kron(M, agent_chois[k]);
  }
  const std::int64_t X = M.rows();
  if (W.rows() != q.dP * X * q.dF) throw QcqcError("link_agents: process dimension mismatch");
  Mat J = Mat::Zero(q.dP * q.dF, q.dP * q.dF);
  for (int p = 0; p < q.dP; ++p)
    for (int f = 0; f < q.dF; ++f)
      for (int p2 = 0; p2 < q.dP; ++p2)
        for (int f2 = 0; f2 < q.dF; ++f2) {
          cplx s = 0.0;
          for (std::int64_t x = 0; x < X; ++x)
            for (std::int64_t x2 = 0; x2 < X; ++x2)
              s += W((p * X + x) * q.dF + f, (p2 * X + x2) * q.dF + f2) * M(x, x2);
          J(p * q.dF + f, p2 * q.dF + f2) = s;
        }
  return J;
}

void QcqcProtocol::check() const {
  q.check_dims();
  if ((int)agent_party.size() != q.N) throw QcqcError("qcqc protocol: one party per circuit agent required");
  std::set<int> used{past, future};
  if (past == future) throw QcqcError("qcqc protocol: past and future must differ");
  for (int j : agent_party) used.insert(j);
  if ((int)used.size() != q.N + 2 || (int)parties.size() != q.N + 2 || *used.rbegin() >= (int)parties.size() ||
      *used.begin() < 0)
    throw QcqcError("qcqc protocol: parties must be the past, the future and one per agent");
  auto need = [&](int j, int rows_per_r, int cols) {
    const auto& pa = parties[j];
    if (pa.ops.empty()) throw QcqcError("qcqc protocol: party " + pa.name + " has no operations");
    for (const auto& op : pa.ops) {
      if (op.empty()) throw QcqcError("qcqc protocol: empty Kraus list for " + pa.name);
      for (const auto& m : op)
        if (m.rows() != rows_per_r * pa.outcome_dim || m.cols() != cols)
          throw QcqcError("qcqc protocol: Kraus shape mismatch for " + pa.name);
    }
  };
  need(past, q.dP, 1);
  need(future, 1, q.dF);
  for (int k = 0; k < q.N; ++k) need(agent_party[k], q.dout[k], q.din[k]);
}

std::vector<Choice> all_choices(const QcqcProtocol& qp) {
  std::vector<Choice> out;
  Choice c(qp.parties.size(), 0);
  while (true) {
    out.push_back(c);
    int k = (int)c.size() - 1;
    while (k >= 0 && ++c[k] == (int)qp.parties[k].ops.size()) c[k--] = 0;
    if (k < 0) break;
  }
  return out;
}

Mat compose_qcqc(const QcqcProtocol& qp, const Choice& choice) {
  qp.check();
  const int np = (int)qp.parties.size();
  if ((int)choice.size() != np) throw QcqcError("compose_qcqc: one setting per party required");
  std::vector<int> R(np);
  for (int j = 0; j < np; ++j) {
    R[j] = qp.parties[j].outcome_dim;
    if (choice[j] < 0 || choice[j] >= (int)qp.parties[j].ops.size())
      throw QcqcError("compose_qcqc: setting out of range for " + qp.parties[j].name);
  }
  std::int64_t C = product(R);
  std::vector<std::int64_t> stride(np, 1);
  for (int j = np - 2; j >= 0; --j) stride[j] = stride[j + 1] * R[j + 1];
  std::vector<const std::vector<Mat>*> K(np);
  for (int j = 0; j < np; ++j) K[j] = &qp.parties[j].ops[choice[j]];
  Mat rho = Mat::Zero(C, C);
  std::vector<int> idx(np, 0);
  while (true) {
    const Mat& kp = (*K[qp.past])[idx[qp.past]];
    Mat S0 = Mat::Zero(qp.q.dP, C);
    for (int p = 0; p < qp.q.dP; ++p)
      for (int r = 0; r < R[qp.past]; ++r) S0(p, r * stride[qp.past]) = kp(p * R[qp.past] + r, 0);
    std::vector<Writer> w(qp.q.N);
    for (int k = 0; k < qp.q.N; ++k) {
      int j = qp.agent_party[k];
      w[k].blocks = rows_by_result((*K[j])[idx[j]], R[j]);
      w[k].stride = stride[j];
    }
    Mat fin = propagate(qp.q, S0, w);
    Writer f;
    f.stride = stride[qp.future];
    f.blocks = rows_by_result((*K[qp.future])[idx[qp.future]], R[qp.future]);
    Mat S = act(f, fin, qp.q.alphaF, C);
    rho += S.transpose() * S.conjugate();
    int j = 0;
    while (j < np && ++idx[j] == (int)K[j]->size()) idx[j++] = 0;
    if (j == np) break;
  }
  return rho;
}

namespace {

void check_bijective(const std::vector<int>& counts_a, const std::vector<int>& counts_b, const Correspondence& c) {
  if (counts_a.size() != counts_b.size() || c.ops.size() != counts_a.size())
    throw std::invalid_argument("qcqc equivalence: party count mismatch");
  for (size_t k = 0; k < counts_a.size(); ++k) {
    std::set<int> img(c.ops[k].begin(), c.ops[k].end());
    if ((int)c.ops[k].size() != counts_a[k] || counts_b[k] != counts_a[k] || (int)img.size() != counts_a[k] ||
        *img.begin() < 0 || *img.rbegin() >= counts_b[k])
      throw std::invalid_argument("qcqc equivalence: correspondence not bijective for party " + std::to_string(k));
  }
}

EquivalenceReport compare(const std::vector<Choice>& list, const Correspondence& c,
                          const std::function<Mat(const Choice&)>& f1, const std::function<Mat(const Choice&)>& f2,
                          double tol) {
  EquivalenceReport rep;
  for (const auto& ch : list) {
    Choice ch2(ch.size());
    for (size_t k = 0; k < ch.size(); ++k) ch2[k] = c.ops[k][ch[k]];
    Mat r1 = f1(ch), r2 = f2(ch2);
    if (c.result_iso) r1 = (*c.result_iso) * r1 * c.result_iso->adjoint();
    if (r1.rows() != r2.rows()) throw std::invalid_argument("qcqc equivalence: result dimensions differ");
    double d = (r1 - r2).norm();
    ++rep.checked;
    rep.max_diff = std::max(rep.max_diff, d);
    if (d > tol && rep.pass) {
      rep.pass = false;
      rep.witness = ch;
    }
  }
  rep.message = rep.pass ? "equivalent" : "result states differ";
  return rep;
}

}  // namespace

EquivalenceReport qcqc_behavioural_equivalence(const QcqcProtocol& qp, const Protocol& p, const Correspondence& c,
                                               double tol, const std::vector<Choice>& choices) {
  std::vector<int> na, nb;
  for (const auto& x : qp.parties) na.push_back((int)x.ops.size());
  for (const auto& a : p.agents) nb.push_back((int)a.ops.size());
  check_bijective(na, nb, c);
  for (size_t k = 0; k < qp.parties.size(); ++k)
    if (qp.parties[k].outcome_dim != p.agents[k].outcome_dim)
      throw std::invalid_argument("qcqc equivalence: outcome dimension mismatch for " + qp.parties[k].name);
  auto list = choices.empty() ? all_choices(qp) : choices;
  return compare(
      list, c, [&](const Choice& ch) { return compose_qcqc(qp, ch); },
      [&](const Choice& ch) { return compose_protocol(p, ch); }, tol);
}

EquivalenceReport qcqc_equivalence(const QcqcProtocol& a, const QcqcProtocol& b, const Correspondence& c, double tol,
                                   const std::vector<Choice>& choices) {
  std::vector<int> na, nb;
  for (const auto& x : a.parties) na.push_back((int)x.ops.size());
  for (const auto& x : b.parties) nb.push_back((int)x.ops.size());
  check_bijective(na, nb, c);
  auto list = choices.empty() ? all_choices(a) : choices;
  return compare(
      list, c, [&](const Choice& ch) { return compose_qcqc(a, ch); },
      [&](const Choice& ch) { return compose_qcqc(b, ch); }, tol);
}

namespace {

const double kR2 = 1.0 / std::sqrt(2.0);

std::vector<Vec> preparation_states(int d) {
  std::vector<Vec> s;
  auto e = [&](int i) {
    Vec v = Vec::Zero(d);
    v(i) = 1.0;
    return v;
  };
  for (int i = 0; i < d; ++i) s.push_back(e(i));
  if (d == 2) {
    s.push_back((e(0) + e(1)) * kR2);
    s.push_back((e(0) + cplx(0, 1) * e(1)) * kR2);
    return s;
  }
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      s.push_back((e(i) + e(j)) * kR2);
      s.push_back((e(i) + cplx(0, 1) * e(j)) * kR2);
    }
  return s;
}

// Rows <e_a| of an informationally complete POVM with sum_a |e_a><e_a| = 1.
Mat povm_rows(int d) {
  std::vector<Vec> s;
  if (d == 2) {
    Vec z0(2), z1(2), xp(2), xm(2), yp(2), ym(2);
    z0 << 1, 0;
    z1 << 0, 1;
    xp << kR2, kR2;
    xm << kR2, -kR2;
    yp << kR2, cplx(0, kR2);
    ym << kR2, cplx(0, -kR2);
    Mat r(6, 2);
    int i = 0;
    for (const Vec& v : {z0, z1, xp, xm, yp, ym}) r.row(i++) = v.adjoint() / std::sqrt(3.0);
    return r;
  }
  s = preparation_states(d);
  Mat G = Mat::Zero(d, d);
  for (const auto& v : s) G += v * v.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(G);
  Mat Gm = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  Mat r((int)s.size(), d);
  for (size_t i = 0; i < s.size(); ++i) r.row(i) = s[i].adjoint() * Gm;
  return r;
}

}  // namespace

QcqcParty spanning_agent(const std::string& name, int din, int dout) {
  QcqcParty a;
  a.name = name;
  Mat E = povm_rows(din);
  int R = (int)E.rows();
  a.outcome_dim = R;
  int i = 0;
  for (const auto& s : preparation_states(dout)) {
    Mat K(dout * R, din);
    for (int o = 0; o < dout; ++o)
      for (int r = 0; r < R; ++r) K.row(o * R + r) = s(o) * E.row(r);
    a.ops.push_back({K});
    a.settings.push_back("span" + std::to_string(i++));
  }
  return a;
}

QcqcParty spanning_past(const std::string& name, int d) {
  QcqcParty a;
  a.name = name;
  int i = 0;
  for (const auto& s : preparation_states(d)) {
    a.ops.push_back({Mat(s)});
    a.settings.push_back("span" + std::to_string(i++));
  }
  return a;
}

QcqcParty spanning_future(const std::string& name, int d) {
  QcqcParty a;
  a.name = name;
  Mat E = povm_rows(d);
  a.outcome_dim = (int)E.rows();
  a.ops.push_back({E});
  a.settings.push_back("tomography");
  return a;
}

QcqcProtocol spanning_protocol(const QcQc& q, const std::string& past, const std::string& future) {
  QcqcProtocol qp;
  qp.q = q;
  qp.parties.push_back(spanning_past(past, q.dP));
  for (int k = 0; k < q.N; ++k) {
    qp.parties.push_back(spanning_agent(q.names[k], q.din[k], q.dout[k]));
    qp.agent_party.push_back(k + 1);
  }
  qp.parties.push_back(spanning_future(future, q.dF));
  qp.past = 0;
  qp.future = q.N + 1;
  return qp;
}

QcqcProtocol switch_protocol(int d, const std::vector<Mat>& ua, const std::vector<Mat>& ub,
                             const std::vector<Vec>& past) {
  QcqcProtocol qp;
  qp.q = quantum_switch(d);
  QcqcParty P{"P", 1, {}, {}}, A{"A", 1, {}, {}}, B{"B", 1, {}, {}}, F{"F", 2 * d, {}, {}};
  for (const auto& v : past) {
    if (v.size() != 2 * d) throw QcqcError("switch_protocol: preparations live on target x control");
    P.ops.push_back({Mat(v)});
    P.settings.push_back("prep");
  }
  for (size_t i = 0; i < ua.size(); ++i) A.ops.push_back({ua[i]}), A.settings.push_back("U" + std::to_string(i));
  for (size_t i = 0; i < ub.size(); ++i) B.ops.push_back({ub[i]}), B.settings.push_back("U" + std::to_string(i));
  Mat pm = Mat::Zero(2 * d, 2 * d);
  for (int l = 0; l < d; ++l)
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < 2; ++i) pm(l * 2 + s, l * 2 + i) = (s == 1 && i == 1) ? -kR2 : kR2;
  F.ops.push_back({pm});
  F.settings.push_back("target+pm");
  F.ops.push_back({Mat::Identity(2 * d, 2 * d)});
  F.settings.push_back("computational");
  qp.parties = {P, A, B, F};
  qp.past = 0, qp.future = 3;
  qp.agent_party = {1, 2};
  return qp;
}

QcqcToPb qcqc_to_pb(const QcqcProtocol& qp, double tol, bool verify) {
  qp.check();
  auto vr = validate_qcqc(qp.q, tol);
  if (!vr.pass) throw QcqcError("qcqc_to_pb: invalid qcqc: " + vr.message);
  const QcQc& q = qp.q;
  const int N = q.N;
  auto eff = effective_input_spaces(q);
  QcqcToPb out;
  Protocol& p = out.p;
  p.name = "qcqc_pb";
  p.st = Spacetime::chain(1, 2 * N + 3);
  p.st.past = 1, p.st.future = 2 * N + 2, p.st.result = 2 * N + 3;
  std::vector<Pos> tin, tout;
  for (int n = 1; n <= N; ++n) tin.push_back(2 * n), tout.push_back(2 * n + 1);

  p.agents.resize(qp.parties.size());
  for (size_t j = 0; j < qp.parties.size(); ++j) {
    const auto& pa = qp.parties[j];
    auto setting = [&](size_t i) { return i < pa.settings.size() ? pa.settings[i] : "op" + std::to_string(i); };
    if ((int)j == qp.past) {
      Agent a = make_agent(pa.name, 0, {}, q.dP, {1}, pa.outcome_dim);
      const int R = pa.outcome_dim;
      for (size_t i = 0; i < pa.ops.size(); ++i) {
        std::vector<Vec> st;
        for (const auto& K : pa.ops[i]) {
          Vec v = Vec::Zero((q.dP + 1) * R);
          for (int x = 0; x < q.dP; ++x)
            for (int r = 0; r < R; ++r) v((1 + x) * R + r) = K(x * R + r, 0);
          st.push_back(v);
        }
        a.ops.push_back(prepare_op(a, setting(i), st));
      }
      p.agents[j] = a;
    } else if ((int)j == qp.future) {
      Agent a = make_agent(pa.name, q.dF, {2 * N + 2}, 0, {}, pa.outcome_dim);
      for (size_t i = 0; i < pa.ops.size(); ++i) a.ops.push_back(measure_op(a, setting(i), pa.ops[i]));
      p.agents[j] = a;
    }
  }
  for (int k = 0; k < N; ++k) {
    const int j = qp.agent_party[k];
    const auto& pa = qp.parties[j];
    Agent a = make_agent(pa.name, q.din[k], tin, q.dout[k], tout, pa.outcome_dim);
    const int R = pa.outcome_dim, so = a.out.sdim();
    std::vector<int> odims(N, so);
    for (size_t i = 0; i < pa.ops.size(); ++i) {
      std::vector<Mat> ko;
      for (const auto& K : pa.ops[i]) {
        Mat m = Mat::Zero(product(odims) * R, a.in.one_msg_dim());
        for (int n = 0; n < N; ++n)
          for (int l = 0; l < q.din[k]; ++l)
            for (int o = 0; o < q.dout[k]; ++o) {
              std::vector<int> dg(N, 0);
              dg[n] = 1 + o;
              for (int r = 0; r < R; ++r)
                m(flat_index(dg, odims) * R + r, a.in.one_msg_index(tin[n], l)) = K(o * R + r, l);
            }
        ko.push_back(m);
      }
      a.ops.push_back(one_msg_op(a, i < pa.settings.size() ? pa.settings[i] : "op" + std::to_string(i), ko));
    }
    p.agents[j] = a;
  }

  // Memory after step n: (label index, alpha_n).
  std::vector<std::map<ControlLabel, int>> lab(N + 1);
  for (int n = 1; n <= N; ++n) {
    int i = 0;
    for (const auto& l : q.labels(n)) lab[n][l] = i++;
  }
  auto mem = [&](int n) { return Reg{"q.m" + std::to_string(n), (int)lab[n].size() * q.alpha[n]}; };
  for (int n = 0; n <= N; ++n) {
    std::vector<Reg> ins, outs;
    if (n == 0) {
      ins.push_back({p.agents[qp.past].out.slot(1), q.dP + 1});
    } else {
      for (int k = 0; k < N; ++k) ins.push_back({p.agents[qp.agent_party[k]].out.slot(2 * n + 1), q.dout[k] + 1});
      ins.push_back(mem(n));
    }
    if (n < N) {
      for (int k = 0; k < N; ++k) outs.push_back({p.agents[qp.agent_party[k]].in.slot(2 * n + 2), q.din[k] + 1});
      outs.push_back(mem(n + 1));
    } else {
      outs.push_back({p.agents[qp.future].in.slot(2 * N + 2), q.dF + 1});
      outs.push_back({"~q.aF", q.alphaF});
    }
    std::vector<int> idims, odims;
    for (const auto& r : ins) idims.push_back(r.dim);
    for (const auto& r : outs) odims.push_back(r.dim);
    std::int64_t nin = product(idims), nout = product(odims);
    std::vector<Vec> qcols, vcols;
    for (const auto& l : q.labels(n)) {
      const Mat& E = eff.after.at(l);
      const int an = q.alpha[n];
      for (int c = 0; c < E.cols(); ++c) {
        Vec qv = Vec::Zero(nin), vv = Vec::Zero(nout);
        if (n == 0) {
          for (int x = 0; x < q.dP; ++x) qv(1 + x) = E(x, c);
        } else {
          for (int o = 0; o < q.dout[l.k]; ++o)
            for (int a = 0; a < an; ++a) {
              std::vector<int> dg(N + 1, 0);
              dg[l.k] = 1 + o;
              dg[N] = lab[n].at(l) * an + a;
              qv(flat_index(dg, idims)) += E(o * an + a, c);
            }
        }
        for (int j : q.targets(l)) {
          Vec img = q.op({l.K, l.k, j}) * E.col(c);
          if (j == N) {
            for (int f = 0; f < q.dF; ++f)
              for (int a = 0; a < q.alphaF; ++a) vv(flat_index({1 + f, a}, odims)) += img(f * q.alphaF + a);
          } else {
            const int a1 = q.alpha[n + 1];
            ControlLabel t{after_set(l), j};
            for (int i = 0; i < q.din[j]; ++i)
              for (int a = 0; a < a1; ++a) {
                std::vector<int> dg(N + 1, 0);
                dg[j] = 1 + i;
                dg[N] = lab[n + 1].at(t) * a1 + a;
                vv(flat_index(dg, odims)) += img(i * a1 + a);
              }
          }
        }
        qcols.push_back(qv);
        vcols.push_back(vv);
      }
    }
    Mat Q(nin, qcols.size()), VQ(nout, vcols.size());
    for (size_t c = 0; c < qcols.size(); ++c) Q.col(c) = qcols[c], VQ.col(c) = vcols[c];
    p.process.push_back(
        isometry_from_domain(outs, ins, VQ, Q, "~q.j" + std::to_string(n), "Q" + std::to_string(n), tol));
  }
  p.chi = remove_maximal_chi(p.st);
  out.correspondence = Correspondence::identity(p);
  if (verify) {
    out.equivalence = qcqc_behavioural_equivalence(qp, p, out.correspondence, tol);
    if (!out.equivalence.pass)
      throw QcqcError("qcqc_to_pb: process box differs from the circuit (" +
                      std::to_string(out.equivalence.max_diff) + ")");
  }
  return out;
}

}  // namespace procbox
