#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#include "procbox/certify.hpp"
#include "procbox/compose.hpp"
#include "procbox/extract.hpp"
#include "procbox/linalg.hpp"
#include "procbox/qcqc.hpp"
#include "procbox/scenarios.hpp"
#include "procbox/transform.hpp"

using namespace procbox;

namespace {

constexpr double kTol = 1e-9;
constexpr double kRelabelTol = 1e-12;
constexpr double kSigprojMin = 0.05;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& what, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s criterion %d: %s [%s] (%.1fs)\n", o.pass ? "PASS" : "FAIL", n, what.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

// Weight on the minus outcomes of F op 0 (outcome 2 l + s, F's result last).
double minus_weight(const Mat& rho) {
  double s = 0;
  for (int i = 0; i < rho.rows(); ++i)
    if (i % 4 == 1 || i % 4 == 3) s += rho(i, i).real();
  return s;
}

}  // namespace

int main() {
  criterion(1, "trivvio wins GYNI with certainty", [] {
    double v = gyni_value(trivvio(), "A", "B");
    return Outcome{std::abs(v - 1.0) <= kTol, "gyni=" + fmt(v)};
  });

  criterion(2, "one-way closed-lab bound is 1/2", [] {
    auto b = one_way_gyni_bound();
    return Outcome{b.strategies == 256 && std::abs(b.max_value - 0.5) <= 1e-12,
                   "max=" + fmt(b.max_value) + " strategies=" + std::to_string(b.strategies)};
  });

  criterion(3, "trivvio is AO but not LO (strong-LO)", [] {
    auto p = trivvio();
    auto r = certify(p);
    auto s = search_order_functions(p);
    return Outcome{r.ao.pass && r.ao.trace_deficit <= kTol && !r.lo.pass && s.functions.empty() &&
                       r.classification == "strong-LO",
                   "deficit=" + fmt(r.ao.trace_deficit) + " orders=" + std::to_string(s.functions.size()) +
                       " class=" + r.classification};
  });

  criterion(4, "sigproj reduced states differ", [] {
    auto s = sigproj();
    bool ok = s.distance >= kSigprojMin && std::abs(s.distance - kSigprojDistance) <= kTol &&
              std::abs(s.distance - s.oracle_distance) <= kTol && s.oracle_residual <= kTol;
    return Outcome{ok, "distance=" + fmt(s.distance) + " oracle=" + fmt(s.oracle_distance)};
  });

  criterion(5, "switch extraction, 20 random unitary pairs, commutator witness", [] {
    Outcome o;
    double worst = 0;
    for (unsigned long long seed = 1; seed <= 20; ++seed) {
      Rng rng(seed);
      SwitchParams sp;
      sp.ua = {random_unitary(2, rng)};
      sp.ub = {random_unitary(2, rng)};
      auto pb = coherence_switch(sp);
      auto r = extract_qcqc(pb);
      auto e = qcqc_behavioural_equivalence(r.qp, pb, Correspondence::identity(pb), kTol);
      worst = std::max(worst, e.max_diff);
      if (!r.validity.pass || !e.pass) {
        o.pass = false;
        o.detail = "seed " + std::to_string(seed) + " ";
      }
    }
    auto r = extract_qcqc(coherence_switch());
    // ua = {1, X}, ub = {1, Z}; control |+>.
    double anti = minus_weight(compose_qcqc(r.qp, {0, 1, 1, 0}));
    double comm = minus_weight(compose_qcqc(r.qp, {0, 0, 1, 0}));
    o.pass = o.pass && r.validity.pass && std::abs(anti - 1.0) <= kTol && std::abs(comm) <= kTol;
    o.detail += "max_diff=" + fmt(worst) + " minus(anti)=" + fmt(anti) + " minus(comm)=" + fmt(comm);
    return o;
  });

  criterion(6, "Lugano: strong-AO unrestricted, QC-QC when restricted", [] {
    auto u = certify(lugano(false));
    double multi = 0;
    for (auto& s : u.stats)
      if (s.agent == "C") multi = s.p_in_multi;
    auto pr = lugano(true);
    auto c = certify(pr);
    auto r = extract_qcqc(pr);
    bool ok = !u.ao.pass && u.ao.trace_deficit > kTol && u.ao.agent == "C" && multi > kTol &&
              u.classification == "strong-AO" && is_process_box(c) && r.validity.pass && r.equivalence.pass &&
              r.equivalence.max_diff <= kTol;
    return Outcome{ok, "deficit=" + fmt(u.ao.trace_deficit) + " agent=" + u.ao.agent + " p_multi=" + fmt(multi) +
                           " restricted=" + c.classification + " max_diff=" + fmt(r.equivalence.max_diff)};
  });

  criterion(7, "simplify attains all five properties on the switch", [] {
    auto c = simplify(coherence_switch());
    Outcome o{c.equivalence.pass && c.equivalence.max_diff <= kTol, ""};
    for (auto& n : property_names()) {
      bool got = has(c.properties, n);
      o.pass = o.pass && got;
      if (!got) o.detail += "missing " + n + " ";
    }
    o.detail += "max_diff=" + fmt(c.equivalence.max_diff);
    return o;
  });

  criterion(8, "loop composition matches the link product on 50 instances", [] {
    double worst = 0;
    int maxdim = 0;
    for (unsigned long long seed = 1; seed <= 50; ++seed) {
      auto inst = random_loop_instance(seed);
      auto l = loop_compose(inst.c, inst.match, inst.st, inst.chi);
      auto oracle = loop_by_link_product(inst);
      std::vector<std::string> order;
      for (auto& r : oracle.sys) order.push_back(r.name);
      worst = std::max(worst, (reorder(choi_labeled(l), order).m - oracle.m).cwiseAbs().maxCoeff());
      maxdim = std::max({maxdim, (int)inst.c.kraus[0].rows(), (int)inst.c.kraus[0].cols()});
    }
    return Outcome{worst <= kTol && maxdim <= 8, "max_diff=" + fmt(worst) + " max_dim=" + std::to_string(maxdim)};
  });

  criterion(9, "random causality functions remove maximal elements (200)", [] {
    int bad = 0, invalid = 0;
    for (unsigned long long seed = 1; seed <= 200; ++seed) {
      auto st = random_poset(1 + (int)(seed % 6), 0.4, seed);
      auto chi = random_causality_function(st, seed * 7919 + 3);
      invalid += !validate_causality_function(st, chi).pass;
      bad += !maximal_elements_removed(st, chi);
    }
    return Outcome{bad == 0 && invalid == 0, "violations=" + std::to_string(bad) + " invalid=" + std::to_string(invalid)};
  });

  criterion(10, "ALO implies LO with the same order (30)", [] {
    int bad = 0;
    for (unsigned long long seed = 1; seed <= 30; ++seed) {
      auto ra = random_alo_protocol(seed);
      bool alo = true;
      for (auto& a : ra.p.agents) {
        auto it = ra.order.find(a.name);
        if (it == ra.order.end()) continue;
        for (auto& op : a.ops) alo = alo && check_ALO(a, op, it->second).pass;
      }
      bad += !alo || !check_LO(ra.p, ra.order).pass;
    }
    return Outcome{bad == 0, "failures=" + std::to_string(bad)};
  });

  criterion(11, "add_control on the simplified switch", [] {
    auto s = simplify(coherence_switch());
    auto c = add_control(s.output);
    return Outcome{c.pass && c.off_block <= kTol && c.traced_distance <= kTol,
                   "off_block=" + fmt(c.off_block) + " traced=" + fmt(c.traced_distance)};
  });

  criterion(12, "nolo: weak AO and LO, rewrite then extract", [] {
    auto p = nolo();
    auto c = certify(p);
    auto rw = rewrite_weak_violator(p, nolo_reencodings());
    auto r = extract_qcqc(rw.p);
    bool ok = !c.ao.pass && !c.lo.pass && c.classification == "weak-both" && is_process_box(rw.certification) &&
              rw.equivalence.pass && rw.equivalence.max_diff <= kTol && r.validity.pass && r.equivalence.pass;
    return Outcome{ok, "class=" + c.classification + " rewritten=" + rw.certification.classification +
                           " max_diff=" + fmt(rw.equivalence.max_diff)};
  });

  criterion(13, "relabelling leaves result states unchanged (30)", [] {
    double worst = 0;
    int invalid = 0;
    for (unsigned long long seed = 1; seed <= 30; ++seed) {
      auto rr = random_relabel_pair(seed);
      invalid += !validate_relabelling(rr.relabel.maps, rr.p.st, rr.relabel.st2).pass;
      auto q = relabelled(rr.p, rr.relabel);
      for (auto& ch : all_choices(rr.p)) {
        Mat a = compose_protocol(rr.p, ch), b = compose_protocol(q, ch);
        if (a.rows() != b.rows()) ++invalid;
        else worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
    }
    return Outcome{invalid == 0 && worst <= kRelabelTol, "max_diff=" + fmt(worst)};
  });

  criterion(14, "QC-QC to process box and back on the spanning set", [] {
    auto qp = spanning_protocol(quantum_switch(2));
    auto tp = qcqc_to_pb(qp);
    auto r = extract_qcqc(tp.p);
    auto e = qcqc_equivalence(qp, r.qp, Correspondence::identity(tp.p), kTol);
    return Outcome{tp.equivalence.pass && r.validity.pass && e.pass,
                   "max_diff=" + fmt(e.max_diff) + " checked=" + std::to_string(e.checked)};
  });

  std::printf("%d of 14 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
