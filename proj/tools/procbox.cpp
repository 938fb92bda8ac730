#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "procbox/extract.hpp"
#include "procbox/io.hpp"
#include "procbox/scenarios.hpp"

using namespace procbox;

namespace {

constexpr int kPass = 0, kFail = 1, kInput = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Protocol load_protocol(const std::string& f) {
  try {
    return protocol_from_json(load_json(f));
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(f + ": " + e.what());
  }
}

Choice parse_settings(const std::string& s, const Protocol& p) {
  Choice c;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      c.push_back(std::stoi(tok));
    } catch (const std::exception&) {
      throw InputError("--settings: not an integer: '" + tok + "'");
    }
  }
  if (c.size() != p.agents.size())
    throw InputError("--settings: expected " + std::to_string(p.agents.size()) + " values");
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] < 0 || c[i] >= (int)p.agents[i].ops.size())
      throw InputError("--settings: op index out of range for agent " + p.agents[i].name);
  return c;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

std::string fmt(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.12f", x);
  return b;
}

void print_distribution(const Distribution& d, const Protocol& p) {
  std::cout << "settings";
  for (auto& a : p.agents) std::cout << " " << a.name;
  std::cout << " | outcome -> probability\n";
  for (std::size_t i = 0; i < d.choices.size(); ++i) {
    std::cout << "[";
    for (std::size_t k = 0; k < d.choices[i].size(); ++k) std::cout << (k ? "," : "") << d.choices[i][k];
    std::cout << "]";
    for (std::size_t o = 0; o < d.probs[i].size(); ++o) {
      if (d.probs[i][o] < 1e-12) continue;
      auto dg = digits((std::int64_t)o, d.outcome_dims);
      std::cout << " (";
      for (std::size_t k = 0; k < dg.size(); ++k) std::cout << (k ? "," : "") << dg[k];
      std::cout << ")=" << fmt(d.probs[i][o]);
    }
    std::cout << "\n";
  }
}

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

int report_checks(const std::string& scenario, const std::vector<Check>& cs) {
  bool all = true;
  for (auto& c : cs) {
    std::cout << scenario << " " << c.name << ": " << (c.ok ? "ok" : "FAIL") << " (" << c.detail << ")\n";
    all = all && c.ok;
  }
  return all ? kPass : kFail;
}

int run_scenario(const std::string& name, const std::string& write, double tol, unsigned long long seed) {
  std::vector<Check> cs;
  std::optional<Protocol> fixture;
  if (name == "trivvio") {
    auto p = trivvio();
    fixture = p;
    double g = gyni_value(p, "A", "B");
    auto r = certify(p, tol);
    cs.push_back({"gyni", std::abs(g - 1.0) <= tol, "value " + fmt(g)});
    cs.push_back({"ao", r.ao.pass, "trace deficit " + fmt(r.ao.trace_deficit)});
    cs.push_back({"lo", !r.lo.pass, r.lo.message});
    cs.push_back({"classification", r.classification == "strong-LO", r.classification});
  } else if (name == "sigproj") {
    auto s = sigproj();
    cs.push_back({"distance", s.distance >= 0.05, "trace distance " + fmt(s.distance)});
    cs.push_back({"oracle", std::abs(s.distance - s.oracle_distance) <= tol, "oracle " + fmt(s.oracle_distance)});
  } else if (name == "coherence_switch") {
    SwitchParams sp;
    Rng rng(seed);
    sp.ua = {random_unitary(2, rng)};
    sp.ub = {random_unitary(2, rng)};
    auto p = coherence_switch(sp);
    fixture = p;
    auto r = certify(p, tol);
    cs.push_back({"certified", is_process_box(r), r.classification});
    auto ex = extract_qcqc(p, tol);
    cs.push_back({"qcqc_valid", ex.validity.pass, "defect " + fmt(ex.validity.defect)});
    cs.push_back({"equivalence", ex.equivalence.pass, "max diff " + fmt(ex.equivalence.max_diff)});
  } else if (name == "lugano") {
    auto p = lugano(false);
    fixture = p;
    auto r = certify(p, tol);
    cs.push_back({"ao", !r.ao.pass && r.ao.trace_deficit > tol, "trace deficit " + fmt(r.ao.trace_deficit)});
    cs.push_back({"lo", r.lo.pass, r.lo.message});
    cs.push_back({"classification", r.classification == "strong-AO", r.classification});
  } else if (name == "nolo") {
    auto p = nolo();
    fixture = p;
    auto r = certify(p, tol);
    cs.push_back({"classification", r.classification == "weak-both", r.classification});
    auto rw = rewrite_weak_violator(p, nolo_reencodings(), tol);
    cs.push_back({"rewrite", is_process_box(rw.certification) && rw.equivalence.pass,
                  "max diff " + fmt(rw.equivalence.max_diff)});
  } else if (name == "dynamicalpar") {
    auto p = dynamicalpar();
    fixture = p;
    auto v = validate(p, tol);
    cs.push_back({"valid", v.pass, v.message});
    auto rs = dynamicalpar_sequential();
    auto rv = validate_relabelling(rs.maps, p.st, rs.st2);
    cs.push_back({"relabelling", rv.pass, rv.message});
    auto c = relabel(p, rs, tol);
    cs.push_back({"sequential", c.output.st.is_chain() && c.equivalence.pass,
                  "max diff " + fmt(c.equivalence.max_diff)});
  } else if (name == "norestriction") {
    auto p = norestriction(false);
    fixture = p;
    auto r0 = certify(p, tol);
    auto r1 = certify(norestriction(true), tol);
    cs.push_back({"without_flip", is_process_box(r0), r0.classification});
    cs.push_back({"with_flip", !r1.ao.pass, r1.classification});
  } else {
    std::string all;
    for (auto& n : scenario_names()) all += " " + n;
    throw InputError("unknown scenario '" + name + "'; known:" + all);
  }
  if (!write.empty()) {
    if (!fixture) throw InputError("scenario '" + name + "' has no protocol to write");
    save_json(write, protocol_to_json(*fixture));
  }
  return report_checks(name, cs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procbox: process boxes, certification and QC-QC extraction"};
  app.require_subcommand(1);
  double tol = 1e-9;
  unsigned long long seed = 1;
  app.add_option("--tol", tol, "numerical tolerance")->capture_default_str();
  app.add_option("--seed", seed, "seed for randomised inputs")->capture_default_str();

  std::string protocol, qcqc_file, settings, out, certificate, report, write, scenario;

  auto* validate_cmd = app.add_subcommand("validate", "check a protocol or a QC-QC");
  auto* vp = validate_cmd->add_option("--protocol", protocol, "protocol JSON");
  validate_cmd->add_option("--qcqc", qcqc_file, "QC-QC JSON")->excludes(vp);

  auto* compose_cmd = app.add_subcommand("compose", "result state for one setting tuple");
  compose_cmd->add_option("--protocol", protocol, "protocol JSON")->required();
  compose_cmd->add_option("--settings", settings, "comma separated op indices")->required();

  auto* run_cmd = app.add_subcommand("run", "outcome distribution table");
  run_cmd->add_option("--protocol", protocol, "protocol JSON")->required();
  run_cmd->add_option("--settings", settings, "comma separated op indices (default: all tuples)");

  auto* certify_cmd = app.add_subcommand("certify", "AO / LO certification report");
  certify_cmd->add_option("--protocol", protocol, "protocol JSON")->required();

  auto* simplify_cmd = app.add_subcommand("simplify", "simplification pipeline");
  simplify_cmd->add_option("--protocol", protocol, "protocol JSON")->required();
  simplify_cmd->add_option("--out", out, "simplified protocol JSON");
  simplify_cmd->add_option("--certificate", certificate, "certificate JSON");

  auto* extract_cmd = app.add_subcommand("extract-qcqc", "extract a QC-QC from a process box");
  extract_cmd->add_option("--protocol", protocol, "protocol JSON")->required();
  extract_cmd->add_option("--out", out, "QC-QC protocol JSON");
  extract_cmd->add_option("--report", report, "report JSON");

  auto* scenario_cmd = app.add_subcommand("scenario", "run a built-in fixture and its checks");
  scenario_cmd->add_option("name", scenario, "fixture name")->required();
  scenario_cmd->add_option("--write", write, "write the fixture protocol as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kInput;
  }

  try {
    if (*validate_cmd) {
      if (!qcqc_file.empty()) {
        auto qp = qcqc_protocol_from_json(load_json(qcqc_file));
        auto r = validate_qcqc(qp.q, tol);
        print(qcqc_report_json(r));
        return r.pass ? kPass : kFail;
      }
      if (protocol.empty()) throw InputError("validate: give --protocol or --qcqc");
      auto r = validate(load_protocol(protocol), tol);
      print(report_json(r));
      return r.pass ? kPass : kFail;
    }
    if (*compose_cmd) {
      auto p = load_protocol(protocol);
      auto rho = compose_protocol(p, parse_settings(settings, p));
      print({{"dims", result_dims(p)}, {"rows", rho.rows()}, {"cols", rho.cols()}, {"state", mat_to_json(rho)}});
      return kPass;
    }
    if (*run_cmd) {
      auto p = load_protocol(protocol);
      std::vector<Choice> cs;
      if (!settings.empty()) cs.push_back(parse_settings(settings, p));
      print_distribution(outcome_distribution(p, cs), p);
      return kPass;
    }
    if (*certify_cmd) {
      auto r = certify(load_protocol(protocol), tol);
      print(certification_json(r));
      return is_process_box(r) ? kPass : kFail;
    }
    if (*simplify_cmd) {
      auto c = simplify(load_protocol(protocol), tol);
      if (!out.empty()) save_json(out, protocol_to_json(c.output));
      auto j = certificate_json(c);
      if (!certificate.empty()) save_json(certificate, j);
      else print(j);
      return c.equivalence.pass ? kPass : kFail;
    }
    if (*extract_cmd) {
      auto r = extract_qcqc(load_protocol(protocol), tol);
      if (!out.empty()) save_json(out, qcqc_protocol_to_json(r.qp));
      auto j = extract_report_json(r);
      if (!report.empty()) save_json(report, j);
      else print(j);
      return r.validity.pass && r.equivalence.pass ? kPass : kFail;
    }
    if (*scenario_cmd) return run_scenario(scenario, write, tol, seed);
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const CertificationError& e) {
    std::cerr << "certification failed: " << e.what() << "\n";
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kInput;
}
