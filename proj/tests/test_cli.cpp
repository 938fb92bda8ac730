#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "procbox/io.hpp"
#include "procbox/qmap.hpp"
#include "procbox/scenarios.hpp"

using namespace procbox;

namespace {

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  std::string cmd = std::string(PROCBOX_CLI) + " " + args + " 2>&1";
  Run r{-1, ""};
  FILE* f = popen(cmd.c_str(), "r");
  if (!f) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), f)) > 0) r.out.append(buf.data(), n);
  int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string tmp(const std::string& name) { return testing::TempDir() + "procbox_cli_" + name; }

std::string write(const std::string& name, const json& j) {
  auto path = tmp(name);
  save_json(path, j);
  return path;
}

// A's input at 3 is the same slot as B's output.
Protocol same_time_relay() {
  Protocol p;
  p.name = "sametime";
  p.st = Spacetime::chain(1, 4);
  p.st.result = 4;
  Agent a = make_agent("A", 2, {3}, 2, {1}, 1);
  Agent b = make_agent("B", 2, {2}, 2, {3}, 1);
  a.ops.push_back(make_op("0", {state_channel({{"A.O@1", 3}}, {basis_vec({{"A.O@1", 3}}, {1})}),
                                discard({{"A.I@3", 3}}), result_state(a, 0)}));
  b.ops.push_back(make_op("0", {identity_channel({{"B.O@3", 3}}, {{"B.I@2", 3}}), result_state(b, 0)}));
  p.agents = {a, b};
  p.process = {identity_channel({{"B.I@2", 3}}, {{"A.O@1", 3}}), identity_channel({{"A.I@3", 3}}, {{"B.O@3", 3}})};
  p.chi = remove_maximal_chi(p.st);
  return p;
}

}  // namespace

TEST(Cli, ScenarioTrivvio) {
  auto r = cli("scenario trivvio");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("strong-LO"), std::string::npos);
}

TEST(Cli, UnknownScenarioIsInputError) { EXPECT_EQ(cli("scenario nonesuch").code, 2); }

TEST(Cli, MissingSubcommandIsInputError) { EXPECT_EQ(cli("").code, 2); }

TEST(Cli, CertifyTrivvioFailsWithReport) {
  auto f = write("trivvio.json", protocol_to_json(trivvio()));
  auto r = cli("certify --protocol " + f);
  EXPECT_EQ(r.code, 1);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["classification"], "strong-LO");
  EXPECT_TRUE(j["ao"]["pass"].get<bool>());
}

TEST(Cli, ReportsAreByteStable) {
  auto f = write("nolo.json", protocol_to_json(nolo()));
  auto a = cli("--seed 7 certify --protocol " + f), b = cli("--seed 7 certify --protocol " + f);
  EXPECT_EQ(a.out, b.out);
  EXPECT_FALSE(a.out.empty());
}

TEST(Cli, RunPrintsDistribution) {
  auto f = write("trivvio.json", protocol_to_json(trivvio()));
  auto r = cli("run --protocol " + f + " --settings 0,1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("[0,1] (1,0)=1.000000000000"), std::string::npos) << r.out;
  EXPECT_EQ(cli("run --protocol " + f + " --settings 0,7").code, 2);
}

TEST(Cli, ComposeWritesState) {
  auto f = write("trivvio.json", protocol_to_json(trivvio()));
  auto r = cli("compose --protocol " + f + " --settings 1,0");
  ASSERT_EQ(r.code, 0) << r.out;
  auto j = json::parse(r.out);
  Mat rho = mat_from_json(j["state"], 4, 4, "$");
  EXPECT_NEAR(rho(1, 1).real(), 1.0, 1e-12);
}

TEST(Cli, MalformedJsonNamesThePath) {
  auto j = protocol_to_json(trivvio());
  j["agents"][0]["dims"].erase("in");
  auto r = cli("validate --protocol " + write("bad.json", j));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("$.agents[0].dims.in"), std::string::npos) << r.out;
  std::ofstream(tmp("broken.json")) << "{\"elements\": [1,";
  auto r2 = cli("validate --protocol " + tmp("broken.json"));
  EXPECT_EQ(r2.code, 2);
  EXPECT_NE(r2.out.find("parse error"), std::string::npos);
  EXPECT_EQ(cli("validate --protocol " + tmp("does_not_exist.json")).code, 2);
}

TEST(Cli, ValidateNamesFailingDownset) {
  auto r = cli("validate --protocol " + write("sametime.json", protocol_to_json(same_time_relay())));
  EXPECT_EQ(r.code, 1);
  auto j = json::parse(r.out);
  EXPECT_FALSE(j["pass"].get<bool>());
  EXPECT_FALSE(j["witness"].is_null()) << r.out;
}

TEST(Cli, SimplifyAndExtract) {
  auto f = write("trivial_input.json", protocol_to_json(trivial_input_protocol()));
  auto s = cli("simplify --protocol " + f + " --out " + tmp("simple.json") + " --certificate " + tmp("cert.json"));
  EXPECT_EQ(s.code, 0) << s.out;
  auto cert = load_json(tmp("cert.json"));
  EXPECT_TRUE(cert["equivalence"]["pass"].get<bool>());
  EXPECT_EQ(cli("validate --protocol " + tmp("simple.json")).code, 0);
  EXPECT_EQ(cli("extract-qcqc --protocol " + f).code, 1);
  auto sw = write("switch.json", protocol_to_json(coherence_switch()));
  auto e = cli("extract-qcqc --protocol " + sw +" --out " + tmp("q.json") + " --report " + tmp("r.json"));
  EXPECT_EQ(e.code, 0) << e.out;
  EXPECT_TRUE(load_json(tmp("r.json"))["equivalence"]["pass"].get<bool>());
  EXPECT_EQ(cli("validate --qcqc " + tmp("q.json")).code, 0);
}
