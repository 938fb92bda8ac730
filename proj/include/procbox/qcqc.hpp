#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "procbox/protocol.hpp"

namespace procbox {

class QcqcError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// V^{->to}_{K,k}. k = -1 is the initial label (K empty); to = N is the future.
struct QcqcKey {
  unsigned K = 0;
  int k = -1;
  int to = 0;
  auto operator<=>(const QcqcKey&) const = default;
};

// Control label |K, k>: k has received its message after the agents in K acted.
struct ControlLabel {
  unsigned K = 0;
  int k = -1;
  auto operator<=>(const ControlLabel&) const = default;
};

struct QcQc {
  int N = 0;
  std::vector<std::string> names;
  int dP = 1, dF = 1;
  std::vector<int> din, dout;
  // alpha[n] accompanies the n-th receiving agent (n = 1..N); alpha[0] = 1.
  std::vector<int> alpha;
  int alphaF = 1;
  std::map<QcqcKey, Mat> V;

  int acted(const QcqcKey& key) const;
  int rows(const QcqcKey& key) const;
  int cols(const QcqcKey& key) const;
  // Zero-padded to the right shape when absent.
  Mat op(const QcqcKey& key) const;
  void check_dims() const;
  // Labels (K, k) with n agents having received (n >= 1), or the initial label for n = 0.
  std::vector<ControlLabel> labels(int n) const;
  // Targets reachable from a label: agents outside K u {k}, or N once everyone acted.
  std::vector<int> targets(const ControlLabel& l) const;
  int label_input_dim(const ControlLabel& l) const;
};

// Two-agent switch on a d-level target; P = F = target x control (index 2 l + c).
// Control 0 runs A then B.
QcQc quantum_switch(int d = 2);

struct EffectiveSpaces {
  // Orthonormal basis of the reached part of each label's input space
  // (A_k^O x alpha_n, or H^P for the initial label).
  std::map<ControlLabel, Mat> after;
  // Reached span of the agent's input space A_k^I x alpha_n.
  std::map<ControlLabel, Mat> before;
};
EffectiveSpaces effective_input_spaces(const QcQc& q, double tol = 1e-10);

struct QcqcReport {
  bool pass = true;
  double defect = 0.0;
  int worst_step = -1;
  std::vector<double> step_defects;
  std::string message;
};
QcqcReport validate_qcqc(const QcQc& q, double tol = 1e-9);

// Per agent a Kraus list (dout x din). Returns the Kraus operators of the map
// H^P -> H^F x H^{alpha_F}, one per tuple of agent Kraus indices.
std::vector<Mat> qcqc_apply(const QcQc& q, const std::vector<std::vector<Mat>>& kraus);
// Unnormalised process operator on P x (A_1^I x A_1^O) x ... x F with alpha_F traced.
Mat qcqc_process_choi(const QcQc& q);
// Tr_A[W (1 x (M_1 x ... x M_N)^T x 1)] for agent Chois M_k on A_k^I x A_k^O.
Mat link_agents(const QcQc& q, const Mat& W, const std::vector<Mat>& agent_chois);

struct QcqcParty {
  std::string name;
  int outcome_dim = 1;
  std::vector<std::string> settings;
  // Kraus operators with rows (message out, result) and columns message in.
  // Past: (dP * R) x 1. Future: R x dF.
  std::vector<std::vector<Mat>> ops;
};

struct QcqcProtocol {
  QcQc q;
  std::vector<QcqcParty> parties;  // result order
  int past = 0, future = 0;
  std::vector<int> agent_party;  // party index of circuit agent k
  void check() const;
};

// Result state in party order.
Mat compose_qcqc(const QcqcProtocol& qp, const Choice& choice);
std::vector<Choice> all_choices(const QcqcProtocol& qp);

// Parties of qp correspond one to one (by index) with the agents of p.
EquivalenceReport qcqc_behavioural_equivalence(const QcqcProtocol& qp, const Protocol& p, const Correspondence& c,
                                               double tol = 1e-9, const std::vector<Choice>& choices = {});
EquivalenceReport qcqc_equivalence(const QcqcProtocol& a, const QcqcProtocol& b, const Correspondence& c,
                                   double tol = 1e-9, const std::vector<Choice>& choices = {});

// Measure-and-prepare operations spanning all din x dout maps (6-outcome Pauli
// POVM and 4 preparations for qubits, a Gram-normalised d^2 set otherwise).
QcqcParty spanning_agent(const std::string& name, int din, int dout);
QcqcParty spanning_past(const std::string& name, int d);
QcqcParty spanning_future(const std::string& name, int d);
QcqcProtocol spanning_protocol(const QcQc& q, const std::string& past = "P", const std::string& future = "F");
// Switch with unitary agent lists and the given (target, control) preparations.
QcqcProtocol switch_protocol(int d, const std::vector<Mat>& ua, const std::vector<Mat>& ub,
                             const std::vector<Vec>& past);

struct QcqcToPb {
  Protocol p;
  Correspondence correspondence;
  EquivalenceReport equivalence;
};
// Process box on the chain {1..2N+3}: inputs at 2, 4, .., 2N, outputs one later.
QcqcToPb qcqc_to_pb(const QcqcProtocol& qp, double tol = 1e-9, bool verify = true);

}  // namespace procbox
