#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "procbox/certify.hpp"
#include "procbox/qcqc.hpp"
#include "procbox/transform.hpp"

namespace procbox {

class ExtractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One agent-input slot of the simplified process box and the reached memory
// subspaces per executed set K (bit k = agent k of the protocol has received).
struct ControlCursor {
  Pos t = 0;
  std::string receiver;
  std::map<unsigned, int> rank;  // dim Im_beta(P_K V_<=m)
  double orthogonality = 0.0;    // max |<K|K'>| overlap between the subspaces
  double off_block = 0.0;        // weight sent to a control value other than K, K u {I(m)}
  unsigned worst_K = 0, worst_K2 = 0;
};

struct ControlledSequenceRep {
  std::vector<std::string> control_agents;  // protocol agents tracked by the control
  std::vector<ControlCursor> cursors;
  double orthogonality = 0.0, off_block = 0.0;
  // Weight left on the vacuum branch once the future has been served.
  double final_vacuum = 0.0;
  // Control update channels spliced into the process; "~ctl" is the final control.
  Protocol controlled;
  double traced_distance = 0.0;        // max over setting tuples, control traced
  double traced_choi_distance = -1.0;  // effective Choi distance, -1 if skipped
  double final_control_purity = 1.0;   // 1 when the last control value is deterministic
  bool pass = true;
  std::string message;
};
ControlledSequenceRep add_control(const Protocol& simplified, double tol = 1e-9);

struct ExtractResult {
  QcqcProtocol qp;
  Correspondence correspondence;  // protocol agent i <-> party i
  TransformCertificate simplification;
  ControlledSequenceRep control;
  QcqcReport validity;
  EquivalenceReport equivalence;
  int dead_legs_kept = 0;
  std::vector<int> alpha;  // ancilla dimensions alpha_1..alpha_N, alpha_F
};
// Build the circuit directly from a protocol that already has every simplified property.
QcqcProtocol build_qcqc(const Protocol& simplified, double tol = 1e-9, int* dead_legs_kept = nullptr);
ExtractResult extract_qcqc(const Protocol& p, double tol = 1e-9);

// Isomorphism between basis configurations of an old and a new wire, given
// as slot digits (0 = vacuum, 1 + l = level l).
struct WireReencoding {
  std::string agent;
  bool input = true;
  Wire target;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> table;
};
struct RewriteResult {
  Protocol p;
  Correspondence correspondence;
  CertificationReport certification;
  EquivalenceReport equivalence;
};
RewriteResult rewrite_weak_violator(const Protocol& p, const std::vector<WireReencoding>& enc, double tol = 1e-9);
// The identifications for the nolo fixture: Alice's two slots become a
// two-level message at 4, Bob's vacuum becomes level 0 on both wires.
std::vector<WireReencoding> nolo_reencodings();

}  // namespace procbox
