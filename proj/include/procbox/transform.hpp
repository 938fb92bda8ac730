#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "procbox/certify.hpp"
#include "procbox/protocol.hpp"

namespace procbox {

class TransformError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StageRecord {
  std::string name;
  bool applied = false;
  std::string note;
};

struct TransformCertificate {
  Protocol input, output;
  Correspondence correspondence;
  std::vector<std::string> properties;  // attained, by name
  std::vector<StageRecord> stages;
  EquivalenceReport equivalence;
};

// Property names in the order of the simplification theorem.
inline const std::vector<std::string>& property_names() {
  static const std::vector<std::string> n{"total-order", "nontrivial-input", "time-independent",
                                          "one-message-output", "disjoint-even-odd"};
  return n;
}

struct PropertyCheck {
  bool pass = true;
  double residual = 0.0;
  std::string message;
};
PropertyCheck prop_total_order(const Protocol& p);
PropertyCheck prop_nontrivial_input(const Protocol& p);
// One-message restriction maps |psi, t> to (A_i psi) at the successor of t with
// t-independent A_i, for every agent with both wires.
PropertyCheck prop_time_independent(const Protocol& p, double tol = 1e-9);
// Weight outside the one-message input sectors when the process is fed
// maximally mixed one-message states.
PropertyCheck prop_one_message_output(const Protocol& p, double tol = 1e-9);
PropertyCheck prop_disjoint_even_odd(const Protocol& p);
std::vector<std::string> attained_properties(const Protocol& p, double tol = 1e-9);

bool is_past_agent(const Protocol& p, int k);
bool is_future_agent(const Protocol& p, int k);

// Rename every agent slot by the relabelling and move to the target spacetime.
Protocol relabelled(const Protocol& p, const RelabellingSpec& r);
// Explicit per-system inverse on the protocol's wires.
RelabellingSpec inverse_relabelling(const Protocol& p, const RelabellingSpec& r);
TransformCertificate relabel(const Protocol& p, const RelabellingSpec& r, double tol = 1e-9);

// Individual stages. Each leaves op indices unchanged.
Protocol eliminate_trivial_inputs(const Protocol& p, bool* applied = nullptr);
Protocol to_alo_protocol(const Protocol& p, const OrderFunction& o, bool* applied = nullptr, double tol = 1e-9);
// Needs ALO operations for o.
Protocol time_independent_protocol(const Protocol& p, const OrderFunction& o, bool* applied = nullptr,
                                   double tol = 1e-9);
Protocol one_message_output_protocol(const Protocol& p, bool* applied = nullptr, double tol = 1e-9);
RelabellingSpec even_odd_relabelling(const Protocol& p);

TransformCertificate to_alo(const Protocol& p, double tol = 1e-9);
TransformCertificate make_time_independent(const Protocol& p, double tol = 1e-9);
TransformCertificate one_message_output(const Protocol& p, double tol = 1e-9);
TransformCertificate simplify(const Protocol& p, double tol = 1e-9);
// Extract the QC-QC and map it back to a process box on {1..2N+3}. Properties reported:
// total-order, nontrivial-input, time-independent, shared-stamps, message-number-preserving.
TransformCertificate final_simplify(const Protocol& p, double tol = 1e-9);

}  // namespace procbox
