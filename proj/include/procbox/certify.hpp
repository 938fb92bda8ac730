#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procbox/protocol.hpp"

namespace procbox {

struct AOReport {
  bool pass = true;
  double trace_deficit = 0.0;  // max over setting tuples of 1 - tr
  double disturbance = 0.0;    // max distance between projected and plain states
  std::optional<Choice> witness;
  std::string agent;  // agent whose projectors alone lose the most weight
  std::string message;
};
AOReport check_AO(const Protocol& p, double tol = 1e-9);

// Injective, strictly future, within the agent's wires.
bool valid_order_map(const Agent& a, const OrderMap& o, const Spacetime& st, std::string* why = nullptr);
std::vector<OrderMap> order_candidates(const Agent& a, const Spacetime& st, std::size_t cap = 100000);

struct ALOResult {
  bool pass = true;
  double residual = 0.0;
  std::string message;
};
ALOResult check_ALO(const Agent& a, const AgentOp& op, const OrderMap& o, double tol = 1e-9);

// P_eff(M) as a network with the agent's registers: the projector comb on the
// inputs (recording the arrival time), M, and the matching output projector.
std::vector<Channel> p_eff_network(const Agent& a, const AgentOp& op, const OrderMap& o);
Channel p_eff(const Agent& a, const AgentOp& op, const OrderMap& o);
// Direct sum over arrival times of P^{O,O(t)} K P^{I,t} for every Kraus K.
Channel p_eff_direct(const Agent& a, const AgentOp& op, const OrderMap& o);

struct LOReport {
  bool pass = true;
  double deficit = 0.0;
  OrderFunction order;
  std::string agent;  // first failing agent
  std::optional<Choice> witness;
  std::string message;
};
LOReport check_LO(const Protocol& p, const OrderFunction& o, double tol = 1e-9);
// LO test for a single agent.
double lo_deficit(const Protocol& p, int agent, const OrderMap& o, std::optional<Choice>* witness = nullptr);

struct OrderSearch {
  std::map<std::string, std::vector<OrderMap>> passing;  // per agent with nontrivial wires
  std::vector<OrderFunction> functions;                  // combinations, lexicographic
  std::size_t tested = 0;
};
OrderSearch search_order_functions(const Protocol& p, double tol = 1e-9, std::size_t cap = 100000);

// Agents whose LO condition is nontrivial (both wires present).
std::vector<int> lo_agents(const Protocol& p);

struct EffectiveChoi {
  std::vector<int> dims;  // per agent block dimension of sum_t H^{I,t} (x) H^{O,O(t)}
  Mat m;
  OrderFunction order;
};
EffectiveChoi effective_choi(const Protocol& p, const OrderFunction& o, std::int64_t cap = 1 << 11);
// Link the effective Choi with the agents' restricted operations.
Mat effective_compose(const Protocol& p, const EffectiveChoi& e, const Choice& choice);

struct MessageStats {
  std::string agent;
  double p_in_zero = 0.0, p_in_multi = 0.0, p_out_zero = 0.0, p_out_multi = 0.0;
  double p_early = 0.0;  // an output strictly before every occupied input
};
std::vector<MessageStats> message_statistics(const Protocol& p);

struct CertificationReport {
  AOReport ao;
  LOReport lo;
  std::map<std::string, std::vector<bool>> alo;
  std::vector<MessageStats> stats;
  std::string classification;
  std::size_t orders_tested = 0;
};
std::string classify_violation(const AOReport& ao, const LOReport& lo, const std::vector<MessageStats>& stats,
                               double tol = 1e-9);
CertificationReport certify(const Protocol& p, double tol = 1e-9);
inline bool is_process_box(const CertificationReport& r) { return r.ao.pass && r.lo.pass; }

class CertificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// The canonical order function of a certified protocol; throws otherwise.
OrderFunction certified_order(const Protocol& p, double tol = 1e-9);

}  // namespace procbox
