#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procbox/fock.hpp"
#include "procbox/spacetime.hpp"
#include "procbox/tensor.hpp"

namespace procbox {

// An agent operation is a small network of channels. Unmatched inputs are the
// agent's input slots, unmatched outputs its output slots plus the result
// register "R.<agent>"; every other register is internal to the operation.
struct AgentOp {
  std::string setting;
  std::vector<Channel> net;
  Channel closed() const;
};

struct Agent {
  std::string name;
  Wire in, out;  // in.name == name + ".I", out.name == name + ".O"
  int outcome_dim = 1;
  std::vector<AgentOp> ops;

  std::string result() const { return "R." + name; }
  Reg result_reg() const { return {result(), outcome_dim}; }
  bool trivial_in() const { return in.trivial(); }
  bool trivial_out() const { return out.trivial(); }
};

Agent make_agent(const std::string& name, int din, std::vector<Pos> tin, int dout, std::vector<Pos> tout,
                 int outcome_dim = 1, int n_slot = 1);

// Process network: consumes every agent output slot and produces every agent
// input slot (plus discarded "~" registers and internals).
struct Protocol {
  std::string name;
  Spacetime st;
  std::vector<Channel> process;
  std::vector<Agent> agents;
  std::optional<CausalityFunction> chi;

  int agent_index(const std::string& name) const;
  Channel closed_process() const;
};

// Per-agent injective map from input to output positions.
using OrderMap = std::map<Pos, Pos>;
using OrderFunction = std::map<std::string, OrderMap>;

// Construction helpers for agent operations.
AgentOp make_op(const std::string& setting, std::vector<Channel> net);
Channel result_state(const Agent& a, int value);
// Per-slot map from input slot t to output slot t + shift. kraus[i] is the message
// Kraus set used at the i-th input position; the vacuum is kept by the first
// operator. The result register is fixed to `value`.
AgentOp per_slot_op(const Agent& a, const std::string& setting, const std::vector<std::vector<Mat>>& kraus,
                    int shift = 1, int value = 0);
AgentOp unitary_slot_op(const Agent& a, const std::string& setting, const std::vector<Mat>& per_time, int shift = 1);
// Operation given on the one-message space of the input wire (columns
// Wire::one_msg_index), rows over output slots then the result register.
AgentOp one_msg_op(const Agent& a, const std::string& setting, const std::vector<Mat>& kraus_one, bool strict = true,
                   double tol = 1e-12);
// Past agent: prepare the given (unnormalised mixture of) states on out slots x result.
AgentOp prepare_op(const Agent& a, const std::string& setting, const std::vector<Vec>& states);
// Future agent: Kraus from the one-message input space to the result register.
AgentOp measure_op(const Agent& a, const std::string& setting, const std::vector<Mat>& kraus_one);

// Agent network with internal registers prefixed by the agent name.
std::vector<Channel> agent_network(const Agent& a, const AgentOp& op);
std::vector<Channel> process_network(const Protocol& p);

// The operation restricted to a single message at input position t
// (input register "<agent>.msg" of dimension in.dim) or to the whole one-message
// space (dimension in.one_msg_dim()).
Channel restricted_at(const Agent& a, const AgentOp& op, Pos t);
Channel restricted_one(const Agent& a, const AgentOp& op);
// Embedding channel from "<name>.msg" into the input wire.
Channel embed_channel(const Wire& w, const std::string& msg, const PosSet& region);

// Sufficient condition for causality under the remove-maximal causality function:
// every stamped output depends (through the network) only on strictly earlier
// stamped inputs.
Report structural_causality(const std::vector<Channel>& net, const Spacetime& st);

Report validate(const Protocol& p, double tol = 1e-9);

using Choice = std::vector<int>;
std::vector<Choice> all_choices(const Protocol& p);
// Optional per-agent wrapper applied to agent networks before composition.
using OpWrapper = std::function<std::vector<Channel>(int agent, std::vector<Channel> net)>;
Channel compose_channel(const Protocol& p, const Choice& choice, const OpWrapper& wrap = nullptr,
                        const std::vector<Channel>& extra = {});
// Density matrix on the result registers, in agent order.
Mat compose_protocol(const Protocol& p, const Choice& choice);
std::vector<int> result_dims(const Protocol& p);

struct Distribution {
  std::vector<int> outcome_dims;
  std::vector<Choice> choices;
  std::vector<std::vector<double>> probs;  // per choice, over flattened outcomes
};
Distribution outcome_distribution(const Protocol& p, const std::vector<Choice>& choices = {});

// (1/4) sum_{x,y} P(a = y, b = x | x, y) with bit settings and outcomes; other
// agents at setting 0.
double gyni_value(const Protocol& p, const std::string& a, const std::string& b);

struct Correspondence {
  std::vector<std::vector<int>> ops;  // ops[agent][i] = index in the second protocol
  std::optional<Mat> result_iso;      // applied to the first protocol's result state
  static Correspondence identity(const Protocol& p);
};

struct EquivalenceReport {
  bool pass = true;
  double max_diff = 0.0;
  std::optional<Choice> witness;
  int checked = 0;
  std::string message;
};
EquivalenceReport behavioural_equivalence(const Protocol& p1, const Protocol& p2, const Correspondence& c,
                                          double tol = 1e-9, const std::vector<Choice>& choices = {});

}  // namespace procbox
