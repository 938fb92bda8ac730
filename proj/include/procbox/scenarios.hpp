#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "procbox/protocol.hpp"

namespace procbox {

// Two agents signalling in a loop; each sends its setting and guesses the other's.
Protocol trivvio();

// One-way signalling fixture (A before B, no channel back). Strategy index in
// [0, 256): A's (message, guess) per setting and B's guess per (setting, message).
Protocol one_way_protocol(int strategy);
struct BoundResult {
  double max_value = 0.0;
  int strategies = 0;
  int argmax = -1;
};
BoundResult one_way_gyni_bound();

// Reduced states at t = 1 of the two sigproj input states after the
// {P_<=1, P_2} measurement; oracle recomputes them on an explicit Fock basis.
struct SigprojResult {
  Mat rho_a, rho_b;
  double distance = 0.0;
  double oracle_distance = 0.0;
  double oracle_residual = 0.0;
};
SigprojResult sigproj();
// Trace distance fixed by the brute-force oracle when the fixture was built.
inline constexpr double kSigprojDistance = 0.5;

struct SwitchParams {
  int d = 2;
  std::vector<Mat> ua, ub;  // agent unitaries; defaults {1, X} and {1, Z}
  // Past preparations as (target, control) vectors; default is |0>|+> then the
  // computational basis.
  std::vector<std::pair<Vec, Vec>> past;
};
// Process box version of the quantum switch on T = {1..7}. Agents P, A, B, F.
// F op 0 measures the target in the computational basis and the control in the
// +/- basis (outcome 2 l + s); op 1 measures both computationally.
Protocol coherence_switch(const SwitchParams& sp = {});

// Lugano process on T = {1..13}: agents P, C, A, B, F.
Protocol lugano(bool restrict_alice);

// Protocol where Bob may receive nothing and Alice receives at 2 or 4.
Protocol nolo();

// Dynamical order: C acts in parallel with B or after it, controlled by A's output.
Protocol dynamicalpar();
// Relabelling onto {1..10} that makes the fixture sequential.
RelabellingSpec dynamicalpar_sequential();

// Single agent with two input slots; with the flip op added the process sends a
// second message and AO breaks.
Protocol norestriction(bool add_flip);

// Random protocol on a chain with agents whose ops satisfy ALO for the returned maps.
struct RandomAlo {
  Protocol p;
  std::map<std::string, OrderMap> order;
};
RandomAlo random_alo_protocol(unsigned long long seed);
// Random protocol with a random system-dependent valid relabelling.
struct RandomRelabel {
  Protocol p;
  RelabellingSpec relabel;
};
RandomRelabel random_relabel_pair(unsigned long long seed);

// A receives at 4 only; its op answers an input at 2 with an output at 5, so
// LO holds with O(2) = 3, O(4) = 5 while ALO fails.
Protocol lo_only_protocol(unsigned long long seed);
// A receives at 2 or 4 (control prepared by P) and applies different unitaries.
Protocol time_dependent_protocol(unsigned long long seed);
// B has no input and sends at 3; A relays to F.
Protocol trivial_input_protocol();

// Clock and shift matrices.
Mat shift_matrix(int d);
Mat clock_matrix(int d);

std::vector<std::string> scenario_names();

}  // namespace procbox
