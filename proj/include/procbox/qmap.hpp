#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "procbox/fock.hpp"
#include "procbox/spacetime.hpp"
#include "procbox/tensor.hpp"

namespace procbox {

// Choi matrix sum_ij C(|i><j|) (x) |i><j| with rows/cols ordered (outs, ins).
Mat choi(const Channel& c);
bool is_cptp(const Channel& c, double tol = 1e-9);
bool is_trace_nonincreasing(const Channel& c, double tol = 1e-9);

// Trace out the named outputs (they become part of the environment).
Channel trace_outputs(const Channel& c, const std::vector<std::string>& names);
// Apply op to some outputs of c, where op reuses the register names in place.
Channel then_inplace(const Channel& c, const Channel& op);
// Apply op to some inputs of c before c acts (op's outputs carry c's input names).
Channel before_inplace(const Channel& op, const Channel& c);

// Kraus {|0><b|} on the product of regs: trace the content and put back the vacuum.
Channel trace_replace_vacuum_op(const std::vector<Reg>& regs);
Channel trace_replace_vacuum(const Channel& c, const std::vector<std::string>& out_regs);
Channel trace_replace_vacuum_inputs(const Channel& c, const std::vector<std::string>& in_regs);

// Positions of a register: stamped slots carry their time, others none.
std::optional<Pos> reg_time(const std::string& name);

Report check_causality(const Channel& c, const Spacetime& st, const CausalityFunction& chi, double tol = 1e-9);
Report check_pseudo_causality(const Channel& c, const Spacetime& st, double tol = 1e-9);

Channel purify(const Channel& c, const std::string& anc = "anc");
// Minimal Kraus set (orthogonal Kraus operators, rank-many).
Channel minimal_kraus(const Channel& c, double tol = 1e-12);

struct SequenceRep {
  std::vector<PosSet> slices;
  std::vector<Channel> isometries;
  std::vector<int> ancilla_dims;
};

class CausalityError : public std::runtime_error {
 public:
  CausalityError(const std::string& m, int g) : std::runtime_error(m), group(g) {}
  int group;
};

// Factorise c into L successive isometries. Slice g consumes the inputs with
// in_group == g and emits the outputs with out_group == g; memory registers are
// named prefix.m<g>. Throws CausalityError if outputs of a group depend on later inputs.
SequenceRep factorize(const Channel& c, const std::vector<int>& in_group, const std::vector<int>& out_group,
                      int L, const std::string& prefix, double tol = 1e-9);
SequenceRep sequence_representation(const Channel& c, const Spacetime& st, const CausalityFunction& chi,
                                    bool strict = true, const std::string& prefix = "seq", double tol = 1e-9);
Channel recompose(const SequenceRep& s);

// Pseudo-causal map into the one-message space of a wire, identity on it. Inputs are
// the slots of `in`, outputs the same slots renamed to out_name.
Channel build_C_one(const Wire& in, const std::string& out_name);
// The same map as a chain of per-slot isometries (memory prefix.f<k>, junk "~prefix...").
std::vector<Channel> C_one_slices(const Wire& in, const std::string& out_name, const std::string& prefix);

class ExtensionError : public std::invalid_argument {
 public:
  ExtensionError(const std::string& m, Pos t, PosSet s) : std::invalid_argument(m), time(t), support(std::move(s)) {}
  Pos time;
  PosSet support;
};

// Extend a map defined on the one-message space of `in` (Kraus columns indexed by
// Wire::one_msg_index, rows by out slots then extra registers) to the full Fock space.
Channel extend_to_fock(const std::vector<Mat>& kraus_one, const Wire& in, const Wire& out,
                       const std::vector<Reg>& extra_outs, bool strict, double tol = 1e-12);

// Network form of extend_to_fock: C_one slices, un-embedding, then the one-message map.
std::vector<Channel> extend_to_fock_net(const std::vector<Mat>& kraus_one, const Wire& in, const Wire& out,
                                        const std::vector<Reg>& extra_outs, bool strict, const std::string& prefix,
                                        double tol = 1e-12);

struct Completion {
  Mat U;  // (rows * junk) x cols, junk register least significant
  int junk = 1;
};
// Extend a map given on an orthonormal domain Q (images VQ, orthonormal) to an isometry
// on the whole input space, adding a junk register only when the output is too small.
Completion complete_to_isometry(const Mat& VQ, const Mat& Q, double tol = 1e-9);

// Partial isometry given on basis inputs: images[i] is the output vector of input
// basis state domain[i].
Completion complete_from_basis(const std::vector<std::int64_t>& domain, const std::vector<Vec>& images,
                               std::int64_t in_dim, double tol = 1e-9);

// Basis vector of a register product.
Vec basis_vec(const std::vector<Reg>& regs, const std::vector<int>& digs);

// Isometric channel from a partial rule table: rule (digits over ins, image over outs).
// The completion adds the discarded register `junk` when the outputs are too small.
Channel isometry_from_rules(std::vector<Reg> outs, const std::vector<Reg>& ins,
                            const std::vector<std::pair<std::vector<int>, Vec>>& rules, const std::string& junk,
                            const std::string& tag = "", double tol = 1e-9);
// Same, starting from an orthonormal domain Q and images VQ.
Channel isometry_from_domain(std::vector<Reg> outs, const std::vector<Reg>& ins, const Mat& VQ, const Mat& Q,
                             const std::string& junk, const std::string& tag = "", double tol = 1e-9);

}  // namespace procbox
