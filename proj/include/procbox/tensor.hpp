#pragma once

#include <string>
#include <vector>

#include "procbox/linalg.hpp"

namespace procbox {

struct Reg {
  std::string name;
  int dim = 1;
  bool operator==(const Reg& o) const { return name == o.name && dim == o.dim; }
};

// Completely positive map given by Kraus operators. Row index runs over outs and
// column index over ins, both mixed radix with the first register most significant.
// Output registers whose name starts with '~' are discarded when networks are closed.
struct Channel {
  std::vector<Reg> outs, ins;
  std::vector<Mat> kraus;
  std::string tag;

  std::int64_t out_dim() const;
  std::int64_t in_dim() const;
  int find_out(const std::string& n) const;
  int find_in(const std::string& n) const;
};

Channel identity_channel(const std::vector<Reg>& outs, const std::vector<Reg>& ins);
Channel single_kraus(std::vector<Reg> outs, std::vector<Reg> ins, Mat k, std::string tag = "");
// State preparation with no inputs: rho = sum_k |v_k><v_k|.
Channel state_channel(std::vector<Reg> outs, const std::vector<Vec>& vs, std::string tag = "");
// Trace out the named inputs (a channel with no outputs, one Kraus per basis vector).
Channel discard(const std::vector<Reg>& ins);

enum class LegKind { Out, In, Env, Free };

struct Leg {
  std::string name;
  int dim = 1;
  LegKind kind = LegKind::Out;
  long origin = 0;
};

// Dense tensor, row-major over legs (first leg most significant).
struct Tensor {
  std::vector<Leg> legs;
  std::vector<cplx> data;
  std::int64_t size() const { return (std::int64_t)data.size(); }
  std::vector<int> dims() const;
  int find(const std::string& name, LegKind kind) const;
};

Tensor channel_tensor(const Channel& c);
Tensor permute(const Tensor& t, const std::vector<int>& order);
// Contract every Out:X of a against In:X of b and vice versa.
Tensor contract(const Tensor& a, const Tensor& b);
// Trace matching Out:X / In:X pairs inside one tensor.
Tensor self_trace(const Tensor& t);
// Merge all Env legs into a single trailing leg and compress it to its rank.
Tensor compress_env(const Tensor& t, double rel_tol = 1e-14);
Channel tensor_channel(const Tensor& t);

struct CloseOptions {
  bool compress = true;
};

// Contract a network of channels: every output register name that matches an input
// register name is composed (including feedback, i.e. loop composition). The result
// acts on the unmatched registers, kept in order of first appearance.
Channel close(const std::vector<Channel>& net, const CloseOptions& opt = {});

// Sequential composition b o a (a's outputs feed b's inputs by name).
Channel then(const Channel& a, const Channel& b);
Channel tensor_product(const Channel& a, const Channel& b);

// Output state of a channel without inputs.
Mat state_of(const Channel& c);
// Reduced state on the named output registers (in the given order).
Mat reduced_state(const Channel& c, const std::vector<std::string>& keep);

// Reorder the registers of b to match a (same names and dims) and return the copy.
Channel align_to(const Channel& b, const Channel& a);
// Frobenius distance between Choi matrices, computed from the stacked Kraus vectors.
double choi_distance(const Channel& a, const Channel& b);
// Sum_k K^dag K.
Mat kraus_sum(const Channel& c);
Channel rename(const Channel& c, const std::vector<std::pair<std::string, std::string>>& names);
// Multiply every Kraus operator by s.
Channel scale_kraus(const Channel& c, cplx s);

}  // namespace procbox
