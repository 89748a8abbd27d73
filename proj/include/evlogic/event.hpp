#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "evlogic/rng.hpp"
#include "evlogic/tensor.hpp"

namespace evlogic {

// Symbolic label: premise / action / object indices into fixed vocabularies.
struct EventLabel {
  int premise = 0;
  int action = 0;
  int object = 0;

  bool operator==(const EventLabel& o) const {
    return premise == o.premise && action == o.action && object == o.object;
  }
  bool operator<(const EventLabel& o) const {
    return std::tie(premise, action, object) < std::tie(o.premise, o.action, o.object);
  }
};

// Closed interval [start, end] in frame units.
struct TemporalSupport {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

// Grounded event: symbolic label bound to pooled feature evidence and a
// temporal support.
struct Event {
  EventLabel label;
  Vec feature;
  TemporalSupport support;
};

enum class OpKind { Temporal, Semantic };

struct OperatorDef {
  std::string name;
  OpKind kind = OpKind::Semantic;
};

// Built-in operator ids. The codebook always places these six first;
// indices beyond them are inert learnable padding operators.
namespace op {
inline constexpr int kBefore = 0;
inline constexpr int kAfter = 1;
inline constexpr int kMeets = 2;
inline constexpr int kCause = 3;
inline constexpr int kEnable = 4;
inline constexpr int kPrevent = 5;
inline constexpr int kNamedCount = 6;
}  // namespace op

// Operator codebook Z = Z_T U Z_S. Temporal operators are scored by fixed
// timestamp rules; everything else (the named semantic operators and the
// padding operators) is scored by the learned semantic head. All operators
// own a learnable embedding row.
struct OperatorCodebook {
  std::vector<OperatorDef> ops;
  Mat embeddings;  // size() x embed_width

  static OperatorCodebook make(int total_size, int embed_width, Rng& rng,
                               double init_scale = 0.5) {
    require(total_size >= op::kNamedCount, "codebook: need at least the six named operators");
    OperatorCodebook cb;
    cb.ops = {{"before", OpKind::Temporal}, {"after", OpKind::Temporal},
              {"meets", OpKind::Temporal},  {"cause", OpKind::Semantic},
              {"enable", OpKind::Semantic}, {"prevent", OpKind::Semantic}};
    for (int i = op::kNamedCount; i < total_size; ++i)
      cb.ops.push_back({"pad_" + std::to_string(i), OpKind::Semantic});
    cb.embeddings = Mat(total_size, embed_width);
    for (double& x : cb.embeddings.data) x = init_scale * rng.normal();
    return cb;
  }

  int size() const { return static_cast<int>(ops.size()); }
  int embed_width() const { return static_cast<int>(embeddings.cols); }
  bool is_temporal(int id) const { return ops[id].kind == OpKind::Temporal; }
  bool is_semantic(int id) const { return ops[id].kind == OpKind::Semantic; }
  const std::string& name(int id) const { return ops[id].name; }

  int id_of(const std::string& name) const {
    for (int i = 0; i < size(); ++i)
      if (ops[i].name == name) return i;
    return -1;
  }

  Vec embedding(int id) const { return embeddings.row_vec(id); }
};

// One logical transition: source event index, operator id, target index.
struct ChainEdge {
  int src = 0;
  int op = 0;
  int dst = 0;

  bool operator==(const ChainEdge& o) const {
    return src == o.src && op == o.op && dst == o.dst;
  }
  bool operator<(const ChainEdge& o) const {
    return std::tie(src, dst, op) < std::tie(o.src, o.dst, o.op);
  }
};

struct ReasoningChain {
  std::vector<ChainEdge> edges;

  std::size_t length() const { return edges.size(); }
  bool empty() const { return edges.empty(); }
};

struct ChainViolation {
  enum class Kind { SelfLoop, SrcRange, DstRange, OpRange, Duplicate };
  Kind kind;
  std::size_t position;
  std::string message;
};

// Checks the chain against event count and codebook. Violations are data,
// not faults: all of them are reported with their edge position.
inline std::vector<ChainViolation> validate_chain(const ReasoningChain& chain,
                                                  int event_count,
                                                  const OperatorCodebook& codebook) {
  std::vector<ChainViolation> out;
  std::set<std::tuple<int, int, int>> seen;
  for (std::size_t i = 0; i < chain.edges.size(); ++i) {
    const ChainEdge& e = chain.edges[i];
    if (e.src < 0 || e.src >= event_count)
      out.push_back({ChainViolation::Kind::SrcRange, i,
                     "source index " + std::to_string(e.src) + " out of range"});
    if (e.dst < 0 || e.dst >= event_count)
      out.push_back({ChainViolation::Kind::DstRange, i,
                     "target index " + std::to_string(e.dst) + " out of range"});
    if (e.op < 0 || e.op >= codebook.size())
      out.push_back({ChainViolation::Kind::OpRange, i,
                     "operator id " + std::to_string(e.op) + " out of range"});
    if (e.src == e.dst)
      out.push_back({ChainViolation::Kind::SelfLoop, i, "self loop"});
    auto key = std::make_tuple(e.src, e.op, e.dst);
    if (!seen.insert(key).second)
      out.push_back({ChainViolation::Kind::Duplicate, i, "duplicate edge"});
  }
  return out;
}

inline bool chain_valid(const ReasoningChain& chain, int event_count,
                        const OperatorCodebook& codebook) {
  return validate_chain(chain, event_count, codebook).empty();
}

// Sorts edges by (src, dst, op) and drops duplicates. Idempotent; the edge
// set is preserved.
inline ReasoningChain canonicalize_chain(const ReasoningChain& chain) {
  ReasoningChain out = chain;
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

// Log form: one edge per line, `a --op--> b`.
inline std::string format_chain(const ReasoningChain& chain,
                                const OperatorCodebook& codebook) {
  std::ostringstream os;
  for (const ChainEdge& e : chain.edges)
    os << e.src << " --" << codebook.name(e.op) << "--> " << e.dst << "\n";
  return os.str();
}

}  // namespace evlogic
