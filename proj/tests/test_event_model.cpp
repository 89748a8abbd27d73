#include <catch2/catch_amalgamated.hpp>

#include "evlogic/event.hpp"
#include "evlogic/rng.hpp"

using namespace evlogic;

namespace {
OperatorCodebook small_codebook() {
  Rng rng(0);
  return OperatorCodebook::make(8, 4, rng);
}
}  // namespace

TEST_CASE("codebook: named operators come first, padding after") {
  const auto cb = small_codebook();
  REQUIRE(cb.size() == 8);
  REQUIRE(cb.name(op::kBefore) == "before");
  REQUIRE(cb.name(op::kCause) == "cause");
  REQUIRE(cb.is_temporal(op::kBefore));
  REQUIRE(cb.is_temporal(op::kAfter));
  REQUIRE(cb.is_temporal(op::kMeets));
  REQUIRE(cb.is_semantic(op::kCause));
  REQUIRE(cb.is_semantic(6));  // padding scores through the semantic head
  REQUIRE(cb.id_of("prevent") == op::kPrevent);
}

TEST_CASE("validate_chain: empty chain is ok") {
  const auto cb = small_codebook();
  REQUIRE(validate_chain(ReasoningChain{}, 4, cb).empty());
}

TEST_CASE("validate_chain: self loop is reported at its position") {
  const auto cb = small_codebook();
  ReasoningChain c;
  c.edges.push_back({1, op::kCause, 1});
  const auto violations = validate_chain(c, 4, cb);
  REQUIRE(violations.size() == 1);
  REQUIRE(violations[0].kind == ChainViolation::Kind::SelfLoop);
  REQUIRE(violations[0].position == 0);
}

TEST_CASE("validate_chain: index K is out of range") {
  const auto cb = small_codebook();
  ReasoningChain c;
  c.edges.push_back({0, op::kBefore, 4});
  const auto violations = validate_chain(c, 4, cb);
  REQUIRE(violations.size() == 1);
  REQUIRE(violations[0].kind == ChainViolation::Kind::DstRange);
}

TEST_CASE("validate_chain: duplicates are reported") {
  const auto cb = small_codebook();
  ReasoningChain c;
  c.edges.push_back({0, op::kCause, 1});
  c.edges.push_back({0, op::kCause, 1});
  const auto violations = validate_chain(c, 4, cb);
  REQUIRE(violations.size() == 1);
  REQUIRE(violations[0].kind == ChainViolation::Kind::Duplicate);
  REQUIRE(violations[0].position == 1);
}

TEST_CASE("canonicalize_chain: sorts, dedupes, and is idempotent") {
  ReasoningChain c;
  c.edges.push_back({2, op::kCause, 3});
  c.edges.push_back({0, op::kBefore, 1});
  c.edges.push_back({2, op::kCause, 3});

  const auto once = canonicalize_chain(c);
  REQUIRE(once.edges.size() == 2);
  REQUIRE(once.edges[0] == ChainEdge{0, op::kBefore, 1});
  REQUIRE(once.edges[1] == ChainEdge{2, op::kCause, 3});

  const auto twice = canonicalize_chain(once);
  REQUIRE(twice.edges == once.edges);
}

TEST_CASE("canonicalize_chain: already canonical input is unchanged") {
  ReasoningChain c;
  c.edges.push_back({0, op::kBefore, 1});
  c.edges.push_back({0, op::kCause, 1});
  REQUIRE(canonicalize_chain(c).edges == c.edges);
}

TEST_CASE("canonicalize property: edge set preserved on random chains") {
  Rng rng(5);
  const auto cb = small_codebook();
  for (int trial = 0; trial < 50; ++trial) {
    ReasoningChain c;
    const int len = 1 + static_cast<int>(rng.index(6));
    for (int i = 0; i < len; ++i) {
      const int a = static_cast<int>(rng.index(5));
      int b = static_cast<int>(rng.index(5));
      if (b == a) b = (b + 1) % 5;
      c.edges.push_back({a, static_cast<int>(rng.index(cb.size())), b});
    }
    const auto canon = canonicalize_chain(c);
    REQUIRE(canonicalize_chain(canon).edges == canon.edges);
    for (const auto& e : c.edges)
      REQUIRE(std::count(canon.edges.begin(), canon.edges.end(), e) == 1);
    for (const auto& e : canon.edges)
      REQUIRE(std::count(c.edges.begin(), c.edges.end(), e) >= 1);
  }
}

TEST_CASE("format_chain: one edge per line") {
  const auto cb = small_codebook();
  ReasoningChain c;
  c.edges.push_back({0, op::kCause, 2});
  REQUIRE(format_chain(c, cb) == "0 --cause--> 2\n");
}
