/* Copyright 2026 The esat Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <algorithm>
#include <random>

#include "esat/egraph.hpp"
#include "esat/error.hpp"
#include "esat/extract.hpp"
#include "esat/zoo.hpp"
#include "support/oracles.hpp"
#include "support/random_egraph.hpp"

using namespace esat;

namespace {

ENode leaf(const std::string& name, std::vector<std::int64_t> payload = {}) {
  return ENode{Symbol{name, std::move(payload)}, {}};
}

ENode op(const std::string& name, std::vector<EClassId> children) {
  return ENode{Symbol{name, {}}, std::move(children)};
}

struct Toy {
  EGraph g;
  EClassId a, two, mul, div;
};

Toy toy() {
  Toy t;
  t.a = t.g.add(leaf("a"));
  t.two = t.g.add(leaf("num", {2}));
  t.mul = t.g.add(op("mul", {t.a, t.two}));
  const auto two_again = t.g.add(leaf("num", {2}));
  CHECK(two_again == t.two);
  t.div = t.g.add(op("div", {t.mul, two_again}));
  t.g.set_root(t.div);
  return t;
}

}  // namespace

TEST_CASE("add is idempotent and hash-conses constants") {
  EGraph g;
  const auto a1 = g.add(leaf("a"));
  const auto a2 = g.add(leaf("a"));
  CHECK(a1 == a2);
  CHECK(g.size() == GraphSize{1, 1});

  Toy t = toy();
  CHECK(t.g.size() == GraphSize{4, 4});
}

TEST_CASE("empty graph") {
  EGraph g;
  CHECK(g.size() == GraphSize{0, 0});
  CHECK(g.empty());
  CHECK(g.rebuild() == 0);
  CHECK_FALSE(g.has_root());
  CHECK_THROWS_AS(g.root(), StructuralError);
}

TEST_CASE("invalid child ids are rejected") {
  EGraph g;
  const auto a = g.add(leaf("a"));
  CHECK_THROWS_AS(g.add(op("f", {class_id(7)})), StructuralError);
  CHECK_THROWS_AS(g.merge(a, class_id(3)), StructuralError);
  CHECK_THROWS_AS(g.nodes(class_id(9)), StructuralError);
}

TEST_CASE("x*2 -> x<<1 produces the rewritten e-graph") {
  Toy t = toy();
  const auto one = t.g.add(leaf("num", {1}));
  const auto shl = t.g.add(op("shl", {t.a, one}));
  CHECK(t.g.size() == GraphSize{6, 6});
  t.g.merge(t.mul, shl);
  t.g.rebuild();
  CHECK(t.g.size() == GraphSize{6, 5});
  CHECK(t.g.find(t.mul) == t.g.find(shl));
  CHECK(t.g.nodes(t.g.find(t.mul)).size() == 2);

  const auto terms = testing::terms_of(t.g, t.g.root(), 4);
  CHECK(terms == std::set<std::string>{"div(mul(a,num[2]),num[2])",
                                       "div(shl(a,num[1]),num[2])"});
}

TEST_CASE("union laws") {
  EGraph g;
  const auto x = g.add(leaf("x"));
  const auto v = g.version();
  CHECK(g.merge(x, x) == x);
  CHECK(g.version() == v);
  CHECK(g.is_clean());

  const auto a = g.add(leaf("a"));
  const auto b = g.add(leaf("b"));
  const auto c = g.add(leaf("c"));
  g.merge(a, b);
  g.merge(b, c);
  CHECK(g.find(a) == g.find(c));
  CHECK(g.find(g.find(a)) == g.find(a));
}

TEST_CASE("equal ranks resolve to the lower id") {
  EGraph g;
  const auto a = g.add(leaf("a"));
  const auto b = g.add(leaf("b"));
  CHECK(g.merge(b, a) == a);
  const auto c = g.add(leaf("c"));
  // {a,b} has rank 1 and wins over the singleton regardless of order.
  CHECK(g.merge(c, b) == a);
}

TEST_CASE("rebuild restores congruence and reaches a fixpoint") {
  EGraph g;
  const auto a = g.add(leaf("a"));
  const auto b = g.add(leaf("b"));
  const auto fa = g.add(op("f", {a}));
  const auto fb = g.add(op("f", {b}));
  const auto gfa = g.add(op("g", {fa}));
  const auto gfb = g.add(op("g", {fb}));
  CHECK(g.rebuild() == 0);
  g.merge(a, b);
  CHECK_FALSE(g.is_clean());
  CHECK(g.rebuild() >= 1);
  CHECK(g.find(fa) == g.find(fb));
  CHECK(g.find(gfa) == g.find(gfb));
  CHECK(g.rebuild() == 0);
  CHECK(g.size() == GraphSize{4, 3});
}

TEST_CASE("version counts fresh nodes and real merges") {
  EGraph g;
  const auto a = g.add(leaf("a"));
  CHECK(g.version() == 1);
  g.add(leaf("a"));
  CHECK(g.version() == 1);
  const auto b = g.add(leaf("b"));
  CHECK(g.version() == 2);
  g.merge(a, b);
  CHECK(g.version() == 3);
  g.merge(a, b);
  CHECK(g.version() == 3);
}

TEST_CASE("root follows unions") {
  EGraph g;
  const auto a = g.add(leaf("a"));
  const auto b = g.add(leaf("b"));
  g.set_root(b);
  g.merge(a, b);
  g.rebuild();
  CHECK(g.root() == g.find(b));
}

TEST_CASE("fingerprint") {
  Toy t = toy();
  const auto fp = t.g.fingerprint();
  CHECK(fp == t.g.snapshot().fingerprint());

  SUBCASE("insertion order does not matter") {
    EGraph h;
    const auto two = h.add(leaf("num", {2}));
    const auto a = h.add(leaf("x"));  // extra class shifts every id
    const auto real_a = h.add(leaf("a"));
    const auto mul = h.add(op("mul", {real_a, two}));
    h.set_root(h.add(op("div", {mul, two})));
    CHECK(h.fingerprint() != fp);

    EGraph k;
    const auto k2 = k.add(leaf("num", {2}));
    const auto ka = k.add(leaf("a"));
    k.set_root(k.add(op("div", {k.add(op("mul", {ka, k2})), k2})));
    CHECK(k.fingerprint() == fp);
    (void)a;
  }

  SUBCASE("differs after a rewrite") {
    const auto one = t.g.add(leaf("num", {1}));
    t.g.merge(t.mul, t.g.add(op("shl", {t.a, one})));
    t.g.rebuild();
    CHECK(t.g.fingerprint() != fp);
  }
}

TEST_CASE("snapshots are independent") {
  Toy t = toy();
  const NodeCosts costs = SymbolCostModel().node_costs(t.g);
  const double before = extract_exact(t.g, costs).total_cost;
  const auto size = t.g.size();
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    EGraph copy = t.g.snapshot();
    const auto ids = copy.class_ids();
    const auto x = ids[testing::pick(rng, ids.size())];
    const auto y = ids[testing::pick(rng, ids.size())];
    copy.merge(x, copy.add(op("h", {y})));
    copy.rebuild();
  }
  CHECK(t.g.size() == size);
  CHECK(extract_exact(t.g, SymbolCostModel().node_costs(t.g)).total_cost == before);
}

TEST_CASE("dump is one sorted line per class") {
  Toy t = toy();
  CHECK(t.g.dump() ==
        "ec0: a\n"
        "ec1: num[2]\n"
        "ec2: mul(ec0,ec1)\n"
        "ec3: div(ec2,ec1)\n");
  const auto dot = t.g.to_dot();
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("cluster_3") != std::string::npos);
}

TEST_CASE("random operation sequences agree with a naive partition oracle") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::mt19937_64 rng(seed);
    EGraph g;
    testing::NaiveCongruence oracle;
    std::vector<EClassId> ids;
    for (int step = 0; step < 25; ++step) {
      const auto roll = testing::pick(rng, 10);
      if (ids.size() < 2 || roll < 4) {
        const auto name = "l" + std::to_string(testing::pick(rng, 3));
        ids.push_back(g.add(leaf(name)));
        oracle.add(Symbol{name, {}}, {});
      } else if (roll < 8) {
        const auto name = "f" + std::to_string(testing::pick(rng, 2));
        std::vector<int> kids;
        std::vector<EClassId> children;
        for (std::size_t k = 0, n = 1 + testing::pick(rng, 2); k < n; ++k) {
          const auto c = testing::pick(rng, ids.size());
          kids.push_back(static_cast<int>(c));
          children.push_back(ids[c]);
        }
        ids.push_back(g.add(op(name, children)));
        oracle.add(Symbol{name, {}}, kids);
      } else {
        const auto x = testing::pick(rng, ids.size());
        const auto y = testing::pick(rng, ids.size());
        g.merge(ids[x], ids[y]);
        oracle.merge(static_cast<int>(x), static_cast<int>(y));
      }
      if (testing::pick(rng, 3) == 0) g.rebuild();
    }
    g.rebuild();
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = 0; j < ids.size(); ++j) {
        REQUIRE(oracle.same(static_cast<int>(i), static_cast<int>(j)) ==
                (g.find(ids[i]) == g.find(ids[j])));
      }
    }
    CHECK(g.size().enodes == oracle.distinct_nodes());
    CHECK(g.size().eclasses == oracle.blocks());
  }
}

TEST_CASE("hash-cons soundness after rebuild") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const EGraph g = testing::random_egraph(rng);
    std::map<ENode, EClassId> owner;
    for (auto c : g.class_ids()) {
      const auto& nodes = g.nodes(c);
      CHECK(std::is_sorted(nodes.begin(), nodes.end()));
      for (const auto& n : nodes) {
        for (auto k : n.children) CHECK(g.find(k) == k);
        const auto [it, fresh] = owner.emplace(n, c);
        CHECK((fresh || it->second == c));
      }
    }
  }
}

TEST_CASE("identical operation sequences give identical fingerprints") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 r1(seed), r2(seed);
    CHECK(testing::random_egraph(r1).fingerprint() ==
          testing::random_egraph(r2).fingerprint());
  }
}

TEST_CASE("terms reachable from the root never disappear") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    std::mt19937_64 rng(seed);
    EGraph g = testing::random_egraph(rng, {.max_enodes = 12, .merge_prob = 0.0});
    auto before = testing::terms_of(g, g.root(), 4);
    for (int i = 0; i < 5; ++i) {
      const auto ids = g.class_ids();
      g.merge(ids[testing::pick(rng, ids.size())], ids[testing::pick(rng, ids.size())]);
      g.rebuild();
      const auto after = testing::terms_of(g, g.root(), 4);
      CHECK(std::includes(after.begin(), after.end(), before.begin(), before.end()));
      before = after;
    }
  }
}
