#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gnnpool/autodiff/ops.hpp"
#include "gnnpool/errors.hpp"
#include "gnnpool/graph/graph.hpp"
#include "gnnpool/nn/pool.hpp"
#include "support/gradcheck.hpp"
#include "support/oracle.hpp"

using namespace gnnpool;

namespace {

SparseMatrix path2() { return SparseMatrix(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}}); }

Tensor column(std::vector<double> v, bool grad = false) {
  const std::size_t n = v.size();
  return Tensor::matrix(n, 1, std::move(v), grad);
}

oracle::Dense adjacency_dense(const PoolResult& r) {
  REQUIRE(r.adjacency.has_value());
  return oracle::from_tensor(r.adjacency->to_tensor());
}

bool symmetric(const oracle::Dense& a, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (std::abs(a[i][j] - a[j][i]) > tol) return false;
  return true;
}

std::vector<double> vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

std::vector<std::size_t> random_perm(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

SparseMatrix permuted(const SparseMatrix& a, const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  std::vector<Triplet> t;
  for (const auto& e : a.entries()) t.push_back({inv[e.row], inv[e.col], e.value});
  return SparseMatrix(a.rows(), a.cols(), std::move(t));
}

// Pooled graph as a multiset of (gated row, sorted rows of its induced neighbors).
std::multiset<std::pair<std::vector<double>, std::vector<std::vector<double>>>> pooled_multiset(
    const PoolResult& r) {
  const auto x = oracle::from_tensor(r.x);
  const auto a = adjacency_dense(r);
  std::multiset<std::pair<std::vector<double>, std::vector<std::vector<double>>>> out;
  for (std::size_t u = 0; u < x.size(); ++u) {
    std::vector<std::vector<double>> nbrs;
    for (std::size_t v = 0; v < x.size(); ++v)
      if (a[u][v] != 0.0) nbrs.push_back(x[v]);
    std::sort(nbrs.begin(), nbrs.end());
    out.insert({x[u], nbrs});
  }
  return out;
}

bool distinct(std::vector<double> y) {
  std::sort(y.begin(), y.end());
  return std::adjacent_find(y.begin(), y.end(), [](double a, double b) { return b - a < 1e-9; }) ==
         y.end();
}

}  // namespace

TEST_CASE("sort_pool") {
  SUBCASE("already sorted input with n = k is unchanged") {
    const Tensor x = Tensor::matrix({{1, 5}, {2, 3}, {0, 1}});
    CHECK(oracle::from_tensor(sort_pool(x, {}, 3)) == oracle::from_tensor(x));
  }
  SUBCASE("sorts by the last channel") {
    CHECK(oracle::from_tensor(sort_pool(column({1, 3, 2}), {}, 2)) == oracle::Dense{{3}, {2}});
  }
  SUBCASE("pads with zero rows") {
    CHECK(oracle::from_tensor(sort_pool(Tensor::matrix({{4, 7}}), {}, 3)) ==
          oracle::Dense{{4, 7}, {0, 0}, {0, 0}});
  }
  SUBCASE("ties fall back to earlier channels, earlier layers, then index") {
    const Tensor last = column({1, 1, 1, 1});
    const Tensor prev = Tensor::matrix({{0, 2}, {0, 2}, {5, 1}, {9, 2}});
    const std::vector<Tensor> layers{prev};
    // rows are [prev | last]: (0,2,1) (0,2,1) (5,1,1) (9,2,1)
    CHECK(oracle::from_tensor(sort_pool(last, layers, 4)) ==
          oracle::Dense{{9, 2, 1}, {0, 2, 1}, {0, 2, 1}, {5, 1, 1}});
  }
  SUBCASE("k < 1") { CHECK_THROWS_AS(sort_pool(column({1}), {}, 0), ArgumentError); }

  SUBCASE("matches the oracle and is always k x C") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t n = 1 + trial % 8, k = 1 + trial % 6;
      const auto a = oracle::random_dense(n, 2, rng), b = oracle::random_dense(n, 3, rng);
      const std::vector<Tensor> prev{oracle::to_tensor(a)};
      const Tensor out = sort_pool(oracle::to_tensor(b), prev, k);
      CHECK(out.rows() == k);
      CHECK(out.cols() == 5);
      CHECK(oracle::from_tensor(out) == oracle::sort_pool({a, b}, k));
    }
  }

  SUBCASE("batched graphs are sorted independently") {
    const Tensor x = column({1, 3, 2, 7, 5});
    const std::vector<std::size_t> seg{0, 0, 0, 1, 1};
    CHECK(oracle::from_tensor(sort_pool(x, {}, 3, seg, 2)) ==
          oracle::Dense{{3}, {2}, {1}, {7}, {5}, {0}});
  }
}

TEST_CASE("assignment pooling products") {
  std::mt19937_64 rng(5);
  const auto a = oracle::random_graph(5, 0.5, rng);
  const Tensor z = oracle::to_tensor(oracle::random_dense(5, 3, rng));

  SUBCASE("every node in cluster 0") {
    oracle::Dense s = oracle::zeros(5, 2);
    for (auto& row : s) row[0] = 1.0;
    const auto r = assignment_pool(oracle::to_tensor(s), z, Adjacency(a));
    const auto x = oracle::from_tensor(r.x);
    const auto zd = oracle::from_tensor(z);
    for (std::size_t j = 0; j < 3; ++j) {
      double col = 0.0;
      for (const auto& row : zd) col += row[j];
      CHECK(x[0][j] == doctest::Approx(col).epsilon(1e-15));
      CHECK(x[1][j] == 0.0);
    }
    CHECK(adjacency_dense(r)[0][0] == static_cast<double>(a.nnz()));
  }
  SUBCASE("identity assignment") {
    const auto r = assignment_pool(Tensor::identity(5), z, Adjacency(a));
    CHECK(oracle::from_tensor(r.x) == oracle::from_tensor(z));
    CHECK(adjacency_dense(r) == oracle::from_sparse(a));
  }
  SUBCASE("2-node path with one cluster") {
    const auto r = assignment_pool(column({1, 1}), column({1, 2}), Adjacency(path2()));
    CHECK(oracle::from_tensor(r.x) == oracle::Dense{{3}});
    CHECK(adjacency_dense(r) == oracle::Dense{{2}});
  }
  SUBCASE("permutation identity holds exactly") {
    // Small integers keep every product exact, so any summation order agrees.
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + trial % 7, m = 1 + trial % 4;
      const auto g = oracle::random_graph(n, 0.5, rng);
      oracle::Dense s = oracle::zeros(n, m);
      std::uniform_int_distribution<int> digit(0, 4);
      for (auto& row : s)
        for (double& v : row) v = digit(rng);
      const auto perm = random_perm(n, rng);
      const Tensor zz = oracle::to_tensor(s);
      const auto base = assignment_pool(oracle::to_tensor(s), zz, Adjacency(g));
      const auto moved = assignment_pool(oracle::to_tensor(oracle::permute(s, perm, false)),
                                         oracle::to_tensor(oracle::permute(s, perm, false)),
                                         Adjacency(permuted(g, perm)));
      CHECK(adjacency_dense(moved) == adjacency_dense(base));
      CHECK(oracle::from_tensor(moved.x) == oracle::from_tensor(base.x));
    }
  }
}

TEST_CASE("diff_pool") {
  std::mt19937_64 rng(7);

  SUBCASE("one cluster sums every node") {
    const auto layer = DiffPoolLayer::create(2, 3, 1, rng);
    const auto a = oracle::random_graph(4, 0.6, rng);
    const Tensor x = oracle::to_tensor(oracle::random_dense(4, 2, rng));
    const auto r = diff_pool(layer, x, a);
    for (double v : r.assignment.values()) CHECK(v == 1.0);
    CHECK(adjacency_dense(r)[0][0] == static_cast<double>(a.nnz()));
  }

  SUBCASE("matches the oracle; S is row-stochastic and A' symmetric") {
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 1 + trial % 8, clusters = 1 + trial % 4;
      const auto layer = DiffPoolLayer::create(3, 4, clusters, rng);
      const auto a = oracle::random_graph(n, 0.5, rng);
      const auto x = oracle::random_dense(n, 3, rng);
      const auto r = diff_pool(layer, oracle::to_tensor(x), a);
      const auto want = oracle::diff_pool(x, oracle::from_sparse(a), oracle::from_tensor(layer.embed.weight),
                                          vec(layer.embed.bias), oracle::from_tensor(layer.assign.weight),
                                          vec(layer.assign.bias));
      CHECK(oracle::max_abs_diff(oracle::from_tensor(r.x), want.x) <= 1e-10);
      CHECK(oracle::max_abs_diff(adjacency_dense(r), want.a) <= 1e-10);
      CHECK(symmetric(adjacency_dense(r), 1e-12));
      for (const auto& row : oracle::from_tensor(r.assignment)) {
        double total = 0.0;
        for (double v : row) {
          CHECK(v >= 0.0);
          total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }

  SUBCASE("batched assignment keeps graphs apart") {
    std::vector<Graph> gs;
    for (std::size_t n : {3, 5, 2})
      gs.emplace_back(oracle::random_graph(n, 0.6, rng), oracle::to_tensor(oracle::random_dense(n, 2, rng)), 0);
    const auto batch = batch_graphs(gs);
    const auto layer = DiffPoolLayer::create(2, 3, 2, rng);
    const auto r = diff_pool(layer, batch.features, Topology::from_batch(batch), batch.node_to_graph, 3);
    CHECK(r.node_to_graph == std::vector<std::size_t>{0, 0, 1, 1, 2, 2});
    const auto x = oracle::from_tensor(r.x);
    const auto ad = adjacency_dense(r);
    for (std::size_t b = 0; b < 3; ++b) {
      const auto alone = diff_pool(layer, gs[b].features(), gs[b].adjacency());
      const auto xa = oracle::from_tensor(alone.x);
      const auto aa = adjacency_dense(alone);
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(x[2 * b + i][j] - xa[i][j]) <= 1e-12);
        for (std::size_t j = 0; j < 6; ++j) {
          const double want = j / 2 == b ? aa[i][j % 2] : 0.0;
          CHECK(std::abs(ad[2 * b + i][j] - want) <= 1e-12);
        }
      }
    }
  }

  SUBCASE("gradients") {
    std::size_t done = 0;
    for (int attempt = 0; attempt < 40 && done < 5; ++attempt) {
      const std::size_t n = 2 + attempt % 6;
      const auto layer = DiffPoolLayer::create(2, 2, 2, rng);
      const auto a = oracle::random_graph(n, 0.5, rng);
      Tensor x = oracle::to_tensor(oracle::random_dense(n, 2, rng), true);
      auto params = layer.parameters();
      params.push_back(x);
      const auto r = gradcheck::check(
          [&] {
            const auto p = diff_pool(layer, x, a);
            return add(sum(mul(p.x, p.x)), sum(p.adjacency->dense()));
          },
          params);
      if (r.on_kink()) continue;
      CHECK(r.passed());
      ++done;
    }
    CHECK(done == 5);
  }
}

TEST_CASE("topk_pool") {
  SUBCASE("axis projection selects the largest feature") {
    const TopkLayer layer{column({0, 1}, true), PoolSize::fixed(2)};
    const Tensor x = Tensor::matrix({{5, 0.1}, {0, 0.9}, {1, 0.5}, {2, 0.2}});
    CHECK(topk_pool(layer, x, SparseMatrix(4, 4, {})).kept == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("hand-computed example") {
    const TopkLayer layer{column({1, 0}, true), PoolSize::fixed(2)};
    const auto r = topk_pool(layer, Tensor::matrix({{1, 0}, {0, 2}, {3, 0}}), SparseMatrix(3, 3, {}));
    CHECK(r.kept == std::vector<std::size_t>{0, 2});
    CHECK(oracle::from_tensor(r.x) == oracle::Dense{{std::tanh(1.0), 0}, {3 * std::tanh(3.0), 0}});
  }
  SUBCASE("k = n keeps the adjacency") {
    std::mt19937_64 rng(1);
    const auto a = oracle::random_graph(6, 0.5, rng);
    const TopkLayer layer{column({0.3, -0.2}, true), PoolSize::fraction(1.0)};
    const auto r = topk_pool(layer, oracle::to_tensor(oracle::random_dense(6, 2, rng)), a);
    CHECK(r.kept.size() == 6);
    CHECK(adjacency_dense(r) == oracle::from_sparse(a));
  }
  SUBCASE("zero projection") {
    const TopkLayer layer{column({0, 0}, true), PoolSize::fixed(1)};
    CHECK_THROWS_AS(topk_pool(layer, Tensor::matrix({{1, 2}}), SparseMatrix(1, 1, {})), NumericError);
  }
  SUBCASE("ratio rounds up") {
    CHECK(PoolSize::fraction(0.25).resolve(17) == 5);
    CHECK(PoolSize::fraction(0.5).resolve(4) == 2);
    CHECK(PoolSize::fraction(0.1).resolve(3) == 1);
    CHECK(PoolSize::fixed(3).resolve(10) == 3);
    CHECK_THROWS_AS(PoolSize::fraction(0.0), ArgumentError);
  }
}

TEST_CASE("sag_pool") {
  SUBCASE("k = n with constant scores scales uniformly") {
    // Zero weight and bias 0.4 give y = 0.4 everywhere.
    const SagLayer layer{GcnLayer{Tensor::zeros({2, 1}, true), Tensor::vector({0.4}, true), Activation::identity},
                         PoolSize::fraction(1.0)};
    std::mt19937_64 rng(2);
    const auto a = oracle::random_graph(5, 0.5, rng);
    const auto x = oracle::random_dense(5, 2, rng);
    const auto r = sag_pool(layer, oracle::to_tensor(x), a);
    oracle::Dense want = x;
    for (auto& row : want)
      for (double& v : row) v *= std::tanh(0.4);
    CHECK(oracle::max_abs_diff(oracle::from_tensor(r.x), want) == 0.0);
    CHECK(adjacency_dense(r) == oracle::from_sparse(a));
  }
  SUBCASE("2-node path tie keeps node 0") {
    const SagLayer layer{GcnLayer{Tensor::matrix({{1}}, true), {}, Activation::identity}, PoolSize::fixed(1)};
    const auto r = sag_pool(layer, column({1, 3}), path2());
    CHECK(r.kept == std::vector<std::size_t>{0});
    CHECK(oracle::from_tensor(r.x) == oracle::Dense{{std::tanh(2.0)}});
  }
  SUBCASE("increasing scores keep the last node") {
    const SagLayer layer{GcnLayer{Tensor::matrix({{1}}, true), {}, Activation::identity}, PoolSize::fixed(1)};
    const auto r = sag_pool(layer, column({1, 2, 3, 4}), SparseMatrix(4, 4, {}));
    CHECK(r.kept == std::vector<std::size_t>{3});
  }
}

TEST_CASE("node selection properties") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + trial % 8, k = 1 + (trial / 8) % n;
    const auto a = oracle::random_graph(n, 0.5, rng);
    const auto xd = oracle::random_dense(n, 3, rng);
    const Tensor x = oracle::to_tensor(xd);
    const auto p = oracle::random_vector(3, rng);
    const TopkLayer topk{column(p, true), PoolSize::fixed(k)};
    auto sag = SagLayer::create(3, PoolSize::fixed(k), rng);
    sag.score.bias.mutable_values()[0] = 0.1;

    const auto rt = topk_pool(topk, x, a);
    const auto rs = sag_pool(sag, x, a);
    const auto wt = oracle::topk_pool(xd, oracle::from_sparse(a), p, k);
    const auto ws = oracle::sag_pool(xd, oracle::from_sparse(a), oracle::from_tensor(sag.score.weight),
                                     vec(sag.score.bias), k);
    CHECK(rt.kept == wt.kept);
    CHECK(rs.kept == ws.kept);
    CHECK(oracle::max_abs_diff(oracle::from_tensor(rt.x), wt.x) <= 1e-10);
    CHECK(oracle::max_abs_diff(oracle::from_tensor(rs.x), ws.x) <= 1e-10);

    for (const auto* r : {&rt, &rs}) {
      CHECK(std::is_sorted(r->kept.begin(), r->kept.end()));
      const auto ad = adjacency_dense(*r);
      CHECK(symmetric(ad, 0.0));
      const auto xo = oracle::from_tensor(r->x);
      for (std::size_t u = 0; u < r->kept.size(); ++u) {
        for (std::size_t v = 0; v < r->kept.size(); ++v) CHECK(ad[u][v] == a.at(r->kept[u], r->kept[v]));
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(xo[u][j]) <= std::abs(xd[r->kept[u]][j]));
      }
    }
  }
}

TEST_CASE("node selection pooled multisets are permutation invariant") {
  std::mt19937_64 rng(13);
  std::size_t checked = 0;
  for (int trial = 0; trial < 60 && checked < 30; ++trial) {
    const std::size_t n = 2 + trial % 7, k = 1 + trial % n;
    const auto a = oracle::random_graph(n, 0.5, rng);
    const auto xd = oracle::random_dense(n, 2, rng);
    const auto p = oracle::random_vector(2, rng);
    const TopkLayer topk{column(p, true), PoolSize::fixed(k)};
    const auto sag = SagLayer::create(2, PoolSize::fixed(k), rng);
    std::vector<double> y;
    for (const auto& row : xd) y.push_back(row[0] * p[0] + row[1] * p[1]);
    const Tensor sag_scores =
        gcn_forward(sag.score, normalize_gcn(a), oracle::to_tensor(xd));
    if (!distinct(y) || !distinct(vec(sag_scores))) continue;

    const auto perm = random_perm(n, rng);
    const Tensor px = oracle::to_tensor(oracle::permute(xd, perm, false));
    const auto pa = permuted(a, perm);
    CHECK(pooled_multiset(topk_pool(topk, oracle::to_tensor(xd), a)) == pooled_multiset(topk_pool(topk, px, pa)));
    const auto s1 = pooled_multiset(sag_pool(sag, oracle::to_tensor(xd), a));
    const auto s2 = pooled_multiset(sag_pool(sag, px, pa));
    // GCN scores can differ in the last bit under relabeling; compare with a tolerance.
    REQUIRE(s1.size() == s2.size());
    auto i1 = s1.begin();
    auto i2 = s2.begin();
    for (; i1 != s1.end(); ++i1, ++i2) {
      CHECK(oracle::max_abs_diff({i1->first}, {i2->first}) <= 1e-12);
      CHECK(i1->second.size() == i2->second.size());
    }
    ++checked;
  }
  CHECK(checked == 30);
}

TEST_CASE("topk projection receives gradient") {
  std::mt19937_64 rng(17);
  std::size_t done = 0;
  for (int attempt = 0; attempt < 40 && done < 10; ++attempt) {
    const std::size_t n = 3 + attempt % 6;
    const auto a = oracle::random_graph(n, 0.5, rng);
    const Tensor x = oracle::to_tensor(oracle::random_dense(n, 3, rng));
    const TopkLayer layer{column(oracle::random_vector(3, rng), true), PoolSize::fraction(0.5)};
    const auto r = gradcheck::check([&] { return sum(topk_pool(layer, x, a).x); }, {layer.projection});
    if (r.on_kink()) continue;
    CHECK(r.passed());
    CHECK(r.any_nonzero);
    ++done;
  }
  CHECK(done == 10);
}

TEST_CASE("global_mean_readout") {
  CHECK(oracle::from_tensor(global_mean_readout(Tensor::matrix({{1, 2}, {3, 4}}), std::vector<std::size_t>{0, 0}, 1)) ==
        oracle::Dense{{2, 3}});
  CHECK(oracle::max_abs_diff(
            oracle::from_tensor(global_mean_readout(Tensor::matrix({{0.7, -1}, {0.7, -1}, {0.7, -1}}),
                                                    std::vector<std::size_t>{0, 0, 0}, 1)),
            oracle::Dense{{0.7, -1}}) <= 1e-15);
  CHECK(oracle::from_tensor(global_mean_readout(column({2, 4, 6}), std::vector<std::size_t>{0, 0, 1}, 2)) ==
        oracle::Dense{{3}, {6}});
  CHECK(oracle::from_tensor(global_mean_readout(column({2, 4}), std::vector<std::size_t>{0, 0}, 2)) ==
        oracle::Dense{{3}, {0}});
  CHECK(parse_pool("diffpool") == PoolKind::diffpool);
  CHECK_THROWS_AS(parse_pool("unpool"), ArgumentError);
}
