#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "gnnpool/simd/kernels.hpp"

using namespace gnnpool::simd;

namespace {

std::vector<double> random_values(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar kernel table is always available") {
  CHECK(scalar_kernels().isa == Isa::scalar);
  CHECK(std::string(isa_name(Isa::avx2)) == "avx2");
  CHECK(set_active_isa(Isa::scalar));
  CHECK(active_kernels().isa == Isa::scalar);
  set_active_isa(avx2_kernels() ? Isa::avx2 : Isa::scalar);
}

TEST_CASE("avx2 kernels are bit-identical to scalar kernels") {
  const KernelTable* avx = avx2_kernels();
  if (!avx) {
    MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
    return;
  }
  const KernelTable& ref = scalar_kernels();
  std::mt19937_64 rng(7);
  const std::size_t dims[] = {1, 2, 3, 4, 5, 7, 8, 9, 12, 16, 17, 33, 64, 70, 130};

  SUBCASE("gemm_nn and gemm_tn over odd shapes, with and without accumulation") {
    for (std::size_t m : dims)
      for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{8}, std::size_t{13},
                            std::size_t{32}, std::size_t{37}})
        for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{64}, std::size_t{200}})
          for (bool acc : {false, true}) {
            const auto a = random_values(m * k, rng);
            const auto b = random_values(k * n, rng);
            const auto c0 = random_values(m * n, rng);
            auto c1 = c0, c2 = c0;
            ref.gemm_nn(m, n, k, a.data(), b.data(), c1.data(), acc);
            avx->gemm_nn(m, n, k, a.data(), b.data(), c2.data(), acc);
            CHECK(bit_equal(c1, c2));
            // a read as [k x m] for the transposed product
            auto d1 = c0, d2 = c0;
            ref.gemm_tn(m, n, k, a.data(), b.data(), d1.data(), acc);
            avx->gemm_tn(m, n, k, a.data(), b.data(), d2.data(), acc);
            CHECK(bit_equal(d1, d2));
          }
  }

  SUBCASE("elementwise kernels") {
    for (std::size_t n : dims) {
      const auto x = random_values(n, rng);
      const auto y = random_values(n, rng);
      std::vector<double> o1(n), o2(n);
      ref.add(n, x.data(), y.data(), o1.data());
      avx->add(n, x.data(), y.data(), o2.data());
      CHECK(bit_equal(o1, o2));
      ref.mul(n, x.data(), y.data(), o1.data());
      avx->mul(n, x.data(), y.data(), o2.data());
      CHECK(bit_equal(o1, o2));
      ref.scale(n, -0.37, x.data(), o1.data());
      avx->scale(n, -0.37, x.data(), o2.data());
      CHECK(bit_equal(o1, o2));
      ref.relu(n, x.data(), o1.data());
      avx->relu(n, x.data(), o2.data());
      CHECK(bit_equal(o1, o2));
      auto a1 = y, a2 = y;
      ref.axpy(n, 1.7, x.data(), a1.data());
      avx->axpy(n, 1.7, x.data(), a2.data());
      CHECK(bit_equal(a1, a2));
      auto g1 = y, g2 = y;
      ref.relu_backward(n, x.data(), y.data(), g1.data());
      avx->relu_backward(n, x.data(), y.data(), g2.data());
      CHECK(bit_equal(g1, g2));
    }
  }

  SUBCASE("spmm") {
    for (std::size_t rows : {std::size_t{1}, std::size_t{6}, std::size_t{40}})
      for (std::size_t width : {std::size_t{1}, std::size_t{4}, std::size_t{7}, std::size_t{33}}) {
        std::bernoulli_distribution keep(0.3);
        std::vector<std::size_t> row_ptr{0}, col;
        std::vector<double> val;
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < rows; ++c)
            if (keep(rng)) {
              col.push_back(c);
              val.push_back(random_values(1, rng)[0]);
            }
          row_ptr.push_back(col.size());
        }
        const auto x = random_values(rows * width, rng);
        std::vector<double> o1(rows * width), o2(rows * width);
        ref.spmm(rows, row_ptr.data(), col.data(), val.data(), x.data(), width, o1.data());
        avx->spmm(rows, row_ptr.data(), col.data(), val.data(), x.data(), width, o2.data());
        CHECK(bit_equal(o1, o2));
      }
  }

  SUBCASE("relu keeps the subgradient convention at exactly zero") {
    const std::vector<double> x{-1.0, 0.0, -0.0, 2.0, 0.0, 1e-300, -1e-300, 3.0};
    const std::vector<double> g(8, 1.0);
    std::vector<double> r1(8, 0.0), r2(8, 0.0);
    ref.relu_backward(8, x.data(), g.data(), r1.data());
    avx->relu_backward(8, x.data(), g.data(), r2.data());
    CHECK(bit_equal(r1, r2));
    CHECK(r1 == std::vector<double>{0, 0, 0, 1, 0, 1, 0, 1});
  }

  SUBCASE("relu passes NaN through") {
    const std::vector<double> x{NAN, -1.0, 2.0, NAN, -0.0, 0.5};
    std::vector<double> o1(6), o2(6);
    ref.relu(6, x.data(), o1.data());
    avx->relu(6, x.data(), o2.data());
    CHECK(bit_equal(o1, o2));
    CHECK(std::isnan(o1[0]));
    CHECK(std::isnan(o1[3]));
    CHECK(o1[4] == 0.0);
    CHECK_FALSE(std::signbit(o1[4]));
  }
}
