#include <doctest.h>

#include <random>
#include <vector>

#include "ratm/kernels.hpp"

using namespace ratm;

TEST_CASE("dispatched kernels agree with the scalar references") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> val(-5.0, 5.0);
    for (std::size_t n : {0U, 1U, 3U, 4U, 7U, 25U, 64U, 1001U}) {
        std::vector<double> a(n), w(n), big(4096);
        std::vector<state_id> idx(n);
        for (auto& x : big) x = val(rng);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = val(rng);
            w[i] = val(rng);
            idx[i] = static_cast<state_id>(rng() % big.size());
        }
        CHECK(kernels::dot(a.data(), w.data(), n) ==
              doctest::Approx(kernels::scalar::dot(a.data(), w.data(), n)).epsilon(1e-12));
        CHECK(kernels::dot_indexed(big.data(), idx.data(), w.data(), n) ==
              doctest::Approx(kernels::scalar::dot_indexed(big.data(), idx.data(), w.data(), n))
                  .epsilon(1e-12));
        if (n > 0)
            CHECK(kernels::max_value(a.data(), n) == kernels::scalar::max_value(a.data(), n));

        std::vector<double> dst1(n, 1.0), dst2(n, 1.0);
        kernels::axpy(dst1.data(), a.data(), 0.37, n);
        kernels::scalar::axpy(dst2.data(), a.data(), 0.37, n);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(dst1[i] == doctest::Approx(dst2[i]).epsilon(1e-13));
    }
}

TEST_CASE("scalar kernels compute the expected values") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{0.5, 0.25, 0.25};
    CHECK(kernels::scalar::dot(a.data(), b.data(), 3) == doctest::Approx(1.75));
    const std::vector<double> table{10.0, 20.0, 30.0, 40.0};
    const std::vector<state_id> idx{3, 0};
    const std::vector<double> w{0.5, 0.5};
    CHECK(kernels::scalar::dot_indexed(table.data(), idx.data(), w.data(), 2) ==
          doctest::Approx(25.0));
    CHECK(kernels::scalar::max_value(a.data(), 3) == 3.0);
    CHECK(kernels::scalar::max_value(a.data(), 0) ==
          -std::numeric_limits<double>::infinity());
}

#if defined(__x86_64__)
TEST_CASE("avx2 variants agree with scalar when the host supports them") {
    if (!kernels::using_avx2()) return;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::vector<double> a(257), w(257), table(512);
    std::vector<state_id> idx(257);
    for (auto& x : table) x = val(rng);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = val(rng);
        w[i] = val(rng);
        idx[i] = static_cast<state_id>(rng() % table.size());
    }
    CHECK(kernels::avx2::dot(a.data(), w.data(), a.size()) ==
          doctest::Approx(kernels::scalar::dot(a.data(), w.data(), a.size())).epsilon(1e-12));
    CHECK(kernels::avx2::dot_indexed(table.data(), idx.data(), w.data(), idx.size()) ==
          doctest::Approx(
              kernels::scalar::dot_indexed(table.data(), idx.data(), w.data(), idx.size()))
              .epsilon(1e-12));
    CHECK(kernels::avx2::max_value(a.data(), a.size()) ==
          kernels::scalar::max_value(a.data(), a.size()));
}
#endif
