#include <random>

#include "doctest.h"
#include "xbar/analog_functional.hpp"
#include "xbar/error.hpp"
#include "xbar/reference_net.hpp"

using namespace xbar;
using namespace xbar::analog;

TEST_CASE("hard sigmoid circuit") {
    CHECK(hard_sigmoid_circuit(0) == 0.5);
    CHECK(hard_sigmoid_circuit(3) == 1.0);
    CHECK(hard_sigmoid_circuit(-3) == 0.0);
    CHECK(hard_sigmoid_circuit(1) == 4.0 / 6.0);
}

TEST_CASE("hard swish circuit") {
    CHECK(hard_swish_circuit(3) == 3.0);
    CHECK(hard_swish_circuit(-3) == 0.0);
    CHECK(hard_swish_circuit(0) == 0.0);
    CHECK(hard_swish_circuit(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("relu circuit") {
    CHECK(relu_circuit(-1) == 0.0);
    CHECK(relu_circuit(2) == 2.0);
    CHECK(relu_circuit(0) == 0.0);
}

TEST_CASE("circuits match the reference exactly") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 5000; ++i) {
        const double x = u(rng);
        CHECK(hard_sigmoid_circuit(x) == ref::hard_sigmoid(x));
        CHECK(hard_swish_circuit(x) == ref::hard_swish(x));
        CHECK(relu_circuit(x) == ref::relu(x));
        CHECK(hard_swish_circuit(x) == x * hard_sigmoid_circuit(x));
    }
}

TEST_CASE("monotonicity") {
    double prev_sig = hard_sigmoid_circuit(-10), prev_relu = relu_circuit(-10), prev_swish = hard_swish_circuit(-3);
    for (int i = -10000; i <= 10000; ++i) {
        const double x = i * 1e-3;
        CHECK(hard_sigmoid_circuit(x) >= prev_sig);
        CHECK(relu_circuit(x) >= prev_relu);
        prev_sig = hard_sigmoid_circuit(x);
        prev_relu = relu_circuit(x);
        const double s = hard_swish_circuit(x);
        if (x <= -3.0) {
            CHECK(s == 0.0);
        } else if (x <= -1.5) {
            CHECK(s <= prev_swish);
        } else {
            CHECK(s >= prev_swish);
        }
        prev_swish = s;
    }
    CHECK(hard_swish_circuit(-1.5) == -0.375);
}

TEST_CASE("limiter") {
    const LimiterSpec lim{-1.0, 2.0};
    CHECK(lim(-5) == -1.0);
    CHECK(lim(0.5) == 0.5);
    CHECK(lim(7) == 2.0);
}

TEST_CASE("analog add") {
    CHECK(analog_add(std::vector<double>{1, 2}, std::vector<double>{3, 4}) == std::vector<double>{4, 6});
    CHECK(analog_add(std::vector<double>{1, -2}, std::vector<double>{0, 0}) == std::vector<double>{1, -2});
    CHECK(analog_add(std::vector<double>{1.5, -2}, std::vector<double>{-1.5, 2}) == std::vector<double>{0, 0});
    CHECK_THROWS_AS(analog_add(std::vector<double>{1}, std::vector<double>{1, 2}), GeometryError);

    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(8), b(8), c(8);
        for (std::size_t i = 0; i < 8; ++i) {
            a[i] = u(rng);
            b[i] = u(rng);
            c[i] = u(rng);
        }
        CHECK(analog_add(a, b) == analog_add(b, a));
        const auto l = analog_add(analog_add(a, b), c), r = analog_add(a, analog_add(b, c));
        for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(l[i] - r[i]) <= 1e-15);
    }
}

TEST_CASE("analog mul") {
    const Tensor x({2, 1, 2}, {1, 2, 3, 4});
    CHECK(analog_mul(x, std::vector<double>{1, 1}) == x);
    CHECK(analog_mul(x, std::vector<double>{0, 0}) == Tensor({2, 1, 2}));
    CHECK(analog_mul(Tensor({1, 1, 1}, {2}), std::vector<double>{0.5}) == Tensor({1, 1, 1}, {1}));
    CHECK_THROWS_AS(analog_mul(x, std::vector<double>{1}), GeometryError);
}
