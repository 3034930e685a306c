// Copyright 2026 The SpecTTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specttm/pauli.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace specttm;

namespace {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

PauliChannelSpec random_pauli_channel(std::mt19937_64& rng, int qubits) {
    std::exponential_distribution<double> e(1.0);
    PauliChannelSpec s{std::vector<double>(pauli_count(qubits))};
    double sum = 0.0;
    for (auto& f : s.f) sum += (f = e(rng));
    for (auto& f : s.f) f /= sum;
    return s;
}

ChannelSpectrum spectrum(std::initializer_list<double> l) {
    ChannelSpectrum s;
    for (double v : l) s.lambdas.emplace_back(v, 0.0);
    return s;
}

}  // namespace

TEST(PauliString, OrderingAndAlgebra) {
    for (int q = 1; q <= 3; ++q) {
        const auto basis = pauli_basis(q);
        const int d = 1 << q;
        ASSERT_EQ(static_cast<int>(basis.size()), d * d);
        EXPECT_TRUE(basis.front().isApprox(CMatrix::Identity(d, d)));
        CMatrix all_z = PauliString::single(3);
        for (int i = 1; i < q; ++i) all_z = kron(all_z, PauliString::single(3));
        EXPECT_TRUE(basis.back().isApprox(all_z));
        for (int mu = 0; mu < d * d; ++mu) {
            EXPECT_TRUE((basis[mu] * basis[mu]).isApprox(CMatrix::Identity(d, d)));
            for (int nu = 0; nu < d * d; ++nu) {
                const Complex tr = (basis[mu] * basis[nu]).trace();
                EXPECT_NEAR(std::abs(tr - Complex(mu == nu ? d : 0, 0)), 0.0, 1e-12);
            }
        }
    }
    // P_1 = I (x) X for two qubits.
    EXPECT_TRUE(PauliString(1, 2).matrix().isApprox(kron(PauliString::single(0), PauliString::single(1))));
    EXPECT_THROW(PauliString(4, 1), std::invalid_argument);
    EXPECT_THROW(PauliString(0, 4), std::invalid_argument);
}

TEST(PauliString, CommutationAgreesWithMatrices) {
    const auto basis = pauli_basis(2);
    for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) {
            const bool commute = (basis[a] * basis[b] - basis[b] * basis[a]).norm() < 1e-12;
            EXPECT_EQ(commute, PauliString(a, 2).commutes_with(PauliString(b, 2)));
        }
}

TEST(PtmFromSuperoperator, Examples) {
    const auto id = ptm_from_superoperator([](const CMatrix& x) -> CMatrix { return x; }, 1);
    EXPECT_TRUE(id.matrix().isApprox(Matrix::Identity(4, 4)));

    const CMatrix z = PauliString::single(3);
    const auto zc = ptm_from_superoperator([&](const CMatrix& x) -> CMatrix { return z * x * z; }, 1);
    Vector expect(4);
    expect << 1, -1, -1, 1;
    EXPECT_TRUE(zc.matrix().isApprox(Matrix(expect.asDiagonal())));

    const double p = 0.19;
    CMatrix k0(2, 2), k1(2, 2);
    k0 << 1, 0, 0, std::sqrt(1 - p);
    k1 << 0, std::sqrt(p), 0, 0;
    const auto ad = kraus_ptm({k0, k1});
    EXPECT_NEAR(ad(1, 1), 0.9, 1e-12);
    EXPECT_NEAR(ad(2, 2), 0.9, 1e-12);
    EXPECT_NEAR(ad(3, 3), 0.81, 1e-12);
    EXPECT_NEAR(ad(3, 0), 0.19, 1e-12);
    EXPECT_TRUE(ad.is_trace_preserving());
    EXPECT_FALSE(ad.is_unital());

    EXPECT_THROW(ptm_from_superoperator([](const CMatrix&) -> CMatrix { return CMatrix::Identity(4, 4); }, 1),
                 std::invalid_argument);
}

TEST(PtmFromSuperoperator, LinearInChannel) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    auto random_unitary = [&] {
        CMatrix m(2, 2);
        for (int i = 0; i < 4; ++i) m(i / 2, i % 2) = Complex(g(rng), g(rng));
        return CMatrix(m.householderQr().householderQ());
    };
    const CMatrix u = random_unitary();
    const CMatrix v = random_unitary();
    const double a = 0.3;
    const auto mix = ptm_from_superoperator(
        [&](const CMatrix& x) -> CMatrix { return a * u * x * u.adjoint() + (1 - a) * v * x * v.adjoint(); }, 1);
    EXPECT_TRUE(mix.matrix().isApprox(a * unitary_ptm(u).matrix() + (1 - a) * unitary_ptm(v).matrix(), 1e-12));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) EXPECT_LE(std::abs(mix(i, j)), 1.0 + 1e-12);
}

TEST(EigenvaluesFromF, Examples) {
    auto l = eigenvalues_from_f({{1, 0, 0, 0}});
    for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(l[a].real(), 1.0);
    l = eigenvalues_from_f({{0, 1, 0, 0}});
    EXPECT_DOUBLE_EQ(l[0].real(), 1.0);
    EXPECT_DOUBLE_EQ(l[1].real(), -1.0);
    EXPECT_DOUBLE_EQ(l[2].real(), -1.0);
    const double p = 0.12;
    l = eigenvalues_from_f({{1 - p, p / 3, p / 3, p / 3}});
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(l[a].real(), 1 - 4 * p / 3, 1e-15);
    EXPECT_THROW(eigenvalues_from_f({{0.5, 0.1, 0, 0}}), std::invalid_argument);
}

TEST(FFromEigenvalues, Examples) {
    auto f = f_from_eigenvalues(spectrum({1, 1, 1}));
    EXPECT_NEAR(f.f[0], 1, 1e-15);
    f = f_from_eigenvalues(spectrum({1, -1, -1}));
    EXPECT_NEAR(f.f[1], 1, 1e-15);
    EXPECT_NEAR(f.f[0], 0, 1e-15);
    f = f_from_eigenvalues(spectrum({0.6, 0.6, 0.6}));
    EXPECT_NEAR(f.f[0], 0.7, 1e-15);
    for (int a = 1; a < 4; ++a) EXPECT_NEAR(f.f[a], 0.1, 1e-15);
}

TEST(PauliChannel, RandomRoundTripAndCompletePositivity) {
    std::mt19937_64 rng(11);
    for (int q = 1; q <= 3; ++q)
        for (int trial = 0; trial < 200; ++trial) {
            const auto spec = random_pauli_channel(rng, q);
            const auto lam = eigenvalues_from_f(spec);
            const auto back = f_from_eigenvalues(lam);
            for (size_t a = 0; a < spec.f.size(); ++a) EXPECT_NEAR(back.f[a], spec.f[a], 1e-14);
            if (q == 1) {
                EXPECT_TRUE(check_fujiwara_algoet(lam));
            }
        }
    // Real, not necessarily physical f.
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        PauliChannelSpec s{{0, u(rng), u(rng), u(rng)}};
        s.f[0] = 1.0 - s.f[1] - s.f[2] - s.f[3];
        const auto back = f_from_eigenvalues(eigenvalues_from_f(s));
        for (int a = 0; a < 4; ++a) EXPECT_NEAR(back.f[a], s.f[a], 1e-14);
    }
}

TEST(PauliChannel, PtmIsDiagonalAndMatchesKraus) {
    std::mt19937_64 rng(3);
    for (int q = 1; q <= 2; ++q)
        for (int trial = 0; trial < 20; ++trial) {
            const auto spec = random_pauli_channel(rng, q);
            const auto basis = pauli_basis(q);
            std::vector<CMatrix> kraus;
            for (size_t a = 0; a < basis.size(); ++a) kraus.push_back(std::sqrt(spec.f[a]) * basis[a]);
            const auto brute = kraus_ptm(kraus);
            EXPECT_LT(brute.max_off_diagonal(), 1e-12);
            EXPECT_TRUE(brute.matrix().isApprox(pauli_channel_ptm(spec).matrix(), 1e-12));
        }
}

TEST(FujiwaraAlgoet, Examples) {
    EXPECT_TRUE(check_fujiwara_algoet(spectrum({1, 1, 1})));
    EXPECT_TRUE(check_fujiwara_algoet(spectrum({0.9, 0.9, 0.9})));
    EXPECT_FALSE(check_fujiwara_algoet(spectrum({0.9, 0.9, 0.5})));
    // Violations smaller than the 1e-12 boundary tolerance are accepted.
    EXPECT_TRUE(check_fujiwara_algoet(spectrum({0.5, 0.5, -1e-13})));
    EXPECT_FALSE(check_fujiwara_algoet(spectrum({0.5, 0.5, -1e-9})));
    ChannelSpectrum two;
    two.lambdas.assign(15, 1.0);
    EXPECT_THROW(check_fujiwara_algoet(two), std::invalid_argument);
}

TEST(ApplyPtm, Examples) {
    Vector v(4);
    v << 1, 0.3, -0.2, 0.5;
    EXPECT_TRUE(apply_ptm(PauliTransferMatrix::identity(), v).isApprox(v));
    Matrix dep = Matrix::Zero(4, 4);
    dep(0, 0) = 1;
    const Vector mixed = apply_ptm({dep, 1}, v);
    EXPECT_EQ(mixed(0), 1.0);
    EXPECT_EQ(mixed.tail(3).norm(), 0.0);
    EXPECT_THROW(apply_ptm(PauliTransferMatrix::identity(), Vector::Ones(3)), std::invalid_argument);
}

TEST(Compose, Examples) {
    const CMatrix z = PauliString::single(3);
    const auto zc = unitary_ptm(z);
    EXPECT_TRUE(compose(zc, zc).matrix().isApprox(Matrix::Identity(4, 4)));
    EXPECT_TRUE(compose(PauliTransferMatrix::identity(), zc).matrix().isApprox(zc.matrix()));
    Matrix a = Matrix::Identity(4, 4), b = Matrix::Identity(4, 4);
    a(1, 1) = a(2, 2) = 0.7;
    b(1, 1) = b(2, 2) = 0.4;
    const auto ab = compose({a, 1}, {b, 1});
    EXPECT_NEAR(ab(1, 1), 0.28, 1e-15);
    EXPECT_NEAR(ab(3, 3), 1.0, 1e-15);
    EXPECT_THROW(compose(PauliTransferMatrix::identity(1), PauliTransferMatrix::identity(2)), std::invalid_argument);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    auto rnd = [&] { return PauliTransferMatrix(Matrix::NullaryExpr(4, 4, [&] { return g(rng); }), 1); };
    const auto x = rnd(), y = rnd(), w = rnd();
    EXPECT_TRUE(compose(compose(x, y), w).matrix().isApprox(compose(x, compose(y, w)).matrix(), 1e-12));
}
