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

#include "specttm/matrix_pencil.hpp"
#include "specttm/protocol.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace specttm;

namespace {

// Forward evaluation of sum_j a_j z_j^k for k = 1..K.
std::vector<double> synthesize(const std::vector<Complex>& z, const std::vector<Complex>& a, int K) {
    std::vector<double> g(K, 0.0);
    for (int k = 1; k <= K; ++k) {
        Complex acc = 0.0;
        for (size_t j = 0; j < z.size(); ++j) acc += a[j] * std::pow(z[j], k);
        g[k - 1] = acc.real();
    }
    return g;
}

double max_pole_error(std::vector<Complex> got, std::vector<Complex> want) {
    std::vector<Complex> wa(want.size()), ga(got.size());
    detail::sort_poles(got, ga);
    detail::sort_poles(want, wa);
    double err = 0;
    for (size_t j = 0; j < want.size(); ++j) err = std::max(err, std::abs(got[j] - want[j]));
    return err;
}

PauliChannelSpec random_channel(std::mt19937_64& rng, double lo) {
    // Eigenvalues drawn inside the Fujiwara-Algoet tetrahedron with every |lambda| >= lo.
    std::uniform_real_distribution<double> u(lo, 1.0);
    for (;;) {
        ChannelSpectrum s;
        for (int a = 0; a < 3; ++a) s.lambdas.emplace_back(u(rng), 0.0);
        if (check_fujiwara_algoet(s)) return f_from_eigenvalues(s);
    }
}

}  // namespace

TEST(EstimatePoles, Examples) {
    std::vector<double> g(6);
    for (int k = 1; k <= 6; ++k) g[k - 1] = std::pow(0.5, k);
    auto e = estimate_poles(g, 1);
    ASSERT_EQ(e.size(), 1);
    EXPECT_NEAR(std::abs(e.poles[0] - 0.5), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(e.amplitudes[0] - 1.0), 0.0, 1e-12);
    EXPECT_LT(e.residual, 1e-12);

    g.assign(8, 0.0);
    for (int k = 1; k <= 8; ++k) g[k - 1] = 2 * std::pow(0.9, k) + std::pow(-0.4, k);
    e = estimate_poles(g, 2);
    ASSERT_EQ(e.size(), 2);
    EXPECT_NEAR(std::abs(e.poles[0] - 0.9), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(e.poles[1] + 0.4), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(e.amplitudes[0] - 2.0), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(e.amplitudes[1] - 1.0), 0.0, 1e-10);

    g.assign(12, 0.0);
    for (int k = 1; k <= 12; ++k) g[k - 1] = 1 + 2 * std::exp(-0.3 * k) * std::cos(0.7 * k);
    e = estimate_poles(g, 3);
    ASSERT_EQ(e.size(), 3);
    const Complex z = std::exp(Complex(-0.3, 0.7));
    EXPECT_NEAR(std::abs(e.poles[0] - 1.0), 0.0, 1e-10);
    // Equal magnitudes: ascending phase puts the negative-phase pole first.
    EXPECT_NEAR(std::abs(e.poles[1] - std::conj(z)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(e.poles[2] - z), 0.0, 1e-10);
    EXPECT_LT(e.residual, 1e-10);
}

TEST(EstimatePoles, Rejections) {
    EXPECT_THROW(estimate_poles(std::vector<double>(3, 1.0), 3), std::invalid_argument);
    try {
        estimate_poles(std::vector<double>(2, 1.0), 3);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("K below 2N-2=4"), std::string::npos);
    }
    // K = 2N-2 passes the bound but leaves no room for the fixed-rank pencil.
    try {
        estimate_poles(std::vector<double>(4, 1.0), 3);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("need K >= 2N=6"), std::string::npos);
    }
    std::vector<double> bad(8, 1.0);
    bad[3] = std::nan("");
    EXPECT_THROW(estimate_poles(bad, 2), std::invalid_argument);
    EXPECT_THROW(estimate_poles(std::vector<double>(8, 1.0), 0), std::invalid_argument);
}

TEST(EstimatePoles, ExactOnRandomPauliChannelsWithSpam) {
    std::mt19937_64 rng(21);
    ExperimentConfig cfg;
    cfg.M = 1;
    cfg.K = 12;
    for (int trial = 0; trial < 100; ++trial) {
        const auto lam = pauli_channel_ptm(random_channel(rng, 0.3));
        SpamModel spam;
        spam.meas = random_channel(rng, 0.8);
        spam.prep = random_channel(rng, 0.8);
        const auto s = simulate_signal_single({lam}, spam, cfg);
        const auto m = pauli_channel_ptm(spam.meas);
        const auto e = estimate_poles(s.row(1), 3);
        std::vector<Complex> truth;
        for (int a = 1; a <= 3; ++a) truth.emplace_back(m(a, a) * lam(a, a), 0.0);
        // Near-degenerate poles lose accuracy as the square root of the gap; skip them.
        double gap = 1.0;
        for (int a = 0; a < 3; ++a)
            for (int b = a + 1; b < 3; ++b) gap = std::min(gap, std::abs(truth[a] - truth[b]));
        if (gap < 1e-3) continue;
        EXPECT_LT(max_pole_error(e.poles, truth), 1e-8);
        EXPECT_LT(e.residual, 1e-10);
    }
}

TEST(EstimatePoles, ErrorGrowsLinearlyWithNoise) {
    std::vector<Complex> z{0.95, Complex(0.6, 0.3), Complex(0.6, -0.3)};
    std::vector<Complex> a{1.0, 1.0, 1.0};
    const auto clean = synthesize(z, a, 16);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    std::vector<double> lx, ly;
    for (double eps : {1e-7, 1e-6, 1e-5, 1e-4, 1e-3}) {
        double err = 0;
        for (int rep = 0; rep < 20; ++rep) {
            auto g = clean;
            for (auto& v : g) v += eps * n01(rng);
            err += max_pole_error(estimate_poles(g, 3).poles, z);
        }
        lx.push_back(std::log10(eps));
        ly.push_back(std::log10(err / 20));
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) mx += lx[i] / lx.size(), my += ly[i] / ly.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    EXPECT_NEAR(sxy / sxx, 1.0, 0.15);
}

TEST(EstimatePoles, ThresholdRuleAndRankDeficiency) {
    std::vector<double> g(10);
    for (int k = 1; k <= 10; ++k) g[k - 1] = 3 * std::pow(0.5, k);
    auto e = estimate_poles(g, 3);
    EXPECT_TRUE(e.rank_deficient);
    ASSERT_EQ(e.size(), 1);
    EXPECT_FALSE(e.diagnostics.empty());
    const auto full = resolve_multiplicity(e, 3);
    ASSERT_EQ(full.size(), 3);
    for (const auto& p : full.poles) EXPECT_NEAR(std::abs(p - 0.5), 0.0, 1e-12);
    EXPECT_EQ(full.diagnostics.size(), e.diagnostics.size());

    // A lost pole carries no amplitude: it is padded with 0 and flagged.
    for (int k = 1; k <= 10; ++k) g[k - 1] = 2 * std::pow(0.5, k);
    const auto padded = resolve_multiplicity(estimate_poles(g, 3), 3);
    ASSERT_EQ(padded.size(), 3);
    EXPECT_EQ(padded.poles[2], Complex(0.0, 0.0));
    EXPECT_NE(padded.diagnostics.back().find("unresolved"), std::string::npos);

    PencilConfig cfg;
    cfg.rank_rule = RankRule::threshold;
    std::vector<Complex> z{0.9, -0.5};
    const auto two = estimate_poles(synthesize(z, {1.0, 1.0}, 12), 3, cfg);
    EXPECT_EQ(two.size(), 2);
    EXPECT_FALSE(two.rank_deficient);
}

TEST(CancelSpam, Examples) {
    PoleEstimate p, q;
    p.poles = {0.5};
    q.poles = {0.5};
    EXPECT_NEAR(std::abs(cancel_spam(p, q).lambdas[0] - 0.5), 0.0, 1e-15);
    p.poles = {0.475};
    q.poles = {0.45125};
    EXPECT_NEAR(std::abs(cancel_spam(p, q).lambdas[0] - 0.5), 0.0, 1e-14);

    const Complex lam(0.6, 0.25);
    p.poles = {0.9 * lam, 0.9 * std::conj(lam)};
    q.poles = {0.81 * std::conj(lam), 0.81 * lam};
    const auto c = cancel_spam(p, q);
    EXPECT_NEAR(std::abs(c.lambdas[0] - std::conj(c.lambdas[1])), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(c.lambdas[0] - lam), 0.0, 1e-14);
    EXPECT_EQ(c.pairing[0], 1);

    p.poles = {0.5, 0.01};
    q.poles = {0.45, 1e-12};
    const auto d = cancel_spam(p, q);
    EXPECT_EQ(d.pairing[1], -1);
    ASSERT_EQ(d.diagnostics.size(), 1u);
    q.poles = {0.45};
    EXPECT_THROW(cancel_spam(p, q), std::invalid_argument);
}

TEST(CancelSpam, RecoversChannelEigenvaluesUnderPauliSpam) {
    std::mt19937_64 rng(8);
    ExperimentConfig cfg;
    cfg.M = 1;
    cfg.K = 12;
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto lam = pauli_channel_ptm(random_channel(rng, 0.3));
        SpamModel spam;
        spam.meas = random_channel(rng, 0.8);
        spam.prep = random_channel(rng, 0.8);
        const auto s = simulate_signal_single({lam}, spam, cfg);
        const auto d = simulate_signal_double({lam}, spam, cfg);
        std::vector<Complex> truth, mapped;
        for (int a = 1; a <= 3; ++a) truth.emplace_back(lam(a, a), 0.0);
        const auto m = pauli_channel_ptm(spam.meas);
        double gap = 1.0;
        for (int a = 1; a <= 3; ++a)
            for (int b = a + 1; b <= 3; ++b) gap = std::min(gap, std::abs(m(a, a) * lam(a, a) - m(b, b) * lam(b, b)));
        if (gap < 1e-3) continue;
        const auto c = cancel_spam(estimate_poles(s.row(1), 3), estimate_poles(d.row(1), 3));
        EXPECT_LT(max_pole_error(c.lambdas, truth), 1e-6);
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(TrackBranches, ConstantSpectra) {
    const std::vector<Complex> p{Complex(0.7, 0.1), Complex(0.7, -0.1), 0.9};
    const auto t = track_branches(std::vector<std::vector<Complex>>(6, p), 0.2);
    ASSERT_EQ(t.spectra.size(), 6u);
    for (const auto& s : t.spectra) {
        EXPECT_EQ(s.lambdas[0], p[0]);
        EXPECT_EQ(s.lambdas[1], p[1]);
        EXPECT_EQ(s.lambdas[2], p[2]);
    }
    EXPECT_EQ(t.spectra[5].time_index, 6);
}

TEST(TrackBranches, DephasingPairKeepsLabels) {
    const double ws = 0.1, dt = 0.2;
    std::vector<std::vector<Complex>> spectra;
    for (int n = 1; n <= 50; ++n) {
        const double r = std::exp(-0.05 * n * dt);
        const Complex z = std::polar(r, 2 * ws * n * dt);
        // Shuffle the presentation order at each step.
        std::vector<Complex> s{std::conj(z), 1.0, z};
        std::rotate(s.begin(), s.begin() + n % 3, s.end());
        spectra.push_back(s);
    }
    const auto t = track_branches(spectra, dt, ws);
    for (int n = 1; n <= 50; ++n) {
        const auto& l = t.spectra[n - 1].lambdas;
        EXPECT_GT(l[0].imag(), 0.0);
        EXPECT_LT(l[1].imag(), 0.0);
        EXPECT_NEAR(std::abs(l[2] - 1.0), 0.0, 1e-15);
    }
    EXPECT_THROW(track_branches(spectra, dt, 8.0), std::invalid_argument);
}

TEST(TrackBranches, CrossingMagnitudesFollowPhase) {
    // Two real-axis-free branches whose moduli cross at n = 5 while their phases stay apart.
    std::vector<std::vector<Complex>> spectra;
    for (int n = 1; n <= 10; ++n) {
        const Complex a = std::polar(0.9 - 0.04 * n, 0.3);
        const Complex b = std::polar(0.5 + 0.04 * n, -0.3);
        spectra.push_back(n % 2 ? std::vector<Complex>{a, b} : std::vector<Complex>{b, a});
    }
    const auto t = track_branches(spectra, 0.1);
    for (const auto& s : t.spectra) {
        EXPECT_NEAR(std::arg(s.lambdas[0]), 0.3, 1e-12);
        EXPECT_NEAR(std::arg(s.lambdas[1]), -0.3, 1e-12);
    }
}

TEST(TrackBranches, SeedLabels) {
    const Complex z(0.6, 0.2);
    const auto t = track_branches({{std::conj(z), 0.95, z}}, 0.1);
    EXPECT_EQ(t.spectra[0].lambdas[0], z);
    EXPECT_EQ(t.spectra[0].lambdas[1], std::conj(z));
    EXPECT_EQ(t.spectra[0].lambdas[2], Complex(0.95));
    // All real: the isolated pole is z.
    const auto r = track_branches({{0.5, 0.9, 0.88}}, 0.1);
    EXPECT_EQ(r.spectra[0].lambdas[2], Complex(0.5));
    EXPECT_EQ(r.spectra[0].lambdas[0], Complex(0.9));
    EXPECT_THROW(track_branches({{0.5, 0.9}, {0.5}}, 0.1), std::invalid_argument);
}
