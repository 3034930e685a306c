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

#ifndef SPECTTM_MATRIX_PENCIL_HPP
#define SPECTTM_MATRIX_PENCIL_HPP

#include "specttm/assignment.hpp"
#include "specttm/pauli.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>

namespace specttm {

enum class RankRule { fixed, threshold };

struct PencilConfig {
    int L = 0;  // 0 selects floor(K/2)
    RankRule rank_rule = RankRule::fixed;
    double rel = 1e-8;
};

struct PoleEstimate {
    std::vector<Complex> poles;
    std::vector<Complex> amplitudes;
    double residual = 0.0;
    int samples = 0;  // K of the fitted series
    bool rank_deficient = false;
    std::vector<double> singular_values;
    std::vector<std::string> diagnostics;

    int size() const { return static_cast<int>(poles.size()); }
};

namespace detail {

inline void sort_poles(std::vector<Complex>& poles, std::vector<Complex>& amps) {
    std::vector<int> order(poles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        const double ma = std::abs(poles[a]);
        const double mb = std::abs(poles[b]);
        if (std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb))) return ma > mb;
        return std::arg(poles[a]) < std::arg(poles[b]);
    });
    std::vector<Complex> p, a;
    for (int i : order) {
        p.push_back(poles[i]);
        a.push_back(amps.empty() ? Complex{} : amps[i]);
    }
    poles = std::move(p);
    amps = std::move(a);
}

}  // namespace detail

/// Least-squares amplitudes for g(k) = sum_j A_j z_j^k, k = 1..K, and the max residual.
inline std::pair<std::vector<Complex>, double> fit_amplitudes(const std::vector<double>& g,
                                                              const std::vector<Complex>& poles) {
    const int K = static_cast<int>(g.size());
    const int r = static_cast<int>(poles.size());
    CVector rhs(K);
    for (int k = 0; k < K; ++k) rhs(k) = g[k];
    if (r == 0) return {{}, rhs.cwiseAbs().maxCoeff()};
    CMatrix v(K, r);
    for (int j = 0; j < r; ++j) {
        Complex z = poles[j];
        for (int k = 0; k < K; ++k) {
            v(k, j) = z;
            z *= poles[j];
        }
    }
    const CVector a = v.completeOrthogonalDecomposition().solve(rhs);
    const double residual = (v * a - rhs).cwiseAbs().maxCoeff();
    return {std::vector<Complex>(a.data(), a.data() + r), residual};
}

/// Matrix-pencil estimate of the poles of g(1..K).
inline PoleEstimate estimate_poles(const std::vector<double>& g, int expected_count, const PencilConfig& cfg = {}) {
    const int K = static_cast<int>(g.size());
    const int N = expected_count;
    if (N < 1) throw std::invalid_argument("expected pole count must be >= 1");
    if (K < 2 * N - 2) throw std::invalid_argument("K below 2N-2=" + std::to_string(2 * N - 2));
    for (double v : g)
        if (!std::isfinite(v)) throw std::invalid_argument("signal contains non-finite values");
    const int L = cfg.L > 0 ? cfg.L : K / 2;
    if (cfg.rank_rule == RankRule::fixed && (L < N || L > K - N)) {
        throw std::invalid_argument("pencil length L=" + std::to_string(L) + " outside [N, K-N] = [" +
                                    std::to_string(N) + ", " + std::to_string(K - N) + "]; need K >= 2N=" +
                                    std::to_string(2 * N));
    }
    if (L < 1 || L > K - 1) throw std::invalid_argument("pencil length L=" + std::to_string(L) + " outside [1, K-1]");

    Matrix y(K - L, L + 1);
    for (int i = 0; i < K - L; ++i)
        for (int j = 0; j <= L; ++j) y(i, j) = g[i + j];
    Eigen::JacobiSVD<Matrix> svd(y, Eigen::ComputeThinV);
    const Vector sv = svd.singularValues();

    PoleEstimate out;
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    // The fixed rule only discards directions at the rounding floor; rel applies to the threshold rule.
    const double floor_tol = cfg.rank_rule == RankRule::fixed
                                 ? 16.0 * std::numeric_limits<double>::epsilon() * std::max(K - L, L + 1)
                                 : cfg.rel;
    int numeric_rank = 0;
    if (sv.size() > 0 && sv(0) > 0.0)
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > floor_tol * sv(0)) ++numeric_rank;
    int r = cfg.rank_rule == RankRule::fixed ? std::min(N, numeric_rank) : std::min(numeric_rank, L);
    if (cfg.rank_rule == RankRule::fixed && r < N) {
        out.rank_deficient = true;
        std::ostringstream os;
        os << "numerical rank " << numeric_rank << " below expected " << N;
        out.diagnostics.push_back(os.str());
    }
    if (r == 0) {
        out.samples = K;
        out.residual = fit_amplitudes(g, {}).second;
        return out;
    }
    const Matrix v = svd.matrixV().leftCols(r);
    const Matrix v1t = v.topRows(L).transpose();
    const Matrix v2t = v.bottomRows(L).transpose();
    const Matrix a = v2t * v1t.completeOrthogonalDecomposition().pseudoInverse();
    Eigen::EigenSolver<Matrix> es(a, false);
    const CVector z = es.eigenvalues();
    out.poles.assign(z.data(), z.data() + z.size());
    out.samples = K;
    auto [amps, residual] = fit_amplitudes(g, out.poles);
    out.amplitudes = std::move(amps);
    out.residual = residual;
    detail::sort_poles(out.poles, out.amplitudes);
    return out;
}

/// Expands a rank-deficient estimate to exactly N poles. Each signal axis
/// contributes an amplitude close to `unit_amplitude`, so pole j is repeated
/// round(|A_j| / unit_amplitude) times; poles that stay unresolved become 0 and are flagged.
inline PoleEstimate resolve_multiplicity(const PoleEstimate& est, int N, double unit_amplitude = 1.0) {
    if (est.size() == N) return est;
    if (!(unit_amplitude > 0.0)) throw std::invalid_argument("unit amplitude must be > 0");
    PoleEstimate out = est;
    out.poles.clear();
    out.amplitudes.clear();
    const int r = est.size();
    std::vector<int> mult(r, 1);
    std::vector<double> share(r, 1.0);
    int used = 0;
    for (int j = 0; j < r; ++j) {
        share[j] = std::abs(est.amplitudes[j]) / unit_amplitude;
        mult[j] = std::max(1, static_cast<int>(std::lround(share[j])));
        used += mult[j];
    }
    while (used > N) {
        int pick = -1;
        for (int j = 0; j < r; ++j)
            if (mult[j] > 1 && (pick < 0 || share[j] - mult[j] < share[pick] - mult[pick])) pick = j;
        if (pick < 0) break;
        --mult[pick];
        --used;
    }
    for (int j = 0; j < r && static_cast<int>(out.poles.size()) < N; ++j)
        for (int c = 0; c < mult[j] && static_cast<int>(out.poles.size()) < N; ++c) {
            out.poles.push_back(est.poles[j]);
            out.amplitudes.push_back(est.amplitudes[j] / static_cast<double>(mult[j]));
        }
    if (static_cast<int>(out.poles.size()) < N) {
        out.diagnostics.push_back(std::to_string(N - out.poles.size()) + " pole(s) unresolved, set to 0");
        while (static_cast<int>(out.poles.size()) < N) {
            out.poles.emplace_back(0.0, 0.0);
            out.amplitudes.emplace_back(0.0, 0.0);
        }
    }
    return out;
}

struct SpamCancellation {
    std::vector<Complex> lambdas;    // one per single-run pole, in single-run order
    std::vector<int> pairing;        // index into the double-run poles, -1 when dropped
    std::vector<std::string> diagnostics;
};

namespace detail {

inline CMatrix powers(const std::vector<Complex>& poles, const std::vector<int>& order, int K) {
    CMatrix v(K, order.size());
    for (size_t j = 0; j < order.size(); ++j) {
        const Complex z = poles[order[j]];
        Complex zk = z;
        for (int k = 0; k < K; ++k, zk *= z) v(k, j) = zk;
    }
    return v;
}

// Both runs share their amplitudes. Residual of one amplitude vector fitted to
// both reconstructed signals when single pole i is paired with double pole order[i].
inline double joint_residual(const PoleEstimate& single, const PoleEstimate& dual, const std::vector<int>& order,
                             int K) {
    const int n = single.size();
    std::vector<int> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    const CMatrix vs = powers(single.poles, identity, K);
    const CMatrix vd = powers(dual.poles, order, K);
    CVector ad(n);
    for (int i = 0; i < n; ++i) ad(i) = dual.amplitudes[order[i]];
    CMatrix stacked(2 * K, n);
    stacked.topRows(K) = vs;
    stacked.bottomRows(K) = vd;
    CVector target(2 * K);
    target.head(K) = vs * Eigen::Map<const CVector>(single.amplitudes.data(), n);
    target.tail(K) = vd * ad;
    // Unit columns, so that fast-decaying poles are not cut as numerically rank deficient.
    for (int j = 0; j < n; ++j) {
        const double norm = stacked.col(j).norm();
        if (norm > 0.0) stacked.col(j) /= norm;
    }
    const CVector a = stacked.completeOrthogonalDecomposition().solve(target);
    return (stacked * a - target).squaredNorm();
}

}  // namespace detail

/// lambda = p^2 / q for single-run pole p paired with double-run pole q.
/// The pairing minimizes sum |p/q - 1|^2, a squared, scale-free cost that keeps SPAM-split
/// multiplets in order where an L1 cost ties. Strong SPAM can reorder distinct poles, so with up
/// to four poles a pairing is first ruled out when its shared-amplitude residual is far above the best.
inline SpamCancellation cancel_spam(const PoleEstimate& single, const PoleEstimate& dual) {
    const int n = single.size();
    if (dual.size() != n)
        throw std::invalid_argument("single and double estimates carry " + std::to_string(n) + " and " +
                                    std::to_string(dual.size()) + " poles");
    constexpr double kTiny = 1e-10;
    constexpr double kBlocked = 1e6;
    Eigen::MatrixXd cost(n, n);
    bool blocked = false;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Complex p = single.poles[i];
            const Complex q = dual.poles[j];
            if (std::abs(q) < kTiny) {
                // Blow-up pairs are a last resort and take the smallest single-run pole.
                cost(i, j) = std::abs(p) < kTiny ? 0.0 : kBlocked * (1.0 + std::abs(p));
                blocked = true;
                continue;
            }
            const double c = std::abs(p) < kTiny ? std::norm(p * p / q - p) : std::norm(p / q - 1.0);
            cost(i, j) = std::min(c, 0.5 * kBlocked);
        }
    SpamCancellation out;
    out.pairing = min_cost_assignment(cost);
    const bool with_amplitudes = !blocked && n <= 4 && static_cast<int>(single.amplitudes.size()) == n &&
                                 static_cast<int>(dual.amplitudes.size()) == n;
    if (with_amplitudes) {
        const int K = std::max({single.samples, dual.samples, 2 * n});
        double scale = 0.0;
        for (const auto* e : {&single, &dual})
            for (int i = 0; i < n; ++i)
                scale = std::max(scale, std::abs(e->amplitudes[i]) * std::max(1.0, std::abs(e->poles[i])));
        const double floor = std::max({single.residual, dual.residual, 1e-12 * scale});
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<std::pair<std::vector<int>, double>> perms;
        double best_r = std::numeric_limits<double>::infinity();
        do {
            const double r = detail::joint_residual(single, dual, order, K);
            perms.emplace_back(order, r);
            best_r = std::min(best_r, r);
        } while (std::next_permutation(order.begin(), order.end()));
        // Amplitudes of close poles are poorly determined, so only a large excess counts.
        const double tol = std::max(1e6 * best_r, 4.0 * K * floor * floor);
        double best_c = std::numeric_limits<double>::infinity();
        for (const auto& [perm, r] : perms) {
            if (r > tol) continue;
            double c = 0.0;
            for (int i = 0; i < n; ++i) c += cost(i, perm[i]);
            if (c < best_c) {
                best_c = c;
                out.pairing = perm;
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        const Complex p = single.poles[i];
        const Complex q = dual.poles[out.pairing[i]];
        if (std::abs(q) < kTiny) {
            std::ostringstream os;
            os << "pole " << i << " dropped: double-run pole |q|=" << std::abs(q) << " below 1e-10";
            out.diagnostics.push_back(os.str());
            out.lambdas.emplace_back(0.0, 0.0);
            out.pairing[i] = -1;
            continue;
        }
        out.lambdas.push_back(p * p / q);
    }
    return out;
}

struct BranchTracking {
    std::vector<ChannelSpectrum> spectra;  // labelled, n = 1..M
    std::vector<std::string> log;
};

namespace detail {

/// Initial labels for one qubit: conjugate pair -> (x: positive phase, y), real pole -> z;
/// all real -> the most isolated pole is z and the rest are x, y in descending order.
inline std::vector<int> seed_labels(const std::vector<Complex>& p) {
    const int n = static_cast<int>(p.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (n != 3) return order;
    constexpr double kImag = 1e-12;
    int top = 0;
    for (int i = 1; i < 3; ++i)
        if (p[i].imag() > p[top].imag()) top = i;
    if (p[top].imag() > kImag) {
        int partner = -1;
        for (int i = 0; i < 3; ++i)
            if (i != top && (partner < 0 || std::abs(p[i] - std::conj(p[top])) < std::abs(p[partner] - std::conj(p[top]))))
                partner = i;
        const int rest = 3 - top - partner;
        return {top, partner, rest};
    }
    int iso = 0;
    double best = -1.0;
    for (int i = 0; i < 3; ++i) {
        double d = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 3; ++j)
            if (j != i) d = std::min(d, std::abs(p[i] - p[j]));
        if (d > best + 1e-15) {
            best = d;
            iso = i;
        }
    }
    std::vector<int> others;
    for (int i = 0; i < 3; ++i)
        if (i != iso) others.push_back(i);
    if (p[others[1]].real() > p[others[0]].real()) std::swap(others[0], others[1]);
    return {others[0], others[1], iso};
}

inline double angle_gap(Complex a, Complex b) {
    if (std::abs(a) == 0.0 || std::abs(b) == 0.0) return 0.0;
    return std::abs(std::arg(a / b));
}

}  // namespace detail

/// Assigns stable axis labels across n by extrapolated nearest-neighbour matching.
/// Squared distances keep real poles in order when all of them move the same way.
inline BranchTracking track_branches(const std::vector<std::vector<Complex>>& spectra, double dt,
                                     std::optional<double> omega_hint = std::nullopt) {
    if (omega_hint && 2.0 * std::abs(*omega_hint) * dt >= std::numbers::pi)
        throw std::invalid_argument("phase step 2*omega_s*dt must stay below pi");
    BranchTracking out;
    if (spectra.empty()) return out;
    const int N = static_cast<int>(spectra.front().size());
    for (const auto& s : spectra)
        if (static_cast<int>(s.size()) != N) throw std::invalid_argument("pole lists differ in length across n");

    std::vector<std::vector<Complex>> labelled;
    {
        const auto seed = detail::seed_labels(spectra.front());
        std::vector<Complex> first(N);
        for (int a = 0; a < N; ++a) first[a] = spectra.front()[seed[a]];
        labelled.push_back(first);
    }
    for (size_t n = 1; n < spectra.size(); ++n) {
        const auto& prev = labelled.back();
        std::vector<Complex> pred = prev;
        if (labelled.size() >= 2)
            for (int a = 0; a < N; ++a) pred[a] = 2.0 * prev[a] - labelled[labelled.size() - 2][a];
        const auto& cand = spectra[n];
        Eigen::MatrixXd cost(N, N);
        for (int a = 0; a < N; ++a)
            for (int c = 0; c < N; ++c) cost(a, c) = std::norm(pred[a] - cand[c]);
        auto pick = min_cost_assignment(cost);
        // Near-ties between two labels are settled by phase continuity.
        for (int a = 0; a < N; ++a)
            for (int b = a + 1; b < N; ++b) {
                const double keep = cost(a, pick[a]) + cost(b, pick[b]);
                const double swap = cost(a, pick[b]) + cost(b, pick[a]);
                if (std::abs(keep - swap) > 1e-12 || cand[pick[a]] == cand[pick[b]]) continue;
                const double pk = detail::angle_gap(pred[a], cand[pick[a]]) + detail::angle_gap(pred[b], cand[pick[b]]);
                const double ps = detail::angle_gap(pred[a], cand[pick[b]]) + detail::angle_gap(pred[b], cand[pick[a]]);
                if (ps < pk) std::swap(pick[a], pick[b]);
                std::ostringstream os;
                os << "n=" << n + 1 << ": ambiguous assignment between labels " << a << " and " << b
                   << " resolved by phase";
                out.log.push_back(os.str());
            }
        std::vector<Complex> next(N);
        for (int a = 0; a < N; ++a) next[a] = cand[pick[a]];
        labelled.push_back(next);
    }
    for (size_t n = 0; n < labelled.size(); ++n) {
        ChannelSpectrum s;
        s.lambdas = labelled[n];
        s.time_index = static_cast<int>(n) + 1;
        s.dt = dt;
        out.spectra.push_back(std::move(s));
    }
    return out;
}

struct RecoveredSpectra {
    std::vector<ChannelSpectrum> spectra;  // tracked, n = 1..M
    std::vector<std::string> diagnostics;
};

/// Per-n pole extraction from single and double signal rows, SPAM cancellation and labelling.
/// `signal_rows(n)` for n = 1..M returns the single and double rows.
template <class Rows>
RecoveredSpectra recover_spectra(int M, int N, double dt, Rows&& signal_rows, const PencilConfig& cfg = {},
                                 std::optional<double> omega_hint = std::nullopt) {
    RecoveredSpectra out;
    std::vector<std::vector<Complex>> raw;
    for (int n = 1; n <= M; ++n) {
        const auto [single_row, double_row] = signal_rows(n);
        auto s_raw = estimate_poles(single_row, N, cfg);
        auto d_raw = estimate_poles(double_row, N, cfg);
        // A multiplet resolved in one run but merged in the other would cancel against the wrong poles.
        if (s_raw.size() != d_raw.size()) {
            const int r = std::min(s_raw.size(), d_raw.size());
            std::ostringstream os;
            os << "n=" << n << ": ranks " << s_raw.size() << " (single) and " << d_raw.size()
               << " (double) differ; both runs fitted with " << r << " poles";
            out.diagnostics.push_back(os.str());
            if (s_raw.size() > r) s_raw = estimate_poles(single_row, r, cfg);
            if (d_raw.size() > r) d_raw = estimate_poles(double_row, r, cfg);
        }
        const auto s = resolve_multiplicity(s_raw, N);
        const auto d = resolve_multiplicity(d_raw, N);
        for (const auto& m : s.diagnostics) out.diagnostics.push_back("n=" + std::to_string(n) + " single: " + m);
        for (const auto& m : d.diagnostics) out.diagnostics.push_back("n=" + std::to_string(n) + " double: " + m);
        auto c = cancel_spam(s, d);
        for (const auto& m : c.diagnostics) out.diagnostics.push_back("n=" + std::to_string(n) + ": " + m);
        raw.push_back(std::move(c.lambdas));
    }
    auto tracked = track_branches(raw, dt, omega_hint);
    out.spectra = std::move(tracked.spectra);
    for (auto& m : tracked.log) out.diagnostics.push_back(std::move(m));
    return out;
}

}  // namespace specttm

#endif  // SPECTTM_MATRIX_PENCIL_HPP
