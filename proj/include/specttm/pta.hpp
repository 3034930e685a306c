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

#ifndef SPECTTM_PTA_HPP
#define SPECTTM_PTA_HPP

#include "specttm/spectral_ttm.hpp"
#include "specttm/twirl.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <limits>
#include <memory>

namespace specttm {

/// Eigenvalues of the twirled maps, axis order of the rotated frame.
inline SpectrumSequence twirled_spectra(const std::vector<PauliTransferMatrix>& maps, const TwirlBasis& basis,
                                        double dt) {
    SpectrumSequence out;
    for (size_t n = 0; n < maps.size(); ++n) {
        const Eigen::Vector3d d = twirled_eigenvalues(maps[n], basis);
        ChannelSpectrum s;
        s.time_index = static_cast<int>(n) + 1;
        s.dt = dt;
        for (int a = 0; a < 3; ++a) s.lambdas.emplace_back(d(a), 0.0);
        out.push_back(std::move(s));
    }
    return out;
}

/// RHP measure of the twirled maps; NaN when a twirled eigenvalue vanishes.
inline double twirled_rhp(const std::vector<PauliTransferMatrix>& maps, const TwirlBasis& basis, double dt) {
    try {
        return rhp_measure(gamma_integral(twirled_spectra(maps, basis, dt), dt)).total;
    } catch (const std::domain_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

/// Fraction of the squared Frobenius weight of R_n that sits on the rotated diagonal.
inline double twirled_diagonal_weight(const std::vector<PauliTransferMatrix>& maps, const TwirlBasis& basis) {
    double kept = 0.0, total = 0.0;
    for (const auto& m : maps) {
        kept += twirled_eigenvalues(m, basis).squaredNorm();
        total += m.unital_block().squaredNorm();
    }
    return total > 0.0 ? kept / total : 1.0;
}

enum class SearchObjective { rhp, diagonal_weight };

inline const char* objective_name(SearchObjective o) { return o == SearchObjective::rhp ? "rhp" : "diagonal_weight"; }

struct TwirlEvaluation {
    std::array<double, 3> angles;
    double value;
};

struct TwirlSearchResult {
    TwirlBasis best_basis;
    double best_value = 0.0;     // objective at the optimum
    double best_rhp = 0.0;       // RHP measure at the optimum
    double baseline_rhp = 0.0;   // RHP measure at theta = 0
    bool flat = false;
    bool refined = false;
    SearchObjective objective = SearchObjective::rhp;
    std::vector<TwirlEvaluation> evaluation_log;
};

namespace detail {

struct SearchContext {
    const std::vector<PauliTransferMatrix>* maps;
    double dt;
    SearchObjective objective;
    std::vector<TwirlEvaluation>* log;
};

inline double objective_value(const SearchContext& c, const TwirlBasis& b) {
    const double v = c.objective == SearchObjective::rhp ? twirled_rhp(*c.maps, b, c.dt)
                                                         : twirled_diagonal_weight(*c.maps, b);
    c.log->push_back({b.angles, v});
    return v;
}

inline double simplex_cost(const gsl_vector* x, void* params) {
    const auto& c = *static_cast<SearchContext*>(params);
    const TwirlBasis b(gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2));
    const double v = objective_value(c, b);
    return std::isfinite(v) ? -v : 1e300;
}

}  // namespace detail

/// Grid search over [0, pi)^3 followed by Nelder-Mead refinement of the best grid point.
/// Ties on the grid go to the lexicographically smallest angles.
inline TwirlSearchResult optimal_basis_search(const std::vector<PauliTransferMatrix>& maps, double dt,
                                              int grid_density = 12, bool refine = true,
                                              SearchObjective objective = SearchObjective::rhp) {
    if (grid_density < 1) throw std::invalid_argument("grid density must be >= 1");
    if (maps.empty()) throw std::invalid_argument("basis search needs at least one map");
    for (const auto& m : maps)
        if (m.qubit_count() != 1) throw std::invalid_argument("basis search is one-qubit only");

    TwirlSearchResult out;
    out.objective = objective;
    detail::SearchContext ctx{&maps, dt, objective, &out.evaluation_log};

    const double step = std::numbers::pi / grid_density;
    double best = -std::numeric_limits<double>::infinity();
    TwirlBasis best_basis;
    double max_abs = 0.0;
    for (int i = 0; i < grid_density; ++i)
        for (int j = 0; j < grid_density; ++j)
            for (int k = 0; k < grid_density; ++k) {
                const TwirlBasis b(i * step, j * step, k * step);
                const double v = detail::objective_value(ctx, b);
                if (!std::isfinite(v)) continue;
                max_abs = std::max(max_abs, std::abs(v));
                if (v > best + 1e-12) {
                    best = v;
                    best_basis = b;
                }
            }
    out.baseline_rhp = twirled_rhp(maps, TwirlBasis{}, dt);
    if (!std::isfinite(best) || (objective == SearchObjective::rhp && max_abs <= 1e-14)) {
        out.flat = true;
        out.best_basis = TwirlBasis{};
        out.best_value = 0.0;
        out.best_rhp = std::isfinite(out.baseline_rhp) ? out.baseline_rhp : 0.0;
        return out;
    }

    if (refine) {
        gsl_set_error_handler_off();
        gsl_multimin_function f{&detail::simplex_cost, 3, &ctx};
        std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(3), &gsl_vector_free);
        std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(3), &gsl_vector_free);
        for (int a = 0; a < 3; ++a) {
            gsl_vector_set(x.get(), a, best_basis.angles[a]);
            gsl_vector_set(ss.get(), a, 0.5 * step);
        }
        std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
            gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3), &gsl_multimin_fminimizer_free);
        gsl_multimin_fminimizer_set(s.get(), &f, x.get(), ss.get());
        for (int iter = 0; iter < 2000; ++iter) {
            if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-4) == GSL_SUCCESS) break;
        }
        const double v = -gsl_multimin_fminimizer_minimum(s.get());
        if (std::isfinite(v) && v > best + 1e-15) {
            const gsl_vector* xm = gsl_multimin_fminimizer_x(s.get());
            best = v;
            best_basis = TwirlBasis(gsl_vector_get(xm, 0), gsl_vector_get(xm, 1), gsl_vector_get(xm, 2));
            out.refined = true;
        }
    }
    out.best_basis = best_basis;
    out.best_value = best;
    out.best_rhp = objective == SearchObjective::rhp ? best : twirled_rhp(maps, best_basis, dt);
    return out;
}

/// Integrated |Gamma_a - Gamma_exact| dt, minimized over axis permutations of the exact curves.
inline double gamma_deviation(const Matrix& gamma, const Matrix& exact, double dt) {
    if (gamma.rows() != exact.rows() || gamma.cols() != 3 || exact.cols() != 3)
        throw std::invalid_argument("Gamma curves must share shape (M+1) x 3");
    std::array<int, 3> perm{0, 1, 2};
    double best = std::numeric_limits<double>::infinity();
    do {
        double acc = 0.0;
        for (int a = 0; a < 3; ++a) acc += (gamma.col(a) - exact.col(perm[a])).cwiseAbs().sum();
        best = std::min(best, acc * dt);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace specttm

#endif  // SPECTTM_PTA_HPP
