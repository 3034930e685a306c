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

#ifndef SPECTTM_SPECTRAL_TTM_HPP
#define SPECTTM_SPECTRAL_TTM_HPP

#include "specttm/pauli.hpp"

#include <sstream>

namespace specttm {

using SpectrumSequence = std::vector<ChannelSpectrum>;  // element n-1 holds time step n

/// tau_n^alpha for alpha = 0..N-1 and n = 1..M; taus(alpha, n-1).
struct TransferTensorSpectra {
    CMatrix taus;
    double dt = 0.0;

    int axes() const { return static_cast<int>(taus.rows()); }
    int memory() const { return static_cast<int>(taus.cols()); }
    Complex operator()(int alpha, int n) const { return taus(alpha, n - 1); }
};

/// k_n^alpha dt^2 = tau_n^alpha - delta_{n,1}; rates(alpha, n-1).
struct KernelRates {
    CMatrix rates;
    double dt = 0.0;

    int axes() const { return static_cast<int>(rates.rows()); }
    int memory() const { return static_cast<int>(rates.cols()); }
};

/// Gamma_alpha(t_n) for n = 0..M, one column per axis (row 0 is zero).
struct GammaCurves {
    Matrix gamma;
    double dt = 0.0;
};

struct RhpResult {
    Matrix rates;     // gamma_alpha(t_n), rows n = 0..M
    Vector per_axis;  // I_alpha
    double total = 0.0;
};

inline SpectrumSequence magnitudes(const SpectrumSequence& seq) {
    SpectrumSequence out = seq;
    for (auto& s : out)
        for (auto& l : s.lambdas) l = std::abs(l);
    return out;
}

inline TransferTensorSpectra taus_from_lambdas(const SpectrumSequence& lambdas, int M) {
    if (M < 1) throw std::invalid_argument("memory length M must be >= 1");
    if (static_cast<int>(lambdas.size()) < M)
        throw std::invalid_argument("missing n=" + std::to_string(lambdas.size() + 1) + " in spectrum sequence");
    const int N = lambdas.front().size();
    for (int n = 1; n <= M; ++n) {
        const auto& s = lambdas[n - 1];
        if (s.size() != N) throw std::invalid_argument("axis count changes at n=" + std::to_string(n));
        if (s.time_index != 0 && s.time_index != n)
            throw std::invalid_argument("missing n=" + std::to_string(n) + " in spectrum sequence");
    }
    TransferTensorSpectra out;
    out.dt = lambdas.front().dt;
    out.taus = CMatrix::Zero(N, M);
    for (int a = 0; a < N; ++a)
        for (int n = 1; n <= M; ++n) {
            Complex t = lambdas[n - 1][a];
            for (int m = 1; m < n; ++m) t -= out.taus(a, n - m - 1) * lambdas[m - 1][a];
            out.taus(a, n - 1) = t;
        }
    return out;
}

/// lambda_n = sum_{m=0}^{n-1} tau_{n-m} lambda_m with lambda_0 = 1 and tau_j = 0 for j > M.
inline SpectrumSequence predict_lambdas(const TransferTensorSpectra& t, int horizon) {
    if (horizon < 1) throw std::invalid_argument("prediction horizon must be >= 1");
    const int N = t.axes();
    const int M = t.memory();
    std::vector<std::vector<Complex>> lam(N, std::vector<Complex>(horizon + 1, 0.0));
    for (int a = 0; a < N; ++a) {
        lam[a][0] = 1.0;
        for (int n = 1; n <= horizon; ++n) {
            Complex acc = 0.0;
            for (int m = std::max(0, n - M); m < n; ++m) acc += t.taus(a, n - m - 1) * lam[a][m];
            lam[a][n] = acc;
        }
    }
    SpectrumSequence out(horizon);
    for (int n = 1; n <= horizon; ++n) {
        out[n - 1].time_index = n;
        out[n - 1].dt = t.dt;
        for (int a = 0; a < N; ++a) out[n - 1].lambdas.push_back(lam[a][n]);
    }
    return out;
}

inline KernelRates kernel_rates(const TransferTensorSpectra& t) {
    if (!(t.dt > 0.0)) throw std::invalid_argument("kernel rates need dt > 0");
    KernelRates out;
    out.dt = t.dt;
    out.rates = t.taus;
    out.rates.col(0).array() -= 1.0;
    out.rates /= t.dt * t.dt;
    return out;
}

/// Gamma_alpha = 1/2 ln(|lambda_alpha| / (|lambda_beta| |lambda_eta|)) for one qubit.
inline GammaCurves gamma_integral(const SpectrumSequence& lambdas, double dt) {
    const int M = static_cast<int>(lambdas.size());
    GammaCurves out;
    out.dt = dt;
    out.gamma = Matrix::Zero(M + 1, 3);
    for (int n = 1; n <= M; ++n) {
        const auto& s = lambdas[n - 1];
        if (s.size() != 3) throw std::invalid_argument("Gamma integral is defined for one qubit (3 axes)");
        double logs[3];
        for (int a = 0; a < 3; ++a) {
            const double mag = std::abs(s[a]);
            if (!(mag > 0.0) || !std::isfinite(mag)) {
                std::ostringstream os;
                os << "vanishing eigenvalue at axis " << axis_name(a) << ", n=" << n;
                throw std::domain_error(os.str());
            }
            logs[a] = std::log(mag);
        }
        for (int a = 0; a < 3; ++a)
            out.gamma(n, a) = 0.5 * (logs[a] - logs[(a + 1) % 3] - logs[(a + 2) % 3]);
    }
    return out;
}

/// gamma by central differences (one-sided at the ends); I_alpha = sum over gamma < 0 of -gamma dt.
inline RhpResult rhp_measure(const Matrix& gamma_curves, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("RHP measure needs dt > 0");
    const int P = static_cast<int>(gamma_curves.rows());
    const int A = static_cast<int>(gamma_curves.cols());
    RhpResult out;
    out.rates = Matrix::Zero(P, A);
    out.per_axis = Vector::Zero(A);
    if (P < 2) return out;
    for (int a = 0; a < A; ++a) {
        for (int n = 0; n < P; ++n) {
            double g;
            if (n == 0) g = (gamma_curves(1, a) - gamma_curves(0, a)) / dt;
            else if (n == P - 1) g = (gamma_curves(P - 1, a) - gamma_curves(P - 2, a)) / dt;
            else g = (gamma_curves(n + 1, a) - gamma_curves(n - 1, a)) / (2.0 * dt);
            out.rates(n, a) = g;
            if (g < 0.0) out.per_axis(a) -= g * dt;
        }
    }
    out.total = out.per_axis.sum();
    return out;
}

inline RhpResult rhp_measure(const GammaCurves& g) { return rhp_measure(g.gamma, g.dt); }

enum class CorrelationForm {
    pauli_coefficient,    // k_alpha read as kernel eigenvalues: Re C = (k_a - k_b - k_c) / 8
    per_axis_eigenvalue,  // Re C_alpha = k_alpha / 4 applied to the eigenvalues directly
};

/// Re C_alpha(t) samples on t = 0, dt, ..., (M-1) dt; rows are time, columns axes.
struct CorrelationCurves {
    Vector t;
    Matrix re_c;
    Matrix im_kernel;  // imaginary part of the rates used, a consistency diagnostic
    CorrelationForm form = CorrelationForm::pauli_coefficient;
};

/// Weak-coupling correlation reconstruction. The n = 1 kernel sample covers half
/// an interval around t = 0 and is doubled.
inline CorrelationCurves reconstruct_correlation(const KernelRates& k,
                                                 CorrelationForm form = CorrelationForm::pauli_coefficient) {
    const int A = k.axes();
    const int M = k.memory();
    if (form == CorrelationForm::pauli_coefficient && A != 3)
        throw std::invalid_argument("Pauli-coefficient correlation form is one-qubit only");
    CorrelationCurves out;
    out.form = form;
    out.t = Vector(M);
    out.re_c = Matrix::Zero(M, A);
    out.im_kernel = Matrix::Zero(M, A);
    for (int n = 1; n <= M; ++n) {
        out.t(n - 1) = (n - 1) * k.dt;
        const double weight = n == 1 ? 2.0 : 1.0;
        for (int a = 0; a < A; ++a) {
            const double kr = k.rates(a, n - 1).real();
            double c;
            if (form == CorrelationForm::pauli_coefficient) {
                const double kb = k.rates((a + 1) % 3, n - 1).real();
                const double kc = k.rates((a + 2) % 3, n - 1).real();
                c = (kr - kb - kc) / 8.0;
            } else {
                c = kr / 4.0;
            }
            out.re_c(n - 1, a) = weight * c;
            out.im_kernel(n - 1, a) = k.rates(a, n - 1).imag();
        }
    }
    return out;
}

struct SpectrumSamples {
    Vector omega;
    Vector S;
    Vector J;
    std::vector<std::string> warnings;
};

/// S(w) = int e^{iwt} Re C(t) dt with even extension (trapezoid on t_n = n dt),
/// J(w) = 1/2 int e^{iwt} [C - C*] dt with C(-t) = C*(t).
inline SpectrumSamples spectral_density(const std::vector<Complex>& corr, double dt, const Vector& omega) {
    if (corr.empty()) throw std::invalid_argument("empty correlation curve");
    if (!(dt > 0.0)) throw std::invalid_argument("spectral density needs dt > 0");
    SpectrumSamples out;
    out.omega = omega;
    out.S = Vector::Zero(omega.size());
    out.J = Vector::Zero(omega.size());
    const double c0 = std::abs(corr.front());
    if (std::abs(corr.back()) > 1e-4 * c0) {
        std::ostringstream os;
        os << "correlation tail |C(t_end)|=" << std::abs(corr.back()) << " exceeds 1e-4 C(0); spectrum is truncated";
        out.warnings.push_back(os.str());
    }
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        double s = corr.front().real();
        double j = 0.0;
        for (size_t n = 1; n < corr.size(); ++n) {
            const double t = static_cast<double>(n) * dt;
            s += 2.0 * corr[n].real() * std::cos(omega(i) * t);
            j -= 2.0 * corr[n].imag() * std::sin(omega(i) * t);
        }
        out.S(i) = dt * s;
        out.J(i) = dt * j;
    }
    return out;
}

}  // namespace specttm

#endif  // SPECTTM_SPECTRAL_TTM_HPP
