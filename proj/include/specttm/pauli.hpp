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

#ifndef SPECTTM_PAULI_HPP
#define SPECTTM_PAULI_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace specttm {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr int kMaxQubits = 3;

/// Single-qubit axis label. Index i corresponds to Pauli index i+1.
enum class Axis { x = 0, y = 1, z = 2 };

inline const char* axis_name(Axis a) {
    switch (a) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

inline const char* axis_name(int a) { return axis_name(static_cast<Axis>(a)); }

/// Number of Pauli strings (d^2) on n qubits.
inline int pauli_count(int qubits) { return 1 << (2 * qubits); }

inline void check_qubit_count(int qubits) {
    if (qubits < 1 || qubits > kMaxQubits) {
        throw std::invalid_argument("qubit count " + std::to_string(qubits) +
                                    " outside [1, " + std::to_string(kMaxQubits) + "]");
    }
}

/// An n-qubit Pauli operator P_mu.
///
/// Index ordering is tensor-lexicographic with the last tensor factor as the
/// least significant base-4 digit and per-qubit digits 0:I 1:X 2:Y 3:Z, so
/// index 1 is I..IX and index d^2-1 is Z..Z.
class PauliString {
public:
    PauliString(int index, int qubit_count) : index_(index), qubits_(qubit_count) {
        check_qubit_count(qubit_count);
        if (index < 0 || index >= pauli_count(qubit_count)) {
            throw std::invalid_argument("Pauli index " + std::to_string(index) +
                                        " outside [0, " +
                                        std::to_string(pauli_count(qubit_count) - 1) + "]");
        }
    }

    int index() const { return index_; }
    int qubit_count() const { return qubits_; }
    int dimension() const { return 1 << qubits_; }
    bool is_identity() const { return index_ == 0; }

    /// Per-qubit digit; qubit 0 is the leftmost tensor factor.
    int digit(int qubit) const { return (index_ >> (2 * (qubits_ - 1 - qubit))) & 3; }

    bool commutes_with(const PauliString& other) const {
        if (other.qubits_ != qubits_) throw std::invalid_argument("qubit count mismatch");
        int anti = 0;
        for (int q = 0; q < qubits_; ++q) {
            const int a = digit(q);
            const int b = other.digit(q);
            if (a != 0 && b != 0 && a != b) ++anti;
        }
        return anti % 2 == 0;
    }

    CMatrix matrix() const {
        CMatrix out = CMatrix::Ones(1, 1);
        for (int q = 0; q < qubits_; ++q) {
            const CMatrix f = single(digit(q));
            CMatrix next(out.rows() * 2, out.cols() * 2);
            for (Eigen::Index i = 0; i < out.rows(); ++i)
                for (Eigen::Index j = 0; j < out.cols(); ++j)
                    next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
            out = std::move(next);
        }
        return out;
    }

    static CMatrix single(int digit) {
        const Complex i{0.0, 1.0};
        CMatrix m(2, 2);
        switch (digit) {
            case 0: m << 1, 0, 0, 1; break;
            case 1: m << 0, 1, 1, 0; break;
            case 2: m << 0, -i, i, 0; break;
            case 3: m << 1, 0, 0, -1; break;
            default: throw std::invalid_argument("Pauli digit outside [0,3]");
        }
        return m;
    }

private:
    int index_;
    int qubits_;
};

/// Matrices of all d^2 Pauli strings, in index order.
inline std::vector<CMatrix> pauli_basis(int qubits) {
    check_qubit_count(qubits);
    std::vector<CMatrix> out;
    out.reserve(pauli_count(qubits));
    for (int mu = 0; mu < pauli_count(qubits); ++mu) out.push_back(PauliString(mu, qubits).matrix());
    return out;
}

/// +1 / -1 commutation sign table, sign(a, b) = +1 iff [P_a, P_b] = 0.
inline Matrix commutation_signs(int qubits) {
    const int n = pauli_count(qubits);
    Matrix w(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            w(a, b) = PauliString(a, qubits).commutes_with(PauliString(b, qubits)) ? 1.0 : -1.0;
    return w;
}

/// Real d^2 x d^2 Pauli transfer matrix, normalized so that the identity
/// channel maps to the identity matrix: S_{mu nu} = Tr[P_mu L(P_nu)] / d.
class PauliTransferMatrix {
public:
    PauliTransferMatrix() : PauliTransferMatrix(Matrix::Identity(4, 4), 1) {}

    PauliTransferMatrix(Matrix s, int qubit_count) : s_(std::move(s)), qubits_(qubit_count) {
        check_qubit_count(qubit_count);
        const int n = pauli_count(qubit_count);
        if (s_.rows() != n || s_.cols() != n) {
            throw std::invalid_argument("PTM must be " + std::to_string(n) + "x" +
                                        std::to_string(n) + " for " +
                                        std::to_string(qubit_count) + " qubit(s)");
        }
    }

    static PauliTransferMatrix identity(int qubits = 1) {
        check_qubit_count(qubits);
        return {Matrix::Identity(pauli_count(qubits), pauli_count(qubits)), qubits};
    }

    const Matrix& matrix() const { return s_; }
    Matrix& matrix() { return s_; }
    int qubit_count() const { return qubits_; }
    int size() const { return static_cast<int>(s_.rows()); }
    double operator()(int mu, int nu) const { return s_(mu, nu); }
    double& operator()(int mu, int nu) { return s_(mu, nu); }

    /// The (d^2-1) x (d^2-1) block acting on traceless components.
    Matrix unital_block() const { return s_.bottomRightCorner(size() - 1, size() - 1); }

    bool is_trace_preserving(double tol = 1e-12) const {
        if (std::abs(s_(0, 0) - 1.0) > tol) return false;
        return s_.row(0).tail(size() - 1).cwiseAbs().maxCoeff() <= tol;
    }

    bool is_unital(double tol = 1e-12) const {
        return s_.col(0).tail(size() - 1).cwiseAbs().maxCoeff() <= tol;
    }

    double max_off_diagonal() const {
        Matrix off = s_;
        off.diagonal().setZero();
        return off.cwiseAbs().maxCoeff();
    }

private:
    Matrix s_;
    int qubits_;
};

using ChannelAction = std::function<CMatrix(const CMatrix&)>;

inline PauliTransferMatrix ptm_from_superoperator(const ChannelAction& channel, int qubits) {
    const auto basis = pauli_basis(qubits);
    const int n = static_cast<int>(basis.size());
    const int d = 1 << qubits;
    Matrix s(n, n);
    for (int nu = 0; nu < n; ++nu) {
        const CMatrix out = channel(basis[nu]);
        if (out.rows() != d || out.cols() != d) {
            throw std::invalid_argument("channel output is " + std::to_string(out.rows()) + "x" +
                                        std::to_string(out.cols()) + ", expected " +
                                        std::to_string(d) + "x" + std::to_string(d));
        }
        for (int mu = 0; mu < n; ++mu) s(mu, nu) = (basis[mu] * out).trace().real() / d;
    }
    return {std::move(s), qubits};
}

inline PauliTransferMatrix unitary_ptm(const CMatrix& u) {
    const int d = static_cast<int>(u.rows());
    const int qubits = static_cast<int>(std::lround(std::log2(d)));
    return ptm_from_superoperator([&](const CMatrix& x) -> CMatrix { return u * x * u.adjoint(); },
                                  qubits);
}

inline PauliTransferMatrix kraus_ptm(const std::vector<CMatrix>& kraus) {
    if (kraus.empty()) throw std::invalid_argument("empty Kraus set");
    const int d = static_cast<int>(kraus.front().rows());
    const int qubits = static_cast<int>(std::lround(std::log2(d)));
    return ptm_from_superoperator(
        [&](const CMatrix& x) -> CMatrix {
            CMatrix acc = CMatrix::Zero(d, d);
            for (const auto& k : kraus) acc += k * x * k.adjoint();
            return acc;
        },
        qubits);
}

/// Coefficients f_alpha of a Pauli map rho -> sum_alpha f_alpha P_alpha rho P_alpha.
struct PauliChannelSpec {
    std::vector<double> f;

    int qubit_count() const {
        for (int q = 1; q <= kMaxQubits; ++q)
            if (static_cast<int>(f.size()) == pauli_count(q)) return q;
        throw std::invalid_argument("Pauli channel needs 4^n coefficients, got " +
                                    std::to_string(f.size()));
    }
    bool is_normalized(double tol = 1e-12) const {
        return std::abs(std::accumulate(f.begin(), f.end(), 0.0) - 1.0) <= tol;
    }
    bool is_physical(double tol = 1e-12) const {
        for (double v : f)
            if (v < -tol) return false;
        return is_normalized(tol);
    }
    static PauliChannelSpec identity(int qubits = 1) {
        PauliChannelSpec s{std::vector<double>(pauli_count(qubits), 0.0)};
        s.f[0] = 1.0;
        return s;
    }
};

/// Eigenvalues lambda_alpha (alpha = 1..d^2-1) of a channel at one time step.
struct ChannelSpectrum {
    std::vector<Complex> lambdas;
    int time_index = 0;
    double dt = 0.0;

    int size() const { return static_cast<int>(lambdas.size()); }
    Complex operator[](int alpha) const { return lambdas.at(alpha); }
};

inline ChannelSpectrum eigenvalues_from_f(const PauliChannelSpec& spec) {
    const int qubits = spec.qubit_count();
    if (!spec.is_normalized()) throw std::invalid_argument("Pauli coefficients must sum to 1");
    const Matrix w = commutation_signs(qubits);
    const Vector f = Eigen::Map<const Vector>(spec.f.data(), static_cast<Eigen::Index>(spec.f.size()));
    const Vector lam = w * f;
    ChannelSpectrum out;
    for (Eigen::Index a = 1; a < lam.size(); ++a) out.lambdas.emplace_back(lam(a), 0.0);
    return out;
}

/// Inverse of eigenvalues_from_f. The sign table W satisfies W W = d^2 I.
inline PauliChannelSpec f_from_eigenvalues(const ChannelSpectrum& spectrum) {
    const int n = spectrum.size() + 1;
    int qubits = 0;
    for (int q = 1; q <= kMaxQubits; ++q)
        if (pauli_count(q) == n) qubits = q;
    if (qubits == 0) throw std::invalid_argument("spectrum must hold 4^n - 1 eigenvalues");
    Vector lam(n);
    lam(0) = 1.0;
    for (int a = 1; a < n; ++a) {
        if (std::abs(spectrum.lambdas[a - 1].imag()) > 1e-12)
            throw std::invalid_argument("Pauli channel eigenvalues must be real");
        lam(a) = spectrum.lambdas[a - 1].real();
    }
    const Vector f = commutation_signs(qubits) * lam / static_cast<double>(n);
    return {std::vector<double>(f.data(), f.data() + f.size())};
}

/// Complete-positivity test for a one-qubit Pauli map: |1 +- lz| >= |lx +- ly|.
inline bool check_fujiwara_algoet(const ChannelSpectrum& spectrum, double tol = 1e-12) {
    if (spectrum.size() != 3) throw std::invalid_argument("Fujiwara-Algoet test is one-qubit only");
    for (const auto& l : spectrum.lambdas)
        if (std::abs(l.imag()) > tol) return false;
    const double lx = spectrum[0].real();
    const double ly = spectrum[1].real();
    const double lz = spectrum[2].real();
    return std::abs(1.0 + lz) + tol >= std::abs(lx + ly) && std::abs(1.0 - lz) + tol >= std::abs(lx - ly);
}

inline PauliTransferMatrix pauli_channel_ptm(const PauliChannelSpec& spec) {
    const ChannelSpectrum s = eigenvalues_from_f(spec);
    Matrix m = Matrix::Identity(s.size() + 1, s.size() + 1);
    for (int a = 0; a < s.size(); ++a) m(a + 1, a + 1) = s[a].real();
    return {std::move(m), spec.qubit_count()};
}

inline Vector apply_ptm(const PauliTransferMatrix& s, const Vector& state) {
    if (state.size() != s.size())
        throw std::invalid_argument("state vector has " + std::to_string(state.size()) +
                                    " components, PTM acts on " + std::to_string(s.size()));
    return s.matrix() * state;
}

/// compose(a, b) is the channel a o b (b acts first).
inline PauliTransferMatrix compose(const PauliTransferMatrix& a, const PauliTransferMatrix& b) {
    if (a.qubit_count() != b.qubit_count()) throw std::invalid_argument("PTM dimension mismatch");
    return {a.matrix() * b.matrix(), a.qubit_count()};
}

}  // namespace specttm

#endif  // SPECTTM_PAULI_HPP
