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

#ifndef SPECTTM_TWIRL_HPP
#define SPECTTM_TWIRL_HPP

#include "specttm/pauli.hpp"

#include <array>
#include <numbers>

namespace specttm {

/// Twirling frame U = R_z(theta1) R_y(theta2) R_z(theta3).
struct TwirlBasis {
    std::array<double, 3> angles{0.0, 0.0, 0.0};

    TwirlBasis() = default;
    TwirlBasis(double t1, double t2, double t3) : angles{t1, t2, t3} { normalize(); }

    void normalize() {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (auto& a : angles) {
            a = std::fmod(a, two_pi);
            if (a < 0.0) a += two_pi;
            if (a >= two_pi) a = 0.0;
        }
    }
    bool is_computational() const { return angles == std::array<double, 3>{0.0, 0.0, 0.0}; }
};

inline Eigen::Matrix3d rot_z(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return r;
}

inline Eigen::Matrix3d rot_y(double a) {
    Eigen::Matrix3d r;
    r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return r;
}

/// SO(3) image of U; column a is the Bloch vector of U P_a U^dagger.
inline Eigen::Matrix3d frame_rotation(const TwirlBasis& b) {
    return rot_z(b.angles[0]) * rot_y(b.angles[1]) * rot_z(b.angles[2]);
}

inline Matrix frame_ptm(const TwirlBasis& b) {
    Matrix f = Matrix::Identity(4, 4);
    f.bottomRightCorner(3, 3) = frame_rotation(b);
    return f;
}

/// PTM of rho -> Q_v rho Q_v with Q_v = U P_v U^dagger.
inline Matrix frame_pauli_ptm(int v, const TwirlBasis& b) {
    Matrix d = Matrix::Identity(4, 4);
    for (int a = 1; a < 4; ++a)
        d(a, a) = PauliString(v, 1).commutes_with(PauliString(a, 1)) ? 1.0 : -1.0;
    const Matrix f = frame_ptm(b);
    return f * d * f.transpose();
}

/// Exact Pauli twirl in the rotated frame: keep the diagonal of F^T S F.
inline PauliTransferMatrix twirl_channel(const PauliTransferMatrix& s, const TwirlBasis& b) {
    if (s.qubit_count() != 1) throw std::invalid_argument("twirling is implemented for one qubit");
    const Matrix f = frame_ptm(b);
    const Matrix rotated = f.transpose() * s.matrix() * f;
    const Matrix kept = rotated.diagonal().asDiagonal();
    return {f * kept * f.transpose(), 1};
}

/// Diagonal of the channel in the rotated frame, i.e. the twirled eigenvalues (x', y', z').
inline Eigen::Vector3d twirled_eigenvalues(const PauliTransferMatrix& s, const TwirlBasis& b) {
    const Eigen::Matrix3d o = frame_rotation(b);
    const Eigen::Matrix3d r = s.unital_block();
    return (o.transpose() * r * o).diagonal();
}

}  // namespace specttm

#endif  // SPECTTM_TWIRL_HPP
