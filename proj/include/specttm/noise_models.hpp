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

#ifndef SPECTTM_NOISE_MODELS_HPP
#define SPECTTM_NOISE_MODELS_HPP

#include "specttm/pauli.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cstdint>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

namespace specttm {

/// C(t) = amplitude * exp(-decay_rate |t|) * cos(cutoff t).
struct GaussianCorrelation {
    double amplitude = 0.0;
    double decay_rate = 1.0;
    double cutoff = 2.0;

    double operator()(double t) const {
        return amplitude * std::exp(-decay_rate * std::abs(t)) * std::cos(cutoff * t);
    }
    bool is_zero() const { return amplitude == 0.0; }
};

enum class ModelKind { pure_dephasing, amplitude_damping, correlated_xy };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::pure_dephasing: return "pure_dephasing";
        case ModelKind::amplitude_damping: return "amplitude_damping";
        case ModelKind::correlated_xy: return "correlated_xy";
    }
    return "?";
}

/// Classical Gaussian noise coupled as H(t) = omega_s Z + sum_a B^a(t) P_a.
struct NoiseModelSpec {
    ModelKind kind = ModelKind::pure_dephasing;
    double omega_s = 0.0;
    // Upper triangle of the axis-pair correlation table, indexed [a][b] with a <= b.
    std::array<std::array<GaussianCorrelation, 3>, 3> couplings{};
    // p(t) = 1 - exp(-damping_rate t) for amplitude damping.
    double damping_rate = 0.0;

    const GaussianCorrelation& coupling(int a, int b) const {
        return a <= b ? couplings[a][b] : couplings[b][a];
    }
    GaussianCorrelation& coupling(int a, int b) { return a <= b ? couplings[a][b] : couplings[b][a]; }

    Eigen::Matrix3d amplitude_matrix() const {
        Eigen::Matrix3d c;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) c(a, b) = coupling(a, b).amplitude;
        return c;
    }

    /// Empty string when the equal-time covariance is PSD, otherwise the reason.
    std::string psd_violation(double tol = 1e-12) const {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(amplitude_matrix());
        const double lo = es.eigenvalues().minCoeff();
        if (lo < -tol) {
            std::ostringstream os;
            os << "correlation matrix C(0) is not positive semidefinite (eigenvalue " << lo << ")";
            return os.str();
        }
        return {};
    }
};

inline void require_nonnegative_time(double t) {
    if (t < 0.0 || !std::isfinite(t)) throw std::invalid_argument("time must be finite and >= 0");
}

/// Decoherence exponent Upsilon(t) = 4 int_0^t (t - s) C(s) ds by composite Simpson.
inline double dephasing_upsilon(const GaussianCorrelation& corr, double t, int intervals = 20000) {
    require_nonnegative_time(t);
    if (t == 0.0 || corr.is_zero()) return 0.0;
    if (intervals < 2) intervals = 2;
    if (intervals % 2) ++intervals;
    const double h = t / intervals;
    double acc = 0.0;
    for (int i = 0; i <= intervals; ++i) {
        const double s = i * h;
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * (t - s) * corr(s);
    }
    return 4.0 * acc * h / 3.0;
}

inline void require_kind(const NoiseModelSpec& spec, ModelKind kind) {
    if (spec.kind != kind)
        throw std::invalid_argument(std::string("operation requires model kind ") + model_kind_name(kind) +
                                    ", got " + model_kind_name(spec.kind));
}

/// Pure-dephasing map at t = n dt for H = omega_s Z + B^z(t) Z.
inline PauliTransferMatrix dephasing_map(const NoiseModelSpec& spec, int n, double dt) {
    require_kind(spec, ModelKind::pure_dephasing);
    if (n < 0) throw std::invalid_argument("time index must be >= 0");
    const double t = n * dt;
    const double damp = std::exp(-dephasing_upsilon(spec.coupling(2, 2), t));
    const double phi = 2.0 * spec.omega_s * t;
    Matrix s = Matrix::Identity(4, 4);
    s(1, 1) = damp * std::cos(phi);
    s(1, 2) = -damp * std::sin(phi);
    s(2, 1) = damp * std::sin(phi);
    s(2, 2) = damp * std::cos(phi);
    return {std::move(s), 1};
}

inline PauliTransferMatrix amplitude_damping_map(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("damping probability outside [0,1]");
    Matrix s = Matrix::Identity(4, 4);
    s(1, 1) = std::sqrt(1.0 - p);
    s(2, 2) = std::sqrt(1.0 - p);
    s(3, 3) = 1.0 - p;
    s(3, 0) = p;
    return {std::move(s), 1};
}

/// Uniform sample grid t_j = t0 + j * step, j = 0..points-1.
struct TimeGrid {
    double t0 = 0.0;
    double step = 0.0;
    int points = 0;

    double at(int j) const { return t0 + j * step; }

    /// Substep midpoints covering [0, steps * dt].
    static TimeGrid midpoints(int steps, double dt, int substeps) {
        const double h = dt / substeps;
        return {0.5 * h, h, steps * substeps};
    }
};

/// Sampled noise paths; paths[a] is count x points for each active axis a.
struct TrajectoryBatch {
    TimeGrid grid;
    std::array<Matrix, 3> paths;
    std::array<bool, 3> active{false, false, false};
    std::uint64_t seed = 0;
    int count = 0;
};

namespace detail {

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

inline int worker_count(int jobs) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return std::max(1, std::min<int>(static_cast<int>(hw), jobs));
}

/// Runs body(chunk) for chunk in [0, chunks) on a small thread pool.
template <typename Body>
void parallel_chunks(int chunks, Body&& body) {
    const int workers = worker_count(chunks);
    if (workers == 1) {
        for (int c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int c = w; c < chunks; c += workers) body(c);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline constexpr int kChunk = 256;

}  // namespace detail

/// Draws count Gaussian paths on grid with cross-covariance C_ab(t_i - t_j).
/// Trajectory i uses its own RNG substream, so results do not depend on threading.
inline TrajectoryBatch sample_trajectories(const NoiseModelSpec& spec, const TimeGrid& grid, int count,
                                           std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("trajectory count must be >= 1");
    if (grid.points < 1) throw std::invalid_argument("time grid is empty");
    if (const auto why = spec.psd_violation(); !why.empty()) throw std::invalid_argument(why);

    TrajectoryBatch batch;
    batch.grid = grid;
    batch.seed = seed;
    batch.count = count;
    std::vector<int> axes;
    for (int a = 0; a < 3; ++a) {
        bool on = !spec.coupling(a, a).is_zero();
        for (int b = 0; b < 3; ++b) on = on || !spec.coupling(a, b).is_zero();
        batch.active[a] = on;
        if (on) axes.push_back(a);
        batch.paths[a] = on ? Matrix(count, grid.points) : Matrix();
    }
    if (axes.empty()) return batch;

    const int p = grid.points;
    const int dim = static_cast<int>(axes.size()) * p;
    Matrix cov(dim, dim);
    for (size_t ia = 0; ia < axes.size(); ++ia)
        for (size_t ib = 0; ib < axes.size(); ++ib) {
            const auto& c = spec.coupling(axes[ia], axes[ib]);
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < p; ++j) cov(ia * p + i, ib * p + j) = c(grid.at(i) - grid.at(j));
        }
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("covariance eigendecomposition failed");
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-9 * scale) {
        std::ostringstream os;
        os << "grid covariance is not positive semidefinite (eigenvalue " << lo << ")";
        throw std::invalid_argument(os.str());
    }
    const Matrix factor = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

    const int chunks = (count + detail::kChunk - 1) / detail::kChunk;
    detail::parallel_chunks(chunks, [&](int c) {
        const int first = c * detail::kChunk;
        const int width = std::min(detail::kChunk, count - first);
        Matrix z(dim, width);
        for (int j = 0; j < width; ++j) {
            auto rng = detail::substream(seed, static_cast<std::uint64_t>(first + j));
            std::normal_distribution<double> normal;
            for (int i = 0; i < dim; ++i) z(i, j) = normal(rng);
        }
        const Matrix x = factor * z;
        for (size_t ia = 0; ia < axes.size(); ++ia)
            batch.paths[axes[ia]].middleRows(first, width) = x.middleRows(ia * p, p).transpose();
    });
    return batch;
}

/// Trajectory-averaged maps with diagnostics.
struct MonteCarloResult {
    std::vector<PauliTransferMatrix> maps;
    std::vector<std::string> warnings;
};

namespace detail {

// U = a0 I - i a.sigma, stored as (a0, a).
struct Quaternion {
    double w = 1.0;
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

inline Quaternion multiply(const Quaternion& s, const Quaternion& u) {
    return {s.w * u.w - s.v.dot(u.v), s.w * u.v + u.w * s.v + s.v.cross(u.v)};
}

inline Quaternion step_unitary(const Eigen::Vector3d& b, double h) {
    const double norm = b.norm();
    if (norm == 0.0) return {};
    return {std::cos(norm * h), std::sin(norm * h) / norm * b};
}

inline Eigen::Matrix3d bloch_rotation(const Quaternion& q) {
    Eigen::Matrix3d cross;
    cross << 0, -q.v.z(), q.v.y(), q.v.z(), 0, -q.v.x(), -q.v.y(), q.v.x(), 0;
    return (q.w * q.w - q.v.squaredNorm()) * Eigen::Matrix3d::Identity() + 2.0 * q.v * q.v.transpose() +
           2.0 * q.w * cross;
}

}  // namespace detail

/// Lambda_n for n = 1..M averaged over the batch: unitary midpoint stepping at dt/substeps.
inline MonteCarloResult monte_carlo_maps(const NoiseModelSpec& spec, int M, double dt, int substeps,
                                         const TrajectoryBatch& batch) {
    if (M < 1 || substeps < 1) throw std::invalid_argument("M and substeps must be >= 1");
    if (batch.grid.points < M * substeps)
        throw std::invalid_argument("trajectory batch has " + std::to_string(batch.grid.points) +
                                    " time points, need " + std::to_string(M * substeps));
    const double h = dt / substeps;
    if (std::abs(batch.grid.step - h) > 1e-12 * std::max(1.0, h))
        throw std::invalid_argument("trajectory grid step does not match dt/substeps");

    MonteCarloResult out;
    if (batch.count < 100)
        out.warnings.push_back("only " + std::to_string(batch.count) +
                               " trajectories; Monte-Carlo error may dominate");

    const int count = batch.count;
    const int chunks = (count + detail::kChunk - 1) / detail::kChunk;
    std::vector<std::vector<Eigen::Matrix3d>> partial(chunks, std::vector<Eigen::Matrix3d>(M, Eigen::Matrix3d::Zero()));
    detail::parallel_chunks(chunks, [&](int c) {
        const int first = c * detail::kChunk;
        const int last = std::min(count, first + detail::kChunk);
        for (int tr = first; tr < last; ++tr) {
            detail::Quaternion u;
            for (int n = 0; n < M; ++n) {
                for (int s = 0; s < substeps; ++s) {
                    const int j = n * substeps + s;
                    Eigen::Vector3d b(0.0, 0.0, spec.omega_s);
                    for (int a = 0; a < 3; ++a)
                        if (batch.active[a]) b(a) += batch.paths[a](tr, j);
                    u = detail::multiply(detail::step_unitary(b, h), u);
                }
                partial[c][n] += detail::bloch_rotation(u);
            }
        }
    });
    for (int n = 0; n < M; ++n) {
        Eigen::Matrix3d sum = Eigen::Matrix3d::Zero();
        for (int c = 0; c < chunks; ++c) sum += partial[c][n];
        Matrix s = Matrix::Identity(4, 4);
        s.bottomRightCorner(3, 3) = sum / count;
        out.maps.emplace_back(std::move(s), 1);
    }
    return out;
}

/// Integrated canonical decoherence rates Gamma_i(t_n), n = 0..M (Gamma(0) = 0).
struct DecoherenceRates {
    Matrix gamma;        // M x 3 rates gamma_i on [t_n, t_{n+1})
    Matrix integrated;   // (M+1) x 3
    double dt = 0.0;
};

namespace detail {

/// Lindblad rate matrix a_ij (i, j = 1..3) of a one-qubit PTM generator.
inline Eigen::Matrix3cd rate_matrix(const Matrix& generator) {
    const auto basis = pauli_basis(1);
    const int d = 2;
    CMatrix sup = CMatrix::Zero(d * d, d * d);
    auto vec = [](const CMatrix& m) { return Eigen::Map<const CVector>(m.data(), m.size()); };
    for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu)
            if (generator(mu, nu) != 0.0)
                sup += generator(mu, nu) * vec(basis[mu]) * vec(basis[nu]).adjoint() / static_cast<double>(d);
    Eigen::Matrix3cd a;
    for (int i = 1; i < 4; ++i)
        for (int j = 1; j < 4; ++j) {
            CMatrix op(d * d, d * d);
            const CMatrix pt = basis[j].transpose();
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) op.block(r * d, c * d, d, d) = pt(r, c) * basis[i];
            a(i - 1, j - 1) = 2.0 * (op.adjoint() * sup).trace() / static_cast<double>(d * d);
        }
    return 0.5 * (a + a.adjoint().eval());
}

}  // namespace detail

/// Exact rates from consecutive maps. maps[n-1] is Lambda_n; Lambda_0 = identity.
inline DecoherenceRates exact_decoherence_rates(const std::vector<PauliTransferMatrix>& maps, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    const int M = static_cast<int>(maps.size());
    DecoherenceRates out;
    out.dt = dt;
    out.gamma = Matrix::Zero(M, 3);
    out.integrated = Matrix::Zero(M + 1, 3);
    Matrix prev = Matrix::Identity(4, 4);
    Eigen::Matrix3cd prev_vecs = Eigen::Matrix3cd::Identity();
    for (int n = 0; n < M; ++n) {
        if (maps[n].qubit_count() != 1) throw std::invalid_argument("decoherence rates are one-qubit only");
        Eigen::FullPivLU<Matrix> lu(prev);
        if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-14)
            throw std::runtime_error("dynamical map is singular at n=" + std::to_string(n));
        const Matrix increment = maps[n].matrix() * lu.inverse();
        if (!increment.allFinite() || std::abs(increment.determinant()) < 1e-14)
            throw std::runtime_error("dynamical map is singular at n=" + std::to_string(n + 1));
        const Matrix generator = increment.log() / dt;
        if (!generator.allFinite())
            throw std::runtime_error("generator logarithm undefined at n=" + std::to_string(n + 1));
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(detail::rate_matrix(generator));
        Eigen::Vector3d vals = es.eigenvalues();
        Eigen::Matrix3cd vecs = es.eigenvectors();
        {
            std::array<int, 3> perm{0, 1, 2};
            std::array<int, 3> best = perm;
            double best_overlap = -1.0;
            do {
                double overlap = 0.0;
                for (int i = 0; i < 3; ++i) overlap += std::abs(prev_vecs.col(i).dot(vecs.col(perm[i])));
                if (overlap > best_overlap + 1e-12) {
                    best_overlap = overlap;
                    best = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            Eigen::Vector3d v2;
            Eigen::Matrix3cd e2;
            for (int i = 0; i < 3; ++i) {
                v2(i) = vals(best[i]);
                e2.col(i) = vecs.col(best[i]);
            }
            vals = v2;
            vecs = e2;
        }
        prev_vecs = vecs;
        out.gamma.row(n) = vals.transpose();
        out.integrated.row(n + 1) = out.integrated.row(n) + dt * vals.transpose();
        prev = maps[n].matrix();
    }
    return out;
}

}  // namespace specttm

#endif  // SPECTTM_NOISE_MODELS_HPP
