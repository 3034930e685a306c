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

#ifndef SPECTTM_PROTOCOL_HPP
#define SPECTTM_PROTOCOL_HPP

#include "specttm/noise_models.hpp"
#include "specttm/twirl.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>

namespace specttm {

/// Pauli preparation and measurement noise.
struct SpamModel {
    PauliChannelSpec prep = PauliChannelSpec::identity();
    PauliChannelSpec meas = PauliChannelSpec::identity();
    std::uint64_t seed = 0;

    static SpamModel none(int qubits = 1) {
        return {PauliChannelSpec::identity(qubits), PauliChannelSpec::identity(qubits), 0};
    }

    /// Non-identity weights f_a drawn uniformly from [0, eps_max / (d^2 - 1)].
    static SpamModel random(double eps_max, std::uint64_t seed, int qubits = 1) {
        if (eps_max < 0.0 || eps_max > 1.0) throw std::invalid_argument("SPAM strength outside [0,1]");
        auto rng = detail::substream(seed, 0x5350414dULL);
        const int n = pauli_count(qubits);
        std::uniform_real_distribution<double> u(0.0, eps_max / (n - 1));
        auto draw = [&] {
            PauliChannelSpec s{std::vector<double>(n, 0.0)};
            double rest = 0.0;
            for (int a = 1; a < n; ++a) rest += (s.f[a] = u(rng));
            s.f[0] = 1.0 - rest;
            return s;
        };
        SpamModel m;
        m.prep = draw();
        m.meas = draw();
        m.seed = seed;
        return m;
    }

    bool is_valid(double tol = 1e-12) const {
        return prep.is_physical(tol) && meas.is_physical(tol) && prep.f.size() == meas.f.size();
    }
};

enum class TwirlMode { off, exact, sampled };
enum class Interleave { projective, none };
enum class SignalVariant { single, dual };

inline const char* twirl_mode_name(TwirlMode m) {
    switch (m) {
        case TwirlMode::off: return "off";
        case TwirlMode::exact: return "exact";
        case TwirlMode::sampled: return "sampled";
    }
    return "?";
}

inline const char* interleave_name(Interleave m) { return m == Interleave::projective ? "projective" : "none"; }
inline const char* variant_name(SignalVariant v) { return v == SignalVariant::single ? "single" : "double"; }

struct ExperimentConfig {
    int M = 8;
    int K = 12;
    double dt = 0.2;
    std::optional<long long> shots;  // empty: exact expectations
    TwirlMode twirl = TwirlMode::off;
    int twirl_samples = 1000;
    TwirlBasis twirl_basis;
    Interleave interleave = Interleave::projective;
    std::uint64_t seed = 0;

    /// Human-readable violations; empty when valid. N is the number of non-identity Paulis.
    std::vector<std::string> validate(int N = 3) const {
        std::vector<std::string> errors;
        if (M < 1) errors.push_back("M must be >= 1");
        if (K < 2 * N - 2) errors.push_back("K below 2N-2=" + std::to_string(2 * N - 2));
        if (!(dt > 0.0) || !std::isfinite(dt)) errors.push_back("dt must be > 0");
        if (shots && *shots < 1) errors.push_back("shots must be >= 1");
        if (twirl == TwirlMode::sampled && twirl_samples < 1) errors.push_back("twirl_samples must be >= 1");
        return errors;
    }
};

/// g values indexed (n-1, k-1) together with the circuit-level expectations they came from.
struct SignalSeries {
    SignalVariant variant = SignalVariant::single;
    int M = 0;
    int K = 0;
    int qubits = 1;
    Matrix values;                  // M x K
    std::vector<Matrix> per_axis;   // N matrices, M x K: the summand for each mu
    std::vector<Matrix> e_plus;     // <P_mu> after preparing (I + P_mu)/d
    std::vector<Matrix> e_minus;    // <P_mu> after preparing (I - P_mu)/d
    bool pauli_input = true;        // false when some map had off-diagonal R
    std::map<std::string, std::string> metadata;

    double operator()(int n, int k) const { return values(n - 1, k - 1); }
    std::vector<double> row(int n) const {
        std::vector<double> r(K);
        for (int k = 0; k < K; ++k) r[k] = values(n - 1, k);
        return r;
    }
};

/// rho -> P+ rho P+ + P- rho P-: keeps the Paulis that commute with P_mu.
inline PauliTransferMatrix projective_superoperator(const PauliString& mu) {
    if (mu.is_identity()) throw std::invalid_argument("projective measurement needs a non-identity Pauli");
    const int n = pauli_count(mu.qubit_count());
    Matrix m = Matrix::Zero(n, n);
    for (int nu = 0; nu < n; ++nu)
        m(nu, nu) = mu.commutes_with(PauliString(nu, mu.qubit_count())) ? 1.0 : 0.0;
    return {std::move(m), mu.qubit_count()};
}

inline long long resource_estimate(int n_qubits, int K, int M) {
    if (n_qubits < 1 || K < 1 || M < 1) throw std::invalid_argument("resource counts need positive arguments");
    const long long d = 1LL << n_qubits;
    return d * (d * d - 1) * (K + 1) * static_cast<long long>(M);
}

/// Circuit count for a gate-set-tomography route to the same tensors.
inline long long gst_resource_estimate(int n_qubits, int M) {
    if (n_qubits < 1 || M < 1) throw std::invalid_argument("resource counts need positive arguments");
    const long long d = 1LL << n_qubits;
    return d * d * (d * d - 1) * static_cast<long long>(M);
}

namespace detail {

inline void check_maps(const std::vector<PauliTransferMatrix>& maps, const SpamModel& spam,
                       const ExperimentConfig& cfg) {
    if (const auto errs = cfg.validate(maps.empty() ? 3 : maps.front().size() - 1); !errs.empty())
        throw std::invalid_argument(errs.front());
    if (static_cast<int>(maps.size()) < cfg.M)
        throw std::invalid_argument("need " + std::to_string(cfg.M) + " maps, got " + std::to_string(maps.size()));
    if (!spam.is_valid()) throw std::invalid_argument("SPAM channels must be CP Pauli channels");
    const int q = maps.front().qubit_count();
    for (const auto& m : maps)
        if (m.qubit_count() != q) throw std::invalid_argument("maps have mixed qubit counts");
    if (spam.prep.qubit_count() != q) throw std::invalid_argument("SPAM qubit count differs from maps");
    if (cfg.twirl != TwirlMode::off && q != 1) throw std::invalid_argument("twirling is implemented for one qubit");
}

inline bool has_offdiagonal_block(const PauliTransferMatrix& s, double tol = 1e-12) {
    const Matrix r = s.unital_block();
    Matrix off = r;
    off.diagonal().setZero();
    return off.cwiseAbs().maxCoeff() > tol;
}

/// Channel as seen by preparations and measurements in the twirling frame.
inline Matrix frame_channel(const PauliTransferMatrix& s, const ExperimentConfig& cfg) {
    if (cfg.twirl == TwirlMode::off) return s.matrix();
    const Matrix f = frame_ptm(cfg.twirl_basis);
    Matrix rotated = f.transpose() * s.matrix() * f;
    if (cfg.twirl == TwirlMode::exact) rotated = Matrix(rotated.diagonal().asDiagonal());
    return rotated;
}

inline Matrix pauli_sign_ptm(int v) {
    Matrix d = Matrix::Identity(4, 4);
    for (int a = 1; a < 4; ++a) d(a, a) = PauliString(v, 1).commutes_with(PauliString(a, 1)) ? 1.0 : -1.0;
    return d;
}

}  // namespace detail

/// Exact-expectation signal functions. With Interleave::projective the channel
/// applications are separated by measurements of P_mu (Fig-style protocol);
/// with Interleave::none they follow each other directly behind the measurement noise.
inline SignalSeries simulate_signal(const std::vector<PauliTransferMatrix>& maps, const SpamModel& spam,
                                    const ExperimentConfig& cfg, SignalVariant variant) {
    detail::check_maps(maps, spam, cfg);
    const int q = maps.front().qubit_count();
    const int n_paulis = pauli_count(q);
    const int N = n_paulis - 1;
    const Matrix sp = pauli_channel_ptm(spam.prep).matrix();
    const Matrix sm = pauli_channel_ptm(spam.meas).matrix();
    const Matrix smeas = variant == SignalVariant::single ? sm : Matrix(sm * sm);

    SignalSeries out;
    out.variant = variant;
    out.M = cfg.M;
    out.K = cfg.K;
    out.qubits = q;
    out.values = Matrix::Zero(cfg.M, cfg.K);
    out.per_axis.assign(N, Matrix::Zero(cfg.M, cfg.K));
    out.e_plus.assign(N, Matrix::Zero(cfg.M, cfg.K));
    out.e_minus.assign(N, Matrix::Zero(cfg.M, cfg.K));

    std::vector<Matrix> proj(n_paulis);
    for (int mu = 1; mu < n_paulis; ++mu) proj[mu] = projective_superoperator(PauliString(mu, q)).matrix();

    for (int n = 1; n <= cfg.M; ++n) {
        const auto& map = maps[n - 1];
        if (cfg.twirl == TwirlMode::off && detail::has_offdiagonal_block(map)) out.pauli_input = false;
        const Matrix channel = detail::frame_channel(map, cfg);
        for (int mu = 1; mu <= N; ++mu) {
            const Matrix& pm = proj[mu];
            // One round: measurement noise then (for projective) the P_mu measurement.
            Matrix round = variant == SignalVariant::single ? sm : Matrix(sm * sm);
            if (cfg.interleave == Interleave::projective)
                round = variant == SignalVariant::single ? Matrix(pm * sm) : Matrix(pm * sm * pm * sm);
            const Matrix fin = (cfg.interleave == Interleave::projective && variant == SignalVariant::dual)
                                   ? Matrix(sm * pm * sm)
                                   : smeas;

            auto record = [&](int k, const Matrix& c) {
                out.per_axis[mu - 1](n - 1, k - 1) = c(mu, mu);
                out.e_plus[mu - 1](n - 1, k - 1) = c(mu, 0) + c(mu, mu);
                out.e_minus[mu - 1](n - 1, k - 1) = c(mu, 0) - c(mu, mu);
            };

            if (cfg.twirl != TwirlMode::sampled) {
                Matrix x = channel * sp;  // channel applied once to the prepared state
                for (int k = 1; k <= cfg.K; ++k) {
                    record(k, fin * x);
                    x = channel * round * x;
                }
                continue;
            }
            for (int k = 1; k <= cfg.K; ++k) {
                auto rng = detail::substream(cfg.seed, (static_cast<std::uint64_t>(variant == SignalVariant::dual) << 48) |
                                                           (static_cast<std::uint64_t>(n) << 32) |
                                                           (static_cast<std::uint64_t>(mu) << 24) |
                                                           static_cast<std::uint64_t>(k));
                std::uniform_int_distribution<int> frame(0, 3);
                Matrix acc = Matrix::Zero(n_paulis, n_paulis);
                for (int s = 0; s < cfg.twirl_samples; ++s) {
                    auto twirled = [&] {
                        const Matrix d = detail::pauli_sign_ptm(frame(rng));
                        return Matrix(d * channel * d);
                    };
                    Matrix x = twirled() * sp;
                    for (int r = 1; r < k; ++r) x = twirled() * round * x;
                    acc += fin * x;
                }
                record(k, acc / cfg.twirl_samples);
            }
        }
    }
    for (int mu = 0; mu < N; ++mu) out.values += out.per_axis[mu];

    auto& md = out.metadata;
    md["variant"] = variant_name(variant);
    md["M"] = std::to_string(cfg.M);
    md["K"] = std::to_string(cfg.K);
    md["shots"] = "exact";
    md["interleave"] = interleave_name(cfg.interleave);
    md["twirl"] = twirl_mode_name(cfg.twirl);
    if (cfg.twirl == TwirlMode::sampled) md["twirl_samples"] = std::to_string(cfg.twirl_samples);
    md["pauli_input"] = out.pauli_input ? "true" : "false";
    return out;
}

inline SignalSeries simulate_signal_single(const std::vector<PauliTransferMatrix>& maps, const SpamModel& spam,
                                           const ExperimentConfig& cfg) {
    return simulate_signal(maps, spam, cfg, SignalVariant::single);
}

inline SignalSeries simulate_signal_double(const std::vector<PauliTransferMatrix>& maps, const SpamModel& spam,
                                           const ExperimentConfig& cfg) {
    return simulate_signal(maps, spam, cfg, SignalVariant::dual);
}

inline std::pair<SignalSeries, SignalSeries> simulate_signal_twirled(const std::vector<PauliTransferMatrix>& maps,
                                                                     const SpamModel& spam,
                                                                     const ExperimentConfig& cfg) {
    if (cfg.twirl == TwirlMode::off) throw std::invalid_argument("twirled signals need twirl != off");
    return {simulate_signal_single(maps, spam, cfg), simulate_signal_double(maps, spam, cfg)};
}

/// Replaces every circuit expectation by the mean of `shots` +-1 outcomes.
/// Each (n, k, mu, sign, copy) circuit draws from its own substream.
inline SignalSeries apply_shot_noise(const SignalSeries& series, long long shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    SignalSeries out = series;
    const int N = static_cast<int>(series.per_axis.size());
    const int copies = std::max(1, (1 << series.qubits) / 2);
    const std::uint64_t tag = series.variant == SignalVariant::dual ? 1u : 0u;
    out.values.setZero();
    for (int mu = 0; mu < N; ++mu) {
        for (int n = 0; n < series.M; ++n) {
            for (int k = 0; k < series.K; ++k) {
                double means[2];
                for (int sign = 0; sign < 2; ++sign) {
                    const double e = sign == 0 ? series.e_plus[mu](n, k) : series.e_minus[mu](n, k);
                    const double p = std::clamp(0.5 * (1.0 + e), 0.0, 1.0);
                    double acc = 0.0;
                    for (int c = 0; c < copies; ++c) {
                        const std::uint64_t id = (tag << 60) | (static_cast<std::uint64_t>(mu) << 48) |
                                                 (static_cast<std::uint64_t>(n) << 32) |
                                                 (static_cast<std::uint64_t>(k) << 16) |
                                                 (static_cast<std::uint64_t>(sign) << 8) | static_cast<std::uint64_t>(c);
                        auto rng = detail::substream(seed, id);
                        std::binomial_distribution<long long> b(shots, p);
                        acc += 2.0 * static_cast<double>(b(rng)) / static_cast<double>(shots) - 1.0;
                    }
                    means[sign] = acc / copies;
                }
                out.e_plus[mu](n, k) = means[0];
                out.e_minus[mu](n, k) = means[1];
                out.per_axis[mu](n, k) = 0.5 * (means[0] - means[1]);
                out.values(n, k) += out.per_axis[mu](n, k);
            }
        }
    }
    out.metadata["shots"] = std::to_string(shots);
    out.metadata["shot_seed"] = std::to_string(seed);
    return out;
}

}  // namespace specttm

#endif  // SPECTTM_PROTOCOL_HPP
