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

#ifndef SPECTTM_PIPELINE_HPP
#define SPECTTM_PIPELINE_HPP

#include "specttm/config.hpp"
#include "specttm/csv.hpp"
#include "specttm/matrix_pencil.hpp"
#include "specttm/noise_models.hpp"
#include "specttm/protocol.hpp"
#include "specttm/pta.hpp"
#include "specttm/spectral_ttm.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>

namespace specttm {

inline constexpr const char* kVersion = "0.1.0";

struct RunRecord {
    std::string run_id;
    std::string started;
    std::string finished;
    std::string version = kVersion;
    std::string output_dir;
    std::vector<std::string> files;
};

struct PipelineResult {
    RunRecord record;
    std::vector<PauliTransferMatrix> maps;  // ground truth, n = 1..steps
    SpectrumSequence truth;                 // tracked eigenvalues of the maps
    SignalSeries single, dual;
    SpectrumSequence recovered;             // from the simulated protocol
    TransferTensorSpectra taus;
    SpectrumSequence predicted;
    KernelRates kernel;
    GammaCurves gamma;
    RhpResult rhp;
    CorrelationCurves correlation;
    std::vector<SpectrumSamples> spectra;   // one per axis
    std::optional<TwirlSearchResult> search;
    SpectrumSequence recovered_baseline;    // theta = 0 twirl (fig5)
    Matrix exact_gamma;                     // from exact_decoherence_rates (fig5)
    std::map<std::string, double> summary;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) { return substream(master, tag)(); }

inline std::vector<Complex> unital_eigenvalues(const PauliTransferMatrix& m) {
    Eigen::EigenSolver<Eigen::Matrix3d> es(m.unital_block(), false);
    const auto ev = es.eigenvalues();
    return {ev(0), ev(1), ev(2)};
}

/// Ground-truth maps Lambda_1..Lambda_steps for the configured model.
inline std::vector<PauliTransferMatrix> ground_truth_maps(const RunConfig& cfg, int steps,
                                                          std::vector<std::string>& notes) {
    const double dt = cfg.protocol.dt;
    std::vector<PauliTransferMatrix> maps;
    switch (cfg.model.kind) {
        case ModelKind::pure_dephasing:
            for (int n = 1; n <= steps; ++n) maps.push_back(dephasing_map(cfg.model, n, dt));
            break;
        case ModelKind::amplitude_damping:
            for (int n = 1; n <= steps; ++n)
                maps.push_back(amplitude_damping_map(1.0 - std::exp(-cfg.model.damping_rate * n * dt)));
            break;
        case ModelKind::correlated_xy: {
            const auto grid = TimeGrid::midpoints(steps, dt, cfg.substeps);
            const auto batch = sample_trajectories(cfg.model, grid, cfg.trajectories, derive_seed(cfg.master_seed, 2));
            auto mc = monte_carlo_maps(cfg.model, steps, dt, cfg.substeps, batch);
            for (auto& w : mc.warnings) notes.push_back(std::move(w));
            maps = std::move(mc.maps);
            break;
        }
    }
    return maps;
}

inline RecoveredSpectra run_protocol(const std::vector<PauliTransferMatrix>& maps, const SpamModel& spam,
                                     const RunConfig& cfg, const ExperimentConfig& proto, SignalSeries* single_out,
                                     SignalSeries* dual_out) {
    SignalSeries s = simulate_signal(maps, spam, proto, SignalVariant::single);
    SignalSeries d = simulate_signal(maps, spam, proto, SignalVariant::dual);
    if (proto.shots) {
        s = apply_shot_noise(s, *proto.shots, derive_seed(cfg.master_seed, 4));
        d = apply_shot_noise(d, *proto.shots, derive_seed(cfg.master_seed, 5));
    }
    std::optional<double> hint;
    if (cfg.model.kind == ModelKind::pure_dephasing) hint = cfg.model.omega_s;
    auto rec = recover_spectra(
        proto.M, 3, proto.dt, [&](int n) { return std::make_pair(s.row(n), d.row(n)); }, cfg.pencil, hint);
    if (single_out) *single_out = std::move(s);
    if (dual_out) *dual_out = std::move(d);
    return rec;
}

inline double max_magnitude_gap(const SpectrumSequence& a, const SpectrumSequence& b, int steps) {
    double worst = 0.0;
    const int n_max = std::min<int>({steps, static_cast<int>(a.size()), static_cast<int>(b.size())});
    for (int n = 0; n < n_max; ++n)
        for (int ax = 0; ax < a[n].size() && ax < b[n].size(); ++ax)
            worst = std::max(worst, std::abs(std::abs(a[n][ax]) - std::abs(b[n][ax])));
    return worst;
}

}  // namespace detail

/// Model -> protocol -> pencil -> SpecTTM analysis (-> basis search) without touching disk.
inline PipelineResult compute_pipeline(const RunConfig& cfg) {
    if (auto errs = validate(cfg); !errs.empty()) throw ConfigValidationError(std::move(errs));
    PipelineResult r;
    const int M = cfg.protocol.M;
    const double dt = cfg.protocol.dt;
    const int horizon = cfg.analysis.horizon;
    const int steps = cfg.model.kind == ModelKind::correlated_xy ? M : std::max(M, horizon);

    const auto all_maps = detail::ground_truth_maps(cfg, steps, r.diagnostics);
    r.maps = all_maps;
    {
        std::vector<std::vector<Complex>> ev;
        for (const auto& m : all_maps) ev.push_back(detail::unital_eigenvalues(m));
        std::optional<double> hint;
        if (cfg.model.kind == ModelKind::pure_dephasing) hint = cfg.model.omega_s;
        r.truth = track_branches(ev, dt, hint).spectra;
    }
    const std::vector<PauliTransferMatrix> window(all_maps.begin(), all_maps.begin() + M);

    const SpamModel spam = cfg.spam_strength > 0.0
                               ? SpamModel::random(cfg.spam_strength, detail::derive_seed(cfg.master_seed, 1))
                               : SpamModel::none();
    ExperimentConfig proto = cfg.protocol;
    proto.seed = detail::derive_seed(cfg.master_seed, 3);

    if (cfg.pipeline == PipelineKind::fig5_pta) {
        r.search = optimal_basis_search(window, dt, cfg.analysis.grid_density, cfg.analysis.refine,
                                        cfg.analysis.objective);
        proto.twirl_basis = r.search->best_basis;
        ExperimentConfig base = proto;
        base.twirl_basis = TwirlBasis{};
        r.recovered_baseline = detail::run_protocol(window, spam, cfg, base, nullptr, nullptr).spectra;
        r.exact_gamma = exact_decoherence_rates(window, dt).integrated;
    }
    auto rec = detail::run_protocol(window, spam, cfg, proto, &r.single, &r.dual);
    r.recovered = std::move(rec.spectra);
    for (auto& d : rec.diagnostics) r.diagnostics.push_back(std::move(d));

    r.taus = taus_from_lambdas(r.recovered, M);
    r.predicted = predict_lambdas(r.taus, horizon);
    r.kernel = kernel_rates(taus_from_lambdas(magnitudes(r.recovered), M));
    r.gamma = gamma_integral(r.recovered, dt);
    r.rhp = rhp_measure(r.gamma);
    r.correlation = reconstruct_correlation(r.kernel);
    const Vector omega = Vector::LinSpaced(cfg.analysis.omega_points, 0.0, cfg.analysis.omega_max);
    for (int a = 0; a < 3; ++a) {
        std::vector<Complex> c;
        for (int n = 0; n < M; ++n) c.emplace_back(r.correlation.re_c(n, a), 0.0);
        auto s = spectral_density(c, dt, omega);
        for (const auto& w : s.warnings) r.diagnostics.push_back(std::string("axis ") + axis_name(a) + ": " + w);
        r.spectra.push_back(std::move(s));
    }

    auto& sm = r.summary;
    sm["rhp_total"] = r.rhp.total;
    for (int a = 0; a < 3; ++a) sm[std::string("rhp_") + axis_name(a)] = r.rhp.per_axis(a);
    sm["max_spectrum_error"] = detail::max_magnitude_gap(r.recovered, r.truth, M);
    sm["max_prediction_error"] = detail::max_magnitude_gap(r.predicted, r.truth, horizon);
    sm["prediction_steps_checked"] = std::min<int>(horizon, static_cast<int>(r.truth.size()));
    sm["resource_estimate"] = static_cast<double>(resource_estimate(1, cfg.protocol.K, M));
    sm["gst_resource_estimate"] = static_cast<double>(gst_resource_estimate(1, M));
    for (int a = 0; a < 3; ++a) {
        // Last tensor index whose modulus is above 1e-10.
        int last = 0;
        for (int n = 1; n <= M; ++n)
            if (std::abs(r.taus(a, n)) >= 1e-10) last = n;
        sm[std::string("last_significant_tau_") + axis_name(a)] = last;
    }
    if (r.search) {
        sm["search_best_value"] = r.search->best_value;
        sm["search_best_rhp"] = r.search->best_rhp;
        sm["search_baseline_rhp"] = r.search->baseline_rhp;
        for (int i = 0; i < 3; ++i) sm["search_theta" + std::to_string(i + 1)] = r.search->best_basis.angles[i];
        sm["gamma_deviation_optimal"] = gamma_deviation(r.gamma.gamma, r.exact_gamma, dt);
        sm["gamma_deviation_baseline"] =
            gamma_deviation(gamma_integral(r.recovered_baseline, dt).gamma, r.exact_gamma, dt);
    }
    return r;
}

namespace detail {

inline Metadata metadata_for(const RunConfig& cfg, const std::string& hash, const std::string& columns) {
    Metadata m;
    m.emplace_back("config_hash", hash);
    m.emplace_back("software_version", kVersion);
    m.emplace_back("columns", columns);
    for (const auto& kv : cfg.echo()) m.push_back(kv);
    return m;
}

inline std::vector<std::pair<std::string, CsvTable>> output_tables(const RunConfig& cfg, const PipelineResult& r) {
    std::vector<std::pair<std::string, CsvTable>> out;
    const double dt = cfg.protocol.dt;
    {
        CsvTable t({"variant", "n", "k", "g"});
        for (const auto* s : {&r.single, &r.dual})
            for (int n = 1; n <= s->M; ++n)
                for (int k = 1; k <= s->K; ++k) t.add(variant_name(s->variant), n, k, (*s)(n, k));
        out.emplace_back("signals", std::move(t));
    }
    {
        CsvTable t({"axis", "n", "lambda_re", "lambda_im", "lambda_abs", "truth_re", "truth_im"});
        for (int a = 0; a < 3; ++a)
            for (size_t n = 0; n < r.recovered.size(); ++n) {
                const Complex l = r.recovered[n][a];
                const Complex g = n < r.truth.size() ? r.truth[n][a] : Complex(std::nan(""), 0.0);
                t.add(axis_name(a), static_cast<int>(n) + 1, l.real(), l.imag(), std::abs(l), g.real(), g.imag());
            }
        out.emplace_back("lambdas", std::move(t));
    }
    {
        CsvTable t({"axis", "n", "tau_re", "tau_im"});
        for (int a = 0; a < r.taus.axes(); ++a)
            for (int n = 1; n <= r.taus.memory(); ++n) t.add(axis_name(a), n, r.taus(a, n).real(), r.taus(a, n).imag());
        out.emplace_back("taus", std::move(t));
    }
    {
        CsvTable t({"axis", "n", "predicted_abs", "truth_abs"});
        for (int a = 0; a < 3; ++a)
            for (size_t n = 0; n < r.predicted.size(); ++n) {
                const double truth = n < r.truth.size() ? std::abs(r.truth[n][a]) : std::nan("");
                t.add(axis_name(a), static_cast<int>(n) + 1, std::abs(r.predicted[n][a]), truth);
            }
        out.emplace_back("prediction", std::move(t));
    }
    {
        CsvTable t({"axis", "n", "k_rate"});
        for (int a = 0; a < r.kernel.axes(); ++a)
            for (int n = 1; n <= r.kernel.memory(); ++n) t.add(axis_name(a), n, r.kernel.rates(a, n - 1).real());
        out.emplace_back("kernel", std::move(t));
    }
    {
        CsvTable t({"axis", "n", "gamma", "Gamma"});
        for (int a = 0; a < 3; ++a)
            for (Eigen::Index n = 0; n < r.gamma.gamma.rows(); ++n)
                t.add(axis_name(a), static_cast<int>(n), r.rhp.rates(n, a), r.gamma.gamma(n, a));
        out.emplace_back("gamma", std::move(t));
    }
    {
        CsvTable t({"axis", "n", "t", "re_c", "model_c"});
        for (int a = 0; a < 3; ++a)
            for (Eigen::Index n = 0; n < r.correlation.re_c.rows(); ++n) {
                const double tn = r.correlation.t(n);
                t.add(axis_name(a), static_cast<int>(n) + 1, tn, r.correlation.re_c(n, a), cfg.model.coupling(a, a)(tn));
            }
        out.emplace_back("correlation", std::move(t));
    }
    {
        CsvTable t({"axis", "omega", "S", "J"});
        for (int a = 0; a < 3; ++a)
            for (Eigen::Index i = 0; i < r.spectra[a].omega.size(); ++i)
                t.add(axis_name(a), r.spectra[a].omega(i), r.spectra[a].S(i), r.spectra[a].J(i));
        out.emplace_back("spectrum", std::move(t));
    }
    if (r.search) {
        CsvTable t({"theta1", "theta2", "theta3", cfg.analysis.objective == SearchObjective::rhp ? "rhp" : "diagonal_weight"});
        for (const auto& e : r.search->evaluation_log) t.add(e.angles[0], e.angles[1], e.angles[2], e.value);
        out.emplace_back("landscape", std::move(t));
        CsvTable g({"axis", "n", "Gamma_exact", "Gamma_optimal", "Gamma_computational"});
        const Matrix base = gamma_integral(r.recovered_baseline, dt).gamma;
        for (int a = 0; a < 3; ++a)
            for (Eigen::Index n = 0; n < r.exact_gamma.rows(); ++n)
                g.add(axis_name(a), static_cast<int>(n), r.exact_gamma(n, a), r.gamma.gamma(n, a), base(n, a));
        out.emplace_back("gamma_pta", std::move(g));
    }
    return out;
}

inline std::string summary_text(const RunConfig& cfg, const PipelineResult& r, const std::string& hash) {
    std::ostringstream os;
    os << "pipeline " << pipeline_name(cfg.pipeline) << " (preset " << (cfg.preset.empty() ? "none" : cfg.preset)
       << ")\nrun_id " << hash << "\n";
    os << std::setprecision(10);
    for (const auto& [k, v] : r.summary) os << k << " " << v << "\n";
    for (const auto& d : r.diagnostics) os << "note: " << d << "\n";
    return os.str();
}

}  // namespace detail

/// Runs the pipeline and writes CSVs, sidecars, summary.txt and run.json into cfg.output_dir.
/// Files written by a failing run are removed again.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
    namespace fs = std::filesystem;
    const std::string started = detail::utc_now();
    PipelineResult r = compute_pipeline(cfg);
    const std::string hash = config_hash(cfg);
    r.record.run_id = hash;
    r.record.started = started;
    r.record.output_dir = cfg.output_dir;

    const fs::path dir(cfg.output_dir);
    const bool created = !fs::exists(dir);
    std::vector<std::string> written;
    try {
        fs::create_directories(dir);
        for (const auto& [name, table] : detail::output_tables(cfg, r)) {
            std::string columns;
            const auto body = table.body();
            columns = body.substr(0, body.find('\n'));
            for (auto& f : write_csv(dir, name, table, detail::metadata_for(cfg, hash, columns))) written.push_back(f);
        }
        {
            std::ofstream out(dir / "summary.txt", std::ios::binary);
            out << detail::summary_text(cfg, r, hash);
            if (!out) throw std::runtime_error("cannot write summary.txt");
            written.push_back("summary.txt");
        }
        r.record.finished = detail::utc_now();
        written.push_back("run.json");
        r.record.files = written;
        nlohmann::ordered_json j;
        j["run_id"] = hash;
        j["software_version"] = kVersion;
        j["started"] = r.record.started;
        j["finished"] = r.record.finished;
        j["files"] = r.record.files;
        for (const auto& [k, v] : cfg.echo()) j["config"][k] = v;
        for (const auto& [k, v] : r.summary) j["summary"][k] = v;
        j["diagnostics"] = r.diagnostics;
        std::ofstream out(dir / "run.json", std::ios::binary);
        out << j.dump(2) << "\n";
        if (!out) throw std::runtime_error("cannot write run.json");
    } catch (...) {
        std::error_code ec;
        for (const auto& f : written) fs::remove(dir / f, ec);
        if (created) fs::remove(dir, ec);
        throw;
    }
    return r;
}

}  // namespace specttm

#endif  // SPECTTM_PIPELINE_HPP
