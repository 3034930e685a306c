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

#include "specttm/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace specttm;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("specttm_test_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<ConfigError> errors_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigValidationError& e) {
        return e.errors();
    }
    return {};
}

const std::string kSmallDephasing =
    "pipeline = custom\n"
    "model.kind = pure_dephasing\n"
    "model.zz.amplitude = 4\n"
    "model.zz.cutoff = 2\n"
    "protocol.M = 4\n"
    "protocol.K = 8\n"
    "protocol.spam_strength = 0.03\n"
    "analysis.horizon = 10\n"
    "analysis.omega_points = 11\n"
    "master_seed = 11\n";

}  // namespace

TEST(ParseConfig, RejectsSmallK) {
    const auto errs = errors_of("model.zz.amplitude = 4\n\nprotocol.K = 2\n");
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_EQ(errs[0].key, "protocol.K");
    EXPECT_EQ(errs[0].line, 3);
    EXPECT_EQ(errs[0].message, "K below 2N-2=4");
    EXPECT_EQ(errs[0].str(), "line 3: protocol.K: K below 2N-2=4");

    EXPECT_THROW(load_config(std::string(SPECTTM_CONFIG_DIR) + "/invalid_small_k.cfg"), ConfigValidationError);
}

TEST(ParseConfig, RejectsNonPsdCorrelationMatrix) {
    const auto errs = errors_of(
        "model.kind = correlated_xy\nmodel.xx.amplitude = 5\nmodel.yy.amplitude = 5\nmodel.xy.amplitude = 6\n");
    ASSERT_EQ(errs.size(), 1u);
    EXPECT_EQ(errs[0].key, "model");
    EXPECT_NE(errs[0].message.find("not positive semidefinite"), std::string::npos);
    // lambda_3 = 3 is inside the cone.
    EXPECT_TRUE(errors_of(
        "model.kind = correlated_xy\nmodel.xx.amplitude = 5\nmodel.yy.amplitude = 5\nmodel.xy.amplitude = 3\n")
                    .empty());
}

TEST(ParseConfig, MinimalConfig) {
    const auto cfg = load_config(std::string(SPECTTM_CONFIG_DIR) + "/minimal.cfg");
    EXPECT_EQ(cfg.model.kind, ModelKind::pure_dephasing);
    EXPECT_EQ(cfg.model.coupling(2, 2).amplitude, 1.0);
    EXPECT_EQ(cfg.protocol.M, 8);
    EXPECT_EQ(cfg.protocol.K, 12);
    EXPECT_EQ(cfg.pipeline, PipelineKind::custom);
    EXPECT_TRUE(parse_config("").model.coupling(2, 2).is_zero());
}

TEST(ParseConfig, AggregatesLineReferencedErrors) {
    const auto errs = errors_of("protocol.M = 8\nbogus = 1\nprotocol.dt = fast\n# note\nprotocol.M = 9\nnoequals\n");
    ASSERT_EQ(errs.size(), 4u);
    EXPECT_EQ(errs[0].str(), "line 2: bogus: unknown key");
    EXPECT_EQ(errs[1].line, 3);
    EXPECT_EQ(errs[1].key, "protocol.dt");
    EXPECT_EQ(errs[2].str(), "line 5: protocol.M: duplicate key");
    EXPECT_EQ(errs[3].line, 6);

    EXPECT_EQ(errors_of("protocol.spam_strength = 1.5\n")[0].key, "protocol.spam_strength");
    EXPECT_EQ(errors_of("preset = fig9\n")[0].key, "preset");
    EXPECT_EQ(errors_of("model.xx.amplitude = 1\n")[0].message, "pure dephasing couples only zz");
}

TEST(ParseConfig, PresetsAndOverrides) {
    const auto fig3 = parse_config("preset = fig3\nprotocol.M = 12\n");
    EXPECT_EQ(fig3.pipeline, PipelineKind::fig3_rhp);
    EXPECT_EQ(fig3.model.omega_s, 0.1);
    EXPECT_EQ(fig3.model.coupling(2, 2).amplitude, 4.0);
    EXPECT_EQ(fig3.protocol.M, 12);

    const auto forced = parse_config("preset = fig3\n", "fig4");
    EXPECT_EQ(forced.pipeline, PipelineKind::fig4_correlation);
    EXPECT_EQ(forced.model.coupling(2, 2).amplitude, 0.04);
    EXPECT_EQ(forced.protocol.dt, 0.1);

    for (const char* f : {"fig2", "fig3", "fig4", "fig5"}) {
        const auto cfg = load_config(std::string(SPECTTM_CONFIG_DIR) + "/" + f + ".cfg");
        EXPECT_EQ(cfg.preset, f);
        EXPECT_TRUE(validate(cfg).empty());
    }
}

TEST(ConfigHash, IgnoresOutputDirOnly) {
    RunConfig a = parse_config(kSmallDephasing);
    RunConfig b = a;
    b.output_dir = "elsewhere";
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.master_seed = 12;
    EXPECT_NE(config_hash(a), config_hash(b));
    b = a;
    b.model.coupling(2, 2).cutoff = 2.0000000001;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(RunPipeline, DeterministicOutputsWithSidecars) {
    RunConfig cfg = parse_config(kSmallDephasing);
    cfg.output_dir = scratch("det_a").string();
    const auto first = run_pipeline(cfg);
    cfg.output_dir = scratch("det_b").string();
    const auto second = run_pipeline(cfg);
    EXPECT_EQ(first.record.run_id, second.record.run_id);
    EXPECT_EQ(first.record.run_id, config_hash(cfg));
    EXPECT_EQ(first.record.files, second.record.files);

    int csvs = 0;
    for (const auto& f : first.record.files) {
        const fs::path a = fs::path(first.record.output_dir) / f, b = fs::path(second.record.output_dir) / f;
        ASSERT_TRUE(fs::exists(a)) << f;
        if (a.extension() != ".csv") continue;
        ++csvs;
        EXPECT_EQ(read_file(a), read_file(b)) << f;
        fs::path meta = a;
        meta.replace_extension(".meta");
        const auto kv = read_metadata(meta);
        auto lookup = [&](const std::string& key) {
            for (const auto& [k, v] : kv)
                if (k == key) return v;
            return std::string("<missing>");
        };
        EXPECT_EQ(lookup("config_hash"), first.record.run_id) << f;
        EXPECT_EQ(lookup("file"), f);
        EXPECT_EQ(lookup("model.zz.amplitude"), "4");
        EXPECT_EQ(lookup("protocol.K"), "8");
        EXPECT_EQ(lookup("protocol.spam_strength"), "0.03");
    }
    EXPECT_EQ(csvs, 8);
    EXPECT_NE(read_file(fs::path(first.record.output_dir) / "summary.txt").find(first.record.run_id),
              std::string::npos);
    const auto run_json = read_file(fs::path(first.record.output_dir) / "run.json");
    EXPECT_NE(run_json.find("\"software_version\": \"0.1.0\""), std::string::npos);
    EXPECT_EQ(first.summary.at("resource_estimate"), 6.0 * 9 * 4);

    fs::remove_all(first.record.output_dir);
    fs::remove_all(second.record.output_dir);
}

TEST(RunPipeline, IdentityModelGivesZeroAnalysis) {
    RunConfig cfg = parse_config("pipeline = custom\nanalysis.omega_points = 5\n");
    const auto r = compute_pipeline(cfg);
    ASSERT_EQ(r.recovered.size(), 8u);
    for (const auto& s : r.recovered)
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(std::abs(s[a] - 1.0), 0.0, 1e-12);
    EXPECT_LT(r.kernel.rates.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(r.gamma.gamma.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(r.correlation.re_c.cwiseAbs().maxCoeff(), 1e-8);
    for (const auto& s : r.spectra) EXPECT_LT(s.S.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_EQ(r.summary.at("rhp_total"), 0.0);
    EXPECT_LT(r.summary.at("max_prediction_error"), 1e-10);
}

TEST(RunPipeline, Fig3PresetReportsPositiveRhp) {
    RunConfig cfg = parse_config("preset = fig3\n");
    cfg.output_dir = scratch("fig3").string();
    const auto r = run_pipeline(cfg);
    EXPECT_GT(r.summary.at("rhp_z"), 0.0);
    EXPECT_LT(std::abs(r.summary.at("rhp_x")), 1e-9);
    EXPECT_LT(std::abs(r.summary.at("rhp_y")), 1e-9);
    const auto gamma_csv = read_file(fs::path(cfg.output_dir) / "gamma.csv");
    EXPECT_EQ(gamma_csv.substr(0, gamma_csv.find('\n')), "axis,n,gamma,Gamma");
    fs::remove_all(cfg.output_dir);
}

TEST(RunPipeline, RemovesPartialOutputsOnFailure) {
    RunConfig cfg = parse_config(kSmallDephasing);
    const fs::path dir = scratch("partial");
    fs::create_directories(dir / "summary.txt");  // blocks the summary write after the CSVs exist
    std::ofstream(dir / "keep.txt") << "unrelated\n";
    cfg.output_dir = dir.string();
    EXPECT_THROW(run_pipeline(cfg), std::runtime_error);
    std::vector<std::string> left;
    for (const auto& e : fs::directory_iterator(dir)) left.push_back(e.path().filename().string());
    std::sort(left.begin(), left.end());
    EXPECT_EQ(left, (std::vector<std::string>{"keep.txt", "summary.txt"}));
    fs::remove_all(dir);

    RunConfig bad = parse_config(kSmallDephasing);
    bad.protocol.K = 2;
    bad.output_dir = scratch("invalid").string();
    EXPECT_THROW(run_pipeline(bad), ConfigValidationError);
    EXPECT_FALSE(fs::exists(bad.output_dir));
}
