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

#ifndef SPECTTM_CSV_HPP
#define SPECTTM_CSV_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace specttm {

/// Plot-ready table; cells are pre-formatted strings.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    template <class... Cells>
    void add(const Cells&... cells) {
        static_assert(sizeof...(Cells) > 0);
        std::vector<std::string> row;
        (row.push_back(cell(cells)), ...);
        if (row.size() != header_.size()) throw std::invalid_argument("CSV row width does not match header");
        rows_.push_back(std::move(row));
    }

    std::string body() const {
        std::string out = join(header_);
        for (const auto& r : rows_) out += join(r);
        return out;
    }
    size_t size() const { return rows_.size(); }

    static std::string cell(double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

private:
    static std::string join(const std::vector<std::string>& r) {
        std::string line;
        for (size_t i = 0; i < r.size(); ++i) {
            if (i) line += ',';
            line += r[i];
        }
        return line + "\n";
    }
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// Writes dir/name.csv and its dir/name.meta sidecar; returns both file names.
inline std::vector<std::string> write_csv(const std::filesystem::path& dir, const std::string& name,
                                          const CsvTable& table, const Metadata& meta) {
    const auto csv = dir / (name + ".csv");
    const auto side = dir / (name + ".meta");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + csv.string());
        out << table.body();
        if (!out) throw std::runtime_error("write failed for " + csv.string());
    }
    {
        std::ofstream out(side, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + side.string());
        out << "file=" << name << ".csv\n";
        for (const auto& [k, v] : meta) out << k << "=" << v << "\n";
        if (!out) throw std::runtime_error("write failed for " + side.string());
    }
    return {name + ".csv", name + ".meta"};
}

/// Reads a sidecar back as ordered key/value pairs.
inline Metadata read_metadata(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Metadata meta;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
    }
    return meta;
}

}  // namespace specttm

#endif  // SPECTTM_CSV_HPP
