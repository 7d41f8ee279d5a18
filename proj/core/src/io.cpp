#include "pooledloss/io.hpp"

#include <cstdio>

#include <json.hpp>

#include "pooledloss/errors.hpp"

namespace pooledloss {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& file, std::initializer_list<std::string> columns)
    : out_(file) {
    if (!out_) throw ConfigError("cannot open output file " + file.string());
    bool first = true;
    for (const auto& c : columns) {
        if (!first) out_ << ',';
        out_ << c;
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) out_ << ',';
        out_ << fmt17(v);
        first = false;
    }
    out_ << '\n';
}

void CsvWriter::labeled_row(const std::string& label, std::initializer_list<double> values) {
    out_ << label;
    for (double v : values) out_ << ',' << fmt17(v);
    out_ << '\n';
}

void write_manifest(const std::filesystem::path& file, const RunManifest& manifest) {
    nlohmann::json j;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["scheme"] = manifest.scheme;
    j["timings"] = nlohmann::json::object();
    for (const auto& [k, v] : manifest.timings) j["timings"][k] = v;
    j["outputs"] = manifest.outputs;
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot open output file " + file.string());
    out << j.dump(2) << '\n';
}

}  // namespace pooledloss
