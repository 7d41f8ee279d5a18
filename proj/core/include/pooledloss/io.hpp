#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace pooledloss {

// Full round-trip precision; CSV cells are diffable across runs.
std::string fmt17(double v);

// One-line header, '.' decimal separator, 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& file, std::initializer_list<std::string> columns);

    void row(std::initializer_list<double> values);
    // For rows with a leading label column (e.g. scheme names).
    void labeled_row(const std::string& label, std::initializer_list<double> values);

private:
    std::ofstream out_;
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string scheme;
    std::vector<std::pair<std::string, double>> timings;  // informational
    std::vector<std::string> outputs;                     // files reproduced byte-for-byte by reruns
};

void write_manifest(const std::filesystem::path& file, const RunManifest& manifest);

}  // namespace pooledloss
