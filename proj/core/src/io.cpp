#include "birg/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "birg/version.hpp"

namespace birg {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvBuilder::CsvBuilder(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out_ += ',';
        out_ += header[i];
    }
    out_ += '\n';
}

CsvBuilder& CsvBuilder::field(const std::string& s) {
    if (row_open_) out_ += ',';
    out_ += s;
    row_open_ = true;
    return *this;
}

CsvBuilder& CsvBuilder::field(double v) { return field(format_double(v)); }

CsvBuilder& CsvBuilder::field(long long v) { return field(std::to_string(v)); }

CsvBuilder& CsvBuilder::field(std::uint64_t v) { return field(std::to_string(v)); }

void CsvBuilder::endrow() {
    out_ += '\n';
    row_open_ = false;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    nlohmann::json j;
    j["tool"] = "birg";
    j["version"] = kVersion;
    j["subcommand"] = manifest.subcommand;
    j["resolved_spec"] = manifest.resolved_spec;
    j["outputs"] = manifest.outputs;
    j["wall_time_s"] = manifest.wall_time_s;
    j["seed"] = manifest.seed;
    j["seed_source"] = manifest.seed_source;
    write_text_file(path, j.dump(2) + "\n");
}

}  // namespace birg
