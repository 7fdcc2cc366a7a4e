#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace birg {

// 17 significant digits: enough to round-trip any double, stable across
// runs. Non-finite values print as nan/inf.
std::string format_double(double v);

// Minimal CSV assembly; all files use LF endings and end with a newline.
class CsvBuilder {
  public:
    explicit CsvBuilder(const std::vector<std::string>& header);

    CsvBuilder& field(const std::string& s);
    CsvBuilder& field(double v);
    CsvBuilder& field(long long v);
    CsvBuilder& field(std::uint64_t v);
    void endrow();

    const std::string& str() const { return out_; }

  private:
    std::string out_;
    bool row_open_ = false;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

struct Manifest {
    std::string subcommand;
    nlohmann::json resolved_spec;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    std::string seed_source;  // "default" | "config" | "env" | "flag"
};

void write_manifest(const std::string& path, const Manifest& manifest);

}  // namespace birg
