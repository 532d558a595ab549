#pragma once

// CSV and run-manifest plumbing shared by the CLI and the test binaries, so
// that a re-run with the same seed produces byte-identical artifacts no
// matter which entry point wrote them.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace kwtalab {

/// Shortest decimal that round-trips the exact double.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) {
        for (int prec = 1; prec < 17; ++prec) {
            char s[40];
            std::snprintf(s, sizeof s, "%.*g", prec, v);
            std::sscanf(s, "%lf", &back);
            if (back == v) return s;
        }
    }
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) { line(cols); }

    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os_ << ',';
            os_ << cells[i];
        }
        os_ << '\n';
    }

    static std::string cell(double v) { return fmt_double(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }

private:
    std::ostream& os_;
};

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);  // binary: no CRLF surprises
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    return f;
}

/// JSON sidecar recording how an artifact was produced.
inline void write_manifest(const std::string& path, const std::string& command,
                           const nlohmann::json& params, std::uint64_t seed, unsigned threads,
                           const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["command"] = command;
    j["params"] = params;
    j["seed"] = seed;
    j["threads"] = threads;
    j["outputs"] = outputs;
    auto f = open_out(path);
    f << j.dump(2) << "\n";
}

}  // namespace kwtalab
