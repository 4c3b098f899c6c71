#include "ssc_app/output.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <system_error>

namespace ssc::app {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::filesystem::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
        out << content;
        out.flush();
        if (!out) throw std::filesystem::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
    }
    std::filesystem::rename(tmp, path);
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Csv::Csv(const std::vector<std::string>& header) {
    for (const auto& h : header) cell(h);
    end_row();
}

Csv& Csv::cell(double v) { return cell(num(v)); }

Csv& Csv::cell(long long v) { return cell(std::to_string(v)); }

Csv& Csv::cell(const std::string& s) {
    if (!fresh_) buf_ += ',';
    buf_ += s;
    fresh_ = false;
    return *this;
}

void Csv::end_row() {
    buf_ += '\n';
    fresh_ = true;
}

}  // namespace ssc::app
