#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ssc::app {

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// 17 significant digits, enough to round-trip a double.
std::string num(double v);

/// Accumulates CSV rows; numbers go through num().
class Csv {
public:
    explicit Csv(const std::vector<std::string>& header);
    Csv& cell(double v);
    Csv& cell(long long v);
    Csv& cell(const std::string& s);
    void end_row();
    [[nodiscard]] const std::string& str() const { return buf_; }

private:
    std::string buf_;
    bool fresh_ = true;
};

}  // namespace ssc::app
