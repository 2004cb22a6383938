#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace channelscope {

// Shortest round-trip decimal form; deterministic across runs.
std::string format_double(double value);

// RFC-4180-ish escaping: quote fields containing comma, quote or newline.
std::string csv_escape(const std::string& field);

// Splits one CSV line honoring double-quote escaping.
std::vector<std::string> split_csv_line(const std::string& line);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

    void write_row(const std::vector<std::string>& fields);
    std::size_t rows_written() const { return rows_; }

    static std::string cell(const std::string& s) { return csv_escape(s); }
    static std::string cell(double v) { return format_double(v); }
    static std::string cell(std::int64_t v) { return std::to_string(v); }

private:
    std::ofstream out_;
    std::size_t columns_;
    std::size_t rows_ = 0;
};

}  // namespace channelscope
