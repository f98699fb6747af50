#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace oscsim
{
//! Numeric table with a header row. Values print with 17 significant digits.
struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(std::string_view name) const;
    std::vector<double> column(std::string_view name) const;
};

std::string format_number(double value);

std::string to_csv(CsvTable const& table);
CsvTable parse_csv(std::string_view text);

void write_csv(std::filesystem::path const& path, CsvTable const& table);
CsvTable read_csv(std::filesystem::path const& path);

void write_text(std::filesystem::path const& path, std::string_view text);
std::string read_text(std::filesystem::path const& path);

}  // namespace oscsim
