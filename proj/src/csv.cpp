#include "oscsim/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oscsim
{
std::size_t CsvTable::column_index(std::string_view name) const
{
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name)
            return k;
    throw std::out_of_range("no CSV column named " + std::string(name));
}

std::vector<double> CsvTable::column(std::string_view name) const
{
    std::size_t const k = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto const& r : rows)
        out.push_back(r.at(k));
    return out;
}

std::string format_number(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string to_csv(CsvTable const& table)
{
    std::string out;
    for (std::size_t k = 0; k < table.header.size(); ++k)
    {
        if (k)
            out += ',';
        out += table.header[k];
    }
    out += '\n';
    for (auto const& row : table.rows)
    {
        if (row.size() != table.header.size())
            throw std::invalid_argument("CSV row width differs from the header");
        for (std::size_t k = 0; k < row.size(); ++k)
        {
            if (k)
                out += ',';
            out += format_number(row[k]);
        }
        out += '\n';
    }
    return out;
}

namespace
{
std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true)
    {
        auto const pos = line.find(',', start);
        cells.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no)
{
    if (cell == "nan")
        return std::nan("");
    if (cell == "inf")
        return INFINITY;
    if (cell == "-inf")
        return -INFINITY;
    double v = 0.0;
    auto const [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw std::runtime_error("CSV line " + std::to_string(line_no) + ": bad number '"
                                 + std::string(cell) + "'");
    return v;
}
}  // namespace

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size())
    {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        auto cells = split(line);
        if (table.header.empty())
        {
            for (auto c : cells)
                table.header.emplace_back(c);
            continue;
        }
        if (cells.size() != table.header.size())
            throw std::runtime_error("CSV line " + std::to_string(line_no) + " has "
                                     + std::to_string(cells.size()) + " cells, expected "
                                     + std::to_string(table.header.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto c : cells)
            row.push_back(parse_cell(c, line_no));
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty())
        throw std::runtime_error("CSV input has no header");
    return table;
}

void write_text(std::filesystem::path const& path, std::string_view text)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string read_text(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_csv(std::filesystem::path const& path, CsvTable const& table)
{
    write_text(path, to_csv(table));
}

CsvTable read_csv(std::filesystem::path const& path)
{
    return parse_csv(read_text(path));
}

}  // namespace oscsim
