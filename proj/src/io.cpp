#include "cpsdyn/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace cpsdyn {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& path, std::size_t line)
{
    const std::string t = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
        throw std::invalid_argument(path + ":" + std::to_string(line) + ": not a number: '" + t + "'");
    return v;
}

}  // namespace

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void CsvWriter::comment(const std::string& text)
{
    std::string t = text;
    for (char& c : t)
        if (c == '\n' || c == '\r')
            c = ' ';
    os_ << "# " << t << '\n';
}

void CsvWriter::header(const std::vector<std::string>& names)
{
    for (std::size_t i = 0; i < names.size(); ++i)
        os_ << (i ? "," : "") << names[i];
    os_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i)
        os_ << (i ? "," : "") << format_double(values[i]);
    os_ << '\n';
}

TwoColumnTable read_two_column_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    TwoColumnTable t;
    bool have_header = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#')
            continue;
        const auto comma = s.find(',');
        if (comma == std::string::npos || s.find(',', comma + 1) != std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected two columns");
        if (!have_header) {
            t.name_a = trim(s.substr(0, comma));
            t.name_b = trim(s.substr(comma + 1));
            have_header = true;
            continue;
        }
        t.a.push_back(parse_double(s.substr(0, comma), path, lineno));
        t.b.push_back(parse_double(s.substr(comma + 1), path, lineno));
    }
    if (!have_header)
        throw std::invalid_argument(path + ": missing header line");
    return t;
}

void write_text_file(const std::string& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << content;
    out.flush();
    if (!out)
        throw IoError("write to '" + path + "' failed");
}

}  // namespace cpsdyn
