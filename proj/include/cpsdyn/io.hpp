#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace cpsdyn {

/// Unreadable or unwritable file.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// 17 significant digits, '.' decimal point, locale independent.
std::string format_double(double v);

/// Comma-separated rows with LF line endings.
class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    /// Writes "# text"; embedded newlines are replaced by spaces.
    void comment(const std::string& text);
    void header(const std::vector<std::string>& names);
    void row(const std::vector<double>& values);

  private:
    std::ostream& os_;
};

struct TwoColumnTable {
    std::string name_a;
    std::string name_b;
    std::vector<double> a;
    std::vector<double> b;
};

/// Lines starting with '#' and blank lines are skipped; the first remaining
/// line is the header. Throws IoError if the file cannot be opened and
/// std::invalid_argument on malformed rows.
TwoColumnTable read_two_column_csv(const std::string& path);

/// Replace `path` with `content`. Throws IoError on failure.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace cpsdyn
