#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepg2p::tsv {

std::vector<std::string_view> split(std::string_view line, char sep = '\t');

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

std::optional<double> try_parse_double(std::string_view text);
std::optional<std::int64_t> try_parse_int(std::string_view text);

/// Line reader that tracks 1-based line numbers and strips trailing CR.
class LineReader {
public:
    LineReader(std::istream& in, std::string source)
      : in_(in)
      , source_(std::move(source))
    { }

    bool next(std::string& line);
    std::size_t line_number() const { return line_number_; }
    const std::string& source() const { return source_; }
    /// "<source>:<line>: <message>"
    std::string where(std::string_view message) const;

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_number_ = 0;
};

} // namespace deepg2p::tsv
