#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tale/relation.hpp"

namespace tale {

class CsvError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct CsvOptions {
    char delimiter = ',';
    bool has_header = true;
    /// Cells equal to this token, and empty cells, encode as NULL.
    std::string null_token;
};

namespace detail {

/// Validates the buffer as UTF-8 (rejects overlong forms, surrogates and
/// codepoints above U+10FFFF). Returns the byte offset of the first invalid
/// sequence, or npos if the buffer is valid.
inline std::size_t find_invalid_utf8(const std::string& s) {
    const auto* p = reinterpret_cast<const unsigned char*>(s.data());
    const std::size_t n = s.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = p[i];
        if (c < 0x80) {
            ++i;
            continue;
        }
        std::size_t len;
        std::uint32_t cp;
        if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1Fu;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0Fu;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07u;
        } else {
            return i;
        }
        if (i + len > n)
            return i;
        for (std::size_t j = 1; j < len; ++j) {
            if ((p[i + j] & 0xC0) != 0x80)
                return i;
            cp = (cp << 6) | (p[i + j] & 0x3Fu);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000))
            return i; // overlong
        if (cp >= 0xD800 && cp <= 0xDFFF)
            return i; // surrogate
        if (cp > 0x10FFFF)
            return i;
        i += len;
    }
    return std::string::npos;
}

/// RFC-4180 record reader over an in-memory buffer: quoted fields, escaped
/// quotes ("") and embedded delimiters/newlines are honored; accepts LF, CRLF
/// and lone CR as record terminators.
class CsvReader {
  public:
    CsvReader(const std::string& data, char delimiter) : data_(data), delim_(delimiter) {}

    /// Reads the next record into `fields`. Returns false at end of input.
    bool next_record(std::vector<std::string>& fields) {
        if (pos_ >= data_.size())
            return false;
        ++record_number_;
        fields.clear();
        std::string field;
        bool quoted = false;

        while (pos_ < data_.size()) {
            char c = data_[pos_];
            if (quoted) {
                if (c == '"') {
                    if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
                        field.push_back('"');
                        pos_ += 2;
                        continue;
                    }
                    quoted = false;
                    ++pos_;
                    if (pos_ < data_.size() && data_[pos_] != delim_ && data_[pos_] != '\n' &&
                        data_[pos_] != '\r')
                        throw CsvError("row " + std::to_string(record_number_) +
                                       ": unexpected character after closing quote");
                    continue;
                }
                field.push_back(c);
                ++pos_;
                continue;
            }
            if (c == '"' && field.empty()) {
                quoted = true;
                ++pos_;
                continue;
            }
            if (c == delim_) {
                fields.push_back(std::move(field));
                field.clear();
                ++pos_;
                continue;
            }
            if (c == '\n' || c == '\r') {
                if (c == '\r' && pos_ + 1 < data_.size() && data_[pos_ + 1] == '\n')
                    ++pos_;
                ++pos_;
                fields.push_back(std::move(field));
                return true;
            }
            field.push_back(c);
            ++pos_;
        }
        if (quoted)
            throw CsvError("row " + std::to_string(record_number_) +
                           ": unterminated quoted field");
        fields.push_back(std::move(field));
        return true;
    }

    std::size_t record_number() const { return record_number_; }

  private:
    const std::string& data_;
    char delim_;
    std::size_t pos_ = 0;
    std::size_t record_number_ = 0;
};

} // namespace detail

/// Parses delimited text into a dictionary-encoded Relation. Cells equal to
/// the configured NULL token, and empty cells, encode as NULL. Without a
/// header, attribute names are synthesized as col0..col(m-1).
inline Relation load_csv(std::istream& in, const CsvOptions& options = {}) {
    std::ostringstream slurp;
    slurp << in.rdbuf();
    std::string data = std::move(slurp).str();

    if (data.starts_with("\xEF\xBB\xBF"))
        data.erase(0, 3);
    if (data.empty())
        throw CsvError("empty input");
    if (auto bad = detail::find_invalid_utf8(data); bad != std::string::npos)
        throw CsvError("invalid UTF-8 byte sequence at offset " + std::to_string(bad));

    detail::CsvReader reader(data, options.delimiter);
    std::vector<std::string> fields;

    std::optional<RelationBuilder> builder;
    if (options.has_header) {
        if (!reader.next_record(fields))
            throw CsvError("empty input");
        builder.emplace(fields);
    }

    auto is_null = [&](const std::string& cell) {
        return cell.empty() || cell == options.null_token;
    };

    while (reader.next_record(fields)) {
        if (!builder) {
            std::vector<std::string> names;
            names.reserve(fields.size());
            for (std::size_t i = 0; i < fields.size(); ++i)
                names.push_back("col" + std::to_string(i));
            builder.emplace(std::move(names));
        }
        const int m = builder->attribute_count();
        if (static_cast<int>(fields.size()) != m)
            throw CsvError("row " + std::to_string(reader.record_number()) + ": expected " +
                           std::to_string(m) + " fields, found " +
                           std::to_string(fields.size()));
        for (int a = 0; a < m; ++a) {
            const std::string& cell = fields[static_cast<std::size_t>(a)];
            if (is_null(cell))
                builder->add_cell(a, std::nullopt);
            else
                builder->add_cell(a, cell);
        }
        builder->end_row();
    }

    if (!builder)
        throw CsvError("no rows in input");
    return builder->finish();
}

inline Relation load_csv_file(const std::string& path, const CsvOptions& options = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CsvError("cannot open file: " + path);
    return load_csv(in, options);
}

/// Writes a relation as delimited text with a header row. NULL cells are
/// written empty; fields containing the delimiter, quotes or newlines are
/// quoted per RFC-4180, so load_csv round-trips the output.
inline void write_csv(std::ostream& out, const Relation& rel, char delimiter = ',') {
    auto write_field = [&](const std::string& value) {
        const bool needs_quoting = value.find_first_of("\"\r\n") != std::string::npos ||
                                   value.find(delimiter) != std::string::npos;
        if (!needs_quoting) {
            out << value;
            return;
        }
        out << '"';
        for (char c : value) {
            if (c == '"')
                out << '"';
            out << c;
        }
        out << '"';
    };

    const int m = rel.attribute_count();
    for (int a = 0; a < m; ++a) {
        if (a > 0)
            out << delimiter;
        write_field(rel.schema().attribute_names[static_cast<std::size_t>(a)]);
    }
    out << "\n";
    for (std::int64_t row = 0; row < rel.row_count(); ++row) {
        for (int a = 0; a < m; ++a) {
            if (a > 0)
                out << delimiter;
            const std::uint32_t code = rel.code(row, a);
            if (code != Relation::kNullCode)
                write_field(rel.decode(a, code));
        }
        out << "\n";
    }
}

} // namespace tale
