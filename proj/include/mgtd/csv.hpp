#pragma once

// RFC-4180 reader and a minimal writer. Quoted fields may span lines; a
// UTF-8 BOM and CRLF line endings are accepted.

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mgtd/error.hpp"

namespace mgtd::csv {

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {
        if (in_.peek() == 0xEF) {
            char bom[3];
            in_.read(bom, 3);
            if (!(static_cast<unsigned char>(bom[1]) == 0xBB && static_cast<unsigned char>(bom[2]) == 0xBF)) {
                for (int i = 2; i >= 0; --i) in_.putback(bom[i]);
            }
        }
    }

    /// Reads the next record. Returns false at end of input. Throws
    /// MalformedRow for an unterminated quoted field.
    bool next(std::vector<std::string>& row) {
        row.clear();
        if (in_.peek() == std::char_traits<char>::eof()) return false;
        ++record_;
        std::string field;
        bool quoted = false;
        bool was_quoted = false;
        for (;;) {
            const int ch = in_.get();
            if (ch == std::char_traits<char>::eof()) {
                if (quoted) throw Error(ErrorCode::MalformedRow, "unterminated quote in record " + std::to_string(record_));
                row.push_back(std::move(field));
                return true;
            }
            const char c = static_cast<char>(ch);
            if (quoted) {
                if (c == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field += '"';
                    } else {
                        quoted = false;
                    }
                } else {
                    field += c;
                }
                continue;
            }
            if (c == '"' && field.empty() && !was_quoted) {
                quoted = was_quoted = true;
            } else if (c == ',') {
                row.push_back(std::move(field));
                field.clear();
                was_quoted = false;
            } else if (c == '\r' && in_.peek() == '\n') {
                continue;
            } else if (c == '\n') {
                row.push_back(std::move(field));
                return true;
            } else {
                field += c;
            }
        }
    }

    std::size_t record_number() const { return record_; }

private:
    std::istream& in_;
    std::size_t record_ = 0;
};

inline std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out << ',';
        out << escape(row[i]);
    }
    out << '\n';
}

} // namespace mgtd::csv
