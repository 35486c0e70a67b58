#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "senti/error.hpp"

// RFC-4180-style CSV. Quoted fields may contain commas, doubled quotes and
// newlines; records end at a bare LF or CRLF. A quote opening a field that is
// never closed raises MalformedRow. Quotes inside unquoted fields are kept as
// literal characters, which is how most real-world dumps behave.

namespace senti::csv {

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads one record. Returns false on clean EOF.
    bool next(std::vector<std::string>& fields) {
        fields.clear();
        int c = in_.get();
        if (c == EOF) return false;
        ++record_;
        std::string field;
        bool in_quotes = false;
        bool quoted_field = false;
        for (;; c = in_.get()) {
            if (c == EOF) {
                if (in_quotes)
                    throw MalformedRow(record_, "unbalanced quotes (EOF inside quoted field)");
                fields.push_back(std::move(field));
                return true;
            }
            const char ch = static_cast<char>(c);
            if (in_quotes) {
                if (ch == '"') {
                    if (in_.peek() == '"') {
                        in_.get();
                        field.push_back('"');
                    } else {
                        in_quotes = false;
                    }
                } else {
                    field.push_back(ch);
                }
                continue;
            }
            switch (ch) {
                case '"':
                    if (field.empty() && !quoted_field) {
                        in_quotes = true;
                        quoted_field = true;
                    } else {
                        field.push_back(ch);
                    }
                    break;
                case ',':
                    fields.push_back(std::move(field));
                    field.clear();
                    quoted_field = false;
                    break;
                case '\r':
                    if (in_.peek() == '\n') in_.get();
                    fields.push_back(std::move(field));
                    return true;
                case '\n':
                    fields.push_back(std::move(field));
                    return true;
                default:
                    field.push_back(ch);
                    break;
            }
        }
    }

    // 1-based index of the record most recently returned.
    std::size_t record_number() const { return record_; }

private:
    std::istream& in_;
    std::size_t record_ = 0;
};

inline bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

inline void write_field(std::ostream& out, const std::string& field) {
    if (!needs_quoting(field)) {
        out << field;
        return;
    }
    out << '"';
    for (const char ch : field) {
        if (ch == '"') out << '"';
        out << ch;
    }
    out << '"';
}

inline void write_record(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out << ',';
        write_field(out, fields[i]);
    }
    out << '\n';
}

}  // namespace senti::csv
