#include "pumpdown/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace pumpdown {

std::string format_sig12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_sig17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool in_field = false;  // saw any character of the current field yet
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && !in_field) {
            quoted = true;
            in_field = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
            in_field = false;
        } else if (c != '\r') {
            cur.push_back(c);
            in_field = true;
        }
    }
    out.push_back(cur);
    return out;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

Result<double> parse_double(const std::string& s) {
    if (s.empty()) return Result<double>(ErrorCode::ParseError, "empty numeric field");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (errno != 0 || end != s.c_str() + s.size())
        return Result<double>(ErrorCode::ParseError, "bad numeric field: " + s);
    return Result<double>(v);
}

Result<long long> parse_int(const std::string& s) {
    if (s.empty()) return Result<long long>(ErrorCode::ParseError, "empty integer field");
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (errno != 0 || end != s.c_str() + s.size())
        return Result<long long>(ErrorCode::ParseError, "bad integer field: " + s);
    return Result<long long>(v);
}

}  // namespace pumpdown
