#include "csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace lspart::cli {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

} // namespace

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = text.find(sep, start);
        out.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

CsvTable CsvTable::read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputFailure("cannot open input file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

CsvTable CsvTable::parse(std::string_view text, const std::string& source) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    CsvTable t;
    t.source_ = source;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        ++line_no;
        start = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        auto fields = split(line, ',');
        if (t.header_.empty()) {
            t.header_ = std::move(fields);
            for (const auto& h : t.header_)
                if (h.empty()) throw InputFailure(source + ": empty column name in header");
        } else {
            if (fields.size() != t.header_.size()) {
                std::ostringstream os;
                os << source << ": line " << line_no << " has " << fields.size() << " fields, expected "
                   << t.header_.size();
                throw InputFailure(os.str());
            }
            t.cells_.push_back(std::move(fields));
        }
        if (end == text.size()) break;
    }
    if (t.header_.empty()) throw InputFailure(source + ": missing header row");
    return t;
}

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header_.size(); ++c)
        if (header_[c] == name) return c;
    throw InputFailure(source_ + ": no column named '" + name + "'");
}

std::vector<double> CsvTable::numeric(const std::string& name) const {
    const std::size_t c = column(name);
    std::vector<double> out;
    out.reserve(cells_.size());
    for (std::size_t r = 0; r < cells_.size(); ++r) {
        const std::string& s = cells_[r][c];
        char* endp = nullptr;
        errno = 0;
        const double v = s.empty() ? 0.0 : std::strtod(s.c_str(), &endp);
        if (s.empty() || s == "NA" || endp != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) {
            std::ostringstream os;
            os << source_ << ": row " << r + 1 << ", column '" << name << "': ";
            if (s.empty() || s == "NA") {
                os << "missing value";
            } else {
                os << "'" << s << "' is not a finite number";
            }
            throw InputFailure(os.str());
        }
        out.push_back(v);
    }
    return out;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[32];
    for (int precision = 15; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

void write_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputFailure("cannot write '" + path + "'");
        out << contents;
        out.flush();
        if (!out) throw InputFailure("failed writing '" + path + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw InputFailure("cannot replace '" + path + "'");
    }
}

} // namespace lspart::cli
