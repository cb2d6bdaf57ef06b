#include "ffc/textio.hpp"

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ffc::text {

Value Value::number(double v) {
    Value x;
    x.kind = Kind::Number;
    x.num = v;
    return x;
}
Value Value::string(std::string v) {
    Value x;
    x.kind = Kind::String;
    x.str = std::move(v);
    return x;
}
Value Value::boolean(bool v) {
    Value x;
    x.kind = Kind::Bool;
    x.flag = v;
    return x;
}
Value Value::array(std::vector<double> v) {
    Value x;
    x.kind = Kind::Array;
    x.arr = std::move(v);
    return x;
}

namespace {

std::string where(const Table& t) {
    std::string n = t.name.empty() ? std::string("<root>") : t.name;
    return "[" + n + "] (line " + std::to_string(t.line) + ")";
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Strip a trailing comment that is not inside a string.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

double parse_double(const std::string& tok, const std::string& ctx) {
    std::string t = trim(tok);
    if (t == "inf" || t == "+inf") return HUGE_VAL;
    if (t == "-inf") return -HUGE_VAL;
    if (t.empty()) throw ParseError(ctx + ": empty number");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || errno == ERANGE)
        throw ParseError(ctx + ": bad number '" + t + "'");
    return v;
}

Value parse_value(const std::string& raw, const std::string& ctx) {
    std::string s = trim(raw);
    if (s.empty()) throw ParseError(ctx + ": missing value");
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"') throw ParseError(ctx + ": unterminated string");
        return Value::string(s.substr(1, s.size() - 2));
    }
    if (s == "true") return Value::boolean(true);
    if (s == "false") return Value::boolean(false);
    if (s.front() == '[') {
        if (s.back() != ']') throw ParseError(ctx + ": unterminated array");
        std::string body = trim(s.substr(1, s.size() - 2));
        std::vector<double> out;
        if (!body.empty()) {
            std::stringstream ss(body);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (trim(item).empty()) continue;  // trailing comma
                out.push_back(parse_double(item, ctx));
            }
        }
        return Value::array(std::move(out));
    }
    return Value::number(parse_double(s, ctx));
}

}  // namespace

const Value* Table::find(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

double Table::num(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ParseError(where(*this) + ": missing field '" + key + "'");
    if (v->kind != Value::Kind::Number) throw ParseError(where(*this) + ": field '" + key + "' must be a number");
    return v->num;
}

double Table::num_or(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

std::string Table::str(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ParseError(where(*this) + ": missing field '" + key + "'");
    if (v->kind != Value::Kind::String) throw ParseError(where(*this) + ": field '" + key + "' must be a string");
    return v->str;
}

std::string Table::str_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
}

bool Table::flag_or(const std::string& key, bool fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::Bool) throw ParseError(where(*this) + ": field '" + key + "' must be true/false");
    return v->flag;
}

std::vector<double> Table::arr(const std::string& key) const {
    const Value* v = find(key);
    if (!v) throw ParseError(where(*this) + ": missing field '" + key + "'");
    if (v->kind != Value::Kind::Array) throw ParseError(where(*this) + ": field '" + key + "' must be an array");
    return v->arr;
}

int Table::integer(const std::string& key) const {
    double v = num(key);
    if (v != std::floor(v) || std::fabs(v) > 1e9)
        throw ParseError(where(*this) + ": field '" + key + "' must be an integer");
    return static_cast<int>(v);
}

void Table::set(const std::string& key, Value v) {
    for (auto& [k, old] : entries)
        if (k == key) {
            old = std::move(v);
            return;
        }
    entries.emplace_back(key, std::move(v));
}

void Table::require_known(const std::vector<std::string>& allowed) const {
    for (const auto& [k, v] : entries)
        if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
            throw ParseError(where(*this) + ": unknown field '" + k + "'");
}

const Table* Document::table(const std::string& name) const {
    for (const auto& t : tables)
        if (t.name == name && !t.is_array_item) return &t;
    return nullptr;
}

std::vector<const Table*> Document::array(const std::string& name) const {
    std::vector<const Table*> out;
    for (const auto& t : tables)
        if (t.name == name && t.is_array_item) out.push_back(&t);
    return out;
}

Table& Document::add(const std::string& name, bool array_item) {
    Table t;
    t.name = name;
    t.is_array_item = array_item;
    tables.push_back(std::move(t));
    return tables.back();
}

Document parse(const std::string& text, const std::string& origin) {
    Document doc;
    doc.tables.emplace_back();  // root
    doc.tables.back().line = 0;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool seen_content = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (!seen_content && !t.empty() && t[0] == '#') {
            doc.header_comments.push_back(t);
            continue;
        }
        t = trim(strip_comment(line));
        if (t.empty()) continue;
        seen_content = true;
        std::string ctx = origin + ":" + std::to_string(lineno);
        if (t.rfind("[[", 0) == 0) {
            if (t.size() < 4 || t.substr(t.size() - 2) != "]]") throw ParseError(ctx + ": bad table header");
            auto& tb = doc.add(trim(t.substr(2, t.size() - 4)), true);
            tb.line = lineno;
            continue;
        }
        if (t[0] == '[') {
            if (t.back() != ']') throw ParseError(ctx + ": bad table header");
            std::string name = trim(t.substr(1, t.size() - 2));
            if (doc.table(name)) throw ParseError(ctx + ": duplicate table [" + name + "]");
            auto& tb = doc.add(name, false);
            tb.line = lineno;
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError(ctx + ": expected key = value");
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        // multi-line numeric arrays
        if (!val.empty() && val[0] == '[') {
            while (val.find(']') == std::string::npos) {
                if (!std::getline(in, line)) throw ParseError(ctx + ": unterminated array");
                ++lineno;
                val += " " + trim(strip_comment(line));
            }
        }
        if (key.empty()) throw ParseError(ctx + ": empty key");
        Table& cur = doc.tables.back();
        if (cur.find(key)) throw ParseError(ctx + ": duplicate key '" + key + "'");
        cur.entries.emplace_back(key, parse_value(val, ctx));
    }
    return doc;
}

Document parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path);
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    // shortest representation that parses back to the same double
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

void write_value(std::ostream& os, const Value& v) {
    switch (v.kind) {
        case Value::Kind::Number: os << format_number(v.num); break;
        case Value::Kind::String: os << '"' << v.str << '"'; break;
        case Value::Kind::Bool: os << (v.flag ? "true" : "false"); break;
        case Value::Kind::Array:
            os << '[';
            for (std::size_t i = 0; i < v.arr.size(); ++i) {
                if (i) os << ", ";
                os << format_number(v.arr[i]);
            }
            os << ']';
            break;
    }
}

}  // namespace

std::string write(const Document& doc) {
    std::ostringstream os;
    for (const auto& c : doc.header_comments) os << c << '\n';
    bool first = true;
    for (const auto& t : doc.tables) {
        if (t.name.empty() && t.entries.empty()) continue;
        if (!first || !doc.header_comments.empty()) os << '\n';
        first = false;
        if (!t.name.empty()) os << (t.is_array_item ? "[[" : "[") << t.name << (t.is_array_item ? "]]" : "]") << '\n';
        for (const auto& [k, v] : t.entries) {
            os << k << " = ";
            write_value(os, v);
            os << '\n';
        }
    }
    return os.str();
}

void write_file(const Document& doc, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot write '" + path + "'");
    f << write(doc);
    if (!f) throw ParseError("write failed for '" + path + "'");
}

namespace {

std::vector<std::string> split_cells(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        const auto a = cur.find_first_not_of(" \t");
        const auto b = cur.find_last_not_of(" \t\r");
        out.push_back(a == std::string::npos ? "" : cur.substr(a, b - a + 1));
    }
    return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(path + ": empty file");
    t.header = split_cells(line);
    std::size_t ln = 1;
    while (std::getline(is, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto cells = split_cells(line);
        if (cells.size() != t.header.size())
            throw std::runtime_error(path + ":" + std::to_string(ln) + ": expected " + std::to_string(t.header.size()) +
                                     " cells, got " + std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            char* end = nullptr;
            const double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || *end != '\0')
                throw std::runtime_error(path + ":" + std::to_string(ln) + ": not a number: '" + c + "'");
            row.push_back(v);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace ffc::text
