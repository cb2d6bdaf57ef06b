#pragma once

// Minimal reader/writer for the TOML subset used by case, scenario and law files:
// [table], [[array-of-tables]], key = number | "string" | true/false | [numbers].
// Numbers are written in shortest round-trip form so files reload bit-exactly.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ffc::text {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Value {
    enum class Kind { Number, String, Bool, Array };
    Kind kind = Kind::Number;
    double num = 0.0;
    std::string str;
    bool flag = false;
    std::vector<double> arr;

    static Value number(double v);
    static Value string(std::string v);
    static Value boolean(bool v);
    static Value array(std::vector<double> v);
};

struct Table {
    std::string name;
    bool is_array_item = false;
    std::size_t line = 0;
    std::vector<std::pair<std::string, Value>> entries;

    const Value* find(const std::string& key) const;
    bool has(const std::string& key) const { return find(key) != nullptr; }

    double num(const std::string& key) const;
    double num_or(const std::string& key, double fallback) const;
    std::string str(const std::string& key) const;
    std::string str_or(const std::string& key, const std::string& fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    std::vector<double> arr(const std::string& key) const;
    int integer(const std::string& key) const;

    void set(const std::string& key, Value v);
    void set_num(const std::string& key, double v) { set(key, Value::number(v)); }
    void set_str(const std::string& key, std::string v) { set(key, Value::string(std::move(v))); }
    void set_flag(const std::string& key, bool v) { set(key, Value::boolean(v)); }
    void set_arr(const std::string& key, std::vector<double> v) { set(key, Value::array(std::move(v))); }

    // Throws naming the first key not in `allowed`.
    void require_known(const std::vector<std::string>& allowed) const;
};

struct Document {
    std::vector<std::string> header_comments;
    std::vector<Table> tables;  // in file order; root table has an empty name

    const Table* table(const std::string& name) const;
    std::vector<const Table*> array(const std::string& name) const;
    Table& add(const std::string& name, bool array_item);
};

Document parse(const std::string& text, const std::string& origin = "<string>");
Document parse_file(const std::string& path);
std::string write(const Document& doc);
void write_file(const Document& doc, const std::string& path);

std::string format_number(double v);

// Numeric CSV with one header line. Cells parse with strtod, so nan and inf
// round-trip.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    int column(const std::string& name) const;  // -1 if absent
};
CsvTable read_csv(const std::string& path);

}  // namespace ffc::text
