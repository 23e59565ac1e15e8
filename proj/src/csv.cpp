#include "coxcal/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "coxcal/errors.hpp"

namespace coxcal {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_double(const std::string& text, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(row, column, "cannot parse '" + text + "' as a number");
    }
    if (!std::isfinite(value)) throw ParseError(row, column, "non-finite value");
    return value;
}

int parse_event(const std::string& text, std::size_t row, const std::string& column) {
    if (text == "0") return 0;
    if (text == "1") return 1;
    throw ParseError(row, column, "event indicator must be 0 or 1, got '" + text + "'");
}

}  // namespace

std::size_t CsvTable::column_index(const std::string& name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError("missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("'" + path + "' has no header row");
    table.header = split_fields(line);
    if (table.header.empty()) throw SchemaError("'" + path + "' has an empty header row");

    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != table.header.size()) {
            throw ParseError(table.rows.size() + 1, table.header.front(),
                             "expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    return table;
}

void ColumnMapping::validate() const {
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
        if (name.empty()) throw SchemaError("column mapping has an empty column name");
        if (!seen.insert(name).second) {
            throw SchemaError("column '" + name + "' mapped more than once");
        }
    };
    add(time);
    add(event);
    add(xtilde);
    add(u);
    for (const auto& z : z_columns) add(z);
    if (x_true) add(*x_true);
}

Dataset ingest_csv(const std::string& path, const ColumnMapping& mapping,
                   std::vector<std::string>* skipped_diagnostics) {
    mapping.validate();
    const CsvTable table = read_csv(path);

    const std::size_t c_time = table.column_index(mapping.time);
    const std::size_t c_event = table.column_index(mapping.event);
    const std::size_t c_xtilde = table.column_index(mapping.xtilde);
    const std::size_t c_u = table.column_index(mapping.u);
    std::vector<std::size_t> c_z;
    for (const auto& z : mapping.z_columns) c_z.push_back(table.column_index(z));
    std::optional<std::size_t> c_x;
    if (mapping.x_true) c_x = table.column_index(*mapping.x_true);

    Dataset data;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        const std::size_t row_no = r + 1;

        std::vector<std::size_t> mapped = {c_time, c_event, c_xtilde, c_u};
        mapped.insert(mapped.end(), c_z.begin(), c_z.end());
        if (c_x) mapped.push_back(*c_x);
        const bool missing = std::any_of(mapped.begin(), mapped.end(),
                                         [&](std::size_t c) { return fields[c].empty(); });
        if (missing) {
            if (skipped_diagnostics) {
                skipped_diagnostics->push_back("row " + std::to_string(row_no) +
                                               ": skipped (missing mapped field)");
            }
            continue;
        }

        SurvivalRecord rec;
        rec.time = parse_double(fields[c_time], row_no, mapping.time);
        if (rec.time < 0.0) throw ParseError(row_no, mapping.time, "time must be nonnegative");
        rec.event = parse_event(fields[c_event], row_no, mapping.event);
        rec.xtilde = parse_double(fields[c_xtilde], row_no, mapping.xtilde);
        rec.u = parse_double(fields[c_u], row_no, mapping.u);
        for (std::size_t k = 0; k < c_z.size(); ++k) {
            rec.z.push_back(parse_double(fields[c_z[k]], row_no, mapping.z_columns[k]));
        }
        if (c_x) rec.x_true = parse_double(fields[*c_x], row_no, *mapping.x_true);
        data.records.push_back(std::move(rec));
    }

    if (data.records.empty()) throw EmptyAfterFilteringError();
    return data;
}

std::map<std::string, std::string> parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");

    std::map<std::string, std::string> values;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#' || text.front() == ';') continue;
        if (text.front() == '[') {
            if (text.back() != ']') {
                throw ConfigError(path + ":" + std::to_string(line_no) + ": unterminated section");
            }
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(text.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        }
        const std::string full = section.empty() ? key : section + "." + key;
        if (!values.emplace(full, trim(text.substr(eq + 1))).second) {
            throw ConfigError(path + ":" + std::to_string(line_no) + ": duplicate key '" + full +
                              "'");
        }
    }
    return values;
}

}  // namespace coxcal
