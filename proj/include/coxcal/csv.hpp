#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coxcal/dataset.hpp"

namespace coxcal {

// Raw comma-separated table: header row plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(const std::string& name) const;  // throws SchemaError
};

CsvTable read_csv(const std::string& path);

struct ColumnMapping {
    std::string time = "time";
    std::string event = "event";
    std::string xtilde = "xtilde";
    std::string u = "u";
    std::vector<std::string> z_columns;
    std::optional<std::string> x_true;

    void validate() const;  // columns distinct and named
};

// Typed ingestion. Rows with empty mapped fields are skipped and reported in
// *skipped_diagnostics; malformed non-empty values raise ParseError with the
// 1-based data row number.
Dataset ingest_csv(const std::string& path, const ColumnMapping& mapping,
                   std::vector<std::string>* skipped_diagnostics = nullptr);

// Flat "key = value" config file with optional [section] headers; keys are
// returned as "section.key" ("" section for the preamble).
std::map<std::string, std::string> parse_config_file(const std::string& path);

}  // namespace coxcal
