#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sqlfuzz/rng.hpp"

namespace sqlfuzz {

enum class Label : int { Sane = 0, Malicious = 1 };

struct Record {
    std::string query;
    Label label = Label::Sane;
    std::string provenance;
};

struct Dataset {
    std::vector<Record> records;

    std::size_t size() const { return records.size(); }
    std::size_t count(Label l) const;
};

enum class ColumnType { Int, Text };

struct Column {
    std::string name;
    ColumnType type;
};

struct TableDef {
    std::string name;
    std::vector<Column> columns;
    /// Fixture rows, one raw value per column (unquoted).
    std::vector<std::vector<std::string>> rows;
};

struct Schema {
    std::vector<TableDef> tables;
    const TableDef* find(const std::string& name) const;
};

/// Two-table fixture (users, orders) with 50 deterministic rows each; the
/// target database for the grammar generator and the execution oracle.
Schema fixture_schema();

/// Value suppliers for text columns. Column names are matched here first;
/// unmatched text columns draw short random words.
struct ValueDictionaries {
    std::vector<std::string> names;
    std::vector<std::string> nations;
    static ValueDictionaries builtin();
};

struct AttackCorpus {
    std::vector<std::string> payloads;
    std::string source;

    /// One payload per line; '#'-prefixed lines and blank lines are ignored.
    static AttackCorpus load(const std::string& path);
    static AttackCorpus from_lines(std::vector<std::string> lines, std::string source = "inline");
};

/// Grammar-based benign query generation over the schema. Deterministic
/// under seed; expression depth bounded by 3.
Dataset generate_benign(std::size_t n, const Schema& schema, const ValueDictionaries& dicts,
                        std::uint64_t seed);

/// Malicious queries: a grammar query with a corpus payload substituted into
/// one user-value position (quoted string or numeric).
Dataset generate_malicious(std::size_t n, const Schema& schema, const AttackCorpus& corpus,
                           std::uint64_t seed);

/// File format: UTF-8, one record per line, "<label>\t<base64(query)>",
/// label in {0,1}. Malformed lines raise std::runtime_error naming the line.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

}  // namespace sqlfuzz
