#include "sql_oracle.hpp"

#include <sqlite3.h>

#include <stdexcept>

#include "sqlfuzz/lexer.hpp"

namespace sqlfuzz::testing {

std::string to_sqlite_dialect(const std::string& sql) {
    TokenStream ts = lex(sql);
    std::string out;
    out.reserve(sql.size() + 8);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::string_view text = ts.text(i);
        if (ts[i].kind == TokenKind::LineComment && !text.empty() && text[0] == '#') {
            out.append("--");
            out.append(text.substr(1));
        } else if (ts[i].kind == TokenKind::Whitespace) {
            // sqlite's tokenizer does not accept vertical tab as whitespace.
            for (char c : text) out.push_back(c == '\v' ? ' ' : c);
        } else {
            out.append(text);
        }
    }
    return out;
}

namespace {

void exec_or_throw(sqlite3* db, const std::string& sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown sqlite error";
        sqlite3_free(err);
        throw std::runtime_error("oracle setup failed: " + msg + " in: " + sql);
    }
}

std::string quote_text(const std::string& v) {
    std::string out = "'";
    for (char c : v) {
        out.push_back(c);
        if (c == '\'') out.push_back('\'');
    }
    out.push_back('\'');
    return out;
}

}  // namespace

SqlOracle::SqlOracle(const Schema& schema) {
    if (sqlite3_open(":memory:", &db_) != SQLITE_OK)
        throw std::runtime_error("cannot open in-memory sqlite database");
    for (const TableDef& t : schema.tables) {
        std::string ddl = "CREATE TABLE " + t.name + " (";
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            if (i) ddl += ", ";
            ddl += t.columns[i].name;
            ddl += t.columns[i].type == ColumnType::Int ? " INTEGER" : " TEXT";
        }
        ddl += ")";
        exec_or_throw(db_, ddl);
        for (const auto& row : t.rows) {
            std::string ins = "INSERT INTO " + t.name + " VALUES (";
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) ins += ", ";
                ins += t.columns[i].type == ColumnType::Int ? row[i] : quote_text(row[i]);
            }
            ins += ")";
            exec_or_throw(db_, ins);
        }
    }
}

SqlOracle::~SqlOracle() {
    if (db_) sqlite3_close(db_);
}

std::optional<ResultSet> SqlOracle::run(const std::string& sql) {
    std::string rewritten = to_sqlite_dialect(sql);
    exec_or_throw(db_, "SAVEPOINT oracle");

    ResultSet rows;
    bool ok = true;
    const char* cursor = rewritten.c_str();
    while (ok && cursor && *cursor) {
        sqlite3_stmt* stmt = nullptr;
        const char* tail = nullptr;
        if (sqlite3_prepare_v2(db_, cursor, -1, &stmt, &tail) != SQLITE_OK) {
            ok = false;
            break;
        }
        cursor = tail;
        if (!stmt) continue;  // comment or whitespace only
        int rc;
        while ((rc = sqlite3_step(stmt)) == SQLITE_ROW) {
            std::vector<std::string> row;
            int n = sqlite3_column_count(stmt);
            for (int c = 0; c < n; ++c) {
                const unsigned char* text = sqlite3_column_text(stmt, c);
                row.push_back(text ? reinterpret_cast<const char*>(text) : "<null>");
            }
            rows.push_back(std::move(row));
        }
        if (rc != SQLITE_DONE) ok = false;
        sqlite3_finalize(stmt);
    }

    exec_or_throw(db_, "ROLLBACK TO oracle");
    exec_or_throw(db_, "RELEASE oracle");
    if (!ok) return std::nullopt;
    return rows;
}

std::optional<bool> SqlOracle::predicate(const std::string& pred) {
    auto rows = run("SELECT 1 WHERE " + pred);
    if (!rows) return std::nullopt;
    return !rows->empty();
}

}  // namespace sqlfuzz::testing
