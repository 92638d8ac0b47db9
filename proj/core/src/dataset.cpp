#include "sqlfuzz/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sqlfuzz/base64.hpp"

namespace sqlfuzz {

std::size_t Dataset::count(Label l) const {
    std::size_t c = 0;
    for (const Record& r : records)
        if (r.label == l) ++c;
    return c;
}

const TableDef* Schema::find(const std::string& name) const {
    for (const TableDef& t : tables)
        if (t.name == name) return &t;
    return nullptr;
}

Schema fixture_schema() {
    Schema s;
    ValueDictionaries dicts = ValueDictionaries::builtin();
    Rng rng(0x5eedf00d);

    TableDef users{"users", {{"name", ColumnType::Text}, {"pw", ColumnType::Text}}, {}};
    for (int i = 0; i < 50; ++i) {
        // Lowercase names keep '=' vs LIKE comparisons indistinguishable on
        // this fixture (LIKE is case-insensitive).
        std::string name = rng.pick(dicts.names) + std::to_string(i);
        users.rows.push_back({name, rng.lower_alpha(8)});
    }
    s.tables.push_back(std::move(users));

    TableDef orders{"orders",
                    {{"id", ColumnType::Int}, {"country", ColumnType::Text},
                     {"amount", ColumnType::Int}},
                    {}};
    for (int i = 0; i < 50; ++i) {
        orders.rows.push_back({std::to_string(i), rng.pick(dicts.nations),
                               std::to_string(rng.range(1, 999))});
    }
    s.tables.push_back(std::move(orders));
    return s;
}

ValueDictionaries ValueDictionaries::builtin() {
    return {
        {"alice", "bob",   "carol", "dave",  "erin",  "frank", "grace", "heidi",
         "ivan",  "judy",  "karl",  "laura", "mike",  "nina",  "oscar", "peggy",
         "quinn", "rita",  "steve", "trudy", "ursula","victor","wendy", "xavier",
         "yvonne","zack",  "smith", "jones", "brown", "taylor","wilson","davies",
         "evans", "walker","white", "green", "hall",  "wood",  "clarke","hunt"},
        {"italy",  "france", "germany", "spain",  "portugal", "greece",  "norway",
         "sweden", "finland","denmark", "poland", "austria",  "belgium", "ireland",
         "iceland","hungary","romania", "croatia","slovenia", "slovakia","estonia",
         "latvia", "malta",  "cyprus",  "japan",  "china",    "india",   "brazil",
         "canada", "mexico", "peru",    "chile",  "egypt",    "kenya",   "ghana",
         "morocco","turkey", "vietnam", "laos",   "nepal"},
    };
}

AttackCorpus AttackCorpus::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    AttackCorpus corpus;
    corpus.source = path;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        corpus.payloads.push_back(line);
    }
    if (corpus.payloads.empty())
        throw std::runtime_error("corpus file has no payloads: " + path);
    return corpus;
}

AttackCorpus AttackCorpus::from_lines(std::vector<std::string> lines, std::string source) {
    if (lines.empty()) throw std::runtime_error("empty attack corpus");
    return {std::move(lines), std::move(source)};
}

namespace {

/// Builder that records user-value sites (the text between quotes, or a bare
/// numeric value) so the malicious generator can substitute a payload.
struct QueryBuilder {
    std::string text;
    struct Site {
        std::size_t begin, length;
        bool quoted;
    };
    std::vector<Site> sites;

    void raw(std::string_view s) { text.append(s); }

    void text_value(const std::string& v) {
        text.push_back('\'');
        sites.push_back({text.size(), v.size(), true});
        text.append(v);
        text.push_back('\'');
    }

    void int_value(const std::string& v) {
        sites.push_back({text.size(), v.size(), false});
        text.append(v);
    }
};

// Benign traffic is not sterile: ids show up as hex, identifiers get
// backtick-quoted, expression groups carry defensive parentheses, and logged
// statements carry trailing remarks. Injection, by contrast, lands in plain
// string-concatenated statements — but it often arrives through obfuscation
// tooling that pads the statement with /*..*/ inline comments to dodge
// signature filters. Both classes share one grammar, but the artifact
// densities differ: organic traffic is rich in structural artifacts and
// nearly free of inline comments, attack targets are the reverse. Keeping
// every artifact present in both classes (at different rates) stops
// detectors from learning absolute "unusual byte implies attack" shortcuts
// that no real deployment has.
struct ArtifactRates {
    double hint_comment;
    double trailing_comment;
    double hex_int;
    double backtick;
    double paren_group;
    // Hand-built statements overwhelmingly chain conditions with AND (each
    // filter narrows the result); generated/organic traffic mixes in OR
    // branches from search forms and report builders far more often.
    double or_connector;
    static ArtifactRates organic() { return {0.05, 0.10, 0.10, 0.12, 0.60, 0.50}; }
    static ArtifactRates target() { return {0.45, 0.02, 0.02, 0.00, 0.10, 0.10}; }
};

void maybe_hint_comment(QueryBuilder& qb, Rng& rng, const ArtifactRates& ar) {
    if (rng.chance(ar.hint_comment)) {
        qb.raw("/*");
        qb.raw(rng.alnum(2 + rng.below(6)));
        qb.raw("*/ ");
    }
}

void maybe_trailing_comment(QueryBuilder& qb, Rng& rng, const ArtifactRates& ar) {
    if (rng.chance(ar.trailing_comment)) {
        qb.raw(rng.chance(0.5) ? " -- " : " #");
        qb.raw(rng.alnum(2 + rng.below(8)));
    }
}

std::string int_literal(Rng& rng, const ArtifactRates& ar) {
    long v = rng.range(0, 999);
    if (rng.chance(ar.hex_int)) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "0x%lX", v);
        return buf;
    }
    return std::to_string(v);
}

void emit_column_name(QueryBuilder& qb, Rng& rng, const ArtifactRates& ar, const Column& col) {
    if (rng.chance(ar.backtick)) {
        qb.raw("`");
        qb.raw(col.name);
        qb.raw("`");
    } else {
        qb.raw(col.name);
    }
}

const Column& pick_column(Rng& rng, const TableDef& t) {
    return t.columns[rng.below(t.columns.size())];
}

std::string dict_text_value(Rng& rng, const ValueDictionaries& dicts, const Column& col) {
    if (col.name == "name") return rng.pick(dicts.names);
    if (col.name == "country") return rng.pick(dicts.nations);
    return rng.lower_alpha(3 + rng.below(6));
}

void emit_value(QueryBuilder& qb, Rng& rng, const ValueDictionaries& dicts,
                const ArtifactRates& ar, const Column& col) {
    if (col.type == ColumnType::Int)
        qb.int_value(int_literal(rng, ar));
    else
        qb.text_value(dict_text_value(rng, dicts, col));
}

void emit_expr(QueryBuilder& qb, Rng& rng, const ValueDictionaries& dicts,
               const ArtifactRates& ar, const TableDef& t, int depth) {
    if (depth < 3 && rng.chance(0.5)) {
        bool grouped = rng.chance(ar.paren_group);
        if (grouped) qb.raw("(");
        emit_expr(qb, rng, dicts, ar, t, depth + 1);
        qb.raw(rng.chance(ar.or_connector) ? " OR " : " AND ");
        emit_expr(qb, rng, dicts, ar, t, depth + 1);
        if (grouped) qb.raw(")");
        return;
    }
    const Column& col = pick_column(rng, t);
    if (col.type == ColumnType::Text && rng.chance(0.3)) {
        emit_column_name(qb, rng, ar, col);
        qb.raw(" LIKE ");
        std::string pat = dict_text_value(rng, dicts, col);
        if (rng.chance(0.5)) pat.push_back('%');
        qb.text_value(pat);
        return;
    }
    static const char* cmps[] = {"=", "<", ">", "<=", ">=", "<>"};
    emit_column_name(qb, rng, ar, col);
    qb.raw(col.type == ColumnType::Int ? cmps[rng.below(6)] : "=");
    emit_value(qb, rng, dicts, ar, col);
}

void emit_limit(QueryBuilder& qb, Rng& rng) {
    if (rng.chance(0.3)) {
        qb.raw(" LIMIT ");
        qb.raw(std::to_string(rng.range(1, 100)));
    }
}

QueryBuilder build_query(Rng& rng, const Schema& schema, const ValueDictionaries& dicts,
                         const ArtifactRates& ar) {
    QueryBuilder qb;
    const TableDef& t = schema.tables[rng.below(schema.tables.size())];
    switch (rng.below(4)) {
        case 0: {  // SELECT
            qb.raw("SELECT ");
            maybe_hint_comment(qb, rng, ar);
            if (rng.chance(0.4)) {
                qb.raw("*");
            } else {
                std::size_t k = 1 + rng.below(t.columns.size());
                for (std::size_t i = 0; i < k; ++i) {
                    if (i) qb.raw(", ");
                    qb.raw(t.columns[i].name);
                }
            }
            qb.raw(" FROM ");
            qb.raw(t.name);
            qb.raw(" WHERE ");
            emit_expr(qb, rng, dicts, ar, t, 0);
            emit_limit(qb, rng);
            break;
        }
        case 1: {  // UPDATE
            qb.raw("UPDATE ");
            maybe_hint_comment(qb, rng, ar);
            qb.raw(t.name);
            qb.raw(" SET ");
            const Column& col = pick_column(rng, t);
            qb.raw(col.name);
            qb.raw("=");
            emit_value(qb, rng, dicts, ar, col);
            qb.raw(" WHERE ");
            emit_expr(qb, rng, dicts, ar, t, 0);
            emit_limit(qb, rng);
            break;
        }
        case 2: {  // DELETE
            qb.raw("DELETE ");
            maybe_hint_comment(qb, rng, ar);
            qb.raw("FROM ");
            qb.raw(t.name);
            qb.raw(" WHERE ");
            emit_expr(qb, rng, dicts, ar, t, 0);
            emit_limit(qb, rng);
            break;
        }
        default: {  // INSERT
            qb.raw("INSERT ");
            maybe_hint_comment(qb, rng, ar);
            qb.raw("INTO ");
            qb.raw(t.name);
            qb.raw(" (");
            for (std::size_t i = 0; i < t.columns.size(); ++i) {
                if (i) qb.raw(", ");
                qb.raw(t.columns[i].name);
            }
            qb.raw(") VALUES (");
            for (std::size_t i = 0; i < t.columns.size(); ++i) {
                if (i) qb.raw(", ");
                emit_value(qb, rng, dicts, ar, t.columns[i]);
            }
            qb.raw(")");
            break;
        }
    }
    maybe_trailing_comment(qb, rng, ar);
    return qb;
}

}  // namespace

Dataset generate_benign(std::size_t n, const Schema& schema, const ValueDictionaries& dicts,
                        std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (schema.tables.empty()) throw std::invalid_argument("empty schema");
    if (dicts.names.empty() || dicts.nations.empty())
        throw std::invalid_argument("empty dictionary");
    Rng rng(seed);
    Dataset ds;
    ds.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        QueryBuilder qb = build_query(rng, schema, dicts, ArtifactRates::organic());
        ds.records.push_back({std::move(qb.text), Label::Sane, "randgen"});
    }
    return ds;
}

Dataset generate_malicious(std::size_t n, const Schema& schema, const AttackCorpus& corpus,
                           std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (schema.tables.empty()) throw std::invalid_argument("empty schema");
    if (corpus.payloads.empty()) throw std::invalid_argument("empty corpus");
    ValueDictionaries dicts = ValueDictionaries::builtin();
    Rng rng(seed);
    Dataset ds;
    ds.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        QueryBuilder qb;
        // Retry until the skeleton has a substitutable user-value site.
        do {
            qb = build_query(rng, schema, dicts, ArtifactRates::target());
        } while (qb.sites.empty());
        const QueryBuilder::Site& site = qb.sites[rng.below(qb.sites.size())];
        const std::string& payload = corpus.payloads[rng.below(corpus.payloads.size())];
        std::string query = qb.text;
        query.replace(site.begin, site.length, payload);
        ds.records.push_back({std::move(query), Label::Malicious, "corpus"});
    }
    return ds;
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": missing label field");
        std::string label = line.substr(0, tab);
        if (label != "0" && label != "1")
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad label \"" +
                                     label + "\"");
        auto query = base64_decode(line.substr(tab + 1));
        if (!query)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad base64 query");
        if (query->empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty query");
        ds.records.push_back({std::move(*query),
                              label == "1" ? Label::Malicious : Label::Sane, "file"});
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    for (const Record& r : ds.records) {
        out << (r.label == Label::Malicious ? '1' : '0') << '\t' << base64_encode(r.query)
            << '\n';
    }
}

}  // namespace sqlfuzz
