#include "schemalink/sqlscope.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "schemalink/errors.hpp"
#include "schemalink/text.hpp"

namespace schemalink {
namespace {

// ============================================================================
// Lexer
// ============================================================================

enum class TokKind { kIdent, kString, kNumber, kParam, kPunct, kEnd };

struct Token {
    TokKind kind = TokKind::kEnd;
    std::string text;    // identifiers unquoted, puncts verbatim
    bool quoted = false;
    char quote_char = 0;  // '"', '`', '[' or 0
    std::size_t pos = 0;  // byte offset in the input
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

[[noreturn]] void lex_fail(std::size_t pos, const std::string& what) {
    throw ScopeError("lex error near byte " + std::to_string(pos) + ": " + what);
}

std::vector<Token> tokenize(const std::string& sql) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = sql.size();
    auto push = [&](TokKind k, std::string text, std::size_t pos, bool quoted = false,
                    char qc = 0) {
        out.push_back(Token{k, std::move(text), quoted, qc, pos});
    };
    while (i < n) {
        char c = sql[i];
        if (is_space(c)) {
            ++i;
            continue;
        }
        // Comments.
        if (c == '-' && i + 1 < n && sql[i + 1] == '-') {
            while (i < n && sql[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && sql[i + 1] == '*') {
            std::size_t start = i;
            i += 2;
            while (i + 1 < n && !(sql[i] == '*' && sql[i + 1] == '/')) ++i;
            if (i + 1 >= n) lex_fail(start, "unterminated block comment");
            i += 2;
            continue;
        }
        // String literal, with '' escape.  X'..' is a blob literal.
        if (c == '\'' || ((c == 'x' || c == 'X') && i + 1 < n && sql[i + 1] == '\'')) {
            std::size_t start = i;
            if (c != '\'') ++i;  // skip the x of a blob
            ++i;
            std::string text;
            while (true) {
                if (i >= n) lex_fail(start, "unterminated string literal");
                if (sql[i] == '\'') {
                    if (i + 1 < n && sql[i + 1] == '\'') {
                        text += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                text += sql[i++];
            }
            push(TokKind::kString, std::move(text), start);
            continue;
        }
        // Quoted identifiers: "x" (with "" escape), `x`, [x].
        if (c == '"' || c == '`' || c == '[') {
            std::size_t start = i;
            char close = c == '[' ? ']' : c;
            ++i;
            std::string text;
            while (true) {
                if (i >= n) lex_fail(start, "unterminated quoted identifier");
                if (sql[i] == close) {
                    if (close != ']' && i + 1 < n && sql[i + 1] == close) {
                        text += close;
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                text += sql[i++];
            }
            push(TokKind::kIdent, std::move(text), start, true, c);
            continue;
        }
        // Numbers: 123, 1.5, .5, 1e-3, 0x1A.
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            std::size_t start = i;
            if (c == '0' && i + 1 < n && (sql[i + 1] == 'x' || sql[i + 1] == 'X')) {
                i += 2;
                while (i < n && std::isxdigit(static_cast<unsigned char>(sql[i]))) ++i;
            } else {
                while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                if (i < n && sql[i] == '.') {
                    ++i;
                    while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                }
                if (i < n && (sql[i] == 'e' || sql[i] == 'E')) {
                    std::size_t save = i++;
                    if (i < n && (sql[i] == '+' || sql[i] == '-')) ++i;
                    if (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) {
                        while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
                    } else {
                        i = save;  // the e belongs to something else
                    }
                }
            }
            push(TokKind::kNumber, sql.substr(start, i - start), start);
            continue;
        }
        // Bare identifier or keyword.
        if (is_ident_start(c)) {
            std::size_t start = i;
            while (i < n && is_ident_char(sql[i])) ++i;
            push(TokKind::kIdent, sql.substr(start, i - start), start);
            continue;
        }
        // Bind parameters.
        if (c == '?') {
            std::size_t start = i++;
            while (i < n && std::isdigit(static_cast<unsigned char>(sql[i]))) ++i;
            push(TokKind::kParam, sql.substr(start, i - start), start);
            continue;
        }
        if (c == ':' || c == '@' || c == '$') {
            std::size_t start = i++;
            while (i < n && is_ident_char(sql[i])) ++i;
            if (i == start + 1) lex_fail(start, std::string("stray '") + c + "'");
            push(TokKind::kParam, sql.substr(start, i - start), start);
            continue;
        }
        // Multi-char and single-char operators.
        static const char* kTwoPlus[] = {"->>", "->", "||", "<<", ">>", "<=",
                                         ">=",  "<>", "!=", "=="};
        bool matched = false;
        for (const char* op : kTwoPlus) {
            std::size_t len = std::char_traits<char>::length(op);
            if (sql.compare(i, len, op) == 0) {
                push(TokKind::kPunct, op, i);
                i += len;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        static const std::string kSingles = "()+-*/%,.;=<>&|~!";
        if (kSingles.find(c) != std::string::npos) {
            push(TokKind::kPunct, std::string(1, c), i);
            ++i;
            continue;
        }
        lex_fail(i, std::string("unexpected character '") + c + "'");
    }
    push(TokKind::kEnd, "", n);
    return out;
}

// ============================================================================
// AST
// ============================================================================

struct SelectStmt;

struct Expr {
    virtual ~Expr() = default;
};
using ExprPtr = std::unique_ptr<Expr>;

struct LiteralExpr : Expr {};

struct ColumnRefExpr : Expr {
    std::string db;
    std::string table;
    std::string column;
    bool double_quoted = false;  // eligible for SQLite's string-literal fallback
    std::size_t pos = 0;
};

// `*` or `t.*`; appears only as a result column or a function argument.
struct StarExpr : Expr {
    std::string table;  // empty for a bare star
    std::size_t pos = 0;
};

struct UnaryExpr : Expr {
    ExprPtr operand;
};

struct BinaryExpr : Expr {
    ExprPtr lhs;
    ExprPtr rhs;
};

struct ListExpr : Expr {
    std::vector<ExprPtr> items;
};

struct BetweenExpr : Expr {
    ExprPtr value;
    ExprPtr low;
    ExprPtr high;
};

struct InExpr : Expr {
    ExprPtr lhs;
    std::vector<ExprPtr> list;
    std::unique_ptr<SelectStmt> subquery;
    std::string table;  // `expr IN tablename` shorthand
    std::size_t table_pos = 0;
};

struct CaseExpr : Expr {
    ExprPtr base;
    std::vector<std::pair<ExprPtr, ExprPtr>> whens;
    ExprPtr else_branch;
};

struct CastExpr : Expr {
    ExprPtr operand;
};

struct ExistsExpr : Expr {
    std::unique_ptr<SelectStmt> subquery;
};

struct SubqueryExpr : Expr {
    std::unique_ptr<SelectStmt> subquery;
};

struct OrderingTerm {
    ExprPtr expr;
};

struct WindowSpec {
    std::vector<ExprPtr> partition_by;
    std::vector<OrderingTerm> order_by;
};

struct FuncCallExpr : Expr {
    std::string name;  // folded
    bool star_arg = false;
    std::vector<ExprPtr> args;
    ExprPtr filter_where;
    std::unique_ptr<WindowSpec> over;
};

struct ResultColumn {
    ExprPtr expr;          // null for a star column
    std::string alias;
    bool star = false;
    std::string star_table;  // qualifier of t.*, empty for bare *
    std::size_t pos = 0;
};

struct TableRef {
    virtual ~TableRef() = default;
    std::string alias;
};

struct BaseTableRef : TableRef {
    std::string db;
    std::string name;
    std::size_t pos = 0;
};

struct SubqueryRef : TableRef {
    std::unique_ptr<SelectStmt> select;
};

// Table-valued function such as json_each(...); scoped as an opaque relation.
struct FunctionTableRef : TableRef {
    std::vector<ExprPtr> args;
};

struct FromItem {
    std::unique_ptr<TableRef> ref;
    ExprPtr on;
    std::vector<Token> using_cols;
    bool natural = false;
};

struct SelectCore {
    bool is_values = false;
    std::vector<std::vector<ExprPtr>> values_rows;
    std::vector<ResultColumn> columns;
    std::vector<FromItem> from;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
    std::vector<WindowSpec> windows;
};

struct CteDef {
    std::string name;
    std::vector<std::string> columns;  // folded explicit column list
    std::unique_ptr<SelectStmt> select;
};

struct SelectStmt {
    bool recursive = false;
    std::vector<CteDef> ctes;
    std::vector<SelectCore> cores;
    std::vector<OrderingTerm> order_by;
    ExprPtr limit;
    ExprPtr offset;
};

// ============================================================================
// Parser
// ============================================================================

// Keywords that terminate a bare alias or a clause.
const std::unordered_set<std::string>& clause_keywords() {
    static const std::unordered_set<std::string> kSet = {
        "from",  "where",     "group",  "having", "order",  "limit",
        "union", "except",    "intersect", "on",  "using",  "join",
        "left",  "right",     "full",   "inner",  "cross",  "natural",
        "when",  "then",      "else",   "end",    "window", "offset",
        "and",   "or",        "not",    "in",     "is",     "between",
        "like",  "glob",      "regexp", "match",  "escape", "collate",
        "asc",   "desc",      "nulls",  "indexed", "as",    "filter",
        "over",  "returning",
    };
    return kSet;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    std::unique_ptr<SelectStmt> parse_statement() {
        auto stmt = parse_select_stmt();
        while (accept_punct(";")) {
        }
        if (!at_end()) fail("trailing tokens after statement");
        return stmt;
    }

private:
    std::vector<Token> toks_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == TokKind::kEnd; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ScopeError("parse error near byte " + std::to_string(peek().pos) + ": " + what);
    }

    static bool tok_is_kw(const Token& t, std::string_view kw) {
        return t.kind == TokKind::kIdent && !t.quoted && fold_case(t.text) == kw;
    }
    bool peek_kw(std::string_view kw, std::size_t ahead = 0) const {
        return tok_is_kw(peek(ahead), kw);
    }
    bool accept_kw(std::string_view kw) {
        if (!peek_kw(kw)) return false;
        advance();
        return true;
    }
    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail("expected " + to_upper(kw));
    }
    bool peek_punct(std::string_view p, std::size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokKind::kPunct && t.text == p;
    }
    bool accept_punct(std::string_view p) {
        if (!peek_punct(p)) return false;
        advance();
        return true;
    }
    void expect_punct(std::string_view p) {
        if (!accept_punct(p)) fail("expected '" + std::string(p) + "'");
    }
    Token expect_ident(const std::string& what) {
        if (peek().kind != TokKind::kIdent) fail("expected " + what);
        return advance();
    }

    bool peek_select_start(std::size_t ahead = 0) const {
        return peek_kw("select", ahead) || peek_kw("values", ahead) || peek_kw("with", ahead);
    }

    // ---- statement ---------------------------------------------------------

    std::unique_ptr<SelectStmt> parse_select_stmt() {
        auto stmt = std::make_unique<SelectStmt>();
        if (accept_kw("with")) {
            stmt->recursive = accept_kw("recursive");
            do {
                CteDef def;
                def.name = expect_ident("CTE name").text;
                if (accept_punct("(")) {
                    do {
                        def.columns.push_back(fold_case(expect_ident("CTE column").text));
                    } while (accept_punct(","));
                    expect_punct(")");
                }
                expect_kw("as");
                if (accept_kw("not")) expect_kw("materialized");
                else accept_kw("materialized");
                expect_punct("(");
                def.select = parse_select_stmt();
                expect_punct(")");
                stmt->ctes.push_back(std::move(def));
            } while (accept_punct(","));
        }
        stmt->cores.push_back(parse_select_core());
        while (peek_kw("union") || peek_kw("except") || peek_kw("intersect")) {
            advance();
            accept_kw("all");
            stmt->cores.push_back(parse_select_core());
        }
        if (accept_kw("order")) {
            expect_kw("by");
            stmt->order_by = parse_ordering_terms();
        }
        if (accept_kw("limit")) {
            stmt->limit = parse_expr();
            if (accept_kw("offset")) {
                stmt->offset = parse_expr();
            } else if (accept_punct(",")) {
                // LIMIT offset, count
                stmt->offset = std::move(stmt->limit);
                stmt->limit = parse_expr();
            }
        }
        return stmt;
    }

    SelectCore parse_select_core() {
        SelectCore core;
        if (accept_kw("values")) {
            core.is_values = true;
            do {
                expect_punct("(");
                std::vector<ExprPtr> row;
                do {
                    row.push_back(parse_expr());
                } while (accept_punct(","));
                expect_punct(")");
                core.values_rows.push_back(std::move(row));
            } while (accept_punct(","));
            return core;
        }
        expect_kw("select");
        if (!accept_kw("distinct")) accept_kw("all");
        do {
            core.columns.push_back(parse_result_column());
        } while (accept_punct(","));
        if (accept_kw("from")) core.from = parse_from_items();
        if (accept_kw("where")) core.where = parse_expr();
        if (accept_kw("group")) {
            expect_kw("by");
            do {
                core.group_by.push_back(parse_expr());
            } while (accept_punct(","));
        }
        if (accept_kw("having")) core.having = parse_expr();
        if (accept_kw("window")) {
            do {
                expect_ident("window name");
                expect_kw("as");
                expect_punct("(");
                core.windows.push_back(parse_window_spec_body());
                expect_punct(")");
            } while (accept_punct(","));
        }
        return core;
    }

    ResultColumn parse_result_column() {
        ResultColumn rc;
        rc.pos = peek().pos;
        if (accept_punct("*")) {
            rc.star = true;
            return rc;
        }
        rc.expr = parse_expr();
        if (auto* star = dynamic_cast<StarExpr*>(rc.expr.get())) {
            rc.star = true;
            rc.star_table = star->table;
            rc.expr.reset();
            return rc;
        }
        if (accept_kw("as")) {
            const Token& t = peek();
            if (t.kind != TokKind::kIdent && t.kind != TokKind::kString)
                fail("expected alias after AS");
            rc.alias = advance().text;
        } else if (peek().kind == TokKind::kIdent &&
                   (peek().quoted || !clause_keywords().count(fold_case(peek().text)))) {
            rc.alias = advance().text;
        } else if (peek().kind == TokKind::kString) {
            rc.alias = advance().text;
        }
        return rc;
    }

    // ---- FROM --------------------------------------------------------------

    std::vector<FromItem> parse_from_items() {
        std::vector<FromItem> items;
        parse_table_or_subquery(items);
        while (true) {
            if (accept_punct(",")) {
                parse_table_or_subquery(items);
                continue;
            }
            bool natural = false;
            if (peek_kw("natural")) {
                natural = true;
                advance();
            }
            if (peek_kw("left") || peek_kw("right") || peek_kw("full") || peek_kw("inner") ||
                peek_kw("cross")) {
                advance();
                accept_kw("outer");
                expect_kw("join");
            } else if (!accept_kw("join")) {
                if (natural) fail("expected JOIN after NATURAL");
                break;
            }
            parse_table_or_subquery(items);
            // A parenthesized join group splices several items; the join
            // constraint attaches to the last so it binds after every
            // relation it may reference is in scope.
            FromItem& joined = items.back();
            joined.natural = natural;
            if (accept_kw("on")) {
                joined.on = parse_expr();
            } else if (accept_kw("using")) {
                expect_punct("(");
                do {
                    joined.using_cols.push_back(expect_ident("column name in USING"));
                } while (accept_punct(","));
                expect_punct(")");
            }
        }
        return items;
    }

    // Appends one or more items (a parenthesized join group splices several).
    void parse_table_or_subquery(std::vector<FromItem>& items) {
        if (accept_punct("(")) {
            if (peek_select_start()) {
                auto ref = std::make_unique<SubqueryRef>();
                ref->select = parse_select_stmt();
                expect_punct(")");
                ref->alias = parse_optional_alias();
                FromItem item;
                item.ref = std::move(ref);
                items.push_back(std::move(item));
            } else {
                auto nested = parse_from_items();
                expect_punct(")");
                for (auto& it : nested) items.push_back(std::move(it));
            }
            return;
        }
        Token first = expect_ident("table name");
        std::string db;
        std::string name = first.text;
        std::size_t name_pos = first.pos;
        if (peek_punct(".") && peek(1).kind == TokKind::kIdent) {
            advance();
            Token second = expect_ident("table name");
            db = name;
            name = second.text;
            name_pos = second.pos;
        }
        if (accept_punct("(")) {
            auto ref = std::make_unique<FunctionTableRef>();
            if (!accept_punct(")")) {
                do {
                    ref->args.push_back(parse_expr());
                } while (accept_punct(","));
                expect_punct(")");
            }
            ref->alias = parse_optional_alias();
            FromItem item;
            item.ref = std::move(ref);
            items.push_back(std::move(item));
            return;
        }
        auto ref = std::make_unique<BaseTableRef>();
        ref->db = std::move(db);
        ref->name = std::move(name);
        ref->pos = name_pos;
        ref->alias = parse_optional_alias();
        if (accept_kw("indexed")) {
            expect_kw("by");
            expect_ident("index name");
        } else if (peek_kw("not") && peek_kw("indexed", 1)) {
            advance();
            advance();
        }
        FromItem item;
        item.ref = std::move(ref);
        items.push_back(std::move(item));
    }

    std::string parse_optional_alias() {
        if (accept_kw("as")) {
            const Token& t = peek();
            if (t.kind != TokKind::kIdent && t.kind != TokKind::kString)
                fail("expected alias after AS");
            return advance().text;
        }
        if (peek().kind == TokKind::kIdent &&
            (peek().quoted || !clause_keywords().count(fold_case(peek().text)))) {
            return advance().text;
        }
        return {};
    }

    // ---- expressions -------------------------------------------------------

    std::vector<OrderingTerm> parse_ordering_terms() {
        std::vector<OrderingTerm> terms;
        do {
            OrderingTerm t;
            t.expr = parse_expr();
            if (accept_kw("collate")) expect_ident("collation name");
            if (!accept_kw("asc")) accept_kw("desc");
            if (accept_kw("nulls")) {
                if (!accept_kw("first")) expect_kw("last");
            }
            terms.push_back(std::move(t));
        } while (accept_punct(","));
        return terms;
    }

    // The analyzer only needs the set of references, so operators chain
    // left-associatively without precedence.
    ExprPtr parse_expr(bool no_and = false) {
        ExprPtr lhs = parse_unary();
        while (true) {
            const Token& t = peek();
            if (t.kind == TokKind::kPunct) {
                static const std::unordered_set<std::string> kBinops = {
                    "=", "==", "!=", "<>", "<",  ">",  "<=", ">=", "||", "+",
                    "-", "*",  "/",  "%",  "&",  "|",  "<<", ">>", "->", "->>"};
                if (kBinops.count(t.text)) {
                    advance();
                    auto bin = std::make_unique<BinaryExpr>();
                    bin->lhs = std::move(lhs);
                    bin->rhs = parse_unary();
                    lhs = std::move(bin);
                    continue;
                }
                break;
            }
            if (t.kind != TokKind::kIdent || t.quoted) break;
            std::string kw = fold_case(t.text);
            if (kw == "and") {
                if (no_and) break;
                advance();
                auto bin = std::make_unique<BinaryExpr>();
                bin->lhs = std::move(lhs);
                bin->rhs = parse_unary();
                lhs = std::move(bin);
            } else if (kw == "or") {
                advance();
                auto bin = std::make_unique<BinaryExpr>();
                bin->lhs = std::move(lhs);
                bin->rhs = parse_unary();
                lhs = std::move(bin);
            } else if (kw == "is") {
                advance();
                accept_kw("not");
                if (accept_kw("distinct")) expect_kw("from");
                auto bin = std::make_unique<BinaryExpr>();
                bin->lhs = std::move(lhs);
                bin->rhs = parse_unary();
                lhs = std::move(bin);
            } else if (kw == "isnull" || kw == "notnull") {
                advance();
                auto un = std::make_unique<UnaryExpr>();
                un->operand = std::move(lhs);
                lhs = std::move(un);
            } else if (kw == "collate") {
                advance();
                expect_ident("collation name");
            } else if (kw == "not") {
                // Postfix forms: NOT NULL, NOT IN, NOT LIKE, NOT BETWEEN, ...
                std::string next =
                    peek(1).kind == TokKind::kIdent && !peek(1).quoted ? fold_case(peek(1).text)
                                                                       : std::string();
                if (next == "null") {
                    advance();
                    advance();
                    auto un = std::make_unique<UnaryExpr>();
                    un->operand = std::move(lhs);
                    lhs = std::move(un);
                } else if (next == "in" || next == "like" || next == "glob" ||
                           next == "regexp" || next == "match" || next == "between") {
                    advance();
                    continue;  // reprocess the operator itself
                } else {
                    break;
                }
            } else if (kw == "in") {
                advance();
                lhs = parse_in_tail(std::move(lhs));
            } else if (kw == "like" || kw == "glob" || kw == "regexp" || kw == "match") {
                advance();
                auto bin = std::make_unique<BinaryExpr>();
                bin->lhs = std::move(lhs);
                bin->rhs = parse_unary();
                lhs = std::move(bin);
                if (accept_kw("escape")) {
                    auto esc = std::make_unique<BinaryExpr>();
                    esc->lhs = std::move(lhs);
                    esc->rhs = parse_unary();
                    lhs = std::move(esc);
                }
            } else if (kw == "between") {
                advance();
                auto bt = std::make_unique<BetweenExpr>();
                bt->value = std::move(lhs);
                bt->low = parse_expr(/*no_and=*/true);
                expect_kw("and");
                bt->high = parse_unary();
                lhs = std::move(bt);
            } else {
                break;
            }
        }
        return lhs;
    }

    ExprPtr parse_in_tail(ExprPtr lhs) {
        auto in = std::make_unique<InExpr>();
        in->lhs = std::move(lhs);
        if (accept_punct("(")) {
            if (peek_select_start()) {
                in->subquery = parse_select_stmt();
            } else if (!peek_punct(")")) {
                do {
                    in->list.push_back(parse_expr());
                } while (accept_punct(","));
            }
            expect_punct(")");
            return in;
        }
        Token t = expect_ident("table name after IN");
        in->table = t.text;
        in->table_pos = t.pos;
        if (peek_punct(".") && peek(1).kind == TokKind::kIdent) {
            advance();
            Token second = advance();
            in->table = second.text;
            in->table_pos = second.pos;
        }
        if (accept_punct("(")) {  // table-valued function
            if (!accept_punct(")")) {
                do {
                    in->list.push_back(parse_expr());
                } while (accept_punct(","));
                expect_punct(")");
            }
            in->table.clear();
        }
        return in;
    }

    ExprPtr parse_unary() {
        const Token& t = peek();
        if (t.kind == TokKind::kPunct) {
            if (t.text == "-" || t.text == "+" || t.text == "~") {
                advance();
                auto un = std::make_unique<UnaryExpr>();
                un->operand = parse_unary();
                return un;
            }
            if (t.text == "(") {
                advance();
                if (peek_select_start()) {
                    auto sub = std::make_unique<SubqueryExpr>();
                    sub->subquery = parse_select_stmt();
                    expect_punct(")");
                    return sub;
                }
                auto first = parse_expr();
                if (peek_punct(",")) {
                    auto list = std::make_unique<ListExpr>();
                    list->items.push_back(std::move(first));
                    while (accept_punct(",")) list->items.push_back(parse_expr());
                    expect_punct(")");
                    return list;
                }
                expect_punct(")");
                return first;
            }
            fail("unexpected token '" + t.text + "' in expression");
        }
        if (t.kind == TokKind::kNumber || t.kind == TokKind::kString ||
            t.kind == TokKind::kParam) {
            advance();
            return std::make_unique<LiteralExpr>();
        }
        if (t.kind != TokKind::kIdent) fail("unexpected end of expression");

        if (!t.quoted) {
            std::string kw = fold_case(t.text);
            if (kw == "not") {
                advance();
                auto un = std::make_unique<UnaryExpr>();
                un->operand = parse_unary();
                return un;
            }
            if (kw == "exists") {
                advance();
                expect_punct("(");
                auto ex = std::make_unique<ExistsExpr>();
                ex->subquery = parse_select_stmt();
                expect_punct(")");
                return ex;
            }
            if (kw == "case") return parse_case();
            if (kw == "cast") return parse_cast();
            if (kw == "raise") {
                advance();
                skip_parenthesized();
                return std::make_unique<LiteralExpr>();
            }
            if (kw == "null" || kw == "true" || kw == "false" || kw == "current_date" ||
                kw == "current_time" || kw == "current_timestamp") {
                advance();
                return std::make_unique<LiteralExpr>();
            }
        }
        // Function call or (possibly dotted) column reference.
        Token first = advance();
        if (peek_punct("(")) return parse_function_tail(first);

        std::vector<Token> parts = {first};
        while (peek_punct(".")) {
            if (peek_punct("*", 1)) {
                advance();
                advance();
                auto star = std::make_unique<StarExpr>();
                star->table = parts.back().text;
                star->pos = first.pos;
                return star;
            }
            if (peek(1).kind != TokKind::kIdent) break;
            advance();
            parts.push_back(advance());
        }
        auto ref = std::make_unique<ColumnRefExpr>();
        if (parts.size() == 1) {
            ref->column = parts[0].text;
            ref->double_quoted = parts[0].quote_char == '"';
        } else if (parts.size() == 2) {
            ref->table = parts[0].text;
            ref->column = parts[1].text;
        } else if (parts.size() == 3) {
            ref->db = parts[0].text;
            ref->table = parts[1].text;
            ref->column = parts[2].text;
        } else {
            fail("identifier has too many qualifiers");
        }
        ref->pos = first.pos;
        return ref;
    }

    ExprPtr parse_function_tail(const Token& name) {
        expect_punct("(");
        auto call = std::make_unique<FuncCallExpr>();
        call->name = fold_case(name.text);
        if (peek_punct("*") && peek_punct(")", 1)) {
            advance();
            call->star_arg = true;
        } else if (!peek_punct(")")) {
            accept_kw("distinct");
            do {
                call->args.push_back(parse_expr());
            } while (accept_punct(","));
            // ORDER BY inside an aggregate (e.g. group_concat).
            if (accept_kw("order")) {
                expect_kw("by");
                for (auto& term : parse_ordering_terms())
                    call->args.push_back(std::move(term.expr));
            }
        }
        expect_punct(")");
        if (peek_kw("filter") && peek_punct("(", 1)) {
            advance();
            advance();
            expect_kw("where");
            call->filter_where = parse_expr();
            expect_punct(")");
        }
        if (accept_kw("over")) {
            if (accept_punct("(")) {
                call->over = std::make_unique<WindowSpec>(parse_window_spec_body());
                expect_punct(")");
            } else {
                expect_ident("window name");
            }
        }
        return call;
    }

    WindowSpec parse_window_spec_body() {
        WindowSpec spec;
        if (peek().kind == TokKind::kIdent && !peek_kw("partition") && !peek_kw("order") &&
            !peek_kw("range") && !peek_kw("rows") && !peek_kw("groups")) {
            advance();  // base window name
        }
        if (accept_kw("partition")) {
            expect_kw("by");
            do {
                spec.partition_by.push_back(parse_expr());
            } while (accept_punct(","));
        }
        if (accept_kw("order")) {
            expect_kw("by");
            spec.order_by = parse_ordering_terms();
        }
        if (peek_kw("range") || peek_kw("rows") || peek_kw("groups")) {
            // Frame bounds are literals and keywords; skip to the closing paren.
            int depth = 0;
            while (!at_end()) {
                if (peek_punct("(")) ++depth;
                if (peek_punct(")")) {
                    if (depth == 0) break;
                    --depth;
                }
                advance();
            }
        }
        return spec;
    }

    ExprPtr parse_case() {
        expect_kw("case");
        auto c = std::make_unique<CaseExpr>();
        if (!peek_kw("when")) c->base = parse_expr();
        while (accept_kw("when")) {
            auto cond = parse_expr();
            expect_kw("then");
            auto val = parse_expr();
            c->whens.emplace_back(std::move(cond), std::move(val));
        }
        if (accept_kw("else")) c->else_branch = parse_expr();
        expect_kw("end");
        return c;
    }

    ExprPtr parse_cast() {
        expect_kw("cast");
        expect_punct("(");
        auto c = std::make_unique<CastExpr>();
        c->operand = parse_expr();
        expect_kw("as");
        // Type names may span words and carry (n, m).
        int depth = 0;
        while (!at_end()) {
            if (peek_punct("(")) ++depth;
            if (peek_punct(")")) {
                if (depth == 0) break;
                --depth;
            }
            advance();
        }
        expect_punct(")");
        return c;
    }

    void skip_parenthesized() {
        expect_punct("(");
        int depth = 1;
        while (!at_end() && depth > 0) {
            if (peek_punct("(")) ++depth;
            if (peek_punct(")")) --depth;
            advance();
        }
        if (depth != 0) fail("unbalanced parentheses");
    }
};

// ============================================================================
// Scope analysis
// ============================================================================

struct Relation {
    enum class Kind { kBase, kDerived, kSink };
    Kind kind = Kind::kSink;
    std::string key;  // folded alias or table name
    const TableDef* table = nullptr;             // kBase
    std::vector<std::string> out_cols;           // kDerived, folded

    bool owns(const std::string& folded_col) const {
        switch (kind) {
            case Kind::kBase:
                return table->find_column(folded_col) != nullptr;
            case Kind::kDerived:
                return std::find(out_cols.begin(), out_cols.end(), folded_col) !=
                       out_cols.end();
            case Kind::kSink:
                return false;
        }
        return false;
    }
};

struct Scope {
    std::vector<Relation> rels;
    const Scope* parent = nullptr;
};

// How unqualified names interact with select-list aliases.
enum class AliasMode { kNone, kAliasFirst, kAliasFallback };

struct NameCtx {
    AliasMode mode = AliasMode::kNone;
    const std::vector<std::string>* aliases = nullptr;  // folded output names

    bool matches_alias(const std::string& folded) const {
        if (!aliases || folded.empty()) return false;
        return std::find(aliases->begin(), aliases->end(), folded) != aliases->end();
    }
};

class Analyzer {
public:
    Analyzer(const DatabaseSchema& schema, bool strict) : schema_(schema), strict_(strict) {}

    ScopeReport run(const SelectStmt& stmt) {
        analyze_stmt(stmt, nullptr);
        finalize();
        ScopeReport report;
        report.subset = std::move(subset_);
        report.unresolved = std::move(unresolved_);
        report.used_star = used_star_;
        return report;
    }

private:
    const DatabaseSchema& schema_;
    bool strict_;
    SchemaSubset subset_;
    std::vector<UnresolvedRef> unresolved_;
    bool used_star_ = false;
    // Innermost-last frames of CTE name -> folded output columns.
    std::vector<std::unordered_map<std::string, std::vector<std::string>>> cte_frames_;

    void unresolvable(const std::string& identifier, const std::string& reason) {
        if (strict_)
            throw ScopeError("cannot resolve '" + identifier + "': " + reason);
        unresolved_.push_back({identifier, reason});
    }

    const std::vector<std::string>* find_cte(const std::string& folded) const {
        for (auto it = cte_frames_.rbegin(); it != cte_frames_.rend(); ++it) {
            auto found = it->find(folded);
            if (found != it->end()) return &found->second;
        }
        return nullptr;
    }

    // Output column names a select statement exposes, computed syntactically
    // (no binding).  Position-aligned; unnameable expressions yield "".
    static std::vector<std::string> syntactic_output_names(const SelectStmt& stmt) {
        std::vector<std::string> names;
        if (stmt.cores.empty()) return names;
        const SelectCore& core = stmt.cores.front();
        if (core.is_values) {
            std::size_t width =
                core.values_rows.empty() ? 0 : core.values_rows.front().size();
            for (std::size_t i = 0; i < width; ++i)
                names.push_back("column" + std::to_string(i + 1));
            return names;
        }
        for (const ResultColumn& rc : core.columns) {
            if (rc.star) {
                names.push_back("");  // star widths need binding; placeholder
                continue;
            }
            if (!rc.alias.empty()) {
                names.push_back(fold_case(rc.alias));
            } else if (auto* ref = dynamic_cast<const ColumnRefExpr*>(rc.expr.get())) {
                names.push_back(fold_case(ref->column));
            } else {
                names.push_back("");
            }
        }
        return names;
    }

    std::vector<std::string> analyze_stmt(const SelectStmt& stmt, const Scope* parent) {
        cte_frames_.emplace_back();
        for (const CteDef& def : stmt.ctes) {
            std::string folded = fold_case(def.name);
            if (stmt.recursive) {
                cte_frames_.back()[folded] = def.columns.empty()
                                                 ? syntactic_output_names(*def.select)
                                                 : def.columns;
            }
            std::vector<std::string> body_out = analyze_stmt(*def.select, parent);
            cte_frames_.back()[folded] = def.columns.empty() ? body_out : def.columns;
        }

        std::vector<std::string> first_out;
        Scope first_scope;
        first_scope.parent = parent;
        for (std::size_t i = 0; i < stmt.cores.size(); ++i) {
            Scope scope;
            scope.parent = parent;
            std::vector<std::string> out = analyze_core(stmt.cores[i], scope);
            if (i == 0) {
                first_out = std::move(out);
                first_scope.rels = std::move(scope.rels);
            }
        }

        NameCtx order_ctx{AliasMode::kAliasFirst, &first_out};
        for (const OrderingTerm& term : stmt.order_by)
            bind(*term.expr, first_scope, order_ctx);
        NameCtx plain;
        if (stmt.limit) bind(*stmt.limit, first_scope, plain);
        if (stmt.offset) bind(*stmt.offset, first_scope, plain);

        cte_frames_.pop_back();
        return first_out;
    }

    std::vector<std::string> analyze_core(const SelectCore& core, Scope& scope) {
        NameCtx plain;
        if (core.is_values) {
            Scope empty;
            empty.parent = scope.parent;
            for (const auto& row : core.values_rows)
                for (const ExprPtr& e : row) bind(*e, empty, plain);
            std::size_t width =
                core.values_rows.empty() ? 0 : core.values_rows.front().size();
            std::vector<std::string> names;
            for (std::size_t i = 0; i < width; ++i)
                names.push_back("column" + std::to_string(i + 1));
            return names;
        }

        for (const FromItem& item : core.from) add_from_item(item, scope);

        std::vector<std::string> out_names;
        for (const ResultColumn& rc : core.columns) {
            if (rc.star) {
                used_star_ = true;
                if (rc.star_table.empty()) {
                    for (const Relation& rel : scope.rels) {
                        auto cols = expand_relation(rel);
                        out_names.insert(out_names.end(), cols.begin(), cols.end());
                    }
                } else {
                    std::string key = fold_case(rc.star_table);
                    const Relation* rel = find_relation_here(scope, key);
                    if (!rel) {
                        unresolvable(rc.star_table + ".*", "unknown table or alias");
                    } else {
                        auto cols = expand_relation(*rel);
                        out_names.insert(out_names.end(), cols.begin(), cols.end());
                    }
                }
                continue;
            }
            bind(*rc.expr, scope, plain);
            if (!rc.alias.empty()) {
                out_names.push_back(fold_case(rc.alias));
            } else if (auto* ref = dynamic_cast<const ColumnRefExpr*>(rc.expr.get())) {
                out_names.push_back(fold_case(ref->column));
            } else {
                out_names.push_back("");
            }
        }

        if (core.where) bind(*core.where, scope, plain);
        NameCtx group_ctx{AliasMode::kAliasFallback, &out_names};
        for (const ExprPtr& e : core.group_by) bind(*e, scope, group_ctx);
        if (core.having) bind(*core.having, scope, group_ctx);
        for (const WindowSpec& w : core.windows) bind_window(w, scope);
        return out_names;
    }

    void add_from_item(const FromItem& item, Scope& scope) {
        Relation rel;
        if (auto* base = dynamic_cast<const BaseTableRef*>(item.ref.get())) {
            std::string folded = fold_case(base->name);
            const std::vector<std::string>* cte =
                base->db.empty() ? find_cte(folded) : nullptr;
            if (cte) {
                rel.kind = Relation::Kind::kDerived;
                rel.out_cols = *cte;
            } else if (const TableDef* td = schema_.find_table(base->name)) {
                rel.kind = Relation::Kind::kBase;
                rel.table = td;
                // A base row source is referenced even when none of its
                // columns are; finalize() backfills a key column for it.
                subset_.add_table(td->name);
            } else {
                unresolvable(base->name, "table not found in schema");
                rel.kind = Relation::Kind::kSink;
            }
            rel.key = base->alias.empty() ? folded : fold_case(base->alias);
        } else if (auto* sub = dynamic_cast<const SubqueryRef*>(item.ref.get())) {
            rel.kind = Relation::Kind::kDerived;
            rel.out_cols = analyze_stmt(*sub->select, scope.parent);
            rel.key = fold_case(sub->alias);
        } else if (auto* fn = dynamic_cast<const FunctionTableRef*>(item.ref.get())) {
            NameCtx plain;
            // Arguments may reference relations already joined to the left.
            for (const ExprPtr& e : fn->args) bind(*e, scope, plain);
            rel.kind = Relation::Kind::kSink;
            rel.key = fold_case(fn->alias);
        }

        if (item.natural && !scope.rels.empty()) bind_natural(scope, rel);
        scope.rels.push_back(std::move(rel));
        for (const Token& col : item.using_cols) bind_using(scope, col);
        if (item.on) {
            NameCtx plain;
            bind(*item.on, scope, plain);
        }
    }

    // Columns shared between the newest relation and the relations joined so
    // far; NATURAL JOIN references each shared column on both sides.
    void bind_natural(Scope& scope, const Relation& incoming) {
        std::vector<std::string> incoming_cols = relation_columns(incoming);
        for (const std::string& col : incoming_cols) {
            for (const Relation& left : scope.rels) {
                if (!left.owns(col)) continue;
                emit(left, col);
                emit(incoming, col);
                break;
            }
        }
    }

    void bind_using(Scope& scope, const Token& col) {
        std::string folded = fold_case(col.text);
        const Relation& incoming = scope.rels.back();
        bool left_found = false;
        for (std::size_t i = 0; i + 1 < scope.rels.size(); ++i) {
            if (scope.rels[i].owns(folded)) {
                emit(scope.rels[i], folded);
                left_found = true;
                break;
            }
        }
        bool right_found = incoming.owns(folded);
        if (right_found) emit(incoming, folded);
        if (!left_found && !right_found && !has_sink(scope))
            unresolvable(col.text, "USING column not found on either side");
    }

    static bool has_sink(const Scope& scope) {
        for (const Relation& r : scope.rels)
            if (r.kind == Relation::Kind::kSink) return true;
        return false;
    }

    std::vector<std::string> relation_columns(const Relation& rel) const {
        std::vector<std::string> cols;
        if (rel.kind == Relation::Kind::kBase) {
            for (const ColumnDef& c : rel.table->columns) cols.push_back(fold_case(c.name));
        } else if (rel.kind == Relation::Kind::kDerived) {
            cols = rel.out_cols;
        }
        return cols;
    }

    // Records (table, column) for base relations; derived and sink relations
    // contribute nothing because their sources were analyzed where they were
    // defined.
    void emit(const Relation& rel, const std::string& folded_col) {
        if (rel.kind != Relation::Kind::kBase) return;
        const ColumnDef* def = rel.table->find_column(folded_col);
        if (def) subset_.add(rel.table->name, def->name);
    }

    std::vector<std::string> expand_relation(const Relation& rel) {
        if (rel.kind == Relation::Kind::kBase) {
            for (const ColumnDef& c : rel.table->columns) subset_.add(rel.table->name, c.name);
        }
        return relation_columns(rel);
    }

    static const Relation* find_relation_here(const Scope& scope, const std::string& key) {
        for (const Relation& rel : scope.rels)
            if (rel.key == key) return &rel;
        return nullptr;
    }

    const Relation* find_relation(const Scope& scope, const std::string& key) const {
        for (const Scope* s = &scope; s; s = s->parent) {
            if (const Relation* rel = find_relation_here(*s, key)) return rel;
        }
        return nullptr;
    }

    static bool is_rowid_name(const std::string& folded) {
        return folded == "rowid" || folded == "oid" || folded == "_rowid_";
    }

    void bind_column(const ColumnRefExpr& ref, const Scope& scope, const NameCtx& ctx) {
        std::string folded_col = fold_case(ref.column);
        std::string shown = ref.table.empty() ? ref.column : ref.table + "." + ref.column;

        if (!ref.table.empty()) {
            const Relation* rel = find_relation(scope, fold_case(ref.table));
            if (!rel) {
                unresolvable(shown, "unknown table or alias '" + ref.table + "'");
                return;
            }
            if (rel->kind == Relation::Kind::kSink) return;
            if (rel->owns(folded_col)) {
                emit(*rel, folded_col);
            } else if (rel->kind == Relation::Kind::kBase && is_rowid_name(folded_col)) {
                // Implicit rowid of a base table names no declared column.
            } else {
                unresolvable(shown, "column not found in '" + ref.table + "'");
            }
            return;
        }

        if (ctx.mode == AliasMode::kAliasFirst && ctx.matches_alias(folded_col)) return;

        for (const Scope* s = &scope; s; s = s->parent) {
            const Relation* owner = nullptr;
            bool ambiguous = false;
            for (const Relation& rel : s->rels) {
                if (!rel.owns(folded_col)) continue;
                if (owner) ambiguous = true;
                if (!owner) owner = &rel;
            }
            if (owner) {
                // On ambiguity keep the first match: joins coalesced through
                // USING resolve there in SQLite, and the pair it contributes
                // was already recorded by the USING clause itself.
                emit(*owner, folded_col);
                if (ambiguous) unresolvable(shown, "ambiguous column, bound to first match");
                return;
            }
            if (has_sink(*s)) return;  // swallowed by an opaque relation
            bool has_base = false;
            for (const Relation& rel : s->rels)
                if (rel.kind == Relation::Kind::kBase) has_base = true;
            if (has_base && is_rowid_name(folded_col)) return;
        }

        if (ctx.mode == AliasMode::kAliasFallback && ctx.matches_alias(folded_col)) return;

        // SQLite treats an unbindable double-quoted identifier as a string
        // literal; mirror that outside strict mode.
        if (ref.double_quoted && !strict_) return;
        unresolvable(shown, "column not found in any table in scope");
    }

    void bind_window(const WindowSpec& spec, const Scope& scope) {
        NameCtx plain;
        for (const ExprPtr& e : spec.partition_by) bind(*e, scope, plain);
        for (const OrderingTerm& t : spec.order_by) bind(*t.expr, scope, plain);
    }

    void bind(const Expr& expr, const Scope& scope, const NameCtx& ctx) {
        if (auto* ref = dynamic_cast<const ColumnRefExpr*>(&expr)) {
            bind_column(*ref, scope, ctx);
            return;
        }
        if (dynamic_cast<const LiteralExpr*>(&expr)) return;
        if (dynamic_cast<const StarExpr*>(&expr)) return;  // only valid elsewhere
        NameCtx plain;
        if (auto* un = dynamic_cast<const UnaryExpr*>(&expr)) {
            bind(*un->operand, scope, ctx);
            return;
        }
        if (auto* bin = dynamic_cast<const BinaryExpr*>(&expr)) {
            bind(*bin->lhs, scope, ctx);
            bind(*bin->rhs, scope, ctx);
            return;
        }
        if (auto* list = dynamic_cast<const ListExpr*>(&expr)) {
            for (const ExprPtr& e : list->items) bind(*e, scope, ctx);
            return;
        }
        if (auto* bt = dynamic_cast<const BetweenExpr*>(&expr)) {
            bind(*bt->value, scope, ctx);
            bind(*bt->low, scope, ctx);
            bind(*bt->high, scope, ctx);
            return;
        }
        if (auto* in = dynamic_cast<const InExpr*>(&expr)) {
            bind(*in->lhs, scope, ctx);
            for (const ExprPtr& e : in->list) bind(*e, scope, ctx);
            if (in->subquery) analyze_stmt(*in->subquery, &scope);
            if (!in->table.empty()) bind_in_table(*in);
            return;
        }
        if (auto* c = dynamic_cast<const CaseExpr*>(&expr)) {
            if (c->base) bind(*c->base, scope, ctx);
            for (const auto& [cond, val] : c->whens) {
                bind(*cond, scope, ctx);
                bind(*val, scope, ctx);
            }
            if (c->else_branch) bind(*c->else_branch, scope, ctx);
            return;
        }
        if (auto* cast = dynamic_cast<const CastExpr*>(&expr)) {
            bind(*cast->operand, scope, ctx);
            return;
        }
        if (auto* ex = dynamic_cast<const ExistsExpr*>(&expr)) {
            analyze_stmt(*ex->subquery, &scope);
            return;
        }
        if (auto* sub = dynamic_cast<const SubqueryExpr*>(&expr)) {
            analyze_stmt(*sub->subquery, &scope);
            return;
        }
        if (auto* call = dynamic_cast<const FuncCallExpr*>(&expr)) {
            // COUNT(*) adds no column reference; its row sources were already
            // recorded when the FROM clause was bound.
            for (const ExprPtr& e : call->args) bind(*e, scope, plain);
            if (call->filter_where) bind(*call->filter_where, scope, plain);
            if (call->over) bind_window(*call->over, scope);
            return;
        }
    }

    void bind_in_table(const InExpr& in) {
        std::string folded = fold_case(in.table);
        if (find_cte(folded)) return;  // body already analyzed
        if (const TableDef* td = schema_.find_table(in.table)) {
            // `expr IN t` reads t's single column.
            for (const ColumnDef& c : td->columns) subset_.add(td->name, c.name);
            return;
        }
        unresolvable(in.table, "table not found in schema");
    }

    // Tables recorded without any column reference take their primary-key
    // columns so every reported table carries at least one column.
    void finalize() {
        std::vector<std::pair<std::string, std::string>> additions;
        for (const SchemaSubset::Table& t : subset_.tables()) {
            if (!t.columns.empty()) continue;
            const TableDef* td = schema_.find_table(t.name);
            if (!td || td->columns.empty()) continue;
            if (td->primary_key.empty()) {
                additions.emplace_back(td->name, td->columns.front().name);
            } else {
                for (const std::string& pk : td->primary_key) {
                    if (const ColumnDef* def = td->find_column(pk))
                        additions.emplace_back(td->name, def->name);
                }
            }
        }
        for (const auto& [table, column] : additions) subset_.add(table, column);
    }
};

}  // namespace

// ============================================================================
// Public interface
// ============================================================================

ScopeReport extract_referenced_schema(const std::string& sql, const DatabaseSchema& schema,
                                      bool strict) {
    Parser parser(tokenize(sql));
    std::unique_ptr<SelectStmt> stmt = parser.parse_statement();
    Analyzer analyzer(schema, strict);
    return analyzer.run(*stmt);
}

ValidationResult validate_subset(const SchemaSubset& s, const DatabaseSchema& schema) {
    ValidationResult result;
    for (const SchemaSubset::Table& t : s.tables()) {
        const TableDef* td = schema.find_table(t.name);
        if (!td) {
            result.dropped.push_back({t.name, std::nullopt});
            continue;
        }
        bool any = false;
        for (const std::string& col : t.columns) {
            if (td->find_column(col)) {
                result.subset.add(t.name, col);
                any = true;
            } else {
                result.dropped.push_back({t.name, col});
            }
        }
        if (!any && t.columns.empty()) result.subset.add_table(t.name);
        // A table whose every column was dropped is itself dropped; the
        // per-column entries already record why.
    }
    return result;
}

bool statement_has_outer_order_by(const std::string& sql) {
    try {
        Parser parser(tokenize(sql));
        std::unique_ptr<SelectStmt> stmt = parser.parse_statement();
        return !stmt->order_by.empty();
    } catch (const ScopeError&) {
        // Fallback: ORDER at parenthesis depth zero.
        try {
            int depth = 0;
            for (const Token& t : tokenize(sql)) {
                if (t.kind == TokKind::kPunct && t.text == "(") ++depth;
                if (t.kind == TokKind::kPunct && t.text == ")") --depth;
                if (depth == 0 && t.kind == TokKind::kIdent && !t.quoted &&
                    fold_case(t.text) == "order")
                    return true;
            }
        } catch (const ScopeError&) {
        }
        return false;
    }
}

}  // namespace schemalink
