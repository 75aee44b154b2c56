#pragma once

#include <memory>
#include <string>
#include <vector>

#include "webscout/script/ast.hpp"
#include "webscout/script/lexer.hpp"

namespace webscout::script {

// Recursive-descent parser for the agent scripting language. The grammar is
// published in docs/language.md; this file is its reference implementation.
class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    static Program parse(std::string_view source) {
        Parser p(Lexer(source).run());
        return p.parse_program();
    }

    Program parse_program() {
        Program prog;
        skip_separators();
        while (!at_end()) {
            prog.statements.push_back(parse_statement());
            expect_statement_end();
        }
        return prog;
    }

private:
    // Bounded nesting keeps adversarial input from blowing the C++ stack.
    struct DepthGuard {
        explicit DepthGuard(Parser& p) : parser(p) {
            if (++parser.depth_ > kMaxNesting)
                throw ScriptError{ScriptError::Kind::Parse, parser.peek().line,
                                  "nesting exceeds " + std::to_string(kMaxNesting) + " levels"};
        }
        ~DepthGuard() { --parser.depth_; }
        Parser& parser;
    };

    static constexpr int kMaxNesting = 200;

    // --- statements ---------------------------------------------------------

    StmtPtr parse_statement() {
        DepthGuard guard(*this);
        const Token& t = peek();
        if (t.kind == TokKind::Keyword) {
            if (t.text == "if") return parse_if();
            if (t.text == "for") return parse_for();
            if (t.text == "while") return parse_while();
            if (t.text == "def") return parse_def();
            if (t.text == "return") return parse_return();
        }
        // assignment or bare expression
        if (t.kind == TokKind::Name && peek(1).kind == TokKind::Op && peek(1).text == "=") {
            auto stmt = std::make_unique<Stmt>();
            stmt->kind = Stmt::Kind::Assign;
            stmt->line = t.line;
            stmt->name = t.text;
            advance();
            advance();
            stmt->expr = parse_expr();
            return stmt;
        }
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::Kind::Expr;
        stmt->line = t.line;
        stmt->expr = parse_expr();
        return stmt;
    }

    StmtPtr parse_if() {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::Kind::If;
        stmt->line = peek().line;
        expect_keyword("if");
        stmt->expr = parse_expr();
        stmt->body = parse_block();
        if (keyword_after_separators("else")) {
            skip_separators();
            advance();
            if (peek_keyword("if")) {
                stmt->else_body.push_back(parse_if());
            } else {
                stmt->else_body = parse_block();
            }
        }
        return stmt;
    }

    StmtPtr parse_for() {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::Kind::For;
        stmt->line = peek().line;
        expect_keyword("for");
        stmt->name = expect_name("loop variable");
        expect_keyword("in");
        stmt->expr = parse_expr();
        stmt->body = parse_block();
        return stmt;
    }

    StmtPtr parse_while() {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::Kind::While;
        stmt->line = peek().line;
        expect_keyword("while");
        stmt->expr = parse_expr();
        stmt->body = parse_block();
        return stmt;
    }

    StmtPtr parse_def() {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::Kind::FuncDef;
        stmt->line = peek().line;
        expect_keyword("def");
        stmt->name = expect_name("function name");
        expect_op("(");
        if (!peek_op(")")) {
            while (true) {
                stmt->params.push_back(expect_name("parameter name"));
                if (peek_op(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        expect_op(")");
        ++func_depth_;
        stmt->body = parse_block();
        --func_depth_;
        return stmt;
    }

    StmtPtr parse_return() {
        auto stmt = std::make_unique<Stmt>();
        stmt->kind = Stmt::Kind::Return;
        stmt->line = peek().line;
        expect_keyword("return");
        if (func_depth_ == 0)
            throw ScriptError{ScriptError::Kind::Parse, stmt->line,
                              "return outside of a function"};
        if (peek().kind != TokKind::Separator && peek().kind != TokKind::End &&
            !peek_op("}"))
            stmt->expr = parse_expr();
        return stmt;
    }

    std::vector<StmtPtr> parse_block() {
        skip_separators();  // the opening brace may sit on its own line
        expect_op("{");
        std::vector<StmtPtr> body;
        skip_separators();
        while (!peek_op("}")) {
            if (at_end())
                throw ScriptError{ScriptError::Kind::Parse, peek().line,
                                  "unterminated block, expected '}'"};
            body.push_back(parse_statement());
            if (peek().kind == TokKind::Separator) skip_separators();
            else if (!peek_op("}"))
                throw ScriptError{ScriptError::Kind::Parse, peek().line,
                                  "expected newline or '}' after statement"};
        }
        expect_op("}");
        return body;
    }

    // --- expressions (precedence climbing) ----------------------------------

    ExprPtr parse_expr() {
        DepthGuard guard(*this);
        return parse_or();
    }

    ExprPtr parse_or() {
        auto lhs = parse_and();
        while (peek_keyword("or")) {
            int line = peek().line;
            advance();
            lhs = make_binary("or", std::move(lhs), parse_and(), line);
        }
        return lhs;
    }

    ExprPtr parse_and() {
        auto lhs = parse_not();
        while (peek_keyword("and")) {
            int line = peek().line;
            advance();
            lhs = make_binary("and", std::move(lhs), parse_not(), line);
        }
        return lhs;
    }

    ExprPtr parse_not() {
        if (peek_keyword("not")) {
            int line = peek().line;
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Unary;
            e->name = "not";
            e->line = line;
            e->items.push_back(parse_not());
            return e;
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        auto lhs = parse_additive();
        static const char* ops[] = {"==", "!=", "<=", ">=", "<", ">"};
        for (const char* op : ops) {
            if (peek().kind == TokKind::Op && peek().text == op) {
                int line = peek().line;
                advance();
                return make_binary(op, std::move(lhs), parse_additive(), line);
            }
        }
        return lhs;
    }

    ExprPtr parse_additive() {
        auto lhs = parse_multiplicative();
        while (peek().kind == TokKind::Op && (peek().text == "+" || peek().text == "-")) {
            std::string op = peek().text;
            int line = peek().line;
            advance();
            lhs = make_binary(op, std::move(lhs), parse_multiplicative(), line);
        }
        return lhs;
    }

    ExprPtr parse_multiplicative() {
        auto lhs = parse_unary();
        while (peek().kind == TokKind::Op &&
               (peek().text == "*" || peek().text == "/" || peek().text == "%")) {
            std::string op = peek().text;
            int line = peek().line;
            advance();
            lhs = make_binary(op, std::move(lhs), parse_unary(), line);
        }
        return lhs;
    }

    ExprPtr parse_unary() {
        if (peek().kind == TokKind::Op && peek().text == "-") {
            int line = peek().line;
            advance();
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Unary;
            e->name = "-";
            e->line = line;
            e->items.push_back(parse_unary());
            return e;
        }
        return parse_postfix();
    }

    ExprPtr parse_postfix() {
        auto e = parse_primary();
        while (peek_op("[")) {
            int line = peek().line;
            advance();
            auto idx = std::make_unique<Expr>();
            idx->kind = Expr::Kind::Index;
            idx->line = line;
            idx->items.push_back(std::move(e));
            idx->items.push_back(parse_expr());
            expect_op("]");
            e = std::move(idx);
        }
        return e;
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        auto e = std::make_unique<Expr>();
        e->line = t.line;
        switch (t.kind) {
            case TokKind::Int:
                e->kind = Expr::Kind::IntLit;
                e->int_value = t.int_value;
                advance();
                return e;
            case TokKind::Float:
                e->kind = Expr::Kind::FloatLit;
                e->float_value = t.float_value;
                advance();
                return e;
            case TokKind::Str:
                e->kind = Expr::Kind::StrLit;
                e->str_value = t.str_value;
                advance();
                return e;
            case TokKind::Keyword:
                if (t.text == "true" || t.text == "false") {
                    e->kind = Expr::Kind::BoolLit;
                    e->bool_value = t.text == "true";
                    advance();
                    return e;
                }
                if (t.text == "null") {
                    e->kind = Expr::Kind::NullLit;
                    advance();
                    return e;
                }
                throw ScriptError{ScriptError::Kind::Parse, t.line,
                                  "unexpected keyword '" + t.text + "'"};
            case TokKind::Name: {
                std::string name = t.text;
                advance();
                if (peek_op("(")) {
                    advance();
                    e->kind = Expr::Kind::Call;
                    e->name = name;
                    if (!peek_op(")")) {
                        while (true) {
                            e->items.push_back(parse_expr());
                            if (peek_op(",")) {
                                advance();
                                continue;
                            }
                            break;
                        }
                    }
                    expect_op(")");
                    return e;
                }
                e->kind = Expr::Kind::Name;
                e->name = name;
                return e;
            }
            case TokKind::Op:
                if (t.text == "(") {
                    advance();
                    auto inner = parse_expr();
                    expect_op(")");
                    return inner;
                }
                if (t.text == "[") return parse_list_literal();
                if (t.text == "{") return parse_map_literal();
                throw ScriptError{ScriptError::Kind::Parse, t.line,
                                  "unexpected token '" + t.text + "'"};
            case TokKind::Separator:
                throw ScriptError{ScriptError::Kind::Parse, t.line,
                                  "unexpected end of statement"};
            case TokKind::End:
                throw ScriptError{ScriptError::Kind::Parse, t.line, "unexpected end of input"};
        }
        throw ScriptError{ScriptError::Kind::Parse, t.line, "unexpected token"};
    }

    ExprPtr parse_list_literal() {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::ListLit;
        e->line = peek().line;
        expect_op("[");
        if (!peek_op("]")) {
            while (true) {
                e->items.push_back(parse_expr());
                if (peek_op(",")) {
                    advance();
                    continue;
                }
                break;
            }
        }
        expect_op("]");
        return e;
    }

    // Map entries may span lines; separators inside the braces are skipped.
    ExprPtr parse_map_literal() {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::MapLit;
        e->line = peek().line;
        expect_op("{");
        skip_separators();
        if (!peek_op("}")) {
            while (true) {
                if (peek().kind != TokKind::Str)
                    throw ScriptError{ScriptError::Kind::Parse, peek().line,
                                      "map keys must be string literals"};
                std::string key = peek().str_value;
                advance();
                expect_op(":");
                skip_separators();
                e->entries.emplace_back(key, parse_expr());
                skip_separators();
                if (peek_op(",")) {
                    advance();
                    skip_separators();
                    if (peek_op("}")) break;  // trailing comma
                    continue;
                }
                break;
            }
        }
        skip_separators();
        expect_op("}");
        return e;
    }

    // --- token plumbing ------------------------------------------------------

    ExprPtr make_binary(std::string op, ExprPtr lhs, ExprPtr rhs, int line) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Binary;
        e->name = std::move(op);
        e->line = line;
        e->items.push_back(std::move(lhs));
        e->items.push_back(std::move(rhs));
        return e;
    }

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }

    void advance() {
        if (pos_ + 1 < tokens_.size()) ++pos_;
    }

    bool at_end() const { return peek().kind == TokKind::End; }

    bool peek_op(std::string_view op) const {
        return peek().kind == TokKind::Op && peek().text == op;
    }

    bool peek_keyword(std::string_view kw) const {
        return peek().kind == TokKind::Keyword && peek().text == kw;
    }

    bool keyword_after_separators(std::string_view kw) const {
        size_t i = pos_;
        while (i < tokens_.size() && tokens_[i].kind == TokKind::Separator) ++i;
        return i < tokens_.size() && tokens_[i].kind == TokKind::Keyword &&
               tokens_[i].text == kw;
    }

    void expect_op(std::string_view op) {
        if (!peek_op(op))
            throw ScriptError{ScriptError::Kind::Parse, peek().line,
                              "expected '" + std::string(op) + "'"};
        advance();
    }

    void expect_keyword(std::string_view kw) {
        if (!peek_keyword(kw))
            throw ScriptError{ScriptError::Kind::Parse, peek().line,
                              "expected '" + std::string(kw) + "'"};
        advance();
    }

    std::string expect_name(std::string_view what) {
        if (peek().kind != TokKind::Name)
            throw ScriptError{ScriptError::Kind::Parse, peek().line,
                              "expected " + std::string(what)};
        std::string name = peek().text;
        advance();
        return name;
    }

    void skip_separators() {
        while (peek().kind == TokKind::Separator) advance();
    }

    void expect_statement_end() {
        if (at_end()) return;
        if (peek().kind == TokKind::Separator) {
            skip_separators();
            return;
        }
        throw ScriptError{ScriptError::Kind::Parse, peek().line,
                          "expected newline after statement"};
    }

    std::vector<Token> tokens_;
    size_t pos_ = 0;
    int func_depth_ = 0;
    int depth_ = 0;
};

}  // namespace webscout::script
