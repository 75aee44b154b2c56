#pragma once

#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace webscout::script {

// Script failures are data, never process failures. The sandbox formats one
// one-line diagnostic per error with a distinct class label and line number.
struct ScriptError {
    enum class Kind { Parse, UndefinedName, Type, Limit, Runtime };

    Kind kind = Kind::Runtime;
    int line = 0;
    std::string message;

    std::string text() const {
        std::string label;
        switch (kind) {
            case Kind::Parse: label = "parse error"; break;
            case Kind::UndefinedName: label = "undefined name"; break;
            case Kind::Type: label = "type error"; break;
            case Kind::Limit: label = "limit exceeded"; break;
            case Kind::Runtime: label = "runtime error"; break;
        }
        if (line > 0) return label + " (line " + std::to_string(line) + "): " + message;
        return label + ": " + message;
    }
};

enum class TokKind { Name, Keyword, Int, Float, Str, Op, Separator, End };

struct Token {
    TokKind kind = TokKind::End;
    std::string text;        // name, keyword, or operator spelling
    long long int_value = 0;
    double float_value = 0.0;
    std::string str_value;   // decoded string literal
    int line = 1;
};

inline bool is_keyword(std::string_view word) {
    static const char* keywords[] = {"if",  "else", "for",  "in",   "while", "def",
                                     "return", "and", "or", "not", "true",  "false", "null"};
    for (const char* k : keywords)
        if (word == k) return true;
    return false;
}

class Lexer {
public:
    explicit Lexer(std::string_view source) : src_(source) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                continue;
            }
            if (c == '\n') {
                ++pos_;
                ++line_;
                // newlines separate statements except inside ( ) and [ ]
                if (paren_depth_ == 0) push_separator(out, line_ - 1);
                continue;
            }
            if (c == ';') {
                ++pos_;
                push_separator(out, line_);
                continue;
            }
            if (c == '"' || c == '\'') {
                out.push_back(lex_string());
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c))) {
                out.push_back(lex_number());
                continue;
            }
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(lex_name());
                continue;
            }
            out.push_back(lex_operator());
        }
        push_separator(out, line_);
        Token end;
        end.kind = TokKind::End;
        end.line = line_;
        out.push_back(end);
        return out;
    }

private:
    void push_separator(std::vector<Token>& out, int line) {
        // collapse runs of separators
        if (!out.empty() && out.back().kind == TokKind::Separator) return;
        Token t;
        t.kind = TokKind::Separator;
        t.line = line;
        out.push_back(t);
    }

    Token lex_string() {
        char quote = src_[pos_];
        int start_line = line_;
        ++pos_;
        std::string value;
        while (true) {
            if (pos_ >= src_.size())
                throw ScriptError{ScriptError::Kind::Parse, start_line,
                                  "unterminated string literal"};
            char c = src_[pos_++];
            if (c == quote) break;
            if (c == '\n') {
                ++line_;
                throw ScriptError{ScriptError::Kind::Parse, start_line,
                                  "newline inside string literal"};
            }
            if (c == '\\' && pos_ < src_.size()) {
                char esc = src_[pos_++];
                switch (esc) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case 'r': value += '\r'; break;
                    case '\\': value += '\\'; break;
                    case '"': value += '"'; break;
                    case '\'': value += '\''; break;
                    default: value += esc;
                }
                continue;
            }
            value += c;
        }
        Token t;
        t.kind = TokKind::Str;
        t.str_value = std::move(value);
        t.line = start_line;
        return t;
    }

    Token lex_number() {
        size_t start = pos_;
        bool is_float = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
            is_float = true;
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
        }
        std::string text(src_.substr(start, pos_ - start));
        Token t;
        t.line = line_;
        if (is_float) {
            t.kind = TokKind::Float;
            t.float_value = std::strtod(text.c_str(), nullptr);
        } else {
            errno = 0;
            char* end = nullptr;
            long long v = std::strtoll(text.c_str(), &end, 10);
            if (errno == ERANGE)
                throw ScriptError{ScriptError::Kind::Parse, line_,
                                  "integer literal out of range: " + text};
            t.kind = TokKind::Int;
            t.int_value = v;
        }
        return t;
    }

    Token lex_name() {
        size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                      src_[pos_] == '_'))
            ++pos_;
        Token t;
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = is_keyword(t.text) ? TokKind::Keyword : TokKind::Name;
        t.line = line_;
        return t;
    }

    Token lex_operator() {
        static const char* two_char[] = {"==", "!=", "<=", ">="};
        Token t;
        t.kind = TokKind::Op;
        t.line = line_;
        if (pos_ + 1 < src_.size()) {
            std::string pair(src_.substr(pos_, 2));
            for (const char* op : two_char) {
                if (pair == op) {
                    t.text = pair;
                    pos_ += 2;
                    return t;
                }
            }
        }
        char c = src_[pos_];
        static const std::string singles = "+-*/%<>=()[]{},:";
        if (singles.find(c) == std::string::npos)
            throw ScriptError{ScriptError::Kind::Parse, line_,
                              std::string("unexpected character '") + c + "'"};
        if (c == '(' || c == '[') ++paren_depth_;
        if ((c == ')' || c == ']') && paren_depth_ > 0) --paren_depth_;
        t.text = std::string(1, c);
        ++pos_;
        return t;
    }

    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    int paren_depth_ = 0;
};

}  // namespace webscout::script
