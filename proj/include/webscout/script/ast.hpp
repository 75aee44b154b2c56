#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace webscout::script {

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind {
        NullLit,
        BoolLit,
        IntLit,
        FloatLit,
        StrLit,
        ListLit,
        MapLit,
        Name,
        Index,   // items[0][items[1]]
        Call,    // name(items...)
        Unary,   // op items[0]
        Binary,  // items[0] op items[1]
    };

    Kind kind = Kind::NullLit;
    int line = 0;
    bool bool_value = false;
    long long int_value = 0;
    double float_value = 0.0;
    std::string str_value;
    std::string name;  // identifier, call target, or operator spelling
    std::vector<ExprPtr> items;
    std::vector<std::pair<std::string, ExprPtr>> entries;  // map literal
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
    enum class Kind { Expr, Assign, If, For, While, FuncDef, Return };

    Kind kind = Kind::Expr;
    int line = 0;
    std::string name;  // assign target, loop variable, or function name
    ExprPtr expr;      // value, condition, iterable, or return expression
    std::vector<StmtPtr> body;
    std::vector<StmtPtr> else_body;
    std::vector<std::string> params;
};

struct Program {
    std::vector<StmtPtr> statements;
};

}  // namespace webscout::script
