#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "weakstat/scenarios.hpp"

// A small line-oriented language for declaring scenarios:
//
//   doc        := decl+
//   decl       := dim_decl | state_decl | op_decl | pvm_decl | probe_decl | query_decl
//   dim_decl   := "dim" INT ("x" INT)?
//   state_decl := "state" NAME "=" ket_expr | "state" NAME "= maxent" INT
//   op_decl    := "op" NAME "=" op_expr
//   pvm_decl   := "pvm" NAME "=" "{" NAME ("," NAME)* "}"
//   probe_decl := "probe" NAME "=" op_expr
//   query_decl := "query" NAME "=" "joint(" NAME "," NAME ")" | "cond(" NAME "," NAME ")"
//   ket_expr   := "ket[" cnum ("," cnum)* "]"
//   op_expr    := term (("+"|"-") term)* ; term := factor ("*"|"⊗"|"kron") factor*
//   factor     := cnum | "I" INT | "X"|"Y"|"Z" | "outer(" ket_expr "," ket_expr ")"
//               | "sqrt(" op_expr ")" | NAME | "(" op_expr ")"
//   cnum       := REAL | REAL "i" | REAL ("+"|"-") REAL "i"
//
// '#' starts a line comment. Kets are auto-normalized (with a warning when
// the written norm is not 1). The constants "i" and "pi" resolve as scalars.

namespace weakstat::dsl {

struct SourcePos {
    int line = 1;
    int column = 1;
};

struct Span {
    SourcePos begin;
    SourcePos end;
};

struct Diagnostic {
    enum class Severity { Error, Warning };
    Severity severity = Severity::Error;
    std::string message;
    int line = 1;
    int column = 1;
};

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct KetLiteral {
    std::vector<Complex> amplitudes;
    Span span;
};

struct Expr {
    struct Scalar {
        Complex value;
    };
    struct PauliAtom {
        char which; // 'X', 'Y' or 'Z'
    };
    struct IdentityAtom {
        Eigen::Index dim;
    };
    struct NameRef {
        std::string name;
    };
    struct OuterProduct {
        KetLiteral left;
        KetLiteral right;
    };
    struct Sqrt {
        ExprPtr arg;
    };
    struct Binary {
        enum class Op { Add, Sub, Mul, Kron };
        Op op;
        ExprPtr lhs;
        ExprPtr rhs;
    };

    std::variant<Scalar, PauliAtom, IdentityAtom, NameRef, OuterProduct, Sqrt, Binary> node;
    Span span;
};

enum class DeclKind { Dim, State, Op, Pvm, Probe, Query };

struct Declaration {
    DeclKind kind = DeclKind::Dim;
    std::string name; // empty for dim declarations
    Span span;

    // dim
    Eigen::Index dim_a = 0;
    Eigen::Index dim_b = 0; // 0 when written without the "x B" part

    // state
    std::optional<KetLiteral> ket;
    std::optional<Eigen::Index> maxent_dim;

    // op / probe
    ExprPtr expr;

    // pvm
    std::vector<std::string> pvm_members;

    // query
    std::optional<QueryKind> query_kind;
    std::string query_final;
    std::string query_probe;
};

struct ScenarioDoc {
    std::vector<Declaration> declarations;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

struct ParseResult {
    std::optional<ScenarioDoc> doc;
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return doc.has_value(); }
};

/// Parse source text into a declaration list. Never throws: malformed input
/// produces positioned error diagnostics.
ParseResult parse(std::string_view text);

struct ElaborateResult {
    std::optional<Scenario> scenario;
    std::vector<Diagnostic> diagnostics; // may hold warnings even on success
    bool ok() const { return scenario.has_value(); }
};

/// Resolve a parsed document into a validated Scenario.
ElaborateResult elaborate(const ScenarioDoc &doc, const std::string &scenario_name = "dsl");

/// parse + elaborate, with merged diagnostics.
ElaborateResult load_scenario(std::string_view text, const std::string &scenario_name = "dsl");

/// Regenerate source text; reparsing yields a structurally equal document.
std::string pretty_print(const ScenarioDoc &doc);

/// Structural AST equality ignoring spans.
bool structurally_equal(const ScenarioDoc &a, const ScenarioDoc &b);

/// "line:col: error: message" rendering used by the CLI.
std::string format_diagnostic(const Diagnostic &diag);

} // namespace weakstat::dsl
