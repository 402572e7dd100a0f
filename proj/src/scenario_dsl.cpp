#include "weakstat/scenario_dsl.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace weakstat::dsl {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class TokKind {
    Ident,
    Number,
    ImagNumber,
    Plus,
    Minus,
    Star,
    Kron,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Equals,
    Unknown,
    End,
};

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    double number = 0.0;
    SourcePos pos;
    bool starts_line = false;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<Token> lex(std::string_view text, SourcePos &end_pos) {
    std::vector<Token> tokens;
    int line = 1, column = 1;
    int last_token_line = 0;
    std::size_t k = 0;
    const std::size_t n = text.size();

    auto push = [&](TokKind kind, std::string tok_text, double number, SourcePos pos) {
        Token t{kind, std::move(tok_text), number, pos, pos.line > last_token_line};
        last_token_line = pos.line;
        tokens.push_back(std::move(t));
    };

    while (k < n) {
        const char c = text[k];
        if (c == '\n') {
            ++line;
            column = 1;
            ++k;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++column;
            ++k;
            continue;
        }
        if (c == '#') {
            while (k < n && text[k] != '\n')
                ++k, ++column;
            continue;
        }
        const SourcePos pos{line, column};
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = k;
            while (j < n && std::isdigit(static_cast<unsigned char>(text[j])))
                ++j;
            if (j < n && text[j] == '.') {
                ++j;
                while (j < n && std::isdigit(static_cast<unsigned char>(text[j])))
                    ++j;
            }
            if (j < n && (text[j] == 'e' || text[j] == 'E')) {
                std::size_t e = j + 1;
                if (e < n && (text[e] == '+' || text[e] == '-'))
                    ++e;
                if (e < n && std::isdigit(static_cast<unsigned char>(text[e]))) {
                    ++e;
                    while (e < n && std::isdigit(static_cast<unsigned char>(text[e])))
                        ++e;
                    j = e;
                }
            }
            std::string body(text.substr(k, j - k));
            bool imaginary = false;
            // a trailing bare 'i' marks an imaginary literal: 2i, 0.5i
            if (j < n && text[j] == 'i' && (j + 1 >= n || !ident_char(text[j + 1]))) {
                imaginary = true;
                ++j;
            }
            const double value = std::strtod(body.c_str(), nullptr);
            push(imaginary ? TokKind::ImagNumber : TokKind::Number, body + (imaginary ? "i" : ""),
                 value, pos);
            column += static_cast<int>(j - k);
            k = j;
            continue;
        }
        if (ident_start(c)) {
            std::size_t j = k;
            while (j < n && ident_char(text[j]))
                ++j;
            push(TokKind::Ident, std::string(text.substr(k, j - k)), 0.0, pos);
            column += static_cast<int>(j - k);
            k = j;
            continue;
        }
        // UTF-8 tensor sign
        if (static_cast<unsigned char>(c) == 0xE2 && k + 2 < n &&
            static_cast<unsigned char>(text[k + 1]) == 0x8A &&
            static_cast<unsigned char>(text[k + 2]) == 0x97) {
            push(TokKind::Kron, "\xE2\x8A\x97", 0.0, pos);
            k += 3;
            ++column;
            continue;
        }
        TokKind kind = TokKind::Unknown;
        switch (c) {
        case '+': kind = TokKind::Plus; break;
        case '-': kind = TokKind::Minus; break;
        case '*': kind = TokKind::Star; break;
        case '(': kind = TokKind::LParen; break;
        case ')': kind = TokKind::RParen; break;
        case '[': kind = TokKind::LBracket; break;
        case ']': kind = TokKind::RBracket; break;
        case '{': kind = TokKind::LBrace; break;
        case '}': kind = TokKind::RBrace; break;
        case ',': kind = TokKind::Comma; break;
        case '=': kind = TokKind::Equals; break;
        default: break;
        }
        push(kind, std::string(1, c), 0.0, pos);
        ++column;
        ++k;
    }
    end_pos = {line, column};
    return tokens;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

const std::set<std::string> kDeclKeywords = {"dim", "state", "op", "pvm", "probe", "query"};
const std::set<std::string> kReservedNames = {
    "dim", "state", "op",   "pvm",  "probe", "query", "maxent", "ket", "outer",
    "sqrt", "kron",  "joint", "cond", "I",     "X",     "Y",      "Z",   "i",
    "pi"};

constexpr std::size_t kMaxDiagnostics = 64;

struct ParseAbort {};

class Parser {
  public:
    Parser(std::vector<Token> tokens, SourcePos end_pos)
        : tokens_(std::move(tokens)), end_pos_(end_pos) {}

    ParseResult run() {
        ScenarioDoc doc;
        if (tokens_.empty()) {
            error({1, 1}, "expected at least one declaration");
            return {std::nullopt, std::move(diags_)};
        }
        while (!at_end()) {
            const std::size_t before = index_;
            try {
                doc.declarations.push_back(parse_declaration());
                expect_line_break();
            } catch (const ParseAbort &) {
                if (diags_.size() >= kMaxDiagnostics)
                    break;
                synchronize(before);
            }
        }
        if (has_error())
            return {std::nullopt, std::move(diags_)};
        return {std::move(doc), std::move(diags_)};
    }

  private:
    const Token &peek(std::size_t ahead = 0) const {
        static const Token end_token{};
        const std::size_t k = index_ + ahead;
        return k < tokens_.size() ? tokens_[k] : end_token;
    }
    bool at_end() const { return index_ >= tokens_.size(); }
    const Token &advance() { return tokens_[index_++]; }
    SourcePos here() const { return at_end() ? end_pos_ : peek().pos; }
    SourcePos last_pos() const {
        return index_ > 0 ? tokens_[index_ - 1].pos : SourcePos{1, 1};
    }

    bool has_error() const {
        for (const auto &d : diags_)
            if (d.severity == Diagnostic::Severity::Error)
                return true;
        return false;
    }

    [[noreturn]] void fail(SourcePos pos, const std::string &message) {
        error(pos, message);
        throw ParseAbort{};
    }

    void error(SourcePos pos, const std::string &message) {
        if (diags_.size() < kMaxDiagnostics)
            diags_.push_back({Diagnostic::Severity::Error, message, pos.line, pos.column});
    }

    void synchronize(std::size_t before) {
        if (index_ == before && !at_end())
            ++index_; // guarantee progress
        while (!at_end()) {
            const Token &t = peek();
            if (t.kind == TokKind::Ident && t.starts_line && kDeclKeywords.count(t.text))
                return;
            ++index_;
        }
    }

    void expect_line_break() {
        if (at_end())
            return;
        const Token &t = peek();
        if (t.pos.line == last_pos().line)
            fail(t.pos, "unexpected '" + t.text + "' after declaration");
    }

    std::string describe(const Token &t) const {
        if (t.kind == TokKind::End)
            return "end of input";
        return "'" + t.text + "'";
    }

    const Token &expect(TokKind kind, const std::string &what) {
        if (peek().kind != kind)
            fail(here(), "expected " + what + ", found " + describe(peek()));
        return advance();
    }

    Eigen::Index expect_positive_int(const std::string &what) {
        const Token &t = expect(TokKind::Number, what);
        if (t.number <= 0 || t.number != std::floor(t.number) ||
            t.text.find('.') != std::string::npos)
            fail(t.pos, what + " must be a positive integer");
        return static_cast<Eigen::Index>(t.number);
    }

    std::string parse_name() {
        const Token &t = expect(TokKind::Ident, "a name");
        if (kReservedNames.count(t.text))
            fail(t.pos, "name '" + t.text + "' is reserved");
        return t.text;
    }

    Declaration parse_declaration() {
        const Token &t = peek();
        if (t.kind != TokKind::Ident || !kDeclKeywords.count(t.text))
            fail(here(), "expected a declaration (dim, state, op, pvm, probe or query), found " +
                             describe(t));
        const SourcePos begin = t.pos;
        const std::string keyword = advance().text;
        Declaration decl;
        decl.span.begin = begin;
        if (keyword == "dim")
            parse_dim(decl);
        else if (keyword == "state")
            parse_state(decl);
        else if (keyword == "op")
            parse_op(decl, DeclKind::Op);
        else if (keyword == "probe")
            parse_op(decl, DeclKind::Probe);
        else if (keyword == "pvm")
            parse_pvm(decl);
        else
            parse_query(decl);
        decl.span.end = last_pos();
        return decl;
    }

    void parse_dim(Declaration &decl) {
        decl.kind = DeclKind::Dim;
        decl.dim_a = expect_positive_int("a dimension");
        decl.dim_b = 0;
        // accept both "2 x 2" and the compact "2x2"
        if (peek().kind == TokKind::Ident) {
            const Token &t = peek();
            if (t.text == "x") {
                advance();
                decl.dim_b = expect_positive_int("a dimension");
            } else if (t.text.size() > 1 && t.text[0] == 'x' &&
                       t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
                decl.dim_b = static_cast<Eigen::Index>(std::stoll(t.text.substr(1)));
                if (decl.dim_b <= 0)
                    fail(t.pos, "a dimension must be a positive integer");
                advance();
            }
        }
    }

    void parse_state(Declaration &decl) {
        decl.kind = DeclKind::State;
        decl.name = parse_name();
        expect(TokKind::Equals, "'='");
        if (peek().kind == TokKind::Ident && peek().text == "maxent") {
            advance();
            decl.maxent_dim = expect_positive_int("the maxent dimension");
            return;
        }
        decl.ket = parse_ket();
    }

    void parse_op(Declaration &decl, DeclKind kind) {
        decl.kind = kind;
        decl.name = parse_name();
        expect(TokKind::Equals, "'='");
        decl.expr = parse_op_expr();
    }

    void parse_pvm(Declaration &decl) {
        decl.kind = DeclKind::Pvm;
        decl.name = parse_name();
        expect(TokKind::Equals, "'='");
        expect(TokKind::LBrace, "'{'");
        decl.pvm_members.push_back(parse_name());
        while (peek().kind == TokKind::Comma) {
            advance();
            decl.pvm_members.push_back(parse_name());
        }
        expect(TokKind::RBrace, "'}'");
    }

    void parse_query(Declaration &decl) {
        decl.kind = DeclKind::Query;
        decl.name = parse_name();
        expect(TokKind::Equals, "'='");
        const Token &t = expect(TokKind::Ident, "'joint' or 'cond'");
        if (t.text == "joint")
            decl.query_kind = QueryKind::Joint;
        else if (t.text == "cond")
            decl.query_kind = QueryKind::Conditional;
        else
            fail(t.pos, "expected 'joint' or 'cond', found '" + t.text + "'");
        expect(TokKind::LParen, "'('");
        decl.query_final = parse_name();
        expect(TokKind::Comma, "','");
        decl.query_probe = parse_name();
        expect(TokKind::RParen, "')'");
    }

    Complex parse_cnum() {
        double sign = 1.0;
        if (peek().kind == TokKind::Minus) {
            advance();
            sign = -1.0;
        }
        if (peek().kind == TokKind::ImagNumber)
            return {0.0, sign * advance().number};
        const Token &re = expect(TokKind::Number, "a number");
        double real = sign * re.number;
        if ((peek().kind == TokKind::Plus || peek().kind == TokKind::Minus) &&
            peek(1).kind == TokKind::ImagNumber) {
            const double im_sign = (advance().kind == TokKind::Plus) ? 1.0 : -1.0;
            return {real, im_sign * advance().number};
        }
        return {real, 0.0};
    }

    KetLiteral parse_ket() {
        const Token &kw = expect(TokKind::Ident, "'ket'");
        if (kw.text != "ket")
            fail(kw.pos, "expected 'ket', found '" + kw.text + "'");
        KetLiteral ket;
        ket.span.begin = kw.pos;
        expect(TokKind::LBracket, "'['");
        ket.amplitudes.push_back(parse_cnum());
        while (peek().kind == TokKind::Comma) {
            advance();
            ket.amplitudes.push_back(parse_cnum());
        }
        expect(TokKind::RBracket, "']'");
        ket.span.end = last_pos();
        return ket;
    }

    ExprPtr make_expr(Expr expr) { return std::make_shared<const Expr>(std::move(expr)); }

    ExprPtr parse_op_expr() {
        ExprPtr lhs = parse_term();
        while (peek().kind == TokKind::Plus || peek().kind == TokKind::Minus) {
            const auto op = (advance().kind == TokKind::Plus) ? Expr::Binary::Op::Add
                                                              : Expr::Binary::Op::Sub;
            ExprPtr rhs = parse_term();
            Span span{lhs->span.begin, rhs->span.end};
            lhs = make_expr({Expr::Binary{op, std::move(lhs), std::move(rhs)}, span});
        }
        return lhs;
    }

    bool at_term_operator() const {
        const Token &t = peek();
        return t.kind == TokKind::Star || t.kind == TokKind::Kron ||
               (t.kind == TokKind::Ident && t.text == "kron");
    }

    ExprPtr parse_term() {
        ExprPtr lhs = parse_factor();
        while (at_term_operator()) {
            const Token &t = advance();
            const auto op =
                (t.kind == TokKind::Star) ? Expr::Binary::Op::Mul : Expr::Binary::Op::Kron;
            ExprPtr rhs = parse_factor();
            Span span{lhs->span.begin, rhs->span.end};
            lhs = make_expr({Expr::Binary{op, std::move(lhs), std::move(rhs)}, span});
        }
        return lhs;
    }

    ExprPtr parse_factor() {
        const Token &t = peek();
        const Span span{t.pos, t.pos};
        switch (t.kind) {
        case TokKind::Number:
            advance();
            return make_expr({Expr::Scalar{{t.number, 0.0}}, span});
        case TokKind::ImagNumber:
            advance();
            return make_expr({Expr::Scalar{{0.0, t.number}}, span});
        case TokKind::LParen: {
            advance();
            ExprPtr inner = parse_op_expr();
            expect(TokKind::RParen, "')'");
            return inner;
        }
        case TokKind::Ident:
            break;
        default:
            fail(here(), "expected an operator factor, found " + describe(t));
        }
        // identifier factors
        if (t.text == "X" || t.text == "Y" || t.text == "Z") {
            advance();
            return make_expr({Expr::PauliAtom{t.text[0]}, span});
        }
        if (t.text == "I") {
            advance();
            const Eigen::Index dim = expect_positive_int("the identity dimension");
            return make_expr({Expr::IdentityAtom{dim}, {t.pos, last_pos()}});
        }
        if (t.text.size() > 1 && t.text[0] == 'I' &&
            t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
            advance();
            return make_expr(
                {Expr::IdentityAtom{static_cast<Eigen::Index>(std::stoll(t.text.substr(1)))},
                 span});
        }
        if (t.text == "i") {
            advance();
            return make_expr({Expr::Scalar{{0.0, 1.0}}, span});
        }
        if (t.text == "pi") {
            advance();
            return make_expr({Expr::Scalar{{std::numbers::pi, 0.0}}, span});
        }
        if (t.text == "outer") {
            advance();
            expect(TokKind::LParen, "'('");
            KetLiteral left = parse_ket();
            expect(TokKind::Comma, "','");
            KetLiteral right = parse_ket();
            expect(TokKind::RParen, "')'");
            return make_expr({Expr::OuterProduct{std::move(left), std::move(right)},
                              {t.pos, last_pos()}});
        }
        if (t.text == "sqrt") {
            advance();
            expect(TokKind::LParen, "'('");
            ExprPtr arg = parse_op_expr();
            expect(TokKind::RParen, "')'");
            return make_expr({Expr::Sqrt{std::move(arg)}, {t.pos, last_pos()}});
        }
        if (t.text == "ket")
            fail(t.pos, "a ket literal is not an operator; use outer(ket[...], ket[...])");
        if (kReservedNames.count(t.text))
            fail(t.pos, "unexpected keyword '" + t.text + "' in expression");
        advance();
        return make_expr({Expr::NameRef{t.text}, span});
    }

    std::vector<Token> tokens_;
    SourcePos end_pos_;
    std::size_t index_ = 0;
    std::vector<Diagnostic> diags_;
};

} // namespace

ParseResult parse(std::string_view text) {
    SourcePos end_pos{1, 1};
    std::vector<Token> tokens = lex(text, end_pos);
    return Parser(std::move(tokens), end_pos).run();
}

// ---------------------------------------------------------------------------
// Elaboration
// ---------------------------------------------------------------------------

namespace {

struct EvalError {
    std::string message;
    SourcePos pos;
};

using Value = std::variant<Complex, Matrix>;

bool is_scalar(const Value &v) { return std::holds_alternative<Complex>(v); }

std::string shape_of(const Value &v) {
    if (is_scalar(v))
        return "scalar";
    const Matrix &m = std::get<Matrix>(v);
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

class Elaborator {
  public:
    explicit Elaborator(const ScenarioDoc &doc, std::string name)
        : doc_(doc), scenario_name_(std::move(name)) {}

    ElaborateResult run() {
        collect_dims();
        for (const auto &decl : doc_.declarations) {
            try {
                elaborate_declaration(decl);
            } catch (const EvalError &e) {
                error(e.pos, e.message);
            } catch (const weakstat::Error &e) {
                error(decl.span.begin, e.what());
            }
        }
        finish_checks();
        if (has_error())
            return {std::nullopt, std::move(diags_)};

        Scenario scenario{scenario_name_, dim_a_,  dim_b_, std::move(*initial_),
                          std::move(pvms_),  std::move(probes_), std::move(queries_)};
        try {
            validate_scenario(scenario);
        } catch (const weakstat::Error &e) {
            error({1, 1}, e.what());
            return {std::nullopt, std::move(diags_)};
        }
        return {std::move(scenario), std::move(diags_)};
    }

  private:
    void error(SourcePos pos, const std::string &message) {
        diags_.push_back({Diagnostic::Severity::Error, message, pos.line, pos.column});
    }
    void warn(SourcePos pos, const std::string &message) {
        diags_.push_back({Diagnostic::Severity::Warning, message, pos.line, pos.column});
    }
    bool has_error() const {
        for (const auto &d : diags_)
            if (d.severity == Diagnostic::Severity::Error)
                return true;
        return false;
    }

    void collect_dims() {
        for (const auto &decl : doc_.declarations) {
            if (decl.kind != DeclKind::Dim)
                continue;
            if (have_dim_) {
                error(decl.span.begin, "duplicate dim declaration");
                continue;
            }
            have_dim_ = true;
            dim_a_ = decl.dim_a;
            dim_b_ = decl.dim_b > 0 ? decl.dim_b : 1;
        }
        if (!have_dim_) {
            error({1, 1}, "missing dim declaration");
            dim_a_ = dim_b_ = 1;
        }
    }

    Eigen::Index composite_dim() const { return dim_a_ * dim_b_; }

    Vector normalized_ket(const KetLiteral &ket) {
        Vector v(static_cast<Eigen::Index>(ket.amplitudes.size()));
        for (std::size_t k = 0; k < ket.amplitudes.size(); ++k)
            v[static_cast<Eigen::Index>(k)] = ket.amplitudes[k];
        const double norm = v.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw EvalError{"ket has zero norm", ket.span.begin};
        if (std::abs(norm - 1.0) > 1e-9) {
            std::ostringstream os;
            os << "ket normalized (norm was " << norm << ")";
            warn(ket.span.begin, os.str());
        }
        return v / norm;
    }

    Value eval(const Expr &expr) {
        return std::visit([&](const auto &node) { return eval_node(node, expr.span); },
                          expr.node);
    }

    Value eval_node(const Expr::Scalar &node, Span) { return node.value; }

    Value eval_node(const Expr::PauliAtom &node, Span) {
        switch (node.which) {
        case 'X': return Matrix(pauli_x());
        case 'Y': return Matrix(pauli_y());
        default: return Matrix(pauli_z());
        }
    }

    Value eval_node(const Expr::IdentityAtom &node, Span) {
        return Matrix(identity(node.dim));
    }

    Value eval_node(const Expr::NameRef &node, Span span) {
        const auto it = operators_.find(node.name);
        if (it == operators_.end())
            throw EvalError{"unknown name '" + node.name + "'", span.begin};
        return it->second;
    }

    Value eval_node(const Expr::OuterProduct &node, Span) {
        const Vector u = normalized_ket(node.left);
        const Vector v = normalized_ket(node.right);
        if (u.size() != v.size())
            throw EvalError{"outer: ket dimensions differ", node.left.span.begin};
        return Matrix(u * v.adjoint());
    }

    Value eval_node(const Expr::Sqrt &node, Span span) {
        const Value arg = eval(*node.arg);
        if (!is_scalar(arg))
            throw EvalError{"sqrt expects a scalar argument", span.begin};
        return std::sqrt(std::get<Complex>(arg));
    }

    Value eval_node(const Expr::Binary &node, Span span) {
        Value lhs = eval(*node.lhs);
        Value rhs = eval(*node.rhs);
        using Op = Expr::Binary::Op;
        switch (node.op) {
        case Op::Add:
        case Op::Sub: {
            const double sign = (node.op == Op::Add) ? 1.0 : -1.0;
            if (is_scalar(lhs) && is_scalar(rhs))
                return std::get<Complex>(lhs) + sign * std::get<Complex>(rhs);
            if (!is_scalar(lhs) && !is_scalar(rhs)) {
                const Matrix &a = std::get<Matrix>(lhs);
                const Matrix &b = std::get<Matrix>(rhs);
                if (a.rows() != b.rows() || a.cols() != b.cols())
                    throw EvalError{"dimension mismatch: " + shape_of(lhs) + " vs " +
                                        shape_of(rhs),
                                    span.begin};
                return Matrix(a + sign * b);
            }
            throw EvalError{"cannot add a scalar and an operator (use I<n> explicitly)",
                            span.begin};
        }
        case Op::Mul: {
            if (is_scalar(lhs) && is_scalar(rhs))
                return std::get<Complex>(lhs) * std::get<Complex>(rhs);
            if (is_scalar(lhs))
                return Matrix(std::get<Complex>(lhs) * std::get<Matrix>(rhs));
            if (is_scalar(rhs))
                return Matrix(std::get<Matrix>(lhs) * std::get<Complex>(rhs));
            const Matrix &a = std::get<Matrix>(lhs);
            const Matrix &b = std::get<Matrix>(rhs);
            if (a.cols() != b.rows())
                throw EvalError{"dimension mismatch: " + shape_of(lhs) + " times " +
                                    shape_of(rhs),
                                span.begin};
            return Matrix(a * b);
        }
        case Op::Kron: {
            if (is_scalar(lhs) && is_scalar(rhs))
                return std::get<Complex>(lhs) * std::get<Complex>(rhs);
            if (is_scalar(lhs))
                return Matrix(std::get<Complex>(lhs) * std::get<Matrix>(rhs));
            if (is_scalar(rhs))
                return Matrix(std::get<Matrix>(lhs) * std::get<Complex>(rhs));
            return Matrix(tensor_product(std::get<Matrix>(lhs), std::get<Matrix>(rhs)));
        }
        }
        throw EvalError{"internal: unknown operator", span.begin};
    }

    Matrix eval_operator(const Declaration &decl) {
        const Value v = eval(*decl.expr);
        if (is_scalar(v))
            throw EvalError{"expression evaluates to a scalar, not an operator",
                            decl.span.begin};
        const Matrix &m = std::get<Matrix>(v);
        if (!all_finite(m))
            throw EvalError{"expression evaluates to non-finite entries", decl.span.begin};
        return m;
    }

    void elaborate_declaration(const Declaration &decl) {
        switch (decl.kind) {
        case DeclKind::Dim:
            return; // handled in collect_dims
        case DeclKind::State: {
            if (initial_) {
                error(decl.span.begin, "multiple state declarations");
                return;
            }
            if (decl.maxent_dim) {
                const Eigen::Index d = *decl.maxent_dim;
                if (d != dim_a_ || d != dim_b_) {
                    std::ostringstream os;
                    os << "maxent " << d << " requires 'dim " << d << " x " << d << "'";
                    error(decl.span.begin, os.str());
                    return;
                }
                Vector amps = Vector::Zero(d * d);
                for (Eigen::Index k = 0; k < d; ++k)
                    amps[k * d + k] = 1.0;
                initial_ = DensityMatrix::pure(KetVector::normalized(std::move(amps)));
                return;
            }
            const Vector v = normalized_ket(*decl.ket);
            if (v.size() != composite_dim()) {
                std::ostringstream os;
                os << "state has dimension " << v.size() << ", scenario dimension is "
                   << composite_dim();
                error(decl.ket->span.begin.line ? decl.ket->span.begin : decl.span.begin,
                      os.str());
                return;
            }
            initial_ = DensityMatrix::pure(KetVector(v));
            return;
        }
        case DeclKind::Op:
        case DeclKind::Probe: {
            if (operators_.count(decl.name)) {
                error(decl.span.begin, "duplicate operator name '" + decl.name + "'");
                return;
            }
            const Matrix m = eval_operator(decl);
            if (decl.kind == DeclKind::Probe) {
                if (m.rows() != composite_dim() || m.cols() != composite_dim()) {
                    std::ostringstream os;
                    os << "probe '" << decl.name << "' is " << m.rows() << "x" << m.cols()
                       << ", scenario dimension is " << composite_dim();
                    error(decl.span.begin, os.str());
                    return;
                }
                if (!is_hermitian(m)) {
                    error(decl.span.begin, "probe '" + decl.name + "' is not Hermitian");
                    return;
                }
                probes_.push_back({decl.name, HermitianOperator(m)});
            } else {
                op_names_.insert(decl.name);
            }
            operators_.emplace(decl.name, m);
            return;
        }
        case DeclKind::Pvm: {
            if (!pvm_names_.insert(decl.name).second) {
                error(decl.span.begin, "duplicate pvm name '" + decl.name + "'");
                return;
            }
            Pvm pvm{decl.name, {}};
            std::vector<Projector> projectors;
            for (const auto &member : decl.pvm_members) {
                if (!op_names_.count(member)) {
                    error(decl.span.begin,
                          "pvm member '" + member + "' is not a declared op");
                    return;
                }
                const Matrix &m = operators_.at(member);
                if (m.rows() != composite_dim() || m.cols() != composite_dim()) {
                    error(decl.span.begin, "pvm member '" + member +
                                               "' does not match the scenario dimension");
                    return;
                }
                if (!is_hermitian(m) || max_abs(Matrix(m * m - m)) > kStructuralTol) {
                    error(decl.span.begin, "pvm member '" + member + "' is not a projector");
                    return;
                }
                projectors.emplace_back(m);
                pvm.outcomes.push_back({member, projectors.back()});
                pvm_member_names_.insert(member);
            }
            try {
                require_complete_pvm(projectors, composite_dim());
            } catch (const weakstat::Error &e) {
                error(decl.span.begin, std::string("PVM incomplete: ") + e.what());
                return;
            }
            pvms_.push_back(std::move(pvm));
            return;
        }
        case DeclKind::Query: {
            if (!query_names_.insert(decl.name).second) {
                error(decl.span.begin, "duplicate query name '" + decl.name + "'");
                return;
            }
            if (!pvm_member_names_.count(decl.query_final)) {
                error(decl.span.begin, "query references '" + decl.query_final +
                                           "', which is not a member of any pvm");
                return;
            }
            bool probe_found = false;
            for (const auto &p : probes_)
                probe_found |= (p.label == decl.query_probe);
            if (!probe_found) {
                error(decl.span.begin,
                      "query references unknown probe '" + decl.query_probe + "'");
                return;
            }
            queries_.push_back({decl.name, *decl.query_kind, decl.query_final,
                                decl.query_probe});
            return;
        }
        }
    }

    void finish_checks() {
        if (!initial_ && !has_error())
            error({1, 1}, "missing state declaration");
        if (pvms_.empty() && !has_error())
            error({1, 1}, "missing pvm declaration");
    }

    const ScenarioDoc &doc_;
    std::string scenario_name_;
    std::vector<Diagnostic> diags_;

    bool have_dim_ = false;
    Eigen::Index dim_a_ = 1, dim_b_ = 1;
    std::optional<DensityMatrix> initial_;
    std::map<std::string, Matrix> operators_;
    std::set<std::string> op_names_, pvm_names_, query_names_, pvm_member_names_;
    std::vector<Pvm> pvms_;
    std::vector<NamedProbe> probes_;
    std::vector<Query> queries_;
};

} // namespace

ElaborateResult elaborate(const ScenarioDoc &doc, const std::string &scenario_name) {
    return Elaborator(doc, scenario_name).run();
}

ElaborateResult load_scenario(std::string_view text, const std::string &scenario_name) {
    ParseResult parsed = parse(text);
    if (!parsed.ok())
        return {std::nullopt, std::move(parsed.diagnostics)};
    ElaborateResult result = elaborate(*parsed.doc, scenario_name);
    result.diagnostics.insert(result.diagnostics.begin(),
                              parsed.diagnostics.begin(), parsed.diagnostics.end());
    return result;
}

// ---------------------------------------------------------------------------
// Printing and structural equality
// ---------------------------------------------------------------------------

namespace {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_cnum(Complex v) {
    if (v.imag() == 0.0)
        return format_real(v.real());
    if (v.real() == 0.0)
        return format_real(v.imag()) + "i";
    const char *sign = v.imag() < 0.0 ? "-" : "+";
    return format_real(v.real()) + sign + format_real(std::abs(v.imag())) + "i";
}

std::string format_ket(const KetLiteral &ket) {
    std::string out = "ket[";
    for (std::size_t k = 0; k < ket.amplitudes.size(); ++k) {
        if (k)
            out += ", ";
        out += format_cnum(ket.amplitudes[k]);
    }
    return out + "]";
}

std::string format_expr(const Expr &expr);

std::string format_operand(const ExprPtr &e) {
    if (std::holds_alternative<Expr::Binary>(e->node))
        return "(" + format_expr(*e) + ")";
    return format_expr(*e);
}

std::string format_expr(const Expr &expr) {
    return std::visit(
        [&](const auto &node) -> std::string {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, Expr::Scalar>)
                return format_cnum(node.value);
            else if constexpr (std::is_same_v<T, Expr::PauliAtom>)
                return std::string(1, node.which);
            else if constexpr (std::is_same_v<T, Expr::IdentityAtom>)
                return "I" + std::to_string(node.dim);
            else if constexpr (std::is_same_v<T, Expr::NameRef>)
                return node.name;
            else if constexpr (std::is_same_v<T, Expr::OuterProduct>)
                return "outer(" + format_ket(node.left) + ", " + format_ket(node.right) + ")";
            else if constexpr (std::is_same_v<T, Expr::Sqrt>)
                return "sqrt(" + format_expr(*node.arg) + ")";
            else {
                const char *op = nullptr;
                switch (node.op) {
                case Expr::Binary::Op::Add: op = " + "; break;
                case Expr::Binary::Op::Sub: op = " - "; break;
                case Expr::Binary::Op::Mul: op = " * "; break;
                case Expr::Binary::Op::Kron: op = " kron "; break;
                }
                return format_operand(node.lhs) + op + format_operand(node.rhs);
            }
        },
        expr.node);
}

bool exprs_equal(const ExprPtr &a, const ExprPtr &b);

bool kets_equal(const KetLiteral &a, const KetLiteral &b) {
    return a.amplitudes == b.amplitudes;
}

bool exprs_equal(const ExprPtr &a, const ExprPtr &b) {
    if (!a || !b)
        return a == b;
    if (a->node.index() != b->node.index())
        return false;
    return std::visit(
        [&](const auto &na) -> bool {
            using T = std::decay_t<decltype(na)>;
            const auto &nb = std::get<T>(b->node);
            if constexpr (std::is_same_v<T, Expr::Scalar>)
                return na.value == nb.value;
            else if constexpr (std::is_same_v<T, Expr::PauliAtom>)
                return na.which == nb.which;
            else if constexpr (std::is_same_v<T, Expr::IdentityAtom>)
                return na.dim == nb.dim;
            else if constexpr (std::is_same_v<T, Expr::NameRef>)
                return na.name == nb.name;
            else if constexpr (std::is_same_v<T, Expr::OuterProduct>)
                return kets_equal(na.left, nb.left) && kets_equal(na.right, nb.right);
            else if constexpr (std::is_same_v<T, Expr::Sqrt>)
                return exprs_equal(na.arg, nb.arg);
            else
                return na.op == nb.op && exprs_equal(na.lhs, nb.lhs) &&
                       exprs_equal(na.rhs, nb.rhs);
        },
        a->node);
}

} // namespace

std::string pretty_print(const ScenarioDoc &doc) {
    std::ostringstream out;
    for (const auto &decl : doc.declarations) {
        switch (decl.kind) {
        case DeclKind::Dim:
            out << "dim " << decl.dim_a;
            if (decl.dim_b > 0)
                out << " x " << decl.dim_b;
            break;
        case DeclKind::State:
            out << "state " << decl.name << " = ";
            if (decl.maxent_dim)
                out << "maxent " << *decl.maxent_dim;
            else
                out << format_ket(*decl.ket);
            break;
        case DeclKind::Op:
            out << "op " << decl.name << " = " << format_expr(*decl.expr);
            break;
        case DeclKind::Probe:
            out << "probe " << decl.name << " = " << format_expr(*decl.expr);
            break;
        case DeclKind::Pvm: {
            out << "pvm " << decl.name << " = { ";
            for (std::size_t k = 0; k < decl.pvm_members.size(); ++k) {
                if (k)
                    out << ", ";
                out << decl.pvm_members[k];
            }
            out << " }";
            break;
        }
        case DeclKind::Query:
            out << "query " << decl.name << " = "
                << (*decl.query_kind == QueryKind::Joint ? "joint" : "cond") << "("
                << decl.query_final << ", " << decl.query_probe << ")";
            break;
        }
        out << "\n";
    }
    return out.str();
}

bool structurally_equal(const ScenarioDoc &a, const ScenarioDoc &b) {
    if (a.declarations.size() != b.declarations.size())
        return false;
    for (std::size_t k = 0; k < a.declarations.size(); ++k) {
        const Declaration &da = a.declarations[k];
        const Declaration &db = b.declarations[k];
        if (da.kind != db.kind || da.name != db.name)
            return false;
        switch (da.kind) {
        case DeclKind::Dim:
            if (da.dim_a != db.dim_a || da.dim_b != db.dim_b)
                return false;
            break;
        case DeclKind::State:
            if (da.maxent_dim != db.maxent_dim)
                return false;
            if (da.ket.has_value() != db.ket.has_value())
                return false;
            if (da.ket && !kets_equal(*da.ket, *db.ket))
                return false;
            break;
        case DeclKind::Op:
        case DeclKind::Probe:
            if (!exprs_equal(da.expr, db.expr))
                return false;
            break;
        case DeclKind::Pvm:
            if (da.pvm_members != db.pvm_members)
                return false;
            break;
        case DeclKind::Query:
            if (da.query_kind != db.query_kind || da.query_final != db.query_final ||
                da.query_probe != db.query_probe)
                return false;
            break;
        }
    }
    return true;
}

std::string format_diagnostic(const Diagnostic &diag) {
    std::ostringstream os;
    os << diag.line << ":" << diag.column << ": "
       << (diag.severity == Diagnostic::Severity::Error ? "error" : "warning") << ": "
       << diag.message;
    return os.str();
}

} // namespace weakstat::dsl
