#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "tickgraph/lang.hpp"

namespace tickgraph::lang {

namespace {

enum class Tok {
    ident,
    integer,
    real,
    kw_ctrl,
    kw_atomic,
    kw_fun,
    kw_big,
    kw_react,
    kw_begin,
    kw_end,
    kw_int,
    kw_if,
    kw_in,
    kw_id,
    equals,
    semicolon,
    comma,
    lparen,
    rparen,
    lbrace,
    rbrace,
    lbracket,
    rbracket,
    dot,
    bar,
    barbar,
    slash,
    plus,
    minus,
    star,
    bang,
    arrow_open,  // -[
    arrow_close, // ]->
    arrow,       // -->
    eof,
};

std::string describe(Tok t)
{
    switch (t) {
    case Tok::ident:
        return "identifier";
    case Tok::integer:
        return "integer";
    case Tok::real:
        return "number";
    case Tok::kw_ctrl:
        return "'ctrl'";
    case Tok::kw_atomic:
        return "'atomic'";
    case Tok::kw_fun:
        return "'fun'";
    case Tok::kw_big:
        return "'big'";
    case Tok::kw_react:
        return "'react'";
    case Tok::kw_begin:
        return "'begin'";
    case Tok::kw_end:
        return "'end'";
    case Tok::kw_int:
        return "'int'";
    case Tok::kw_if:
        return "'if'";
    case Tok::kw_in:
        return "'in'";
    case Tok::kw_id:
        return "'id'";
    case Tok::equals:
        return "'='";
    case Tok::semicolon:
        return "';'";
    case Tok::comma:
        return "','";
    case Tok::lparen:
        return "'('";
    case Tok::rparen:
        return "')'";
    case Tok::lbrace:
        return "'{'";
    case Tok::rbrace:
        return "'}'";
    case Tok::lbracket:
        return "'['";
    case Tok::rbracket:
        return "']'";
    case Tok::dot:
        return "'.'";
    case Tok::bar:
        return "'|'";
    case Tok::barbar:
        return "'||'";
    case Tok::slash:
        return "'/'";
    case Tok::plus:
        return "'+'";
    case Tok::minus:
        return "'-'";
    case Tok::star:
        return "'*'";
    case Tok::bang:
        return "'!'";
    case Tok::arrow_open:
        return "'-['";
    case Tok::arrow_close:
        return "']->'";
    case Tok::arrow:
        return "'-->'";
    case Tok::eof:
        return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind = Tok::eof;
    std::string text;
    SourcePos pos;
};

const std::pair<std::string_view, Tok> keywords[] = {
    {"ctrl", Tok::kw_ctrl}, {"atomic", Tok::kw_atomic}, {"fun", Tok::kw_fun}, {"big", Tok::kw_big},
    {"react", Tok::kw_react}, {"begin", Tok::kw_begin}, {"end", Tok::kw_end}, {"int", Tok::kw_int},
    {"if", Tok::kw_if}, {"in", Tok::kw_in}, {"id", Tok::kw_id},
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }
bool digit(char c) { return c >= '0' && c <= '9'; }

std::vector<Token> lex(std::string_view s)
{
    std::vector<Token> out;
    SourcePos pos;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < s.size(); ++k, ++i) {
            if (s[i] == '\n') {
                ++pos.line;
                pos.column = 1;
            } else {
                ++pos.column;
            }
            pos.offset = i + 1;
        }
    };
    auto push = [&](Tok kind, std::size_t len) {
        out.push_back({kind, std::string(s.substr(i, len)), pos});
        advance(len);
    };
    while (i < s.size()) {
        const char c = s[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < s.size() && s[i] != '\n')
                advance(1);
            continue;
        }
        if (ident_start(c)) {
            std::size_t n = 1;
            while (i + n < s.size() && ident_char(s[i + n]))
                ++n;
            const auto word = s.substr(i, n);
            Tok kind = Tok::ident;
            for (const auto& [kw, k] : keywords)
                if (word == kw)
                    kind = k;
            push(kind, n);
            continue;
        }
        if (digit(c)) {
            std::size_t n = 1;
            while (i + n < s.size() && digit(s[i + n]))
                ++n;
            Tok kind = Tok::integer;
            if (i + n + 1 < s.size() && s[i + n] == '.' && digit(s[i + n + 1])) {
                ++n;
                while (i + n < s.size() && digit(s[i + n]))
                    ++n;
                kind = Tok::real;
            }
            if (i + n < s.size() && (s[i + n] == 'e' || s[i + n] == 'E')) {
                std::size_t m = n + 1;
                if (i + m < s.size() && (s[i + m] == '+' || s[i + m] == '-'))
                    ++m;
                if (i + m < s.size() && digit(s[i + m])) {
                    while (i + m < s.size() && digit(s[i + m]))
                        ++m;
                    n = m;
                    kind = Tok::real;
                }
            }
            push(kind, n);
            continue;
        }
        const auto rest = s.substr(i);
        if (rest.starts_with("-->")) {
            push(Tok::arrow, 3);
            continue;
        }
        if (rest.starts_with("-[")) {
            push(Tok::arrow_open, 2);
            continue;
        }
        if (rest.starts_with("]->")) {
            push(Tok::arrow_close, 3);
            continue;
        }
        if (rest.starts_with("||")) {
            push(Tok::barbar, 2);
            continue;
        }
        Tok kind;
        switch (c) {
        case '=':
            kind = Tok::equals;
            break;
        case ';':
            kind = Tok::semicolon;
            break;
        case ',':
            kind = Tok::comma;
            break;
        case '(':
            kind = Tok::lparen;
            break;
        case ')':
            kind = Tok::rparen;
            break;
        case '{':
            kind = Tok::lbrace;
            break;
        case '}':
            kind = Tok::rbrace;
            break;
        case '[':
            kind = Tok::lbracket;
            break;
        case ']':
            kind = Tok::rbracket;
            break;
        case '.':
            kind = Tok::dot;
            break;
        case '|':
            kind = Tok::bar;
            break;
        case '/':
            kind = Tok::slash;
            break;
        case '+':
            kind = Tok::plus;
            break;
        case '-':
            kind = Tok::minus;
            break;
        case '*':
            kind = Tok::star;
            break;
        case '!':
            kind = Tok::bang;
            break;
        default: {
            const auto byte = static_cast<unsigned char>(c);
            std::string shown = std::isprint(byte) ? std::string("'") + c + "'" : "byte 0x";
            if (!std::isprint(byte)) {
                const char* hex = "0123456789abcdef";
                shown += hex[byte >> 4];
                shown += hex[byte & 15];
            }
            throw ParseError(pos, "unexpected character " + shown);
        }
        }
        push(kind, 1);
    }
    out.push_back({Tok::eof, "", pos});
    return out;
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(lex(text)) {}

    Ast file()
    {
        Ast ast;
        while (!at(Tok::eof)) {
            if (at(Tok::kw_begin)) {
                if (ast.abrs)
                    fail_here("a second abrs block");
                ast.abrs = abrs();
                continue;
            }
            ast.declarations.push_back(declaration());
        }
        return ast;
    }

private:
    static constexpr std::size_t max_depth = 200;

    const Token& peek() const { return toks_[i_]; }

    bool at(Tok t)
    {
        if (peek().kind == t)
            return true;
        expected_.insert(describe(t));
        return false;
    }

    bool accept(Tok t)
    {
        if (!at(t))
            return false;
        take();
        return true;
    }

    const Token& take()
    {
        expected_.clear();
        const Token& t = toks_[i_];
        if (i_ + 1 < toks_.size())
            ++i_;
        return t;
    }

    const Token& expect(Tok t)
    {
        if (!at(t))
            fail_expected();
        return take();
    }

    bool at_word(std::string_view w)
    {
        if (peek().kind == Tok::ident && peek().text == w)
            return true;
        expected_.insert("'" + std::string(w) + "'");
        return false;
    }

    void expect_word(std::string_view w)
    {
        if (!at_word(w))
            fail_expected();
        take();
    }

    [[noreturn]] void fail_expected() const
    {
        std::string list;
        std::size_t k = 0;
        for (const auto& e : expected_) {
            list += (k == 0 ? "" : k + 1 == expected_.size() ? " or " : ", ") + e;
            ++k;
        }
        throw ParseError(peek().pos, "expected " + list + " but found " + found());
    }

    [[noreturn]] void fail_here(const std::string& what) const
    {
        throw ParseError(peek().pos, "unexpected " + what);
    }

    std::string found() const
    {
        return peek().kind == Tok::eof ? "end of input" : "'" + peek().text + "'";
    }

    void enter()
    {
        if (++depth_ > max_depth)
            throw ParseError(peek().pos, "expression nested too deeply");
    }
    void leave() { --depth_; }

    std::int64_t integer()
    {
        const bool neg = accept(Tok::minus);
        const Token& t = expect(Tok::integer);
        std::int64_t v = 0;
        std::string digits = (neg ? "-" : "") + t.text;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
        if (ec != std::errc() || ptr != digits.data() + digits.size())
            throw ParseError(t.pos, "integer literal " + digits + " is out of range");
        return v;
    }

    std::vector<std::string> param_list()
    {
        std::vector<std::string> out;
        expect(Tok::lparen);
        out.push_back(expect(Tok::ident).text);
        while (accept(Tok::comma))
            out.push_back(expect(Tok::ident).text);
        expect(Tok::rparen);
        return out;
    }

    Declaration declaration()
    {
        const SourcePos start = peek().pos;
        bool atomic = false;
        bool fun = false;
        if (accept(Tok::kw_atomic)) {
            atomic = true;
            fun = accept(Tok::kw_fun);
            expect(Tok::kw_ctrl);
            return control(start, atomic, fun);
        }
        fun = accept(Tok::kw_fun);
        if (accept(Tok::kw_ctrl))
            return control(start, atomic, fun);
        if (accept(Tok::kw_big)) {
            BigDecl d;
            d.loc = {start};
            d.fun = fun;
            d.name = expect(Tok::ident).text;
            if (fun)
                d.params = param_list();
            expect(Tok::equals);
            d.body = big();
            expect(Tok::semicolon);
            return d;
        }
        if (accept(Tok::kw_react)) {
            ReactDecl d;
            d.loc = {start};
            d.fun = fun;
            d.name = expect(Tok::ident).text;
            if (fun)
                d.params = param_list();
            expect(Tok::equals);
            d.redex = big();
            if (!accept(Tok::arrow)) {
                if (!at(Tok::arrow_open))
                    fail_expected();
                take();
                const Token& w = at(Tok::integer) ? take() : expect(Tok::real);
                const double v = std::strtod(w.text.c_str(), nullptr);
                if (!std::isfinite(v))
                    throw ParseError(w.pos, "weight " + w.text + " is out of range");
                d.weight = v;
                expect(Tok::arrow_close);
            }
            d.reactum = big();
            if (accept(Tok::kw_if)) {
                expect(Tok::bang);
                d.condition = big();
                expect(Tok::kw_in);
                expect_word("ctx");
            }
            expect(Tok::semicolon);
            return d;
        }
        fail_expected();
    }

    ControlDecl control(SourcePos start, bool atomic, bool fun)
    {
        ControlDecl d;
        d.loc = {start};
        d.atomic = atomic;
        d.fun = fun;
        d.name = expect(Tok::ident).text;
        if (fun)
            d.params = param_list();
        expect(Tok::equals);
        d.arity = integer();
        expect(Tok::semicolon);
        return d;
    }

    // parallel := merge ('||' merge)*
    BigAst big()
    {
        enter();
        BigAst first = merge();
        if (!at(Tok::barbar)) {
            leave();
            return first;
        }
        BigAst node;
        node.kind = BigAst::Kind::parallel;
        node.loc = first.loc;
        node.operands.push_back(std::move(first));
        while (accept(Tok::barbar))
            node.operands.push_back(merge());
        leave();
        return node;
    }

    // merge := nest ('|' nest)*
    BigAst merge()
    {
        BigAst first = nest();
        if (!at(Tok::bar))
            return first;
        BigAst node;
        node.kind = BigAst::Kind::merge;
        node.loc = first.loc;
        node.operands.push_back(std::move(first));
        while (accept(Tok::bar))
            node.operands.push_back(nest());
        return node;
    }

    // nest := primary ('.' nest)?
    BigAst nest()
    {
        enter();
        BigAst outer = primary();
        if (!accept(Tok::dot)) {
            leave();
            return outer;
        }
        BigAst node;
        node.kind = BigAst::Kind::nest;
        node.loc = outer.loc;
        node.operands.push_back(std::move(outer));
        node.operands.push_back(nest());
        leave();
        return node;
    }

    BigAst primary()
    {
        BigAst node;
        node.loc = {peek().pos};
        if (accept(Tok::lparen)) {
            BigAst inner = big();
            expect(Tok::rparen);
            return inner;
        }
        if (accept(Tok::kw_id)) {
            node.kind = BigAst::Kind::site;
            return node;
        }
        if (at(Tok::integer) && peek().text == "1") {
            take();
            node.kind = BigAst::Kind::unit;
            return node;
        }
        if (accept(Tok::slash)) {
            enter();
            node.kind = BigAst::Kind::closure;
            node.name = expect(Tok::ident).text;
            node.operands.push_back(at(Tok::slash) ? primary() : big());
            leave();
            return node;
        }
        if (!at(Tok::ident))
            fail_expected();
        node.kind = BigAst::Kind::atom;
        node.name = take().text;
        if (accept(Tok::lparen)) {
            node.has_args = true;
            node.args.push_back(int_expr());
            while (accept(Tok::comma))
                node.args.push_back(int_expr());
            expect(Tok::rparen);
        }
        if (accept(Tok::lbrace)) {
            node.has_links = true;
            if (!accept(Tok::rbrace)) {
                node.links.push_back(expect(Tok::ident).text);
                while (accept(Tok::comma))
                    node.links.push_back(expect(Tok::ident).text);
                expect(Tok::rbrace);
            }
        }
        return node;
    }

    IntAst int_expr()
    {
        enter();
        IntAst lhs = int_term();
        while (at(Tok::plus) || at(Tok::minus)) {
            IntAst node;
            node.kind = take().kind == Tok::plus ? IntAst::Kind::add : IntAst::Kind::sub;
            node.loc = lhs.loc;
            node.operands.push_back(std::move(lhs));
            node.operands.push_back(int_term());
            lhs = std::move(node);
        }
        leave();
        return lhs;
    }

    IntAst int_term()
    {
        IntAst lhs = int_factor();
        while (accept(Tok::star)) {
            IntAst node;
            node.kind = IntAst::Kind::mul;
            node.loc = lhs.loc;
            node.operands.push_back(std::move(lhs));
            node.operands.push_back(int_factor());
            lhs = std::move(node);
        }
        return lhs;
    }

    IntAst int_factor()
    {
        IntAst node;
        node.loc = {peek().pos};
        if (accept(Tok::lparen)) {
            IntAst inner = int_expr();
            expect(Tok::rparen);
            return inner;
        }
        if (at(Tok::ident)) {
            node.kind = IntAst::Kind::name;
            node.name = take().text;
            return node;
        }
        if (at(Tok::minus) || at(Tok::integer)) {
            node.kind = IntAst::Kind::literal;
            node.value = integer();
            return node;
        }
        fail_expected();
    }

    FamilyRef family_ref()
    {
        FamilyRef r;
        r.loc = {peek().pos};
        r.name = expect(Tok::ident).text;
        if (accept(Tok::lparen)) {
            r.has_args = true;
            do {
                FamilyRef::Arg a;
                a.loc = {peek().pos};
                if (at(Tok::ident))
                    a.value = take().text;
                else if (at(Tok::integer) || at(Tok::minus))
                    a.value = integer();
                else
                    fail_expected();
                r.args.push_back(std::move(a));
            } while (accept(Tok::comma));
            expect(Tok::rparen);
        }
        return r;
    }

    std::vector<FamilyRef> family_set()
    {
        std::vector<FamilyRef> out;
        expect(Tok::lbrace);
        out.push_back(family_ref());
        while (accept(Tok::comma))
            out.push_back(family_ref());
        expect(Tok::rbrace);
        return out;
    }

    void duplicate(const char* what, SourcePos pos) const
    {
        throw ParseError(pos, std::string("duplicate '") + what + "' in abrs block");
    }

    AbrsBlock abrs()
    {
        AbrsBlock b;
        b.loc = {peek().pos};
        expect(Tok::kw_begin);
        expect_word("abrs");
        while (!accept(Tok::kw_end)) {
            const SourcePos pos = peek().pos;
            if (accept(Tok::kw_int)) {
                IntBinding ib;
                ib.loc = {pos};
                ib.name = expect(Tok::ident).text;
                expect(Tok::equals);
                if (accept(Tok::lbrace)) {
                    if (!accept(Tok::rbrace)) {
                        ib.values.push_back(integer());
                        while (accept(Tok::comma))
                            ib.values.push_back(integer());
                        expect(Tok::rbrace);
                    }
                } else {
                    ib.scalar = true;
                    ib.values.push_back(integer());
                }
                expect(Tok::semicolon);
                b.ints.push_back(std::move(ib));
            } else if (at_word("init")) {
                take();
                if (b.init)
                    duplicate("init", pos);
                b.init_loc = {peek().pos};
                b.init = expect(Tok::ident).text;
                expect(Tok::semicolon);
            } else if (at_word("rules")) {
                take();
                if (b.rules)
                    duplicate("rules", pos);
                expect(Tok::equals);
                expect(Tok::lbracket);
                std::vector<std::vector<FamilyRef>> classes;
                classes.push_back(family_set());
                while (accept(Tok::comma))
                    classes.push_back(family_set());
                expect(Tok::rbracket);
                expect(Tok::semicolon);
                b.rules = std::move(classes);
            } else if (at_word("actions")) {
                take();
                if (b.actions)
                    duplicate("actions", pos);
                expect(Tok::equals);
                expect(Tok::lbracket);
                std::vector<ActionDecl> actions;
                do {
                    ActionDecl a;
                    a.loc = {peek().pos};
                    a.name = expect(Tok::ident).text;
                    expect(Tok::equals);
                    expect(Tok::lbrace);
                    do {
                        a.rule_locs.push_back({peek().pos});
                        a.rules.push_back(expect(Tok::ident).text);
                    } while (accept(Tok::comma));
                    expect(Tok::rbrace);
                    actions.push_back(std::move(a));
                } while (accept(Tok::comma));
                expect(Tok::rbracket);
                expect(Tok::semicolon);
                b.actions = std::move(actions);
            } else if (at_word("preds")) {
                take();
                if (b.preds)
                    duplicate("preds", pos);
                expect(Tok::equals);
                b.preds = family_set();
                expect(Tok::semicolon);
            } else {
                fail_expected();
            }
        }
        return b;
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
    std::size_t depth_ = 0;
    std::set<std::string> expected_;
};

// ---------------------------------------------------------------- printing

void print_int(std::string& out, const IntAst& e, int ctx)
{
    // ctx: 0 top, 1 right of '-' or operand of '*'
    switch (e.kind) {
    case IntAst::Kind::literal:
        out += std::to_string(e.value);
        return;
    case IntAst::Kind::name:
        out += e.name;
        return;
    case IntAst::Kind::add:
    case IntAst::Kind::sub: {
        const bool wrap = ctx == 1;
        if (wrap)
            out += "(";
        print_int(out, e.operands[0], 0);
        out += e.kind == IntAst::Kind::add ? " + " : " - ";
        print_int(out, e.operands[1], 1);
        if (wrap)
            out += ")";
        return;
    }
    case IntAst::Kind::mul: {
        const bool wrap = ctx == 2;
        if (wrap)
            out += "(";
        print_int(out, e.operands[0], 1);
        out += " * ";
        print_int(out, e.operands[1], 2);
        if (wrap)
            out += ")";
        return;
    }
    }
}

std::string int_text(const IntAst& e)
{
    std::string s;
    print_int(s, e, 0);
    return s;
}

// Binding strength: parallel 0, merge 1, nest 2, primary 3.
int level(const BigAst& b)
{
    switch (b.kind) {
    case BigAst::Kind::parallel:
        return 0;
    case BigAst::Kind::merge:
        return 1;
    case BigAst::Kind::nest:
        return 2;
    default:
        return 3;
    }
}

void print_big(std::string& out, const BigAst& b);

void print_operand(std::string& out, const BigAst& b, int needed)
{
    // Closures extend to the right, so they are bracketed as operands.
    const bool wrap = level(b) < needed || (b.kind == BigAst::Kind::closure && needed > 0);
    if (wrap)
        out += "(";
    print_big(out, b);
    if (wrap)
        out += ")";
}

void print_big(std::string& out, const BigAst& b)
{
    switch (b.kind) {
    case BigAst::Kind::site:
        out += "id";
        return;
    case BigAst::Kind::unit:
        out += "1";
        return;
    case BigAst::Kind::atom:
        out += b.name;
        if (b.has_args) {
            out += "(";
            for (std::size_t i = 0; i < b.args.size(); ++i)
                out += (i ? ", " : "") + int_text(b.args[i]);
            out += ")";
        }
        if (b.has_links) {
            out += "{";
            for (std::size_t i = 0; i < b.links.size(); ++i)
                out += (i ? "," : "") + b.links[i];
            out += "}";
        }
        return;
    case BigAst::Kind::nest:
        print_operand(out, b.operands[0], 3);
        out += ".";
        print_operand(out, b.operands[1], 2);
        return;
    case BigAst::Kind::merge:
    case BigAst::Kind::parallel: {
        const bool par = b.kind == BigAst::Kind::parallel;
        for (std::size_t i = 0; i < b.operands.size(); ++i) {
            if (i)
                out += par ? " || " : " | ";
            print_operand(out, b.operands[i], par ? 1 : 2);
        }
        return;
    }
    case BigAst::Kind::closure:
        out += "/" + b.name;
        if (b.operands[0].kind == BigAst::Kind::closure) {
            print_big(out, b.operands[0]);
        } else {
            out += " (";
            print_big(out, b.operands[0]);
            out += ")";
        }
        return;
    }
}

std::string params_text(const std::vector<std::string>& ps)
{
    std::string s = "(";
    for (std::size_t i = 0; i < ps.size(); ++i)
        s += (i ? ", " : "") + ps[i];
    return s + ")";
}

std::string weight_text(double w)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
    std::string s(buf, ptr);
    // Keep the literal lexable: no leading '.' or bare exponent forms.
    if (s.find_first_of(".e") == std::string::npos)
        return s;
    if (s.find('e') != std::string::npos && s.find('.') == std::string::npos) {
        const auto e = s.find('e');
        s.insert(e, ".0");
    }
    return s;
}

std::string ref_text(const FamilyRef& r)
{
    std::string s = r.name;
    if (!r.has_args)
        return s;
    s += "(";
    for (std::size_t i = 0; i < r.args.size(); ++i) {
        s += i ? ", " : "";
        if (const auto* v = std::get_if<std::int64_t>(&r.args[i].value))
            s += std::to_string(*v);
        else
            s += std::get<std::string>(r.args[i].value);
    }
    return s + ")";
}

} // namespace

Ast parse(std::string_view text)
{
    return Parser(text).file();
}

std::string to_source(const BigAst& big)
{
    std::string s;
    print_big(s, big);
    return s;
}

std::string to_source(const Ast& ast)
{
    std::string out;
    for (const auto& d : ast.declarations) {
        if (const auto* c = std::get_if<ControlDecl>(&d)) {
            out += c->atomic ? "atomic " : "";
            out += c->fun ? "fun " : "";
            out += "ctrl " + c->name + (c->fun ? params_text(c->params) : "") + " = " + std::to_string(c->arity) +
                   ";\n";
        } else if (const auto* b = std::get_if<BigDecl>(&d)) {
            out += std::string(b->fun ? "fun " : "") + "big " + b->name + (b->fun ? params_text(b->params) : "") +
                   " =\n  " + to_source(b->body) + ";\n";
        } else {
            const auto& r = std::get<ReactDecl>(d);
            out += std::string(r.fun ? "fun " : "") + "react " + r.name + (r.fun ? params_text(r.params) : "") +
                   " =\n  " + to_source(r.redex) + "\n  " +
                   (r.weight ? "-[" + weight_text(*r.weight) + "]->" : std::string("-->")) + "\n  " +
                   to_source(r.reactum);
            if (r.condition)
                out += "\n  if ! " + to_source(*r.condition) + " in ctx";
            out += ";\n";
        }
    }
    if (ast.abrs) {
        const auto& b = *ast.abrs;
        out += "\nbegin abrs\n";
        for (const auto& ib : b.ints) {
            out += "  int " + ib.name + " = ";
            if (ib.scalar && ib.values.size() == 1) {
                out += std::to_string(ib.values[0]);
            } else {
                out += "{";
                for (std::size_t i = 0; i < ib.values.size(); ++i)
                    out += (i ? ", " : "") + std::to_string(ib.values[i]);
                out += "}";
            }
            out += ";\n";
        }
        if (b.init)
            out += "  init " + *b.init + ";\n";
        if (b.rules) {
            out += "  rules = [\n";
            for (std::size_t c = 0; c < b.rules->size(); ++c) {
                out += "    {";
                const auto& cls = (*b.rules)[c];
                for (std::size_t i = 0; i < cls.size(); ++i)
                    out += (i ? ", " : "") + ref_text(cls[i]);
                out += c + 1 < b.rules->size() ? "},\n" : "}\n";
            }
            out += "  ];\n";
        }
        if (b.actions) {
            out += "  actions = [\n";
            for (std::size_t a = 0; a < b.actions->size(); ++a) {
                const auto& act = (*b.actions)[a];
                out += "    " + act.name + " = {";
                for (std::size_t i = 0; i < act.rules.size(); ++i)
                    out += (i ? ", " : "") + act.rules[i];
                out += a + 1 < b.actions->size() ? "},\n" : "}\n";
            }
            out += "  ];\n";
        }
        if (b.preds) {
            out += "  preds = {";
            for (std::size_t i = 0; i < b.preds->size(); ++i)
                out += (i ? ", " : "") + ref_text((*b.preds)[i]);
            out += "};\n";
        }
        out += "end\n";
    }
    return out;
}

} // namespace tickgraph::lang
