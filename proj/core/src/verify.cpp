#include "tickgraph/verify.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace tickgraph {

void label(Mdp& mdp, std::span<const Pattern> patterns)
{
    mdp.label_names.clear();
    for (const auto& p : patterns)
        mdp.label_names.push_back(p.name);
    mdp.labels.assign(mdp.states.size(), {});
    for (std::size_t s = 0; s < mdp.states.size(); ++s)
        for (std::size_t i = 0; i < patterns.size(); ++i)
            if (occurs(mdp.states[s].bigraph, patterns[i].body))
                mdp.labels[s].push_back(i);
}

LabelExpr LabelExpr::constant(bool value)
{
    LabelExpr e;
    e.kind_ = Kind::constant;
    e.value_ = value;
    return e;
}

LabelExpr LabelExpr::name(std::string label)
{
    LabelExpr e;
    e.kind_ = Kind::name;
    e.label_ = std::move(label);
    return e;
}

LabelExpr LabelExpr::negation(LabelExpr operand)
{
    LabelExpr e;
    e.kind_ = Kind::negation;
    e.operands_.push_back(std::make_shared<const LabelExpr>(std::move(operand)));
    return e;
}

LabelExpr LabelExpr::conjunction(LabelExpr a, LabelExpr b)
{
    LabelExpr e;
    e.kind_ = Kind::conjunction;
    e.operands_.push_back(std::make_shared<const LabelExpr>(std::move(a)));
    e.operands_.push_back(std::make_shared<const LabelExpr>(std::move(b)));
    return e;
}

LabelExpr LabelExpr::disjunction(LabelExpr a, LabelExpr b)
{
    LabelExpr e = conjunction(std::move(a), std::move(b));
    e.kind_ = Kind::disjunction;
    return e;
}

std::vector<std::string> LabelExpr::names() const
{
    std::vector<std::string> out;
    auto walk = [&](auto&& self, const LabelExpr& e) -> void {
        if (e.kind_ == Kind::name && std::find(out.begin(), out.end(), e.label_) == out.end())
            out.push_back(e.label_);
        for (const auto& o : e.operands_)
            self(self, *o);
    };
    walk(walk, *this);
    return out;
}

std::string LabelExpr::to_string() const
{
    auto wrap = [](const LabelExpr& e) {
        return e.kind_ == Kind::conjunction || e.kind_ == Kind::disjunction ? "(" + e.to_string() + ")"
                                                                            : e.to_string();
    };
    switch (kind_) {
    case Kind::constant:
        return value_ ? "true" : "false";
    case Kind::name:
        return "\"" + label_ + "\"";
    case Kind::negation:
        return "!" + wrap(*operands_[0]);
    case Kind::conjunction:
        return wrap(*operands_[0]) + " & " + wrap(*operands_[1]);
    case Kind::disjunction:
        return wrap(*operands_[0]) + " | " + wrap(*operands_[1]);
    }
    return {};
}

std::vector<bool> satisfying(const Mdp& mdp, const LabelExpr& e)
{
    const std::size_t n = mdp.states.size();
    switch (e.kind_) {
    case LabelExpr::Kind::constant:
        return std::vector<bool>(n, e.value_);
    case LabelExpr::Kind::name: {
        std::vector<bool> out(n, false);
        if (e.label_ == "init") {
            if (n)
                out[0] = true;
            return out;
        }
        if (e.label_ == "deadlock") {
            for (std::size_t s = 0; s < n; ++s)
                out[s] = mdp.states[s].deadlock;
            return out;
        }
        auto it = std::find(mdp.label_names.begin(), mdp.label_names.end(), e.label_);
        if (it == mdp.label_names.end())
            throw UnknownLabel(e.label_);
        const auto id = static_cast<std::size_t>(it - mdp.label_names.begin());
        for (std::size_t s = 0; s < n && s < mdp.labels.size(); ++s)
            out[s] = std::binary_search(mdp.labels[s].begin(), mdp.labels[s].end(), id);
        return out;
    }
    case LabelExpr::Kind::negation: {
        auto out = satisfying(mdp, *e.operands_[0]);
        out.flip();
        return out;
    }
    case LabelExpr::Kind::conjunction:
    case LabelExpr::Kind::disjunction: {
        auto a = satisfying(mdp, *e.operands_[0]);
        const auto b = satisfying(mdp, *e.operands_[1]);
        for (std::size_t s = 0; s < n; ++s)
            a[s] = e.kind_ == LabelExpr::Kind::conjunction ? a[s] && b[s] : a[s] || b[s];
        return a;
    }
    }
    return {};
}

namespace {

bool any_successor_in(const Choice& c, const std::vector<bool>& set)
{
    return std::any_of(c.distribution.begin(), c.distribution.end(),
                       [&](const Transition& t) { return t.probability > 0 && set[t.target]; });
}

} // namespace

std::vector<bool> prob0(const Mdp& mdp, const std::vector<bool>& target, Optimum mode)
{
    // Backward closure of the target: for max, some choice may move closer;
    // for min, every choice must.
    std::vector<bool> reach = target;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t s = 0; s < mdp.states.size(); ++s) {
            if (reach[s])
                continue;
            const auto& cs = mdp.states[s].choices;
            const bool in = mode == Optimum::max
                                ? std::any_of(cs.begin(), cs.end(), [&](const Choice& c) { return any_successor_in(c, reach); })
                                : !cs.empty() && std::all_of(cs.begin(), cs.end(), [&](const Choice& c) {
                                      return any_successor_in(c, reach);
                                  });
            if (in) {
                reach[s] = true;
                changed = true;
            }
        }
    }
    reach.flip();
    return reach;
}

std::vector<bool> prob1_all(const Mdp& mdp, const std::vector<bool>& target)
{
    // A scheduler can avoid the target with positive probability exactly when
    // it can reach a min-probability-0 state without passing the target.
    std::vector<bool> escape = prob0(mdp, target, Optimum::min);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t s = 0; s < mdp.states.size(); ++s) {
            if (escape[s] || target[s])
                continue;
            const auto& cs = mdp.states[s].choices;
            if (std::any_of(cs.begin(), cs.end(), [&](const Choice& c) { return any_successor_in(c, escape); })) {
                escape[s] = true;
                changed = true;
            }
        }
    }
    escape.flip();
    return escape;
}

namespace {

// States from which some scheduler reaches the target with probability 1:
// the greatest set U such that every state in U can move towards the target
// through choices that never leave U.
std::vector<bool> prob1_some(const Mdp& mdp, const std::vector<bool>& target)
{
    const std::size_t n = mdp.states.size();
    std::vector<bool> u(n, true);
    for (bool shrunk = true; shrunk;) {
        std::vector<bool> r = target;
        for (bool grew = true; grew;) {
            grew = false;
            for (std::size_t s = 0; s < n; ++s) {
                if (r[s] || !u[s])
                    continue;
                const auto& cs = mdp.states[s].choices;
                const bool ok = std::any_of(cs.begin(), cs.end(), [&](const Choice& c) {
                    return any_successor_in(c, r) && std::all_of(c.distribution.begin(), c.distribution.end(),
                                                                 [&](const Transition& t) { return u[t.target]; });
                });
                if (ok) {
                    r[s] = true;
                    grew = true;
                }
            }
        }
        shrunk = r != u;
        u = std::move(r);
    }
    return u;
}

} // namespace

std::vector<double> reach_values(const Mdp& mdp, const std::vector<bool>& target, Optimum mode)
{
    const std::size_t n = mdp.states.size();
    const auto zero = prob0(mdp, target, mode);
    const auto one = mode == Optimum::min ? prob1_all(mdp, target) : prob1_some(mdp, target);
    std::vector<double> x(n, 0.0);
    std::vector<std::size_t> unknown;
    for (std::size_t s = 0; s < n; ++s) {
        if (one[s])
            x[s] = 1.0;
        else if (!zero[s])
            unknown.push_back(s);
    }
    constexpr double tolerance = 1e-9;
    constexpr std::size_t max_iterations = 1'000'000;
    for (std::size_t iter = 0; !unknown.empty(); ++iter) {
        if (iter == max_iterations)
            throw Error("value iteration did not converge within " + std::to_string(max_iterations) + " sweeps");
        double delta = 0.0;
        for (auto s : unknown) {
            double best = mode == Optimum::min ? std::numeric_limits<double>::infinity() : 0.0;
            for (const auto& c : mdp.states[s].choices) {
                double v = 0.0;
                for (const auto& t : c.distribution)
                    v += t.probability * x[t.target];
                best = mode == Optimum::min ? std::min(best, v) : std::max(best, v);
            }
            delta = std::max(delta, std::abs(best - x[s]));
            x[s] = best;
        }
        if (delta < tolerance)
            break;
    }
    return x;
}

double reach_prob(const Mdp& mdp, const LabelExpr& target, Optimum mode)
{
    if (mdp.states.empty())
        return 0.0;
    return reach_values(mdp, satisfying(mdp, target), mode)[0];
}

namespace {

std::string bound_text(Bound b)
{
    switch (b) {
    case Bound::ge:
        return ">=";
    case Bound::gt:
        return ">";
    case Bound::le:
        return "<=";
    case Bound::lt:
        return "<";
    }
    return {};
}

} // namespace

std::string to_string(const Property& p)
{
    struct Printer {
        std::string operator()(const Reach& r) const
        {
            return "P " + bound_text(r.bound) + " " + format_probability(r.p) + " [ F " + r.target.to_string() + " ]";
        }
        std::string operator()(const Safety& s) const
        {
            return "A [ G " + LabelExpr::negation(s.bad).to_string() + " ]";
        }
        std::string operator()(const Inevitable& i) const { return "A [ F " + i.goal.to_string() + " ]"; }
        std::string operator()(const Possible& e) const { return "E [ F " + e.target.to_string() + " ]"; }
        std::string operator()(const ForcedNext& f) const
        {
            return "FORCEDNEXT " + f.trigger.to_string() + " -> " + f.next.to_string();
        }
    };
    return std::visit(Printer{}, p);
}

std::vector<std::string> label_names(const Property& p)
{
    struct Names {
        std::vector<std::string> operator()(const Reach& r) const { return r.target.names(); }
        std::vector<std::string> operator()(const Safety& s) const { return s.bad.names(); }
        std::vector<std::string> operator()(const Inevitable& i) const { return i.goal.names(); }
        std::vector<std::string> operator()(const Possible& e) const { return e.target.names(); }
        std::vector<std::string> operator()(const ForcedNext& f) const
        {
            auto out = f.trigger.names();
            for (auto& n : f.next.names())
                if (std::find(out.begin(), out.end(), n) == out.end())
                    out.push_back(n);
            return out;
        }
    };
    return std::visit(Names{}, p);
}

Verdict check(const Mdp& mdp, const Property& property)
{
    if (mdp.states.empty())
        throw Error("cannot check a property on an empty MDP");
    struct Checker {
        const Mdp& mdp;

        Verdict operator()(const Reach& r) const
        {
            const bool lower = r.bound == Bound::ge || r.bound == Bound::gt;
            const double v = reach_prob(mdp, r.target, lower ? Optimum::min : Optimum::max);
            bool holds = false;
            switch (r.bound) {
            case Bound::ge:
                holds = v >= r.p;
                break;
            case Bound::gt:
                holds = v > r.p;
                break;
            case Bound::le:
                holds = v <= r.p;
                break;
            case Bound::lt:
                holds = v < r.p;
                break;
            }
            return {holds, v, std::string(lower ? "minimum" : "maximum") + " probability " + format_probability(v)};
        }
        Verdict operator()(const Safety& s) const
        {
            const auto bad = satisfying(mdp, s.bad);
            const bool holds = prob0(mdp, bad, Optimum::max)[0];
            const double v = holds ? 0.0 : reach_values(mdp, bad, Optimum::max)[0];
            return {holds, v, "maximum probability of reaching a bad state " + format_probability(v)};
        }
        Verdict operator()(const Inevitable& i) const
        {
            const auto goal = satisfying(mdp, i.goal);
            const bool holds = prob1_all(mdp, goal)[0];
            const double v = reach_values(mdp, goal, Optimum::min)[0];
            return {holds, v, "minimum probability " + format_probability(v)};
        }
        Verdict operator()(const Possible& e) const
        {
            const auto target = satisfying(mdp, e.target);
            const bool holds = !prob0(mdp, target, Optimum::max)[0];
            const double v = reach_values(mdp, target, Optimum::max)[0];
            return {holds, v, "maximum probability " + format_probability(v)};
        }
        Verdict operator()(const ForcedNext& f) const
        {
            const auto trigger = satisfying(mdp, f.trigger);
            const auto next = satisfying(mdp, f.next);
            const double v = reach_values(mdp, trigger, Optimum::min)[0];
            if (!prob1_all(mdp, trigger)[0])
                return {false, v, "trigger is not reached on every path (minimum probability " +
                                      format_probability(v) + ")"};
            for (std::size_t s = 0; s < mdp.states.size(); ++s) {
                if (!trigger[s])
                    continue;
                const auto& cs = mdp.states[s].choices;
                if (cs.empty())
                    return {false, v, "trigger state " + std::to_string(s) + " has no outgoing choice"};
                for (const auto& c : cs)
                    for (const auto& t : c.distribution)
                        if (!next[t.target])
                            return {false, v,
                                    "trigger state " + std::to_string(s) + " moves by " + mdp.actions[c.action] +
                                        " to state " + std::to_string(t.target) + ", which does not satisfy " +
                                        f.next.to_string()};
            }
            return {true, v, "every step out of a trigger state satisfies " + f.next.to_string()};
        }
    };
    return std::visit(Checker{mdp}, property);
}

namespace {

class PropertyParser {
public:
    PropertyParser(std::string_view line, std::size_t line_no, std::size_t offset)
        : s_(line), line_(line_no), offset_(offset)
    {
    }

    Property parse()
    {
        Property p = property();
        skip();
        if (i_ < s_.size())
            fail("unexpected text after property");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(SourcePos{line_, i_ + 1, offset_ + i_}, what);
    }

    void skip()
    {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
            ++i_;
    }

    bool accept(std::string_view tok)
    {
        skip();
        if (s_.substr(i_, tok.size()) != tok)
            return false;
        const bool word = std::isalpha(static_cast<unsigned char>(tok[0]));
        if (word && i_ + tok.size() < s_.size() &&
            (std::isalnum(static_cast<unsigned char>(s_[i_ + tok.size()])) || s_[i_ + tok.size()] == '_'))
            return false;
        i_ += tok.size();
        return true;
    }

    void expect(std::string_view tok)
    {
        if (!accept(tok))
            fail("expected '" + std::string(tok) + "'");
    }

    double number()
    {
        skip();
        const std::string rest(s_.substr(i_));
        char* end = nullptr;
        const double v = std::strtod(rest.c_str(), &end);
        if (end == rest.c_str())
            fail("expected a probability");
        if (!(v >= 0.0 && v <= 1.0))
            fail("probability bound must lie in [0, 1]");
        i_ += static_cast<std::size_t>(end - rest.c_str());
        return v;
    }

    Property property()
    {
        if (accept("P")) {
            Reach r;
            if (accept(">="))
                r.bound = Bound::ge;
            else if (accept("<="))
                r.bound = Bound::le;
            else if (accept(">"))
                r.bound = Bound::gt;
            else if (accept("<"))
                r.bound = Bound::lt;
            else
                fail("expected one of >=, >, <=, <");
            r.p = number();
            expect("[");
            expect("F");
            r.target = disjunction();
            expect("]");
            return r;
        }
        if (accept("A")) {
            expect("[");
            Property p;
            if (accept("G")) {
                LabelExpr good = disjunction();
                p = Safety{good.kind() == LabelExpr::Kind::negation ? good.operand(0) : LabelExpr::negation(good)};
            } else if (accept("F")) {
                p = Inevitable{disjunction()};
            } else {
                fail("expected 'G' or 'F'");
            }
            expect("]");
            return p;
        }
        if (accept("E")) {
            expect("[");
            expect("F");
            Possible p{disjunction()};
            expect("]");
            return p;
        }
        if (accept("FORCEDNEXT")) {
            ForcedNext f;
            f.trigger = disjunction();
            expect("->");
            f.next = disjunction();
            return f;
        }
        fail("expected a property (P, A, E or FORCEDNEXT)");
    }

    LabelExpr disjunction()
    {
        LabelExpr e = conjunction();
        while (accept("|"))
            e = LabelExpr::disjunction(std::move(e), conjunction());
        return e;
    }

    LabelExpr conjunction()
    {
        LabelExpr e = unary();
        while (accept("&"))
            e = LabelExpr::conjunction(std::move(e), unary());
        return e;
    }

    LabelExpr unary()
    {
        if (accept("!"))
            return LabelExpr::negation(unary());
        if (accept("(")) {
            LabelExpr e = disjunction();
            expect(")");
            return e;
        }
        if (accept("true"))
            return LabelExpr::constant(true);
        if (accept("false"))
            return LabelExpr::constant(false);
        skip();
        if (i_ < s_.size() && s_[i_] == '"') {
            const auto close = s_.find('"', i_ + 1);
            if (close == std::string_view::npos)
                fail("unterminated label name");
            std::string name(s_.substr(i_ + 1, close - i_ - 1));
            if (name.empty())
                fail("empty label name");
            i_ = close + 1;
            return LabelExpr::name(std::move(name));
        }
        fail("expected a quoted label, '!', '(' , true or false");
    }

    std::string_view s_;
    std::size_t line_;
    std::size_t offset_;
    std::size_t i_ = 0;
};

} // namespace

std::vector<PropertyLine> parse_properties(std::string_view text)
{
    std::vector<PropertyLine> out;
    std::size_t offset = 0;
    std::size_t line_no = 0;
    while (offset <= text.size()) {
        ++line_no;
        auto end = text.find('\n', offset);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(offset, end - offset);
        // A '#' outside a quoted label starts a comment.
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line = line.substr(0, i);
                break;
            }
        }
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        const bool blank = std::all_of(line.begin(), line.end(),
                                       [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        if (!blank) {
            const auto first = line.find_first_not_of(" \t");
            const auto last = line.find_last_not_of(" \t");
            PropertyLine p{SourcePos{line_no, first + 1, offset + first},
                           std::string(line.substr(first, last - first + 1)),
                           PropertyParser(line, line_no, offset).parse()};
            out.push_back(std::move(p));
        }
        offset = end + 1;
    }
    return out;
}

} // namespace tickgraph
