#include <algorithm>
#include <charconv>
#include <set>

#include "tickgraph/lang.hpp"

namespace tickgraph::lang {

namespace {

[[noreturn]] void fail(const Loc& loc, const std::string& what)
{
    throw ElaborationError(loc.pos, what);
}

std::string at_text(const Loc& loc)
{
    return std::to_string(loc.pos.line) + ":" + std::to_string(loc.pos.column);
}

struct Scope {
    std::vector<std::pair<std::string, IntExpr>> vars;

    const IntExpr* find(const std::string& name) const
    {
        for (const auto& [n, e] : vars)
            if (n == name)
                return &e;
        return nullptr;
    }
};

Scope family_scope(const std::vector<std::string>& params)
{
    Scope s;
    for (std::size_t i = 0; i < params.size(); ++i)
        s.vars.emplace_back(params[i], IntExpr::variable(i, params[i]));
    return s;
}

// Saturating product of the domain sizes.
std::uint64_t valuation_count(const std::vector<std::vector<std::int64_t>>& domains)
{
    std::uint64_t n = 1;
    for (const auto& d : domains) {
        if (d.empty())
            return 0;
        if (n > UINT64_MAX / d.size())
            return UINT64_MAX;
        n *= d.size();
    }
    return n;
}

class Elaborator {
public:
    explicit Elaborator(const Ast& ast) : ast_(ast) {}

    Model run()
    {
        declare();
        if (!ast_.abrs)
            throw ElaborationError(SourcePos{}, "no abrs block");
        const AbrsBlock& b = *ast_.abrs;
        Model m;
        m.controls = table_;
        ints(b, m);
        initial(b, m);
        rules(b, m);
        actions(b, m);
        preds(b, m);
        return m;
    }

private:
    void declare()
    {
        std::map<std::string, Loc> seen;
        auto claim = [&](const std::string& name, const Loc& loc) {
            auto [it, fresh] = seen.emplace(name, loc);
            if (!fresh)
                fail(loc, name + " is already declared at " + at_text(it->second));
        };
        for (const auto& d : ast_.declarations) {
            if (const auto* c = std::get_if<ControlDecl>(&d)) {
                claim(c->name, c->loc);
                if (c->fun && c->params.size() != 1)
                    fail(c->loc, "control " + c->name + " must take exactly one int parameter");
                if (c->arity < 0)
                    fail(c->loc, "control " + c->name + " has negative arity");
                table_[c->name] = Control{c->name, static_cast<std::size_t>(c->arity), c->atomic, c->fun};
            } else if (const auto* g = std::get_if<BigDecl>(&d)) {
                claim(g->name, g->loc);
                check_params(g->params, g->loc);
                bigs_[g->name] = g;
            } else {
                const auto& r = std::get<ReactDecl>(d);
                claim(r.name, r.loc);
                check_params(r.params, r.loc);
                reacts_[r.name] = &r;
            }
        }
    }

    static void check_params(const std::vector<std::string>& ps, const Loc& loc)
    {
        std::set<std::string> s;
        for (const auto& p : ps)
            if (!s.insert(p).second)
                fail(loc, "parameter " + p + " is declared twice");
    }

    IntExpr int_expr(const IntAst& e, const Scope& scope, bool redex)
    {
        switch (e.kind) {
        case IntAst::Kind::literal:
            return IntExpr::literal(e.value);
        case IntAst::Kind::name: {
            if (const auto* v = scope.find(e.name))
                return *v;
            if (ints_.count(e.name))
                fail(e.loc, "int set " + e.name + " escapes its domain: only the parameters of the enclosing "
                            "definition can be used here");
            fail(e.loc, "undefined parameter " + e.name);
        }
        default: {
            const auto op = e.kind == IntAst::Kind::add   ? IntExpr::Op::add
                            : e.kind == IntAst::Kind::sub ? IntExpr::Op::sub
                                                          : IntExpr::Op::mul;
            IntExpr out = IntExpr::binary(op, int_expr(e.operands[0], scope, redex),
                                          int_expr(e.operands[1], scope, redex));
            if (const auto c = out.as_constant())
                return IntExpr::literal(*c);
            if (redex)
                fail(e.loc, "parameter arithmetic (" + out.to_string() + ") is only allowed in reactums");
            return out;
        }
        }
    }

    ParamBigraph big(const BigAst& b, const Scope& scope, bool redex, bool keep_site = false)
    {
        try {
            switch (b.kind) {
            case BigAst::Kind::site:
                return ParamBigraph(site());
            case BigAst::Kind::unit:
                return ParamBigraph(one());
            case BigAst::Kind::atom:
                return atom(b, scope, redex, keep_site);
            case BigAst::Kind::nest:
                return nest(big(b.operands[0], scope, redex, true), big(b.operands[1], scope, redex));
            case BigAst::Kind::merge:
            case BigAst::Kind::parallel: {
                ParamBigraph out = big(b.operands[0], scope, redex);
                for (std::size_t i = 1; i < b.operands.size(); ++i)
                    out = b.kind == BigAst::Kind::merge ? merge(out, big(b.operands[i], scope, redex))
                                                        : parallel(out, big(b.operands[i], scope, redex));
                return out;
            }
            case BigAst::Kind::closure: {
                bool absent = false;
                ParamBigraph out = close(b.name, big(b.operands[0], scope, redex), &absent);
                if (absent)
                    fail(b.loc, "closed name " + b.name + " does not occur in its scope");
                return out;
            }
            }
        } catch (const ConstructionError& e) {
            fail(b.loc, e.what());
        }
        return {};
    }

    ParamBigraph atom(const BigAst& b, const Scope& scope, bool redex, bool keep_site)
    {
        if (auto it = table_.find(b.name); it != table_.end()) {
            const Control& c = it->second;
            if (c.parameterised && b.args.size() != 1)
                fail(b.loc, "control " + c.name + " takes one int parameter");
            if (!c.parameterised && b.has_args)
                fail(b.loc, "control " + c.name + " takes no parameter");
            if (b.links.size() != c.arity)
                fail(b.loc, "control " + c.name + " has arity " + std::to_string(c.arity) + " but " +
                                std::to_string(b.links.size()) + " link" + (b.links.size() == 1 ? "" : "s") +
                                " given");
            ParamBigraph out;
            if (c.parameterised) {
                const IntExpr e = int_expr(b.args[0], scope, redex);
                if (const auto v = e.as_constant())
                    out = ParamBigraph(ion(c, *v, b.links));
                else
                    out = ion(c, e, b.links);
            } else {
                out = ParamBigraph(ion(c, std::nullopt, b.links));
            }
            // A non-atomic control that is not the left operand of '.' is empty.
            if (!c.atomic && !keep_site)
                out = nest(out, ParamBigraph(one()));
            return out;
        }
        auto it = bigs_.find(b.name);
        if (it == bigs_.end())
            fail(b.loc, "undefined identifier " + b.name);
        const BigDecl& d = *it->second;
        if (b.has_links)
            fail(b.loc, "big " + d.name + " cannot take links");
        if (b.args.size() != d.params.size())
            fail(b.loc, "big " + d.name + " takes " + std::to_string(d.params.size()) + " argument" +
                            (d.params.size() == 1 ? "" : "s") + ", got " + std::to_string(b.args.size()));
        if (active_.count(d.name))
            fail(b.loc, "big " + d.name + " is defined in terms of itself");
        Scope inner;
        for (std::size_t i = 0; i < d.params.size(); ++i)
            inner.vars.emplace_back(d.params[i], int_expr(b.args[i], scope, redex));
        active_.insert(d.name);
        ParamBigraph out = big(d.body, inner, redex);
        active_.erase(d.name);
        return out;
    }

    Bigraph ground_big(const BigAst& b)
    {
        return big(b, Scope{}, false).instantiate({});
    }

    void ints(const AbrsBlock& b, Model& m)
    {
        for (const auto& ib : b.ints) {
            if (ints_.count(ib.name))
                fail(ib.loc, "int set " + ib.name + " is declared twice");
            if (ib.values.empty())
                fail(ib.loc, "int set " + ib.name + " is empty");
            auto v = ib.values;
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
            ints_[ib.name] = v;
            int_locs_[ib.name] = ib.loc;
        }
        m.int_sets.insert(ints_.begin(), ints_.end());
    }

    void initial(const AbrsBlock& b, Model& m)
    {
        if (!b.init)
            fail(b.loc, "abrs block has no init");
        auto it = bigs_.find(*b.init);
        if (it == bigs_.end())
            fail(b.init_loc, "undefined big " + *b.init);
        if (it->second->fun)
            fail(b.init_loc, "initial state " + *b.init + " cannot be a fun big");
        m.initial = ground_big(it->second->body);
        m.initial_name = *b.init;
        if (!m.initial.sites.empty())
            fail(b.init_loc, "initial state " + *b.init + " has sites");
        for (const auto& v : validate(m.initial, &table_))
            fail(b.init_loc, "initial state " + *b.init + ": " + v.subject + ": " + v.message);
    }

    std::vector<std::vector<std::int64_t>> domains(const FamilyRef& r, const std::vector<std::string>& params,
                                                   const char* what)
    {
        if (r.has_args != !params.empty() || r.args.size() != params.size())
            fail(r.loc, std::string(what) + " " + r.name + " takes " + std::to_string(params.size()) + " argument" +
                            (params.size() == 1 ? "" : "s") + ", got " + std::to_string(r.args.size()));
        std::vector<std::vector<std::int64_t>> out;
        for (const auto& a : r.args) {
            if (const auto* v = std::get_if<std::int64_t>(&a.value)) {
                out.push_back({*v});
                continue;
            }
            const auto& name = std::get<std::string>(a.value);
            auto it = ints_.find(name);
            if (it == ints_.end())
                fail(a.loc, "undefined int set " + name);
            out.push_back(it->second);
        }
        return out;
    }

    std::shared_ptr<const RuleTemplate> rule_template(const ReactDecl& d)
    {
        if (auto it = templates_.find(d.name); it != templates_.end())
            return it->second;
        auto t = std::make_shared<RuleTemplate>();
        t->name = d.name;
        t->params = d.params;
        const Scope scope = family_scope(d.params);
        t->redex = big(d.redex, scope, true);
        t->reactum = big(d.reactum, scope, false);
        t->weight = d.weight.value_or(1.0);
        if (d.condition) {
            t->condition = NegativeCondition{big(*d.condition, Scope{}, false).instantiate({})};
            for (const auto& v : validate(t->condition->pattern, &table_))
                fail(d.condition->loc, "condition: " + v.subject + ": " + v.message);
        }
        try {
            check_template(*t);
        } catch (const RewriteError& e) {
            fail(d.loc, e.what());
        }
        for (const auto& v : validate(t->redex.shape, &table_))
            fail(d.redex.loc, "redex: " + v.subject + ": " + v.message);
        templates_[d.name] = t;
        return t;
    }

    void rules(const AbrsBlock& b, Model& m)
    {
        if (!b.rules)
            fail(b.loc, "abrs block has no rules");
        struct Placed {
            std::string base;
            std::vector<std::vector<std::int64_t>> domains;
            std::size_t cls;
        };
        std::vector<Placed> placed;
        for (std::size_t c = 0; c < b.rules->size(); ++c) {
            m.priorities.classes.emplace_back();
            m.rule_positions.emplace_back();
            for (const auto& ref : (*b.rules)[c]) {
                auto it = reacts_.find(ref.name);
                if (it == reacts_.end())
                    fail(ref.loc, bigs_.count(ref.name) || table_.count(ref.name)
                                      ? ref.name + " is not a reaction rule"
                                      : "undefined rule " + ref.name);
                RuleFamily f{rule_template(*it->second), domains(ref, it->second->params, "rule")};
                for (const auto& p : placed) {
                    if (p.base != ref.name)
                        continue;
                    std::vector<std::int64_t> witness;
                    for (std::size_t i = 0; i < p.domains.size(); ++i) {
                        const auto& a = p.domains[i];
                        const auto& d = f.domains[i];
                        auto hit = std::find_if(d.begin(), d.end(),
                                                [&](std::int64_t v) { return std::binary_search(a.begin(), a.end(), v); });
                        if (hit == d.end())
                            break;
                        witness.push_back(*hit);
                    }
                    if (witness.size() == p.domains.size())
                        fail(ref.loc, "rule " + instance_name(ref.name, witness) +
                                          (p.cls == c ? " is listed twice in priority class "
                                                      : " is in two priority classes, " + std::to_string(p.cls + 1) +
                                                            " and ") +
                                          std::to_string(c + 1));
                }
                placed.push_back({ref.name, f.domains, c});
                used_rules_.emplace(ref.name, ref.loc);
                m.priorities.classes.back().push_back(std::move(f));
                m.rule_positions.back().push_back(ref.loc.pos);
            }
        }
    }

    void actions(const AbrsBlock& b, Model& m)
    {
        if (!b.actions)
            fail(b.loc, "abrs block has no actions");
        std::map<std::string, std::string> owner;
        std::set<std::string> names;
        for (const auto& a : *b.actions) {
            if (!names.insert(a.name).second)
                fail(a.loc, "action " + a.name + " is declared twice");
            if (a.name == stall_action)
                fail(a.loc, "action name " + a.name + " is reserved");
            for (std::size_t i = 0; i < a.rules.size(); ++i) {
                const auto& r = a.rules[i];
                if (!reacts_.count(r))
                    fail(a.rule_locs[i], "undefined rule " + r);
                if (auto it = owner.find(r); it != owner.end())
                    fail(a.rule_locs[i], "rule " + r + " is in two actions, " + it->second + " and " + a.name);
                if (!used_rules_.count(r))
                    fail(a.rule_locs[i], "rule " + r + " is in no priority class");
                owner[r] = a.name;
            }
            m.actions.actions.emplace_back(a.name, a.rules);
        }
        for (const auto& [r, loc] : used_rules_)
            if (!owner.count(r))
                fail(loc, "rule " + r + " is in no action");
    }

    void preds(const AbrsBlock& b, Model& m)
    {
        if (!b.preds)
            return;
        std::set<std::string> seen;
        for (const auto& ref : *b.preds) {
            auto it = bigs_.find(ref.name);
            if (it == bigs_.end())
                fail(ref.loc, table_.count(ref.name) || reacts_.count(ref.name) ? ref.name + " is not a big"
                                                                                : "undefined big " + ref.name);
            if (!seen.insert(ref.name).second)
                fail(ref.loc, "predicate " + ref.name + " is listed twice");
            const BigDecl& d = *it->second;
            PredicateFamily p;
            p.name = d.name;
            p.params = d.params;
            p.domains = domains(ref, d.params, "predicate");
            p.body = big(d.body, family_scope(d.params), false);
            p.pos = ref.loc.pos;
            m.predicates.push_back(std::move(p));
        }
    }

    const Ast& ast_;
    ControlTable table_;
    std::map<std::string, const BigDecl*> bigs_;
    std::map<std::string, const ReactDecl*> reacts_;
    std::map<std::string, std::vector<std::int64_t>> ints_;
    std::map<std::string, Loc> int_locs_;
    std::map<std::string, std::shared_ptr<const RuleTemplate>> templates_;
    std::map<std::string, Loc> used_rules_;
    std::set<std::string> active_;
};

template <typename Fn>
void each_valuation(const std::vector<std::vector<std::int64_t>>& domains, Fn&& fn)
{
    for (const auto& d : domains)
        if (d.empty())
            return;
    std::vector<std::size_t> at(domains.size(), 0);
    std::vector<std::int64_t> val(domains.size());
    while (true) {
        for (std::size_t i = 0; i < domains.size(); ++i)
            val[i] = domains[i][at[i]];
        fn(val);
        std::size_t i = domains.size();
        while (true) {
            if (i == 0)
                return;
            --i;
            if (++at[i] < domains[i].size())
                break;
            at[i] = 0;
        }
    }
}

} // namespace

std::string predicate_label(const std::string& base, std::span<const std::int64_t> values)
{
    std::string s = base;
    for (auto v : values)
        s += "_" + std::to_string(v);
    return s;
}

std::uint64_t Model::rule_count() const
{
    std::uint64_t n = 0;
    for (const auto& cls : priorities.classes)
        for (const auto& f : cls) {
            const auto k = valuation_count(f.domains);
            n = UINT64_MAX - n < k ? UINT64_MAX : n + k;
        }
    return n;
}

ReactiveSystem Model::system(MatchMode mode) const
{
    return ReactiveSystem(initial, priorities, actions, mode);
}

std::vector<Pattern> Model::predicate_instances() const
{
    std::vector<Pattern> out;
    for (const auto& p : predicates)
        each_valuation(p.domains, [&](const std::vector<std::int64_t>& v) {
            out.push_back({predicate_label(p.name, v), p.body.instantiate(v)});
        });
    return out;
}

std::optional<Pattern> Model::predicate(std::string_view label) const
{
    for (const auto& p : predicates) {
        if (p.params.empty()) {
            if (label == p.name)
                return Pattern{p.name, p.body.instantiate({})};
            continue;
        }
        if (!label.starts_with(p.name) || label.size() == p.name.size() || label[p.name.size()] != '_')
            continue;
        std::vector<std::int64_t> values;
        std::string_view rest = label.substr(p.name.size() + 1);
        bool ok = true;
        while (ok) {
            const auto cut = rest.find('_');
            const auto part = rest.substr(0, cut);
            std::int64_t v = 0;
            auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
            ok = !part.empty() && ec == std::errc() && ptr == part.data() + part.size();
            if (ok)
                values.push_back(v);
            if (cut == std::string_view::npos)
                break;
            rest = rest.substr(cut + 1);
        }
        if (ok && values.size() == p.params.size())
            return Pattern{std::string(label), p.body.instantiate(values)};
    }
    return std::nullopt;
}

Model elaborate(const Ast& ast)
{
    return Elaborator(ast).run();
}

} // namespace tickgraph::lang
