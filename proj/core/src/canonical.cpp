// Canonical forms by colour refinement and individualisation: refine entity
// colours to a stable partition, branch on every member of the first
// non-singleton cell, and keep the smallest encoding over all discrete leaves.

#include <algorithm>
#include <stdexcept>

#include "tickgraph/match.hpp"

namespace tickgraph {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t CanonicalForm::digest() const { return fnv1a64(bytes_); }

namespace {

using Key = std::vector<std::uint64_t>;

std::vector<std::uint32_t> rank(const std::vector<Key>& keys)
{
    std::vector<Key> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::uint32_t> out(keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i)
        out[i] = static_cast<std::uint32_t>(std::lower_bound(sorted.begin(), sorted.end(), keys[i]) - sorted.begin());
    return out;
}

std::size_t distinct(const std::vector<std::uint32_t>& col)
{
    std::vector<std::uint32_t> c = col;
    std::sort(c.begin(), c.end());
    return static_cast<std::size_t>(std::unique(c.begin(), c.end()) - c.begin());
}

class Writer {
public:
    void u(std::uint64_t v)
    {
        do {
            unsigned char b = v & 0x7f;
            v >>= 7;
            if (v)
                b |= 0x80;
            out.push_back(static_cast<char>(b));
        } while (v);
    }
    void i(std::int64_t v) { u((static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63)); }
    void byte(unsigned char b) { out.push_back(static_cast<char>(b)); }
    void str(std::string_view s)
    {
        u(s.size());
        out.append(s);
    }
    std::string out;
};

class Reader {
public:
    explicit Reader(std::string_view in) : in_(in) {}
    std::uint64_t u()
    {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            const unsigned char b = byte();
            v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
            if (!(b & 0x80))
                return v;
        }
        throw std::invalid_argument("canonical form: varint too long");
    }
    std::int64_t i()
    {
        const std::uint64_t z = u();
        return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
    }
    unsigned char byte()
    {
        if (pos_ >= in_.size())
            throw std::invalid_argument("canonical form: truncated");
        return static_cast<unsigned char>(in_[pos_++]);
    }
    std::string str()
    {
        const auto n = u();
        if (n > in_.size() - pos_)
            throw std::invalid_argument("canonical form: truncated");
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    bool at_end() const { return pos_ == in_.size(); }

private:
    std::string_view in_;
    std::size_t pos_ = 0;
};

constexpr unsigned char form_tag = 'B';

class Canonizer {
public:
    explicit Canonizer(const Bigraph& b) : b_(b), f_(b), link_entities_(b.links.size()), link_inner_(b.links.size())
    {
        std::vector<std::string> names;
        for (const auto& e : b.entities)
            names.push_back(e.control.name);
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        for (std::size_t v = 0; v < b.entities.size(); ++v)
            for (auto l : b.entities[v].ports)
                link_entities_[l].push_back(v);
        std::vector<std::string> outer = b.outer_names();
        std::vector<std::string> inner = b.inner_names();
        link_name_rank_.assign(b.links.size(), 0);
        for (std::size_t l = 0; l < b.links.size(); ++l)
            if (b.links[l].name)
                link_name_rank_[l] = std::lower_bound(outer.begin(), outer.end(), *b.links[l].name) - outer.begin();
        for (const auto& [n, l] : b.inner)
            link_inner_[l].push_back(std::lower_bound(inner.begin(), inner.end(), n) - inner.begin());
        for (auto& v : link_inner_)
            std::sort(v.begin(), v.end());

        std::vector<Key> keys;
        for (const auto& e : b.entities) {
            const auto name = std::lower_bound(names.begin(), names.end(), e.control.name) - names.begin();
            keys.push_back({static_cast<std::uint64_t>(name), e.control.arity, e.control.atomic,
                            e.control.parameterised, e.param.has_value(),
                            static_cast<std::uint64_t>(e.param.value_or(0))});
        }
        initial_ = rank(keys);
    }

    std::string run()
    {
        search(initial_);
        if (!have_best_)
            best_ = encode({});
        return best_;
    }

private:
    std::vector<std::uint32_t> link_colours(const std::vector<std::uint32_t>& col) const
    {
        std::vector<Key> keys(b_.links.size());
        for (std::size_t l = 0; l < b_.links.size(); ++l) {
            Key& k = keys[l];
            if (b_.links[l].name) {
                k = {0, link_name_rank_[l]};
            } else {
                k = {1, link_entities_[l].size()};
                std::vector<std::uint64_t> cs;
                for (auto v : link_entities_[l])
                    cs.push_back(col[v]);
                std::sort(cs.begin(), cs.end());
                k.insert(k.end(), cs.begin(), cs.end());
            }
            k.push_back(link_inner_[l].size());
            k.insert(k.end(), link_inner_[l].begin(), link_inner_[l].end());
        }
        return rank(keys);
    }

    void refine(std::vector<std::uint32_t>& col) const
    {
        std::size_t count = distinct(col);
        while (true) {
            const auto lcol = link_colours(col);
            std::vector<Key> keys(col.size());
            for (std::size_t v = 0; v < col.size(); ++v) {
                Key& k = keys[v];
                k.push_back(col[v]);
                const Place p = b_.entities[v].parent;
                k.push_back(p.is_region() ? 0 : 1);
                k.push_back(p.is_region() ? p.index : col[p.index]);
                std::vector<std::uint64_t> part;
                for (auto c : f_.entity_children[v])
                    part.push_back(col[c]);
                std::sort(part.begin(), part.end());
                k.push_back(part.size());
                k.insert(k.end(), part.begin(), part.end());
                k.push_back(f_.entity_sites[v].size());
                k.insert(k.end(), f_.entity_sites[v].begin(), f_.entity_sites[v].end());
                part.clear();
                for (auto l : b_.entities[v].ports)
                    part.push_back(lcol[l]);
                std::sort(part.begin(), part.end());
                k.insert(k.end(), part.begin(), part.end());
            }
            col = rank(keys);
            const std::size_t next = distinct(col);
            if (next == count)
                return;
            count = next;
        }
    }

    // Leaves with the same parent and the same ports are swapped by an
    // automorphism, so branching on one of them is enough.
    bool twins(const std::vector<std::size_t>& cell) const
    {
        auto sorted_ports = [&](std::size_t v) {
            auto p = b_.entities[v].ports;
            std::sort(p.begin(), p.end());
            return p;
        };
        const auto first = cell.front();
        const auto ports = sorted_ports(first);
        for (auto v : cell) {
            if (!f_.entity_children[v].empty() || !f_.entity_sites[v].empty())
                return false;
            if (b_.entities[v].parent != b_.entities[first].parent || sorted_ports(v) != ports)
                return false;
        }
        return true;
    }

    void search(std::vector<std::uint32_t> col)
    {
        refine(col);
        const std::size_t n = col.size();
        if (distinct(col) == n) {
            auto leaf = encode(col);
            if (!have_best_ || leaf < best_) {
                best_ = std::move(leaf);
                have_best_ = true;
            }
            return;
        }
        std::vector<std::size_t> size(n, 0);
        for (auto c : col)
            ++size[c];
        std::uint32_t target = 0;
        while (size[target] < 2)
            ++target;
        std::vector<std::size_t> cell;
        for (std::size_t v = 0; v < n; ++v)
            if (col[v] == target)
                cell.push_back(v);
        if (twins(cell))
            cell.resize(1);
        for (auto v : cell) {
            std::vector<std::uint32_t> next(n);
            for (std::size_t w = 0; w < n; ++w)
                next[w] = 2 * col[w] + (w == v ? 0 : 1);
            std::vector<Key> keys;
            for (auto c : next)
                keys.push_back({c});
            search(rank(keys));
        }
    }

    std::string encode(const std::vector<std::uint32_t>& label) const
    {
        const std::size_t n = b_.entities.size();
        std::vector<std::size_t> at(n);
        for (std::size_t v = 0; v < n; ++v)
            at[label[v]] = v;
        Writer w;
        w.byte(form_tag);
        w.u(b_.regions);
        w.u(b_.sites.size());
        w.u(n);
        auto parent = [&](Place p) {
            w.byte(p.is_region() ? 0 : 1);
            w.u(p.is_region() ? p.index : label[p.index]);
        };
        for (std::size_t i = 0; i < n; ++i) {
            const Entity& e = b_.entities[at[i]];
            w.str(e.control.name);
            w.u(e.control.arity);
            w.byte(static_cast<unsigned char>((e.control.atomic ? 1 : 0) | (e.control.parameterised ? 2 : 0) |
                                              (e.param ? 4 : 0)));
            if (e.param)
                w.i(*e.param);
            parent(e.parent);
        }
        for (const auto& s : b_.sites)
            parent(s);

        std::vector<std::vector<std::string>> inner_names(b_.links.size());
        for (const auto& [name, l] : b_.inner)
            inner_names[l].push_back(name);
        std::vector<std::string> entries;
        for (std::size_t l = 0; l < b_.links.size(); ++l) {
            if (!b_.links[l].name && link_entities_[l].empty() && inner_names[l].empty())
                continue;
            Writer e;
            e.byte(b_.links[l].name ? 0 : 1);
            if (b_.links[l].name)
                e.str(*b_.links[l].name);
            std::vector<std::uint64_t> ports;
            for (auto v : link_entities_[l])
                ports.push_back(label[v]);
            std::sort(ports.begin(), ports.end());
            e.u(ports.size());
            for (auto p : ports)
                e.u(p);
            auto names = inner_names[l];
            std::sort(names.begin(), names.end());
            e.u(names.size());
            for (const auto& nm : names)
                e.str(nm);
            entries.push_back(std::move(e.out));
        }
        std::sort(entries.begin(), entries.end());
        w.u(entries.size());
        for (const auto& e : entries)
            w.str(e);
        return std::move(w.out);
    }

    const Bigraph& b_;
    Forest f_;
    std::vector<std::vector<std::size_t>> link_entities_;
    std::vector<std::vector<std::uint64_t>> link_inner_;
    std::vector<std::uint64_t> link_name_rank_;
    std::vector<std::uint32_t> initial_;
    std::string best_;
    bool have_best_ = false;
};

} // namespace

CanonicalForm canonical_form(const Bigraph& b) { return CanonicalForm(Canonizer(b).run()); }

bool is_iso(const Bigraph& a, const Bigraph& b)
{
    if (a.regions != b.regions || a.sites.size() != b.sites.size() || a.entities.size() != b.entities.size())
        return false;
    return canonical_form(a) == canonical_form(b);
}

Bigraph decode(const CanonicalForm& form)
{
    Reader r(form.bytes());
    if (r.byte() != form_tag)
        throw std::invalid_argument("canonical form: bad tag");
    Bigraph b;
    b.regions = r.u();
    const auto sites = r.u();
    const auto n = r.u();
    auto parent = [&]() {
        const auto kind = r.byte();
        const auto idx = r.u();
        if (kind > 1 || (kind == 0 && idx >= b.regions) || (kind == 1 && idx >= n))
            throw std::invalid_argument("canonical form: bad parent");
        return kind == 0 ? Place::region(idx) : Place::entity(idx);
    };
    for (std::uint64_t i = 0; i < n; ++i) {
        Entity e;
        e.control.name = r.str();
        e.control.arity = r.u();
        const auto flags = r.byte();
        e.control.atomic = flags & 1;
        e.control.parameterised = flags & 2;
        if (flags & 4)
            e.param = r.i();
        e.parent = parent();
        b.entities.push_back(std::move(e));
    }
    for (std::uint64_t s = 0; s < sites; ++s)
        b.sites.push_back(parent());
    const auto links = r.u();
    for (std::uint64_t l = 0; l < links; ++l) {
        const std::string entry = r.str();
        Reader e(entry);
        Link link;
        if (e.byte() == 0)
            link.name = e.str();
        const auto ports = e.u();
        for (std::uint64_t p = 0; p < ports; ++p) {
            const auto v = e.u();
            if (v >= n)
                throw std::invalid_argument("canonical form: bad port");
            b.entities[v].ports.push_back(b.links.size());
        }
        const auto inner = e.u();
        for (std::uint64_t k = 0; k < inner; ++k)
            b.inner.emplace_back(e.str(), b.links.size());
        b.links.push_back(std::move(link));
    }
    if (!r.at_end())
        throw std::invalid_argument("canonical form: trailing bytes");
    std::sort(b.inner.begin(), b.inner.end());
    return b;
}

} // namespace tickgraph
