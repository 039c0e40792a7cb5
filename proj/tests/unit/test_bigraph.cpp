#include "doctest.h"

#include "tickgraph/bigraph.hpp"
#include "tickgraph/error.hpp"

using namespace tickgraph;

namespace {
const Control S{"S", 1, false, false};
const Control X{"X", 1, true, true};
const Control Init{"Init", 0, true, false};
} // namespace

TEST_SUITE("bigraph")
{
    TEST_CASE("units")
    {
        CHECK(epsilon().regions == 0);
        CHECK(one().regions == 1);
        CHECK(one().entities.empty());
        CHECK(site().sites.size() == 1);
        CHECK(validate(epsilon()).empty());
        CHECK(validate(site()).empty());
    }

    TEST_CASE("ion shares repeated names")
    {
        const Control two{"T", 2, true, false};
        const Bigraph b = ion(two, std::nullopt, {"a", "a"});
        REQUIRE(b.entities.size() == 1);
        CHECK(b.links.size() == 1);
        CHECK(b.entities[0].ports == std::vector<std::size_t>{0, 0});
        CHECK(b.outer_names() == std::vector<std::string>{"a"});
    }

    TEST_CASE("ion arity and parameter are checked")
    {
        CHECK_THROWS_AS(ion(S, std::nullopt, {}), ConstructionError);
        CHECK_THROWS_AS(ion(X, std::nullopt, {"c"}), ConstructionError);
        CHECK_THROWS_AS(ion(S, 3, {"c"}), ConstructionError);
    }

    TEST_CASE("nest places inner content in the site")
    {
        const Bigraph b = nest(ion(S, std::nullopt, {"c"}), ion(Init, std::nullopt, {}));
        REQUIRE(b.entities.size() == 2);
        CHECK(b.entities[1].parent == Place::entity(0));
        CHECK(b.sites.empty());
        CHECK(validate(b).empty());
        CHECK_THROWS_AS(nest(ion(Init, std::nullopt, {}), one()), ConstructionError);
    }

    TEST_CASE("merge and parallel")
    {
        const Bigraph a = ion(X, 1, {"c"});
        const Bigraph b = ion(X, 2, {"c"});
        const Bigraph m = merge(a, b);
        CHECK(m.regions == 1);
        CHECK(m.links.size() == 1);
        const Bigraph p = parallel(a, b);
        CHECK(p.regions == 2);
        CHECK(p.entities[1].parent == Place::region(1));
        CHECK(merge(one(), one()).regions == 1);
        CHECK(parallel(epsilon(), a).regions == 1);
    }

    TEST_CASE("close hides a name and reports absence")
    {
        const Bigraph b = parallel(nest(ion(S, std::nullopt, {"c"}), ion(Init, std::nullopt, {})), ion(X, 0, {"c"}));
        const Bigraph closed = close("c", b);
        CHECK(closed.outer_names().empty());
        CHECK(closed.links.size() == 1);
        CHECK_FALSE(closed.links[0].name.has_value());
        bool absent = false;
        const Bigraph same = close("z", b, &absent);
        CHECK(absent);
        CHECK(same.outer_names() == b.outer_names());
        CHECK(to_string(closed) == "/_0 (S{_0}.Init || X(0){_0})");
    }

    TEST_CASE("validate catches hand-built violations")
    {
        Bigraph b = ion(S, std::nullopt, {"c"});
        b.entities[0].ports = {5};
        CHECK_FALSE(validate(b).empty());

        Bigraph cyc = merge(ion(S, std::nullopt, {"c"}), ion(S, std::nullopt, {"c"}));
        cyc.sites.clear();
        cyc.entities[0].parent = Place::entity(1);
        cyc.entities[1].parent = Place::entity(0);
        CHECK_FALSE(validate(cyc).empty());

        const ControlTable table = {{"S", Control{"S", 2, false, false}}};
        CHECK_FALSE(validate(ion(S, std::nullopt, {"c"}), &table).empty());
    }
}
