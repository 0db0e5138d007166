#include <doctest.h>

#include <set>
#include <vector>

#include "kdlab/features.hpp"
#include "kdlab/state_space.hpp"

using namespace kdlab;

namespace {

Vocabulary small_vocab(std::size_t n_tokens, std::size_t n_inputs) {
    Vocabulary v;
    for (std::size_t i = 0; i < n_tokens; ++i)
        v.tokens.push_back("t" + std::to_string(i));
    for (std::size_t i = 0; i < n_inputs; ++i)
        v.input_symbols.push_back("x" + std::to_string(i));
    return v;
}

}  // namespace

TEST_CASE("state ids round trip through prefixes at every level") {
    const StateIndex idx(2, 3, 3);
    // 2 + 6 + 18 decision states (levels 0..2), 54 full-length terminals.
    CHECK(idx.decision_state_count() == 2 + 6 + 18);
    CHECK(idx.total_state_count() == idx.decision_state_count() + 54);
    for (std::size_t id = 0; id < idx.total_state_count(); ++id) {
        const Prefix p = idx.prefix_of(id);
        CHECK(idx.id_of(p) == id);
        CHECK(idx.level_of(id) == p.length());
    }
}

TEST_CASE("levels partition the id range in construction order") {
    const StateIndex idx(2, 3, 3);
    std::size_t cursor = 0;
    for (std::size_t t = 0; t <= 3; ++t) {
        CHECK(idx.level_begin(t) == cursor);
        cursor += idx.level_count(t);
    }
    CHECK(cursor == idx.total_state_count());
    // Within a level, ids order prefixes by (input, tokens) base-|V| code.
    CHECK(idx.id_of(Prefix{0, {}}) == 0);
    CHECK(idx.id_of(Prefix{1, {}}) == 1);
    CHECK(idx.id_of(Prefix{0, {0}}) == idx.level_begin(1));
    CHECK(idx.id_of(Prefix{0, {1}}) == idx.level_begin(1) + 1);
    CHECK(idx.id_of(Prefix{1, {0}}) == idx.level_begin(1) + 3);
}

TEST_CASE("child ids agree with append-then-lookup") {
    const StateIndex idx(2, 3, 3);
    for (std::size_t id = 0; id < idx.decision_state_count(); ++id) {
        Prefix p = idx.prefix_of(id);
        for (int a = 0; a < 3; ++a) {
            Prefix q = p;
            q.generated.push_back(a);
            CHECK(idx.child(id, a) == idx.id_of(q));
        }
    }
}

TEST_CASE("construction refuses state counts beyond the guard") {
    CHECK_THROWS_AS(StateIndex(2, 50, 10, 1000), CapExceededError);
    CHECK_THROWS_AS(build_state_index(small_vocab(50, 2), 10, 1000),
                    CapExceededError);
}

TEST_CASE("prefix text encoding round trips") {
    const Prefix p{2, {0, 3, 1}};
    CHECK(p.encode() == "2/0/3/1");
    CHECK(Prefix::decode("2/0/3/1") == p);
    const Prefix root{5, {}};
    CHECK(Prefix::decode(root.encode()) == root);
}

TEST_CASE("prefix features are sparse one-hots of the recent context") {
    const FeatureMap fm(2, 3, 4);
    CHECK(fm.prefix_dim() == 2 * (2 + 3 + 1) + 4);
    CHECK(fm.state_action_dim() == 3 * fm.prefix_dim());

    // Exactly three active bits: two context slots plus the length.
    for (const Prefix& p :
         {Prefix{0, {}}, Prefix{1, {2}}, Prefix{0, {0, 1}}, Prefix{1, {2, 2, 0}}}) {
        const numvec f = fm.prefix_features(p);
        REQUIRE(f.size() == fm.prefix_dim());
        std::size_t ones = 0;
        for (double v : f) {
            CHECK((v == 0.0 || v == 1.0));
            if (v == 1.0) ++ones;
        }
        CHECK(ones == 3);
    }
}

TEST_CASE("prefixes differing in visible context get distinct features") {
    const FeatureMap fm(2, 3, 3);
    const std::vector<Prefix> ps = {
        {0, {}}, {1, {}},        // different inputs
        {0, {0}}, {0, {1}},      // different last token
        {0, {0, 1}}, {0, {1, 1}},  // different second-to-last token
        {1, {0}},                // input still inside the context window
    };
    std::set<numvec> seen;
    for (const Prefix& p : ps) seen.insert(fm.prefix_features(p));
    CHECK(seen.size() == ps.size());
}

TEST_CASE("state-action features occupy only the chosen action block") {
    const FeatureMap fm(2, 3, 3);
    const Prefix p{1, {2, 0}};
    const numvec pf = fm.prefix_features(p);
    for (int a = 0; a < 3; ++a) {
        const numvec sa = fm.state_action_features(p, a);
        REQUIRE(sa.size() == 3 * fm.prefix_dim());
        for (std::size_t j = 0; j < sa.size(); ++j) {
            const std::size_t block = j / fm.prefix_dim();
            if (block == std::size_t(a))
                CHECK(sa[j] == pf[j % fm.prefix_dim()]);
            else
                CHECK(sa[j] == 0.0);
        }
    }
}

TEST_CASE("features reject prefixes at or past the horizon") {
    const FeatureMap fm(2, 3, 2);
    CHECK_THROWS_AS(fm.prefix_features(Prefix{0, {1, 1}}), HorizonExceededError);
    CHECK_THROWS_AS(fm.state_action_features(Prefix{0, {1, 1, 0}}, 0),
                    HorizonExceededError);
}
