#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "lookaside/landmark_parser.hpp"
#include "lookaside/slkb.hpp"
#include "oracles.hpp"

using namespace lookaside;
using namespace lookaside::slkb;

namespace {

namespace fs = std::filesystem;

fs::path scratch_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "lookaside_slkb_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string random_phrase(std::mt19937_64& rng, std::set<std::string>& used) {
    static const std::vector<std::string> adjectives = {
        "red", "blue", "gray", "green", "tall", "short", "old", "new", "rusty", "glass",
        "brick", "metal", "stone", "round", "square", "narrow", "wide", "dark", "pale", "striped"};
    static const std::vector<std::string> nouns = {
        "tower", "bridge", "house", "barn", "silo", "antenna", "billboard", "crane", "dome",
        "mailbox", "fountain", "statue", "chimney", "windmill", "gazebo", "hangar", "pier",
        "tank", "arch", "kiosk"};
    while (true) {
        std::string phrase = adjectives[static_cast<size_t>(uniform_int(rng, 0, 19))] + " " +
                             nouns[static_cast<size_t>(uniform_int(rng, 0, 19))] + " " +
                             std::to_string(uniform_int(rng, 0, 999));
        if (used.insert(phrase).second) return phrase;
    }
}

geom::WorldPoint random_position(std::mt19937_64& rng) {
    return {uniform_in(rng, -500, 500), uniform_in(rng, -500, 500), uniform_in(rng, 0, 80)};
}

}  // namespace

TEST_CASE("embed: deterministic and self-similar") {
    NgramHashEmbedder embedder;
    const auto a = embedder.embed("gray metal tower");
    const auto b = embedder.embed("gray metal tower");
    CHECK(a == b);
    CHECK(cosine_similarity(a, b) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.size() == NgramHashEmbedder::kDimension);
}

TEST_CASE("embed: near phrases beat unrelated phrases") {
    NgramHashEmbedder embedder;
    const auto bridge = embedder.embed("blue bridge");
    const double near = cosine_similarity(bridge, embedder.embed("blue bridge nearby"));
    const double far = cosine_similarity(bridge, embedder.embed("red mailbox"));
    CHECK(near > far);
}

TEST_CASE("embed: empty text is an error") {
    NgramHashEmbedder embedder;
    CHECK_THROWS_AS(embedder.embed(""), Error);
    CHECK_THROWS_AS(embedder.embed("   "), Error);
}

TEST_CASE("upsert: new key, exact-string merge, cosine-decided insert") {
    KnowledgeBase kb;
    kb.upsert({"blue bridge", {1, 2, 3}, 0.9, "t0"});
    CHECK(kb.size() == 1);
    CHECK(kb.entries().at("blue bridge").size() == 1);

    kb.upsert({"blue bridge", {4, 5, 6}, 0.8, "t1"});
    CHECK(kb.size() == 1);
    CHECK(kb.entries().at("blue bridge").size() == 2);

    // The cosine between these two decides insert-vs-merge; verify against the
    // directly computed value.
    NgramHashEmbedder embedder;
    const double sim =
        cosine_similarity(embedder.embed("blue bridge"), embedder.embed("red mailbox"));
    kb.upsert({"red mailbox", {7, 8, 9}, 0.8, "t2"});
    if (sim < kDefaultMergeThreshold) {
        CHECK(kb.size() == 2);
    } else {
        CHECK(kb.size() == 1);
    }
    CHECK(sim < kDefaultMergeThreshold);  // sanity for the default provider
}

TEST_CASE("upsert: near-duplicate description merges under the best key") {
    NgramHashEmbedder embedder;
    const double sim =
        cosine_similarity(embedder.embed("blue bridge"), embedder.embed("blue bridge nearby"));
    KnowledgeBase kb;
    kb.upsert({"blue bridge", {1, 2, 3}, 0.9, ""});
    kb.upsert({"blue bridge nearby", {2, 2, 3}, 0.9, ""}, sim - 0.01);
    CHECK(kb.size() == 1);  // threshold just below the true similarity forces the merge
    CHECK(kb.entries().at("blue bridge").size() == 2);
}

TEST_CASE("upsert: validation") {
    KnowledgeBase kb;
    CHECK_THROWS_AS(kb.upsert({"", {0, 0, 0}, 1.0, ""}), Error);
    CHECK_THROWS_AS(kb.upsert({"x", {0, 0, 0}, 1.5, ""}), Error);
    CHECK_THROWS_AS(kb.upsert({"x", {0, 0, 0}, 0.5, ""}, 0.0), Error);
}

TEST_CASE("prune_positions: NMS keeps the confident one inside the radius") {
    KnowledgeBase kb;
    kb.upsert({"water tower", {0, 0, 0}, 0.8, ""});
    kb.upsert({"water tower", {5, 0, 0}, 0.9, ""});
    kb.prune_positions(20.0);
    const auto& kept = kb.entries().at("water tower");
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].confidence == doctest::Approx(0.9));
    CHECK(kept[0].position.x == doctest::Approx(5.0));
}

TEST_CASE("prune_positions: far-apart positions are both kept; singleton unchanged") {
    KnowledgeBase kb;
    kb.upsert({"water tower", {0, 0, 0}, 0.8, ""});
    kb.upsert({"water tower", {25, 0, 0}, 0.9, ""});
    kb.upsert({"lone shed", {1, 1, 1}, 0.5, ""});
    kb.prune_positions(20.0);
    CHECK(kb.entries().at("water tower").size() == 2);
    CHECK(kb.entries().at("lone shed").size() == 1);
}

TEST_CASE("prune_positions: idempotent, pairwise separated, keeps the per-key max confidence") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 100; ++it) {
        KnowledgeBase kb;
        std::set<std::string> used;
        const int keys = uniform_int(rng, 1, 6);
        std::map<std::string, double> max_conf;
        for (int k = 0; k < keys; ++k) {
            const std::string desc = random_phrase(rng, used);
            const int positions = uniform_int(rng, 1, 12);
            for (int p = 0; p < positions; ++p) {
                const double conf = uniform_in(rng, 0.0, 1.0);
                kb.upsert({desc, random_position(rng), conf, ""}, 1.0);
                auto [iter, inserted] = max_conf.try_emplace(desc, conf);
                if (!inserted) iter->second = std::max(iter->second, conf);
            }
        }
        const double radius = uniform_in(rng, 5.0, 120.0);
        KnowledgeBase once = kb;
        once.prune_positions(radius);
        KnowledgeBase twice = once;
        twice.prune_positions(radius);
        CHECK(once == twice);

        for (const auto& [desc, positions] : once.entries()) {
            for (size_t i = 0; i < positions.size(); ++i) {
                for (size_t j = i + 1; j < positions.size(); ++j) {
                    CHECK(geom::distance(positions[i].position, positions[j].position) > radius);
                }
            }
            CHECK(positions.size() <= kb.entries().at(desc).size());
            double best = 0.0;
            for (const auto& p : positions) best = std::max(best, p.confidence);
            CHECK(best == doctest::Approx(max_conf.at(desc)));
        }
    }
}

TEST_CASE("retrieve: exact key is the argmax with similarity 1") {
    KnowledgeBase kb;
    kb.upsert({"blue bridge", {1, 2, 3}, 1.0, ""});
    kb.upsert({"gray tower", {4, 5, 6}, 1.0, ""});
    const auto out = kb.retrieve({"blue bridge"});
    REQUIRE(out.size() == 1);
    CHECK(out[0].matched_description == "blue bridge");
    CHECK(out[0].similarity == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(out[0].positions.size() == 1);
    CHECK(out[0].positions[0].x == doctest::Approx(1.0));
}

TEST_CASE("retrieve: equals the linear-scan argmax oracle on randomized KBs") {
    std::mt19937_64 rng(29);
    NgramHashEmbedder embedder;
    for (int it = 0; it < 40; ++it) {
        KnowledgeBase kb;
        std::set<std::string> used;
        std::vector<std::string> keys;
        const int n = uniform_int(rng, 5, 60);
        for (int k = 0; k < n; ++k) {
            const std::string desc = random_phrase(rng, used);
            keys.push_back(desc);
            kb.upsert({desc, random_position(rng), 1.0, ""}, 1.0);
        }
        for (int q = 0; q < 5; ++q) {
            std::string query;
            switch (uniform_int(rng, 0, 2)) {
                case 0: query = keys[static_cast<size_t>(uniform_int(rng, 0, n - 1))]; break;
                case 1:
                    query = "nearby " + keys[static_cast<size_t>(uniform_int(rng, 0, n - 1))];
                    break;
                default: {
                    std::set<std::string> fresh;
                    query = random_phrase(rng, fresh);
                }
            }
            const auto got = kb.retrieve({query});
            CHECK(got[0].matched_description == oracles::argmax_key(embedder, keys, query));
        }
    }
}

TEST_CASE("retrieve: preserves instruction order and length") {
    KnowledgeBase kb;
    kb.upsert({"alpha arch", {1, 0, 0}, 1.0, ""});
    kb.upsert({"beta barn", {2, 0, 0}, 1.0, ""});
    kb.upsert({"gamma gate", {3, 0, 0}, 1.0, ""});
    const std::vector<std::string> query = {"gamma gate", "alpha arch", "beta barn", "gamma gate"};
    const auto out = kb.retrieve(query);
    REQUIRE(out.size() == query.size());
    for (size_t i = 0; i < query.size(); ++i) {
        CHECK(out[i].instruction_landmark == query[i]);
        CHECK(out[i].matched_description == query[i]);
    }
}

TEST_CASE("retrieve: empty KB is an error") {
    KnowledgeBase kb;
    CHECK_THROWS_WITH_AS(kb.retrieve({"anything"}), "knowledge base empty", Error);
}

TEST_CASE("parse_landmarks: prepositional and follow/until forms") {
    const auto a = parse_landmarks("Turn left on Maple Street, then right at the bank.");
    REQUIRE(a.size() == 2);
    CHECK(a[0] == "Maple Street");
    CHECK(a[1] == "bank");

    const auto b = parse_landmarks("Follow Highway 1 until the second traffic light.");
    REQUIRE(b.size() == 2);
    CHECK(b[0] == "Highway 1");
    CHECK(b[1] == "traffic light");
}

TEST_CASE("parse_landmarks: verbalizer-shaped instructions round-trip") {
    const auto got = parse_landmarks(
        "Turn left 30 degrees, move forward 10 meters and descend 4 meters to reach gray metal "
        "tower, then turn right 45 degrees and move toward the blue bridge.");
    REQUIRE(got.size() == 2);
    CHECK(got[0] == "gray metal tower");
    CHECK(got[1] == "blue bridge");
}

TEST_CASE("parse_landmarks: direction-only text yields no landmarks") {
    CHECK(parse_landmarks("Go straight ahead and keep to your right.").empty());
    CHECK_THROWS_AS(parse_landmarks(""), Error);
}

TEST_CASE("retrieve: concurrent readers agree with a serial scan") {
    KnowledgeBase kb;
    std::set<std::string> used;
    std::mt19937_64 rng(37);
    std::vector<std::string> keys;
    for (int i = 0; i < 40; ++i) {
        const auto desc = random_phrase(rng, used);
        keys.push_back(desc);
        kb.upsert({desc, random_position(rng), 1.0, ""}, 1.0);
    }
    std::vector<std::string> queries;
    for (int q = 0; q < 16; ++q)
        queries.push_back("near " + keys[static_cast<size_t>(uniform_int(rng, 0, 39))]);

    std::vector<std::string> expected;
    for (const auto& q : queries) expected.push_back(kb.retrieve({q})[0].matched_description);

    std::vector<std::string> got(queries.size());
    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&, t] {
            for (size_t i = static_cast<size_t>(t); i < queries.size(); i += 4) {
                got[i] = kb.retrieve({queries[i]})[0].matched_description;
            }
        });
    }
    for (auto& w : workers) w.join();
    CHECK(got == expected);
}

TEST_CASE("save/load: empty KB round-trip") {
    KnowledgeBase kb;
    const auto path = scratch_file("empty.slkb");
    kb.save(path);
    CHECK(KnowledgeBase::load(path) == kb);
}

TEST_CASE("save/load: randomized KB round-trips exactly") {
    std::mt19937_64 rng(31);
    KnowledgeBase kb;
    std::set<std::string> used;
    for (int i = 0; i < 200; ++i) {
        kb.upsert({random_phrase(rng, used), random_position(rng), uniform_in(rng, 0, 1), ""}, 1.0);
    }
    // Grow some keys to multiple positions.
    for (const auto& desc : used) {
        if (uniform_unit(rng) < 0.5) kb.upsert({desc, random_position(rng), uniform_in(rng, 0, 1), ""});
    }
    const auto path = scratch_file("random.slkb");
    kb.save(path);
    const auto loaded = KnowledgeBase::load(path);
    CHECK(loaded == kb);

    // The reload of a re-save matches byte for byte.
    const auto path2 = scratch_file("random2.slkb");
    loaded.save(path2);
    std::ifstream f1(path), f2(path2);
    const std::string c1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string c2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(c1 == c2);
}

TEST_CASE("load: malformed line is reported with its line number") {
    const auto path = scratch_file("broken.slkb");
    {
        std::ofstream f(path);
        f << R"({"slkb_version": 1, "embedding": "ngram-256/v1"})" << "\n";
        f << R"({"desc": "blue bridge", "pts": [{"x": 1.0, "y": 2.0, "z": 3.0, "c": 1.0}]})" << "\n";
        f << R"({"desc": "torn line", "pts": [{"x": 1.)" << "\n";
    }
    try {
        KnowledgeBase::load(path);
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("load: version and provider mismatches are errors") {
    const auto v2 = scratch_file("v2.slkb");
    {
        std::ofstream f(v2);
        f << R"({"slkb_version": 2, "embedding": "ngram-256/v1"})" << "\n";
    }
    CHECK_THROWS_AS(KnowledgeBase::load(v2), Error);

    const auto other = scratch_file("other.slkb");
    {
        std::ofstream f(other);
        f << R"({"slkb_version": 1, "embedding": "someone-else/v9"})" << "\n";
    }
    CHECK_THROWS_AS(KnowledgeBase::load(other), Error);
}
