#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "radtag/common.hpp"
#include "radtag/locextract.hpp"

using namespace radtag;

namespace {

const TaxonomyTree& locations() {
    static TaxonomyTree t = load_tree(RADTAG_DATA_DIR "/locations.tree",
                                      TaxonomyTree::Kind::locations);
    return t;
}

const std::vector<LocationRule>& rules() {
    static std::vector<LocationRule> r =
        load_rules(RADTAG_DATA_DIR "/location_rules.tsv", locations());
    return r;
}

}  // namespace

TEST_CASE("shipped rule table compiles against the locations tree") {
    CHECK(rules().size() == 109);
    for (const auto& r : rules()) CHECK(locations().contains(r.concept_label));
}

TEST_CASE("rule errors") {
    CHECK_THROWS_AS(compile_rules("(unbalanced\tright\n", locations()),
                    BadPattern);
    CHECK_THROWS_AS(compile_rules("\\bfoo\tno such place\n", locations()),
                    UnknownConcept);
    CHECK(compile_rules("", locations()).empty());
}

TEST_CASE("specific family match suppresses the generic one") {
    auto out = extract_locations("pinzamient sen costofren derech", rules());
    CHECK(out == std::vector<std::string>{"right costophrenic angle"});
}

TEST_CASE("single-stem matches") {
    CHECK(extract_locations("cardiomegali", rules()) ==
          std::vector<std::string>{"cardiac"});
    CHECK(extract_locations("sign fibrosis", rules()).empty());
    CHECK(extract_locations("bibasal", rules()) ==
          std::vector<std::string>{"basal bilateral"});
}

TEST_CASE("output invariant under trailing whitespace") {
    CHECK(extract_locations("cardiomegali  ", rules()) ==
          extract_locations("cardiomegali", rules()));
    CHECK(extract_locations("pinzamient sen costofren derech   ", rules()) ==
          extract_locations("pinzamient sen costofren derech", rules()));
}

TEST_CASE("no emitted match span contains another") {
    const char* sentences[] = {
        "pinzamient sen costofren derech",
        "fractur costal anterior",
        "lobul sup izq",
        "cisur menor engros",
        "hipocondri derech",
        "difus bilateral",
        "amb camp pulmonar",
        "cardiofren obliter",
    };
    for (const auto* s : sentences) {
        auto matches = match_locations(s, rules());
        for (const auto& a : matches)
            for (const auto& b : matches) {
                if (&a == &b) continue;
                const bool contains =
                    a.begin <= b.begin && b.end <= a.end &&
                    (a.end - a.begin) > (b.end - b.begin);
                CHECK(!contains);
            }
    }
}

TEST_CASE("sentence-start anchoring of the pulmonary artery rule") {
    CHECK(extract_locations("pulmonar", rules()) ==
          std::vector<std::string>{"pulmonary artery"});
    // not at sentence start: no match
    CHECK(extract_locations("cambi pulmonar cronic sever", rules()).empty());
}

TEST_CASE("attach_locations") {
    CHECK(attach_locations({"pulmonary fibrosis"}, "sign fibrosis bibasal",
                           rules()) ==
          std::vector<std::string>{"pulmonary fibrosis",
                                   "loc basal bilateral"});
    CHECK(attach_locations({"chronic changes"}, "cambi cronic", rules()) ==
          std::vector<std::string>{"chronic changes"});
    CHECK(attach_locations({}, "bibasal", rules()).empty());
    // multi-label sentence: labels first, then the shared locations
    CHECK(attach_locations({"pseudonodule", "ground glass pattern"},
                           "sutil infiltr pseudonodul vidri deslustr "
                           "localiz bas",
                           rules()) ==
          std::vector<std::string>{"pseudonodule", "ground glass pattern",
                                   "loc basal"});
}

TEST_CASE("duplicate concepts deduplicate preserving first occurrence") {
    auto out = extract_locations("derram pleural derech y pleural izq",
                                 rules());
    size_t pleural_count = 0;
    for (const auto& c : out)
        if (c == "pleural") ++pleural_count;
    CHECK(pleural_count == 1);
}

TEST_CASE("emitted concepts resolve in the locations taxonomy") {
    const char* sentences[] = {
        "derram pleural bibasal", "infiltr lobul sup derech",
        "fractur costal posterior", "lesion hili bilateral",
        "d12 acun",
    };
    for (const auto* s : sentences)
        for (const auto& c : extract_locations(s, rules()))
            CHECK(locations().contains(c));
}
