#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "radtag/snowball_es.hpp"

using radtag::stem_spanish;

TEST_CASE("matches the frozen stemmer oracle") {
    std::ifstream in(RADTAG_TEST_DATA_DIR "/snowball_oracle.tsv");
    REQUIRE(in.good());
    std::string line;
    size_t checked = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        REQUIRE(tab != std::string::npos);
        const std::string word = line.substr(0, tab);
        const std::string expected = line.substr(tab + 1);
        CHECK_MESSAGE(stem_spanish(word) == expected, "word: ", word);
        ++checked;
    }
    CHECK(checked > 300);
}

TEST_CASE("published report stems") {
    // the stems visible in the published dataset example row
    CHECK(stem_spanish("cambios") == "cambi");
    CHECK(stem_spanish("pulmonares") == "pulmonar");
    CHECK(stem_spanish("cronicos") == "cronic");
    CHECK(stem_spanish("severos") == "sever");
    CHECK(stem_spanish("signos") == "sign");
    CHECK(stem_spanish("fibrosis") == "fibrosis");
    CHECK(stem_spanish("bibasal") == "bibasal");
    CHECK(stem_spanish("sutil") == "sutil");
    CHECK(stem_spanish("infiltrado") == "infiltr");
    CHECK(stem_spanish("pseudonodular") == "pseudonodul");
    CHECK(stem_spanish("milimetrico") == "milimetr");
    CHECK(stem_spanish("vidrio") == "vidri");
    CHECK(stem_spanish("deslustrado") == "deslustr");
    CHECK(stem_spanish("localizado") == "localiz");
    CHECK(stem_spanish("base") == "bas");
    CHECK(stem_spanish("cifosis") == "cifosis");
    CHECK(stem_spanish("severa") == "sever");
}

TEST_CASE("short and degenerate inputs") {
    CHECK(stem_spanish("") == "");
    CHECK(stem_spanish("a") == "a");
    CHECK(stem_spanish("de") == "de");
    CHECK(stem_spanish("2") == "2");
    CHECK(stem_spanish("c5") == "c5");
}

TEST_CASE("suffix families") {
    CHECK(stem_spanish("aplicaciones") == "aplic");
    CHECK(stem_spanish("enfermedades") == "enfermedad");
    CHECK(stem_spanish("utilidad") == "util");
    CHECK(stem_spanish("rapidamente") == "rapid");
    CHECK(stem_spanish("instituciones") == "institu");
    CHECK(stem_spanish("observandose") == "observ");
    CHECK(stem_spanish("significativas") == "signific");
}
