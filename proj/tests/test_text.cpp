#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "radtag/common.hpp"
#include "radtag/text.hpp"

using namespace radtag;

namespace {

PreprocessConfig test_config() {
    PreprocessConfig cfg;
    cfg.stopwords = load_stopwords(RADTAG_DATA_DIR "/stopwords_es.txt");
    cfg.section_patterns = {"([\\s\\S]+)"};
    return cfg;
}

}  // namespace

TEST_CASE("normalize_text basics") {
    CHECK(normalize_text("Cambios Crónicos Severos.") ==
          "cambios cronicos severos.");
    CHECK(normalize_text("¿?¡!") == "");
    CHECK(normalize_text("NSG; nº 2.") == "nsg n 2.");
    CHECK(normalize_text("señal aórtica") == "senal aortica");
    CHECK(normalize_text("  a\t b\nc ") == "a b c");
}

TEST_CASE("normalize_text is idempotent") {
    const char* samples[] = {
        "Cambios Crónicos Severos.", "¿?¡!", "NSG; nº 2.",
        "ÁÉÍÓÚ ü ñ Ç", "infiltrado-alveolar  x2.",
    };
    for (const auto* s : samples) {
        const std::string once = normalize_text(s);
        CHECK(normalize_text(once) == once);
    }
}

TEST_CASE("split_sentences") {
    CHECK(split_sentences("a b. c d.") ==
          std::vector<std::string>{"a b", "c d"});
    CHECK(split_sentences("...") == std::vector<std::string>{});
    CHECK(split_sentences("x") == std::vector<std::string>{"x"});
}

TEST_CASE("split output never contains a dot") {
    for (const auto& s : split_sentences("uno. dos tres. . cuatro"))
        CHECK(s.find('.') == std::string::npos);
}

TEST_CASE("tokenize keeps stopword exceptions and stems") {
    auto cfg = test_config();
    CHECK(tokenize_filter_stem("sin cambios", cfg) ==
          std::vector<std::string>{"sin", "cambi"});
    CHECK(tokenize_filter_stem("de la los", cfg) ==
          std::vector<std::string>{});
    CHECK(tokenize_filter_stem("pulmonares", cfg) ==
          std::vector<std::string>{"pulmonar"});
    CHECK(tokenize_filter_stem("no con ni sin", cfg) ==
          std::vector<std::string>{"no", "con", "ni", "sin"});
}

TEST_CASE("no stemmed stopword outside the exception set survives") {
    auto cfg = test_config();
    auto toks = tokenize_filter_stem(
        normalize_text("el paciente de la unidad y sus controles"), cfg);
    for (const auto& t : toks) {
        if (cfg.stopword_exceptions.count(t)) continue;
        // surviving tokens were not on the stopword list pre-stemming
        CHECK(t != "el");
        CHECK(t != "de");
        CHECK(t != "la");
    }
}

TEST_CASE("preprocess_report composes the pipeline") {
    auto cfg = test_config();
    RawReport report{"r1", "p1", "2015-01-01",
                     "cambios pulmonares crónicos severos. signos de "
                     "fibrosis bibasal."};
    auto sentences = preprocess_report(report, cfg);
    REQUIRE(sentences.size() == 2);
    CHECK(sentences[0].tokens ==
          std::vector<std::string>{"cambi", "pulmonar", "cronic", "sever"});
    CHECK(sentences[1].tokens ==
          std::vector<std::string>{"sign", "fibrosis", "bibasal"});
    CHECK(sentences[0].index == 0);
    CHECK(sentences[1].index == 1);
    CHECK(sentences[0].report_id == "r1");
}

TEST_CASE("preprocess drops empty sentences and keeps numerals") {
    auto cfg = test_config();
    CHECK(preprocess_report({"r", "p", "d", "."}, cfg).empty());
    auto out = preprocess_report({"r", "p", "d", "2"}, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].tokens == std::vector<std::string>{"2"});
}

TEST_CASE("section extraction") {
    PreprocessConfig cfg = test_config();
    cfg.section_patterns = {"informe:([\\s\\S]*)", "rx de torax[.:]([\\s\\S]*)"};
    RawReport hit{"r", "p", "d", "Historia. Informe: hay derrame."};
    CHECK(extract_radiography_section(hit, cfg) == " hay derrame.");
    RawReport empty_section{"r", "p", "d", "informe:"};
    CHECK_THROWS_AS(extract_radiography_section(empty_section, cfg),
                    SectionNotFound);
    RawReport no_match{"r", "p", "d", "sin seccion"};
    CHECK_THROWS_AS(extract_radiography_section(no_match, cfg),
                    SectionNotFound);
    RawReport second{"r", "p", "d", "RX de torax: normal."};
    CHECK(extract_radiography_section(second, cfg) == " normal.");
}

TEST_CASE("corpus_stats counts and pareto") {
    auto cfg = test_config();
    std::vector<CleanSentence> corpus;
    auto add = [&](const std::string& text) {
        RawReport r{"r" + std::to_string(corpus.size()), "p", "d", text};
        for (auto& cs : preprocess_report(r, cfg)) corpus.push_back(cs);
    };
    add("cardiomegalia global.");
    add("cardiomegalia global.");
    add("cardiomegalia global.");
    add("derrame pleural derecho.");
    auto st = corpus_stats(corpus);
    CHECK(st.sentence_count == 4);
    CHECK(st.unique_sentences.size() == 2);
    CHECK(st.unique_sentences[0].second == 3);
    CHECK(st.pareto.front() == 3);
    CHECK(st.pareto.back() == 4);
    for (size_t i = 1; i < st.pareto.size(); ++i)
        CHECK(st.pareto[i] >= st.pareto[i - 1]);

    std::vector<CleanSentence> single;
    CleanSentence cs;
    cs.report_id = "r";
    cs.tokens = {"a", "b", "c", "d", "e"};
    cs.raw = "a b c d e";
    single.push_back(cs);
    auto st1 = corpus_stats(single);
    CHECK(st1.mean_tokens == doctest::Approx(5.0));
    CHECK(st1.median_tokens == doctest::Approx(5.0));

    CHECK_THROWS_AS(corpus_stats({}), EmptyCorpus);
}

TEST_CASE("stopword file has the expected size") {
    auto words = load_stopwords(RADTAG_DATA_DIR "/stopwords_es.txt");
    // the accent-folded, deduplicated NLTK Spanish list
    CHECK(words.size() == 306);
    CHECK(words.count("sin"));
    CHECK(words.count("no"));
    CHECK(words.count("ni"));
    CHECK(words.count("con"));
    CHECK(words.count("de"));
}
