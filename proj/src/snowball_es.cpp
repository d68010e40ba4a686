#include "radtag/snowball_es.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <string_view>
#include <vector>

namespace radtag {
namespace {

bool is_vowel(char c) {
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

// region after the first non-vowel following a vowel, from `from`
size_t region_after(std::string_view w, size_t from) {
    for (size_t i = from; i + 1 < w.size(); ++i) {
        if (is_vowel(w[i]) && !is_vowel(w[i + 1])) return i + 2;
    }
    return w.size();
}

size_t rv_start(std::string_view w) {
    const size_t n = w.size();
    if (n < 3) return n;
    if (!is_vowel(w[1])) {
        for (size_t i = 2; i < n; ++i)
            if (is_vowel(w[i])) return i + 1;
        return n;
    }
    if (is_vowel(w[0]) && is_vowel(w[1])) {
        for (size_t i = 2; i < n; ++i)
            if (!is_vowel(w[i])) return i + 1;
        return n;
    }
    return 3;
}

bool ends_with(std::string_view w, std::string_view s) {
    return w.size() >= s.size() &&
           w.compare(w.size() - s.size(), s.size(), s) == 0;
}

bool in_region(std::string_view w, std::string_view suffix, size_t region) {
    return w.size() - suffix.size() >= region;
}

// longest suffix of w drawn from `list` and lying entirely within `region`
std::string_view longest_in(std::string_view w,
                            const std::vector<std::string_view>& list,
                            size_t region) {
    std::string_view best;
    for (auto s : list) {
        if (s.size() > best.size() && ends_with(w, s) &&
            in_region(w, s, region)) {
            best = s;
        }
    }
    return best;
}

// longest suffix of w drawn from `list` (whole-word search)
std::string_view longest_of(std::string_view w,
                            const std::vector<std::string_view>& list) {
    std::string_view best;
    for (auto s : list) {
        if (s.size() > best.size() && ends_with(w, s)) best = s;
    }
    return best;
}

const std::vector<std::string_view> kPronouns = {
    "me", "se", "sela", "selo", "selas", "selos",
    "la", "le", "lo", "las", "les", "los", "nos"};

const std::vector<std::string_view> kStep0Endings = {"ando", "iendo", "ar",
                                                     "er", "ir"};

const std::vector<std::string_view> kG1 = {
    "anza", "anzas", "ico", "ica", "icos", "icas", "ismo", "ismos",
    "able", "ables", "ible", "ibles", "ista", "istas", "oso", "osa",
    "osos", "osas", "amiento", "amientos", "imiento", "imientos"};
const std::vector<std::string_view> kG2 = {
    "adora", "ador", "adoras", "adores", "aciones",
    "ante", "antes", "ancia", "ancias"};
const std::vector<std::string_view> kG4 = {"uciones"};
const std::vector<std::string_view> kG5 = {"encia", "encias"};
const std::vector<std::string_view> kG8 = {"idad", "idades"};
const std::vector<std::string_view> kG9 = {"iva", "ivo", "ivas", "ivos"};

const std::vector<std::string_view> kStep2a = {
    "ya", "ye", "yan", "yen", "yeron", "yendo", "yo", "yas", "yes", "yais",
    "yamos"};

const std::vector<std::string_view> kStep2bGu = {"en", "es", "emos"};
const std::vector<std::string_view> kStep2bPlain = {
    "aremos", "eremos", "iremos",
    "aba", "ada", "ida", "ara", "iera", "ad", "ed", "id", "ase", "iese",
    "aste", "iste", "an", "aban", "aran", "ieran", "asen", "iesen", "aron",
    "ieron", "ado", "ido", "ando", "iendo", "ar", "er", "ir", "as", "abas",
    "adas", "idas", "aras", "ieras", "ases", "ieses", "abais", "arais",
    "ierais", "aseis", "ieseis", "asteis", "isteis", "ados", "idos", "amos",
    "imos"};

const std::vector<std::string_view> kStep3 = {"os", "a", "o", "e"};

void chop(std::string& w, size_t n) { w.erase(w.size() - n); }

}  // namespace

std::string stem_spanish(const std::string& input) {
    std::string w = input;
    const size_t r1 = region_after(w, 0);
    const size_t r2 = region_after(w, r1);
    const size_t rv = rv_start(w);

    // Step 0: attached pronoun
    {
        std::string_view pron = longest_in(w, kPronouns, rv);
        if (!pron.empty()) {
            std::string_view base(w.data(), w.size() - pron.size());
            std::string_view ending = longest_in(base, kStep0Endings, rv);
            if (!ending.empty()) {
                chop(w, pron.size());
            } else if (ends_with(base, "yendo") &&
                       in_region(base, "yendo", rv) &&
                       base.size() >= 6 && base[base.size() - 6] == 'u') {
                chop(w, pron.size());
            }
        }
    }

    // Step 1: standard suffix removal (longest match across all groups,
    // then that group's condition; no fallback when the condition fails)
    bool removed = false;
    {
        enum class Group { None, G1, G2, G4, G5, G6, G7, G8, G9 };
        std::string_view best;
        Group mode = Group::None;
        auto consider = [&](const std::vector<std::string_view>& list,
                            Group g) {
            std::string_view s = longest_of(w, list);
            if (s.size() > best.size()) {
                best = s;
                mode = g;
            }
        };
        consider(kG1, Group::G1);
        consider(kG2, Group::G2);
        consider(kG4, Group::G4);
        consider(kG5, Group::G5);
        if (ends_with(w, "amente") && 6 > best.size()) {
            best = "amente";
            mode = Group::G6;
        }
        if (ends_with(w, "mente") && 5 > best.size()) {
            best = "mente";
            mode = Group::G7;
        }
        consider(kG8, Group::G8);
        consider(kG9, Group::G9);

        auto in_r2 = [&](std::string_view s) { return in_region(w, s, r2); };
        switch (mode) {
            case Group::None:
                break;
            case Group::G1:
                if (in_r2(best)) {
                    chop(w, best.size());
                    removed = true;
                }
                break;
            case Group::G2:
                if (in_r2(best)) {
                    chop(w, best.size());
                    removed = true;
                    if (ends_with(w, "ic") && in_region(w, "ic", r2))
                        chop(w, 2);
                }
                break;
            case Group::G4:
                if (in_r2(best)) {
                    chop(w, best.size());
                    w += 'u';
                    removed = true;
                }
                break;
            case Group::G5:
                if (in_r2(best)) {
                    chop(w, best.size());
                    w += "ente";
                    removed = true;
                }
                break;
            case Group::G6:
                if (in_region(w, best, r1)) {
                    chop(w, best.size());
                    removed = true;
                    if (ends_with(w, "iv") && in_region(w, "iv", r2)) {
                        chop(w, 2);
                        if (ends_with(w, "at") && in_region(w, "at", r2))
                            chop(w, 2);
                    } else {
                        for (std::string_view p : {"os", "ic", "ad"}) {
                            if (ends_with(w, p) && in_region(w, p, r2)) {
                                chop(w, 2);
                                break;
                            }
                        }
                    }
                }
                break;
            case Group::G7:
                if (in_r2(best)) {
                    chop(w, best.size());
                    removed = true;
                    for (std::string_view p : {"ante", "able", "ible"}) {
                        if (ends_with(w, p) && in_region(w, p, r2)) {
                            chop(w, p.size());
                            break;
                        }
                    }
                }
                break;
            case Group::G8:
                if (in_r2(best)) {
                    chop(w, best.size());
                    removed = true;
                    for (std::string_view p : {"abil", "ic", "iv"}) {
                        if (ends_with(w, p) && in_region(w, p, r2)) {
                            chop(w, p.size());
                            break;
                        }
                    }
                }
                break;
            case Group::G9:
                if (in_r2(best)) {
                    chop(w, best.size());
                    removed = true;
                    if (ends_with(w, "at") && in_region(w, "at", r2))
                        chop(w, 2);
                }
                break;
        }
    }

    // Step 2a: verb suffixes beginning y (only if step 1 removed nothing)
    if (!removed) {
        bool did_2a = false;
        std::string_view s = longest_in(w, kStep2a, rv);
        if (!s.empty() && w.size() > s.size() &&
            w[w.size() - s.size() - 1] == 'u') {
            chop(w, s.size());
            did_2a = true;
        }
        // Step 2b: other verb suffixes (only if step 2a removed nothing)
        if (!did_2a) {
            std::string_view gu = longest_in(w, kStep2bGu, rv);
            std::string_view plain = longest_in(w, kStep2bPlain, rv);
            if (!gu.empty() && gu.size() > plain.size()) {
                chop(w, gu.size());
                if (ends_with(w, "gu")) chop(w, 1);
            } else if (!plain.empty()) {
                chop(w, plain.size());
            }
        }
    }

    // Step 3: residual suffix
    {
        std::string_view s = longest_in(w, kStep3, rv);
        if (!s.empty()) {
            bool was_e = (s == "e");
            chop(w, s.size());
            if (was_e && ends_with(w, "gu") && in_region(w, "u", rv))
                chop(w, 1);
        }
    }

    return w;
}

}  // namespace radtag
