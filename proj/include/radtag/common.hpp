#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace radtag {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SectionNotFound : Error { using Error::Error; };
struct EmptyCorpus : Error { using Error::Error; };

struct ParseError : Error {
    int line = 0;
    ParseError(const std::string& msg, int line_no)
        : Error(msg + " (line " + std::to_string(line_no) + ")"),
          line(line_no) {}
};

struct UnknownLabel : Error { using Error::Error; };

struct BadPattern : Error {
    int row = 0;
    BadPattern(const std::string& msg, int row_no)
        : Error(msg + " (row " + std::to_string(row_no) + ")"), row(row_no) {}
};
struct UnknownConcept : Error {
    int row = 0;
    UnknownConcept(const std::string& msg, int row_no)
        : Error(msg + " (row " + std::to_string(row_no) + ")"), row(row_no) {}
};

struct EmptyVocabulary : Error { using Error::Error; };
struct TooFewVectors : Error { using Error::Error; };

struct InvalidConfig : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct EmptySequence : Error { using Error::Error; };
struct LabelSpaceMismatch : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct TooFewSamples : Error { using Error::Error; };

struct LengthMismatch : Error { using Error::Error; };
struct EmptyLabelSpace : Error { using Error::Error; };

struct SchemaError : Error {
    std::string column;
    explicit SchemaError(const std::string& col)
        : Error("schema error: column '" + col + "'"), column(col) {}
};
struct ConfigError : Error { using Error::Error; };
struct SpecTooSmall : Error { using Error::Error; };

// Seeded RNG with hand-rolled helpers so sequences do not depend on the
// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform double in [0, 1)
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // unbiased integer in [0, n) via rejection
    size_t index(size_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return static_cast<size_t>(x % n);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace radtag
