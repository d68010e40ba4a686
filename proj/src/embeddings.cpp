#include "radtag/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace radtag {
namespace {

using nlohmann::json;

constexpr size_t kUnigramTableSize = 1 << 20;

struct Vocab {
    std::vector<std::string> tokens;
    std::map<std::string, size_t> index;
    std::vector<long long> freq;
    long long total = 0;
};

Vocab build_vocab(const TokenizedCorpus& corpus, int min_count) {
    std::map<std::string, long long> counts;
    for (const auto& sentence : corpus)
        for (const auto& tok : sentence) ++counts[tok];
    Vocab v;
    for (const auto& [tok, c] : counts) {
        if (c < min_count) continue;
        v.index[tok] = v.tokens.size();
        v.tokens.push_back(tok);
        v.freq.push_back(c);
        v.total += c;
    }
    return v;
}

// negative-sampling table over unigram frequency ^ 0.75
std::vector<uint32_t> build_unigram_table(const std::vector<long long>& freq) {
    std::vector<uint32_t> table;
    table.reserve(kUnigramTableSize);
    double denom = 0.0;
    for (long long f : freq) denom += std::pow(static_cast<double>(f), 0.75);
    size_t word = 0;
    double cum = std::pow(static_cast<double>(freq.empty() ? 1 : freq[0]),
                          0.75) /
                 denom;
    for (size_t i = 0; i < kUnigramTableSize; ++i) {
        table.push_back(static_cast<uint32_t>(word));
        const double progress =
            static_cast<double>(i + 1) / static_cast<double>(kUnigramTableSize);
        if (progress > cum && word + 1 < freq.size()) {
            ++word;
            cum += std::pow(static_cast<double>(freq[word]), 0.75) / denom;
        }
    }
    return table;
}

double sigmoid_stable(double x) {
    if (x > 30.0) return 1.0;
    if (x < -30.0) return 0.0;
    return 1.0 / (1.0 + std::exp(-x));
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

void write_u64(std::ostream& out, uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = (v >> (8 * i)) & 0xFF;
    out.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw Error("truncated model file");
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_vec_f32(std::ostream& out, const std::vector<double>& v) {
    for (double x : v) {
        float f = static_cast<float>(x);
        uint32_t bits;
        std::memcpy(&bits, &f, 4);
        unsigned char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = (bits >> (8 * i)) & 0xFF;
        out.write(reinterpret_cast<const char*>(buf), 4);
    }
}

std::vector<double> read_vec_f32(std::istream& in, size_t n) {
    std::vector<double> v(n);
    for (size_t i = 0; i < n; ++i) {
        unsigned char buf[4];
        in.read(reinterpret_cast<char*>(buf), 4);
        if (!in) throw Error("truncated model file");
        uint32_t bits = 0;
        for (int j = 0; j < 4; ++j)
            bits |= static_cast<uint32_t>(buf[j]) << (8 * j);
        float f;
        std::memcpy(&f, &bits, 4);
        v[i] = static_cast<double>(f);
    }
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const uint64_t n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw Error("truncated model file");
    return s;
}

}  // namespace

void EmbeddingTrainConfig::validate() const {
    if (dim <= 0 || lr <= 0.0 || window <= 0 || epochs <= 0 ||
        min_count <= 0 || negatives <= 0 || subsample_threshold <= 0.0 ||
        ngram_min <= 0 || ngram_max < ngram_min || bucket_count == 0)
        throw InvalidConfig("embedding config fields must be positive");
}

uint64_t ngram_hash(const std::string& ngram) {
    uint64_t h = 1469598103934665603ULL;  // FNV-1a 64-bit
    for (unsigned char c : ngram) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<uint64_t> SubwordEmbeddingModel::token_ngram_buckets(
    const std::string& token) const {
    const std::string decorated = "<" + token + ">";
    std::vector<uint64_t> out;
    const size_t n = decorated.size();
    for (size_t len = static_cast<size_t>(config.ngram_min);
         len <= static_cast<size_t>(config.ngram_max); ++len) {
        if (len > n) break;
        for (size_t start = 0; start + len <= n; ++start)
            out.push_back(ngram_hash(decorated.substr(start, len)) %
                          config.bucket_count);
    }
    return out;
}

std::vector<double> SubwordEmbeddingModel::embed_token(
    const std::string& token) const {
    std::vector<double> acc(static_cast<size_t>(config.dim), 0.0);
    size_t parts = 0;
    auto it = vocab_index.find(token);
    if (it != vocab_index.end()) {
        const auto& wv = word_vectors[it->second];
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += wv[i];
        ++parts;
    }
    for (uint64_t bucket : token_ngram_buckets(token)) {
        auto nit = ngram_vectors.find(bucket);
        if (nit != ngram_vectors.end()) {
            for (size_t i = 0; i < acc.size(); ++i) acc[i] += nit->second[i];
        }
        ++parts;  // untouched buckets contribute a zero vector
    }
    if (parts == 0) return acc;
    for (double& x : acc) x /= static_cast<double>(parts);
    return acc;
}

SubwordEmbeddingModel train_subword_embeddings(const TokenizedCorpus& corpus,
                                               const EmbeddingTrainConfig& cfg,
                                               uint64_t seed) {
    cfg.validate();
    Vocab vocab = build_vocab(corpus, cfg.min_count);
    if (vocab.tokens.empty())
        throw EmptyVocabulary("no token reaches min_count");

    SubwordEmbeddingModel model;
    model.config = cfg;
    model.vocab = vocab.tokens;
    model.vocab_index = vocab.index;
    model.frequencies = vocab.freq;

    const size_t dim = static_cast<size_t>(cfg.dim);
    Rng rng(seed);

    // input vectors: words uniform, n-gram buckets zero until touched
    model.word_vectors.assign(vocab.tokens.size(), {});
    for (auto& wv : model.word_vectors) {
        wv.resize(dim);
        for (double& x : wv)
            x = rng.uniform(-0.5 / static_cast<double>(dim),
                            0.5 / static_cast<double>(dim));
    }
    // output (context) vectors, zero-initialized as in word2vec
    std::vector<std::vector<double>> out_vectors(vocab.tokens.size(),
                                                 std::vector<double>(dim, 0.0));

    // per-word n-gram buckets, resolved once
    std::vector<std::vector<uint64_t>> word_buckets(vocab.tokens.size());
    for (size_t w = 0; w < vocab.tokens.size(); ++w)
        word_buckets[w] = model.token_ngram_buckets(vocab.tokens[w]);

    const std::vector<uint32_t> unigram = build_unigram_table(vocab.freq);

    // total center-word instances for the linear lr decay
    long long total_instances = 0;
    for (const auto& sentence : corpus)
        for (const auto& tok : sentence)
            if (vocab.index.count(tok)) ++total_instances;
    total_instances *= cfg.epochs;

    long long processed = 0;
    std::vector<double> hidden(dim), hidden_grad(dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        long long epoch_pairs = 0;
        for (const auto& sentence : corpus) {
            // subsampling + vocab filtering
            std::vector<size_t> ids;
            ids.reserve(sentence.size());
            for (const auto& tok : sentence) {
                auto it = vocab.index.find(tok);
                if (it == vocab.index.end()) continue;
                const double f =
                    static_cast<double>(vocab.freq[it->second]) /
                    static_cast<double>(vocab.total);
                const double keep =
                    (std::sqrt(f / cfg.subsample_threshold) + 1.0) *
                    (cfg.subsample_threshold / f);
                if (keep < 1.0 && rng.uniform() > keep) continue;
                ids.push_back(it->second);
            }
            for (size_t pos = 0; pos < ids.size(); ++pos) {
                const size_t center = ids[pos];
                ++processed;
                const double progress =
                    static_cast<double>(processed) /
                    static_cast<double>(std::max<long long>(1, total_instances));
                const double lr =
                    std::max(cfg.lr * (1.0 - progress), cfg.lr * 1e-4);
                const size_t span = rng.index(
                                        static_cast<size_t>(cfg.window)) +
                                    1;

                // input representation: average of word and n-gram vectors
                const auto& buckets = word_buckets[center];
                const double denom = 1.0 + static_cast<double>(buckets.size());
                std::fill(hidden.begin(), hidden.end(), 0.0);
                for (size_t i = 0; i < dim; ++i)
                    hidden[i] += model.word_vectors[center][i];
                for (uint64_t b : buckets) {
                    auto it = model.ngram_vectors.find(b);
                    if (it == model.ngram_vectors.end()) continue;
                    for (size_t i = 0; i < dim; ++i) hidden[i] += it->second[i];
                }
                for (size_t i = 0; i < dim; ++i) hidden[i] /= denom;

                for (size_t off = 0; off < 2 * span; ++off) {
                    const long long ctx_pos =
                        static_cast<long long>(pos) -
                        static_cast<long long>(span) +
                        static_cast<long long>(off >= span ? off + 1 : off);
                    if (ctx_pos < 0 ||
                        ctx_pos >= static_cast<long long>(ids.size()))
                        continue;
                    const size_t context = ids[static_cast<size_t>(ctx_pos)];

                    std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
                    for (int neg = 0; neg <= cfg.negatives; ++neg) {
                        size_t target;
                        double label;
                        if (neg == 0) {
                            target = context;
                            label = 1.0;
                        } else {
                            target = unigram[rng.index(unigram.size())];
                            if (target == context) continue;
                            label = 0.0;
                        }
                        auto& ov = out_vectors[target];
                        double dot = 0.0;
                        for (size_t i = 0; i < dim; ++i)
                            dot += hidden[i] * ov[i];
                        const double p = sigmoid_stable(dot);
                        epoch_loss -= label == 1.0
                                          ? std::log(std::max(p, 1e-12))
                                          : std::log(std::max(1.0 - p, 1e-12));
                        const double g = (label - p) * lr;
                        for (size_t i = 0; i < dim; ++i) {
                            hidden_grad[i] += g * ov[i];
                            ov[i] += g * hidden[i];
                        }
                    }
                    ++epoch_pairs;

                    // distribute the averaged-input gradient
                    for (size_t i = 0; i < dim; ++i)
                        model.word_vectors[center][i] +=
                            hidden_grad[i] / denom;
                    for (uint64_t b : buckets) {
                        auto [it, inserted] = model.ngram_vectors.try_emplace(
                            b, std::vector<double>(dim, 0.0));
                        for (size_t i = 0; i < dim; ++i)
                            it->second[i] += hidden_grad[i] / denom;
                    }
                }
            }
        }
        model.epoch_avg_loss.push_back(
            epoch_pairs == 0 ? 0.0
                             : epoch_loss / static_cast<double>(epoch_pairs));
    }
    model.last_epoch_avg_loss = model.epoch_avg_loss.empty()
                                    ? 0.0
                                    : model.epoch_avg_loss.back();
    return model;
}

void SubwordEmbeddingModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model " + path);
    out.write("RDTGEMB1", 8);
    json header = {{"dim", config.dim},
                   {"lr", config.lr},
                   {"window", config.window},
                   {"epochs", config.epochs},
                   {"min_count", config.min_count},
                   {"negatives", config.negatives},
                   {"subsample_threshold", config.subsample_threshold},
                   {"ngram_min", config.ngram_min},
                   {"ngram_max", config.ngram_max},
                   {"bucket_count", config.bucket_count}};
    write_string(out, header.dump());
    write_u64(out, vocab.size());
    for (size_t i = 0; i < vocab.size(); ++i) {
        write_string(out, vocab[i]);
        write_u64(out, static_cast<uint64_t>(frequencies[i]));
        write_vec_f32(out, word_vectors[i]);
    }
    write_u64(out, ngram_vectors.size());
    for (const auto& [bucket, vec] : ngram_vectors) {
        write_u64(out, bucket);
        write_vec_f32(out, vec);
    }
}

SubwordEmbeddingModel SubwordEmbeddingModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "RDTGEMB1", 8) != 0)
        throw Error("not an embedding model: " + path);
    SubwordEmbeddingModel model;
    json header = json::parse(read_string(in));
    model.config.dim = header.at("dim").get<int>();
    model.config.lr = header.at("lr").get<double>();
    model.config.window = header.at("window").get<int>();
    model.config.epochs = header.at("epochs").get<int>();
    model.config.min_count = header.at("min_count").get<int>();
    model.config.negatives = header.at("negatives").get<int>();
    model.config.subsample_threshold =
        header.at("subsample_threshold").get<double>();
    model.config.ngram_min = header.at("ngram_min").get<int>();
    model.config.ngram_max = header.at("ngram_max").get<int>();
    model.config.bucket_count = header.at("bucket_count").get<uint64_t>();
    const uint64_t vocab_size = read_u64(in);
    const size_t dim = static_cast<size_t>(model.config.dim);
    for (uint64_t i = 0; i < vocab_size; ++i) {
        std::string token = read_string(in);
        const uint64_t freq = read_u64(in);
        model.vocab_index[token] = model.vocab.size();
        model.vocab.push_back(std::move(token));
        model.frequencies.push_back(static_cast<long long>(freq));
        model.word_vectors.push_back(read_vec_f32(in, dim));
    }
    const uint64_t buckets = read_u64(in);
    for (uint64_t i = 0; i < buckets; ++i) {
        const uint64_t bucket = read_u64(in);
        model.ngram_vectors[bucket] = read_vec_f32(in, dim);
    }
    return model;
}

void SubwordEmbeddingModel::export_vec(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << vocab.size() << " " << config.dim << "\n";
    char buf[64];
    for (size_t i = 0; i < vocab.size(); ++i) {
        out << vocab[i];
        for (double x : word_vectors[i]) {
            std::snprintf(buf, sizeof buf, " %.6g", x);
            out << buf;
        }
        out << "\n";
    }
}

const std::vector<double>& DocVectorModel::vector_of(
    const std::string& doc_id) const {
    for (size_t i = 0; i < doc_ids.size(); ++i)
        if (doc_ids[i] == doc_id) return doc_vectors[i];
    throw Error("unknown document id: " + doc_id);
}

DocVectorModel train_doc_vectors(const std::vector<TaggedDocument>& corpus,
                                 const DocVectorConfig& cfg, uint64_t seed) {
    if (corpus.empty()) throw EmptyCorpus("no documents");
    TokenizedCorpus sentences;
    sentences.reserve(corpus.size());
    for (const auto& doc : corpus) sentences.push_back(doc.tokens);
    Vocab vocab = build_vocab(sentences, cfg.min_count);

    DocVectorModel model;
    model.config = cfg;
    const size_t dim = static_cast<size_t>(cfg.dim);
    Rng rng(seed);

    model.doc_ids.reserve(corpus.size());
    model.doc_vectors.assign(corpus.size(), {});
    for (size_t d = 0; d < corpus.size(); ++d) {
        model.doc_ids.push_back(corpus[d].doc_id);
        model.doc_vectors[d].resize(dim);
        for (double& x : model.doc_vectors[d])
            x = rng.uniform(-0.5 / static_cast<double>(dim),
                            0.5 / static_cast<double>(dim));
    }

    std::vector<std::vector<double>> word_in(vocab.tokens.size(),
                                             std::vector<double>(dim));
    for (auto& wv : word_in)
        for (double& x : wv)
            x = rng.uniform(-0.5 / static_cast<double>(dim),
                            0.5 / static_cast<double>(dim));
    std::vector<std::vector<double>> word_out(vocab.tokens.size(),
                                              std::vector<double>(dim, 0.0));
    if (vocab.tokens.empty())
        return model;  // doc vectors stay at their init; nothing to predict

    const std::vector<uint32_t> unigram = build_unigram_table(vocab.freq);

    long long total_instances = 0;
    for (const auto& doc : corpus)
        for (const auto& tok : doc.tokens)
            if (vocab.index.count(tok)) ++total_instances;
    total_instances *= cfg.epochs;

    long long processed = 0;
    std::vector<double> hidden(dim), hidden_grad(dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t d = 0; d < corpus.size(); ++d) {
            std::vector<size_t> ids;
            for (const auto& tok : corpus[d].tokens) {
                auto it = vocab.index.find(tok);
                if (it == vocab.index.end()) continue;
                const double f =
                    static_cast<double>(vocab.freq[it->second]) /
                    static_cast<double>(vocab.total);
                const double keep =
                    (std::sqrt(f / cfg.subsample_threshold) + 1.0) *
                    (cfg.subsample_threshold / f);
                if (keep < 1.0 && rng.uniform() > keep) continue;
                ids.push_back(it->second);
            }
            auto& dv = model.doc_vectors[d];
            for (size_t pos = 0; pos < ids.size(); ++pos) {
                ++processed;
                const double progress =
                    static_cast<double>(processed) /
                    static_cast<double>(std::max<long long>(1, total_instances));
                const double lr =
                    std::max(cfg.lr * (1.0 - progress), cfg.lr * 1e-4);
                const size_t span = rng.index(
                                        static_cast<size_t>(cfg.window)) +
                                    1;

                // distributed memory: mean of doc vector and context words
                std::fill(hidden.begin(), hidden.end(), 0.0);
                for (size_t i = 0; i < dim; ++i) hidden[i] += dv[i];
                size_t contributors = 1;
                for (size_t off = 0; off < 2 * span; ++off) {
                    const long long cp =
                        static_cast<long long>(pos) -
                        static_cast<long long>(span) +
                        static_cast<long long>(off >= span ? off + 1 : off);
                    if (cp < 0 || cp >= static_cast<long long>(ids.size()))
                        continue;
                    const auto& wv = word_in[ids[static_cast<size_t>(cp)]];
                    for (size_t i = 0; i < dim; ++i) hidden[i] += wv[i];
                    ++contributors;
                }
                for (size_t i = 0; i < dim; ++i)
                    hidden[i] /= static_cast<double>(contributors);

                const size_t center = ids[pos];
                std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
                for (int neg = 0; neg <= cfg.negatives; ++neg) {
                    size_t target;
                    double label;
                    if (neg == 0) {
                        target = center;
                        label = 1.0;
                    } else {
                        target = unigram[rng.index(unigram.size())];
                        if (target == center) continue;
                        label = 0.0;
                    }
                    auto& ov = word_out[target];
                    double dot = 0.0;
                    for (size_t i = 0; i < dim; ++i) dot += hidden[i] * ov[i];
                    const double g = (label - sigmoid_stable(dot)) * lr;
                    for (size_t i = 0; i < dim; ++i) {
                        hidden_grad[i] += g * ov[i];
                        ov[i] += g * hidden[i];
                    }
                }
                for (size_t i = 0; i < dim; ++i) dv[i] += hidden_grad[i];
                for (size_t off = 0; off < 2 * span; ++off) {
                    const long long cp =
                        static_cast<long long>(pos) -
                        static_cast<long long>(span) +
                        static_cast<long long>(off >= span ? off + 1 : off);
                    if (cp < 0 || cp >= static_cast<long long>(ids.size()))
                        continue;
                    auto& wv = word_in[ids[static_cast<size_t>(cp)]];
                    for (size_t i = 0; i < dim; ++i) wv[i] += hidden_grad[i];
                }
            }
        }
    }
    return model;
}

void DocVectorModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write model " + path);
    out.write("RDTGDOC1", 8);
    json header = {{"dim", config.dim},
                   {"lr", config.lr},
                   {"window", config.window},
                   {"epochs", config.epochs},
                   {"min_count", config.min_count},
                   {"negatives", config.negatives},
                   {"subsample_threshold", config.subsample_threshold}};
    write_string(out, header.dump());
    write_u64(out, doc_ids.size());
    for (size_t i = 0; i < doc_ids.size(); ++i) {
        write_string(out, doc_ids[i]);
        write_vec_f32(out, doc_vectors[i]);
    }
}

DocVectorModel DocVectorModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "RDTGDOC1", 8) != 0)
        throw Error("not a document vector model: " + path);
    DocVectorModel model;
    json header = json::parse(read_string(in));
    model.config.dim = header.at("dim").get<int>();
    model.config.lr = header.at("lr").get<double>();
    model.config.window = header.at("window").get<int>();
    model.config.epochs = header.at("epochs").get<int>();
    model.config.min_count = header.at("min_count").get<int>();
    model.config.negatives = header.at("negatives").get<int>();
    model.config.subsample_threshold =
        header.at("subsample_threshold").get<double>();
    const uint64_t n = read_u64(in);
    const size_t dim = static_cast<size_t>(model.config.dim);
    for (uint64_t i = 0; i < n; ++i) {
        model.doc_ids.push_back(read_string(in));
        model.doc_vectors.push_back(read_vec_f32(in, dim));
    }
    return model;
}

TopicModel kmeans_cluster(const std::vector<std::string>& doc_ids,
                          const std::vector<std::vector<double>>& vectors,
                          int k, uint64_t seed) {
    if (k <= 0) throw InvalidConfig("k must be positive");
    if (vectors.size() < static_cast<size_t>(k))
        throw TooFewVectors("fewer vectors than clusters");
    if (doc_ids.size() != vectors.size())
        throw DimensionMismatch("doc id / vector count mismatch");

    Rng rng(seed);
    const size_t n = vectors.size();
    TopicModel model;
    model.k = k;

    // k-means++ seeding
    std::vector<size_t> chosen;
    chosen.push_back(rng.index(n));
    std::vector<double> dist(n);
    while (chosen.size() < static_cast<size_t>(k)) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = 1e300;
            for (size_t c : chosen)
                best = std::min(best, sq_dist(vectors[i], vectors[c]));
            dist[i] = best;
            total += best;
        }
        size_t pick;
        if (total <= 0.0) {
            pick = rng.index(n);
        } else {
            double r = rng.uniform() * total;
            pick = n - 1;
            double cum = 0.0;
            for (size_t i = 0; i < n; ++i) {
                cum += dist[i];
                if (r < cum) {
                    pick = i;
                    break;
                }
            }
        }
        chosen.push_back(pick);
    }
    for (size_t c : chosen) model.centroids.push_back(vectors[c]);

    std::vector<int> assign(n, -1);
    const size_t dim = vectors[0].size();
    for (int iter = 0; iter < 300; ++iter) {
        // assignment step (ties to the lowest centroid index)
        bool changed = false;
        double inertia = 0.0;
        for (size_t i = 0; i < n; ++i) {
            int best = 0;
            double bd = sq_dist(vectors[i], model.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(vectors[i], model.centroids[
                                             static_cast<size_t>(c)]);
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
            inertia += bd;
        }
        model.inertia_history.push_back(inertia);
        if (!changed && iter > 0) break;

        // update step
        std::vector<std::vector<double>> sums(
            static_cast<size_t>(k), std::vector<double>(dim, 0.0));
        std::vector<size_t> counts(static_cast<size_t>(k), 0);
        for (size_t i = 0; i < n; ++i) {
            auto& s = sums[static_cast<size_t>(assign[i])];
            for (size_t j = 0; j < dim; ++j) s[j] += vectors[i][j];
            ++counts[static_cast<size_t>(assign[i])];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] == 0) continue;
            for (size_t j = 0; j < dim; ++j)
                model.centroids[static_cast<size_t>(c)][j] =
                    sums[static_cast<size_t>(c)][j] /
                    static_cast<double>(counts[static_cast<size_t>(c)]);
        }
        // empty-cluster repair: reseed from the farthest point
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] != 0) continue;
            size_t far = 0;
            double fd = -1.0;
            for (size_t i = 0; i < n; ++i) {
                const double d = sq_dist(
                    vectors[i],
                    model.centroids[static_cast<size_t>(assign[i])]);
                if (d > fd) {
                    fd = d;
                    far = i;
                }
            }
            model.centroids[static_cast<size_t>(c)] = vectors[far];
        }
    }

    // final assignment is exactly nearest-centroid
    for (size_t i = 0; i < n; ++i) {
        int best = 0;
        double bd = sq_dist(vectors[i], model.centroids[0]);
        for (int c = 1; c < k; ++c) {
            const double d =
                sq_dist(vectors[i], model.centroids[static_cast<size_t>(c)]);
            if (d < bd) {
                bd = d;
                best = c;
            }
        }
        model.assignment[doc_ids[i]] = best;
    }
    return model;
}

std::vector<std::vector<std::string>> topic_summary(
    const TopicModel& topics, const std::vector<TaggedDocument>& corpus,
    size_t top_n) {
    std::map<std::string, long long> global;
    long long total = 0;
    std::vector<std::map<std::string, long long>> per_topic(
        static_cast<size_t>(topics.k));
    for (const auto& doc : corpus) {
        auto it = topics.assignment.find(doc.doc_id);
        if (it == topics.assignment.end())
            throw Error("document not assigned to a topic: " + doc.doc_id);
        for (const auto& tok : doc.tokens) {
            ++global[tok];
            ++total;
            ++per_topic[static_cast<size_t>(it->second)][tok];
        }
    }
    std::vector<std::vector<std::string>> out(static_cast<size_t>(topics.k));
    for (int t = 0; t < topics.k; ++t) {
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& [tok, cnt] : per_topic[static_cast<size_t>(t)]) {
            const double score = static_cast<double>(cnt) *
                                 (static_cast<double>(total) /
                                  static_cast<double>(global[tok]));
            scored.emplace_back(score, tok);
        }
        std::sort(scored.begin(), scored.end(),
                  [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                  });
        for (size_t i = 0; i < scored.size() && i < top_n; ++i)
            out[static_cast<size_t>(t)].push_back(scored[i].second);
    }
    return out;
}

void TopicModel::save(const std::string& path) const {
    json j;
    j["k"] = k;
    j["centroids"] = centroids;
    j["assignment"] = assignment;
    j["inertia_history"] = inertia_history;
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << "\n";
}

TopicModel TopicModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    json j = json::parse(in);
    TopicModel model;
    model.k = j.at("k").get<int>();
    model.centroids =
        j.at("centroids").get<std::vector<std::vector<double>>>();
    model.assignment = j.at("assignment").get<std::map<std::string, int>>();
    model.inertia_history =
        j.at("inertia_history").get<std::vector<double>>();
    return model;
}

}  // namespace radtag
