#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "radtag/common.hpp"

namespace radtag {

struct EmbeddingTrainConfig {
    int dim = 100;
    double lr = 0.025;
    int window = 5;
    int epochs = 55;
    int min_count = 5;
    int negatives = 5;
    double subsample_threshold = 1e-4;
    int ngram_min = 3;
    int ngram_max = 6;
    uint64_t bucket_count = uint64_t(1) << 21;

    void validate() const;
};

// Skip-gram with negative sampling over words plus their character
// n-grams (fastText style). Untouched n-gram buckets stay zero, so tokens
// made only of unseen n-grams embed to the zero vector.
class SubwordEmbeddingModel {
public:
    EmbeddingTrainConfig config;
    std::vector<std::string> vocab;            // index -> token
    std::map<std::string, size_t> vocab_index; // token -> index
    std::vector<long long> frequencies;        // per vocab index
    std::vector<std::vector<double>> word_vectors;
    std::map<uint64_t, std::vector<double>> ngram_vectors;  // touched buckets
    double last_epoch_avg_loss = 0.0;
    std::vector<double> epoch_avg_loss;  // negative-sampling loss per epoch

    // average of the word vector (when in vocabulary) and its n-gram
    // bucket vectors
    std::vector<double> embed_token(const std::string& token) const;

    std::vector<uint64_t> token_ngram_buckets(const std::string& token) const;

    void save(const std::string& path) const;
    static SubwordEmbeddingModel load(const std::string& path);
    void export_vec(const std::string& path) const;  // text format
};

using TokenizedCorpus = std::vector<std::vector<std::string>>;

SubwordEmbeddingModel train_subword_embeddings(const TokenizedCorpus& corpus,
                                               const EmbeddingTrainConfig& cfg,
                                               uint64_t seed);

uint64_t ngram_hash(const std::string& ngram);  // FNV-1a, stable

struct DocVectorConfig {
    int dim = 300;
    double lr = 0.025;
    int window = 10;
    int epochs = 55;
    int min_count = 5;
    int negatives = 5;
    double subsample_threshold = 1e-3;
};

// Distributed-memory paragraph vectors trained with negative sampling.
struct DocVectorModel {
    DocVectorConfig config;
    std::vector<std::string> doc_ids;
    std::vector<std::vector<double>> doc_vectors;

    const std::vector<double>& vector_of(const std::string& doc_id) const;
    void save(const std::string& path) const;
    static DocVectorModel load(const std::string& path);
};

struct TaggedDocument {
    std::string doc_id;
    std::vector<std::string> tokens;
};

DocVectorModel train_doc_vectors(const std::vector<TaggedDocument>& corpus,
                                 const DocVectorConfig& cfg, uint64_t seed);

struct TopicModel {
    int k = 20;
    std::vector<std::vector<double>> centroids;
    std::map<std::string, int> assignment;  // doc id -> topic index
    std::vector<double> inertia_history;    // per Lloyd iteration

    void save(const std::string& path) const;
    static TopicModel load(const std::string& path);
};

// Seeded k-means++ with Lloyd iterations to an assignment fixpoint (at
// most 300); empty clusters are re-seeded from the farthest point.
TopicModel kmeans_cluster(const std::vector<std::string>& doc_ids,
                          const std::vector<std::vector<double>>& vectors,
                          int k, uint64_t seed);

// Per-topic terms ranked by within-topic frequency times inverse global
// frequency; top_n per topic.
std::vector<std::vector<std::string>> topic_summary(
    const TopicModel& topics, const std::vector<TaggedDocument>& corpus,
    size_t top_n);

}  // namespace radtag
