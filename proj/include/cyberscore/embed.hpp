// Paragraph embeddings: a distributed bag-of-words paragraph-vector trainer
// with negative sampling, inference against a frozen model, a text vector
// format for externally trained embeddings, and cosine similarity.
#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cyberscore/textprep.hpp"

namespace cyber::embed {

struct ParagraphRef {
    std::string doc_id;
    std::size_t index = 0;

    auto operator<=>(const ParagraphRef&) const = default;
};

struct EmbeddingVector {
    ParagraphRef ref;
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

struct EmbeddingModel {
    std::vector<std::string> words;                  // id -> token
    std::unordered_map<std::string, int> vocabulary;  // token -> id, ids dense in [0, |V|)
    std::vector<double> counts;                      // corpus frequency per id
    std::vector<double> output_weights;              // |V| x dim, row major
    std::size_t dim = 0;
    std::uint64_t seed = 0;

    int id_of(const std::string& token) const {
        auto it = vocabulary.find(token);
        return it == vocabulary.end() ? -1 : it->second;
    }
};

struct DbowConfig {
    std::size_t dim = 64;
    int epochs = 40;
    int negatives = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 1;
};

struct DbowResult {
    EmbeddingModel model;
    // One vector per input paragraph, in input order.
    std::vector<EmbeddingVector> vectors;
    // Mean negative-sampling loss per word update, one entry per epoch.
    std::vector<double> epoch_loss;
};

// Trains paragraph vectors to predict their own words. Paragraphs are put in
// canonical (doc_id, index) order before training, so results depend only on
// the set of paragraphs and the seed, never on input order.
DbowResult train_dbow(std::span<const textprep::Paragraph> paragraphs, const DbowConfig& config);

// Fits a fresh paragraph vector with the model's output weights frozen.
EmbeddingVector infer_vector(const EmbeddingModel& model, const textprep::Paragraph& paragraph, int steps,
                             std::uint64_t seed, double learning_rate = 0.025);

// Vector file: one row per paragraph, `doc_id<TAB>index<TAB>v1,v2,...,vd`;
// lines starting with '#' are comments.
std::vector<EmbeddingVector> parse_vectors(std::istream& in);
std::vector<EmbeddingVector> load_vectors(const std::filesystem::path& path);
void write_vectors(std::ostream& out, std::span<const EmbeddingVector> vectors);
void save_vectors(const std::filesystem::path& path, std::span<const EmbeddingVector> vectors);

// Cosine of the angle between two vectors; throws "undefined angle" for a
// zero vector and on dimension mismatch. Clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.values, b.values); }

}  // namespace cyber::embed
