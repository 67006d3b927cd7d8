// Text normalization and paragraph segmentation.
//
// Documents are split into sentences, lowercased, stripped of punctuation and
// digits, filtered against a stop-word list and a most-common-words list, and
// finally regrouped into paragraphs of roughly `target_words` tokens so filing
// paragraphs match the granularity of knowledgebase descriptions.
#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace cyber::textprep {

enum class SourceKind { Filing, Knowledgebase };

struct RawDocument {
    std::string doc_id;
    SourceKind source_kind = SourceKind::Filing;
    std::string text;
    std::map<std::string, std::string> metadata;  // firm_id, filing_date, tactic, ...
};

using Sentence = std::vector<std::string>;
using WordSet = std::set<std::string, std::less<>>;

struct Paragraph {
    std::string doc_id;
    std::size_t index = 0;
    std::vector<std::string> tokens;

    std::size_t word_count() const { return tokens.size(); }
};

inline constexpr std::size_t kDefaultTargetWords = 40;
inline constexpr std::size_t kDefaultCommonWords = 100;

// Sentences are cut at '.', '!' or '?' followed by whitespace (or end of
// text). Inside a sentence ASCII letters are lowercased, apostrophes are
// dropped ("don't" -> "dont") and every other character, hyphens and digits
// included, separates tokens. Sentences left empty after filtering vanish.
std::vector<Sentence> preprocess(std::string_view text, const WordSet& stoplist, const WordSet& common_words);
std::vector<Sentence> preprocess(const RawDocument& doc, const WordSet& stoplist, const WordSet& common_words);

// Greedy merge: a paragraph closes at the first sentence boundary where it
// holds at least `target_words` tokens. A trailing remainder becomes the last
// paragraph. Sentences are never split.
std::vector<Paragraph> segment_paragraphs(const std::string& doc_id, std::span<const Sentence> sentences,
                                          std::size_t target_words = kDefaultTargetWords);

// Inverse rendering used for round trips: tokens joined by spaces, sentences
// terminated by ". ".
std::string detokenize(std::span<const Sentence> sentences);

// One token per line, UTF-8, '#' lines and blank lines ignored. At most
// `limit` entries are kept when limit > 0 (frequency lists are ranked).
WordSet load_word_list(const std::filesystem::path& path, std::size_t limit = 0);
WordSet parse_word_list(std::string_view content, std::size_t limit = 0);

// The `n` most frequent tokens of a tokenized corpus, ties broken
// alphabetically. Used to produce the common-words data file.
std::vector<std::string> most_common_words(std::span<const std::vector<Sentence>> corpus, std::size_t n);

// A conventional English stop-word list.
const WordSet& default_stopwords();

}  // namespace cyber::textprep
