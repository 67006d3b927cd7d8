#include "cyberscore/textprep.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace cyber::textprep {

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_terminator(unsigned char c) { return c == '.' || c == '!' || c == '?'; }

// Splits raw text into sentence substrings before any stripping.
std::vector<std::string_view> split_sentences(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        auto c = static_cast<unsigned char>(text[i]);
        if (!is_terminator(c)) continue;
        bool at_end = i + 1 == text.size();
        if (at_end || is_space(static_cast<unsigned char>(text[i + 1]))) {
            out.push_back(text.substr(start, i + 1 - start));
            start = i + 1;
        }
    }
    if (start < text.size()) out.push_back(text.substr(start));
    return out;
}

Sentence tokenize(std::string_view sentence, const WordSet& stoplist, const WordSet& common_words) {
    Sentence tokens;
    std::string current;
    auto flush = [&] {
        if (current.empty()) return;
        if (!stoplist.contains(current) && !common_words.contains(current)) tokens.push_back(current);
        current.clear();
    };
    for (std::size_t i = 0; i < sentence.size(); ++i) {
        auto c = static_cast<unsigned char>(sentence[i]);
        if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (c >= 'a' && c <= 'z') {
            current.push_back(static_cast<char>(c));
        } else if (c == '\'') {
            // dropped without breaking the word
        } else if (c == 0xE2 && i + 2 < sentence.size() && static_cast<unsigned char>(sentence[i + 1]) == 0x80 &&
                   static_cast<unsigned char>(sentence[i + 2]) == 0x99) {
            i += 2;  // U+2019 right single quotation mark, used as apostrophe
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

}  // namespace

std::vector<Sentence> preprocess(std::string_view text, const WordSet& stoplist, const WordSet& common_words) {
    std::vector<Sentence> out;
    for (auto raw : split_sentences(text)) {
        auto tokens = tokenize(raw, stoplist, common_words);
        if (!tokens.empty()) out.push_back(std::move(tokens));
    }
    return out;
}

std::vector<Sentence> preprocess(const RawDocument& doc, const WordSet& stoplist, const WordSet& common_words) {
    return preprocess(doc.text, stoplist, common_words);
}

std::vector<Paragraph> segment_paragraphs(const std::string& doc_id, std::span<const Sentence> sentences,
                                          std::size_t target_words) {
    if (target_words < 1) throw std::invalid_argument("target_words must be >= 1");
    std::vector<Paragraph> out;
    Paragraph current{doc_id, 0, {}};
    for (const auto& s : sentences) {
        current.tokens.insert(current.tokens.end(), s.begin(), s.end());
        if (current.tokens.size() >= target_words) {
            current.index = out.size();
            out.push_back(std::move(current));
            current = Paragraph{doc_id, 0, {}};
        }
    }
    if (!current.tokens.empty()) {
        current.index = out.size();
        out.push_back(std::move(current));
    }
    return out;
}

std::string detokenize(std::span<const Sentence> sentences) {
    std::string out;
    for (const auto& s : sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) out.push_back(' ');
            out += s[i];
        }
        out += ". ";
    }
    return out;
}

WordSet parse_word_list(std::string_view content, std::size_t limit) {
    WordSet words;
    std::size_t kept = 0;
    std::istringstream in{std::string(content)};
    std::string raw;
    while (std::getline(in, raw)) {
        std::string_view line = raw;
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
        if (line.empty() || line.front() == '#') continue;
        if (limit > 0 && kept >= limit) break;
        words.emplace(line);
        ++kept;
    }
    return words;
}

WordSet load_word_list(const std::filesystem::path& path, std::size_t limit) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_word_list(buf.str(), limit);
}

std::vector<std::string> most_common_words(std::span<const std::vector<Sentence>> corpus, std::size_t n) {
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& doc : corpus)
        for (const auto& s : doc)
            for (const auto& t : s) ++counts[t];
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < std::min(n, ranked.size()); ++i) out.push_back(ranked[i].first);
    return out;
}

const WordSet& default_stopwords() {
    static const WordSet words = {
        "a", "about", "above", "after", "again", "against", "ain", "all", "am", "an", "and", "any", "are",
        "aren", "arent", "as", "at", "be", "because", "been", "before", "being", "below", "between", "both",
        "but", "by", "can", "couldn", "couldnt", "d", "did", "didn", "didnt", "do", "does", "doesn", "doesnt",
        "doing", "don", "dont", "down", "during", "each", "few", "for", "from", "further", "had", "hadn",
        "hadnt", "has", "hasn", "hasnt", "have", "haven", "havent", "having", "he", "her", "here", "hers",
        "herself", "him", "himself", "his", "how", "i", "if", "in", "into", "is", "isn", "isnt", "it", "its",
        "itself", "just", "ll", "m", "ma", "me", "mightn", "mightnt", "more", "most", "mustn", "mustnt", "my",
        "myself", "needn", "neednt", "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or",
        "other", "our", "ours", "ourselves", "out", "over", "own", "re", "s", "same", "shan", "shant", "she",
        "shes", "should", "shouldn", "shouldnt", "shouldve", "so", "some", "such", "t", "than", "that",
        "thatll", "the", "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
        "those", "through", "to", "too", "under", "until", "up", "ve", "very", "was", "wasn", "wasnt", "we",
        "were", "weren", "werent", "what", "when", "where", "which", "while", "who", "whom", "why", "will",
        "with", "won", "wont", "wouldn", "wouldnt", "y", "you", "youd", "youll", "your", "youre", "yours",
        "yourself", "yourselves", "youve"};
    return words;
}

}  // namespace cyber::textprep
