#include "cyberscore/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cyberscore/rng.hpp"
#include "cyberscore/table.hpp"

namespace cyber::embed {

namespace {

constexpr double kNoisePower = 0.75;
constexpr double kMinLearningRateFraction = 1e-4;

double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Cumulative unigram^0.75 table for drawing negative samples.
class NoiseSampler {
public:
    explicit NoiseSampler(const std::vector<double>& counts) : cdf_(counts.size()) {
        double total = 0.0;
        for (std::size_t i = 0; i < counts.size(); ++i) {
            total += std::pow(counts[i], kNoisePower);
            cdf_[i] = total;
        }
        for (auto& c : cdf_) c /= total;
    }

    int draw(Rng& rng) const {
        double u = rng.uniform();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return static_cast<int>(it - cdf_.begin());
    }

private:
    std::vector<double> cdf_;
};

// One paragraph-word step of negative sampling. Accumulates the paragraph
// gradient into `grad` and, unless `trainable` is empty, updates the output
// rows in place. Returns the loss contribution.
double sgd_step(std::span<const double> pvec, std::span<double> grad, std::span<const double> output,
                std::span<double> trainable, std::size_t dim, int target, int negatives, const NoiseSampler& noise,
                Rng& rng, double alpha) {
    double loss = 0.0;
    for (int s = 0; s <= negatives; ++s) {
        int word = target;
        double label = 1.0;
        if (s > 0) {
            word = noise.draw(rng);
            if (word == target) continue;
            label = 0.0;
        }
        const double* row = output.data() + static_cast<std::size_t>(word) * dim;
        double f = 0.0;
        for (std::size_t j = 0; j < dim; ++j) f += pvec[j] * row[j];
        loss -= label > 0.0 ? log_sigmoid(f) : log_sigmoid(-f);
        double g = (label - sigmoid(f)) * alpha;
        for (std::size_t j = 0; j < dim; ++j) grad[j] += g * row[j];
        if (!trainable.empty()) {
            double* out_row = trainable.data() + static_cast<std::size_t>(word) * dim;
            for (std::size_t j = 0; j < dim; ++j) out_row[j] += g * pvec[j];
        }
    }
    return loss;
}

void init_vector(std::span<double> v, Rng& rng) {
    for (auto& x : v) x = (rng.uniform() - 0.5) / static_cast<double>(v.size());
}

}  // namespace

DbowResult train_dbow(std::span<const textprep::Paragraph> paragraphs, const DbowConfig& config) {
    if (paragraphs.empty()) throw std::invalid_argument("empty corpus");
    if (config.dim < 2) throw std::invalid_argument("degenerate dimension");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (config.negatives < 0) throw std::invalid_argument("negatives must be >= 0");

    // Canonical order, independent of how the caller arranged paragraphs.
    std::vector<std::size_t> order(paragraphs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = paragraphs[a];
        const auto& pb = paragraphs[b];
        if (pa.doc_id != pb.doc_id) return pa.doc_id < pb.doc_id;
        return pa.index < pb.index;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const auto& a = paragraphs[order[i - 1]];
        const auto& b = paragraphs[order[i]];
        if (a.doc_id == b.doc_id && a.index == b.index)
            throw std::invalid_argument("duplicate paragraph " + a.doc_id + "#" + std::to_string(a.index));
    }

    DbowResult result;
    EmbeddingModel& model = result.model;
    model.dim = config.dim;
    model.seed = config.seed;

    std::unordered_map<std::string, double> counts;
    std::size_t total_tokens = 0;
    for (const auto& p : paragraphs) {
        for (const auto& t : p.tokens) counts[t] += 1.0;
        total_tokens += p.tokens.size();
    }
    if (total_tokens == 0) throw std::invalid_argument("empty corpus");
    std::vector<std::pair<std::string, double>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [word, count] : ranked) {
        model.vocabulary.emplace(word, static_cast<int>(model.words.size()));
        model.words.push_back(word);
        model.counts.push_back(count);
    }
    const std::size_t dim = config.dim;
    model.output_weights.assign(model.words.size() * dim, 0.0);

    // Token ids per canonical paragraph.
    std::vector<std::vector<int>> ids(paragraphs.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        const auto& p = paragraphs[order[c]];
        ids[c].reserve(p.tokens.size());
        for (const auto& t : p.tokens) ids[c].push_back(model.vocabulary.at(t));
    }

    Rng rng(config.seed);
    std::vector<double> pvecs(paragraphs.size() * dim);
    for (std::size_t c = 0; c < order.size(); ++c) init_vector({pvecs.data() + c * dim, dim}, rng);

    NoiseSampler noise(model.counts);
    const double schedule_total = static_cast<double>(total_tokens) * config.epochs;
    double processed = 0.0;
    std::vector<double> grad(dim);
    std::vector<std::size_t> visit(order.size());
    std::iota(visit.begin(), visit.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(visit.begin(), visit.end());
        double epoch_loss = 0.0;
        std::size_t updates = 0;
        for (std::size_t c : visit) {
            std::span<double> pvec{pvecs.data() + c * dim, dim};
            for (int word : ids[c]) {
                double alpha = config.learning_rate *
                               std::max(kMinLearningRateFraction, 1.0 - processed / schedule_total);
                std::fill(grad.begin(), grad.end(), 0.0);
                epoch_loss += sgd_step(pvec, grad, model.output_weights, model.output_weights, dim, word,
                                       config.negatives, noise, rng, alpha);
                for (std::size_t j = 0; j < dim; ++j) pvec[j] += grad[j];
                processed += 1.0;
                ++updates;
            }
        }
        result.epoch_loss.push_back(updates ? epoch_loss / static_cast<double>(updates) : 0.0);
    }

    result.vectors.resize(paragraphs.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        const auto& p = paragraphs[order[c]];
        auto& out = result.vectors[order[c]];
        out.ref = {p.doc_id, p.index};
        out.values.assign(pvecs.begin() + static_cast<std::ptrdiff_t>(c * dim),
                          pvecs.begin() + static_cast<std::ptrdiff_t>((c + 1) * dim));
    }
    return result;
}

EmbeddingVector infer_vector(const EmbeddingModel& model, const textprep::Paragraph& paragraph, int steps,
                             std::uint64_t seed, double learning_rate) {
    if (steps < 1) throw std::invalid_argument("steps must be >= 1");
    std::vector<int> ids;
    for (const auto& t : paragraph.tokens) {
        int id = model.id_of(t);
        if (id >= 0) ids.push_back(id);
    }
    if (ids.empty()) throw std::invalid_argument("out-of-vocabulary paragraph");

    const std::size_t dim = model.dim;
    Rng rng(seed);
    std::vector<double> pvec(dim);
    init_vector(pvec, rng);
    NoiseSampler noise(model.counts);
    std::vector<double> grad(dim);
    const int negatives = 5;
    for (int step = 0; step < steps; ++step) {
        double alpha = learning_rate * std::max(kMinLearningRateFraction,
                                                1.0 - static_cast<double>(step) / static_cast<double>(steps));
        for (int word : ids) {
            std::fill(grad.begin(), grad.end(), 0.0);
            sgd_step(pvec, grad, model.output_weights, {}, dim, word, negatives, noise, rng, alpha);
            for (std::size_t j = 0; j < dim; ++j) pvec[j] += grad[j];
        }
    }
    return {{paragraph.doc_id, paragraph.index}, std::move(pvec)};
}

std::vector<EmbeddingVector> parse_vectors(std::istream& in) {
    std::vector<EmbeddingVector> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (auto t = trim(line); t.empty() || t.front() == '#') continue;
        auto fields = split(line, '\t');
        if (fields.size() != 3) throw std::runtime_error("line " + std::to_string(line_no) + ": expected 3 tab-separated fields");
        EmbeddingVector v;
        v.ref.doc_id = fields[0];
        try {
            long long idx = std::stoll(fields[1]);
            if (idx < 0) throw std::invalid_argument("negative");
            v.ref.index = static_cast<std::size_t>(idx);
        } catch (const std::exception&) {
            throw std::runtime_error("line " + std::to_string(line_no) + ": bad paragraph index '" + fields[1] + "'");
        }
        for (const auto& item : split(fields[2], ',')) {
            double x = 0.0;
            try {
                x = parse_double(item);
            } catch (const std::invalid_argument&) {
                throw std::runtime_error("line " + std::to_string(line_no) + ": bad value '" + item + "'");
            }
            if (!std::isfinite(x)) throw std::runtime_error("line " + std::to_string(line_no) + ": non-finite value");
            v.values.push_back(x);
        }
        if (!out.empty() && out.front().values.size() != v.values.size())
            throw std::runtime_error("line " + std::to_string(line_no) + ": ragged dimensions (" +
                                     std::to_string(v.values.size()) + " vs " +
                                     std::to_string(out.front().values.size()) + ")");
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<EmbeddingVector> load_vectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    try {
        return parse_vectors(in);
    } catch (const std::runtime_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void write_vectors(std::ostream& out, std::span<const EmbeddingVector> vectors) {
    for (const auto& v : vectors) {
        out << v.ref.doc_id << '\t' << v.ref.index << '\t';
        for (std::size_t j = 0; j < v.values.size(); ++j) {
            if (j) out << ',';
            out << format_double(v.values[j]);
        }
        out << '\n';
    }
}

void save_vectors(const std::filesystem::path& path, std::span<const EmbeddingVector> vectors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_vectors(out, vectors);
}

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("undefined angle");
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace cyber::embed
