#include "cyberscore/cluster.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cyberscore/rng.hpp"
#include "cyberscore/table.hpp"

namespace cyber::cluster {

namespace {

constexpr double kGainEps = 1e-12;

Eigen::MatrixXd edge_weights(const Eigen::MatrixXd& s) {
    Eigen::MatrixXd w = s;
    w.diagonal().setZero();
    return w;
}

Eigen::MatrixXd normalized_rows(const Eigen::MatrixXd& points) {
    Eigen::MatrixXd out = points;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double norm = out.row(i).norm();
        if (norm == 0.0) throw std::invalid_argument("undefined angle: zero vector at row " + std::to_string(i));
        out.row(i) /= norm;
    }
    return out;
}

struct KMeansRun {
    std::vector<int> labels;
    double objective = -std::numeric_limits<double>::infinity();
};

KMeansRun kmeans_once(const Eigen::MatrixXd& x, int k, Rng& rng, int max_iter) {
    const auto n = x.rows();
    // k-means++ seeding on angular distance.
    std::vector<Eigen::Index> chosen;
    std::vector<char> taken(static_cast<std::size_t>(n), 0);
    chosen.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(n))));
    taken[static_cast<std::size_t>(chosen.back())] = 1;
    Eigen::VectorXd best_cos = x * x.row(chosen.back()).transpose();
    while (static_cast<int>(chosen.size()) < k) {
        std::vector<double> weight(static_cast<std::size_t>(n), 0.0);
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            double d = std::max(0.0, 1.0 - best_cos(i));
            weight[static_cast<std::size_t>(i)] = d * d;
            total += d * d;
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += weight[static_cast<std::size_t>(i)];
                if (weight[static_cast<std::size_t>(i)] > 0.0 && u < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0)
                for (Eigen::Index i = n - 1; i >= 0; --i)
                    if (weight[static_cast<std::size_t>(i)] > 0.0) {
                        pick = i;
                        break;
                    }
        } else {
            std::vector<Eigen::Index> free;
            for (Eigen::Index i = 0; i < n; ++i)
                if (!taken[static_cast<std::size_t>(i)]) free.push_back(i);
            pick = free[rng.below(free.size())];
        }
        chosen.push_back(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
        best_cos = best_cos.cwiseMax(x * x.row(pick).transpose());
    }

    Eigen::MatrixXd centroids(k, x.cols());
    for (int c = 0; c < k; ++c) centroids.row(c) = x.row(chosen[static_cast<std::size_t>(c)]);

    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    Eigen::MatrixXd sims;
    for (int iter = 0; iter < max_iter; ++iter) {
        sims = x * centroids.transpose();
        bool changed = false;
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            sims.row(i).maxCoeff(&best);
            if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) changed = true;
            labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
            ++counts[static_cast<std::size_t>(best)];
        }
        // Empty clusters take the worst-fitting point of a cluster that can spare one.
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            Eigen::Index worst = -1;
            double worst_sim = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < n; ++i) {
                int l = labels[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(l)] < 2) continue;
                if (sims(i, l) < worst_sim) {
                    worst_sim = sims(i, l);
                    worst = i;
                }
            }
            --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(worst)])];
            labels[static_cast<std::size_t>(worst)] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            centroids.row(c) = x.row(worst);
            changed = true;
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
        for (Eigen::Index i = 0; i < n; ++i) sums.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
        for (int c = 0; c < k; ++c) {
            double norm = sums.row(c).norm();
            if (norm > 0.0) centroids.row(c) = sums.row(c) / norm;
        }
        if (!changed) break;
    }

    KMeansRun run;
    run.objective = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) run.objective += x.row(i).dot(centroids.row(labels[static_cast<std::size_t>(i)]));
    run.labels = std::move(labels);
    return run;
}

// Local moving phase on a (possibly aggregated) graph. `comm` holds the
// starting partition and is updated in place. Returns whether any node moved.
bool local_moving(const Eigen::MatrixXd& g, std::vector<int>& comm, Rng& rng) {
    const auto n = static_cast<std::size_t>(g.rows());
    const double m2 = g.sum();
    Eigen::VectorXd degree = g.rowwise().sum();
    std::vector<double> tot(n, 0.0);
    std::vector<int> size(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        tot[static_cast<std::size_t>(comm[i])] += degree(static_cast<Eigen::Index>(i));
        ++size[static_cast<std::size_t>(comm[i])];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order.begin(), order.end());

    std::vector<double> link(n, 0.0);
    std::vector<int> touched;
    bool moved_any = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t i : order) {
            const auto ii = static_cast<Eigen::Index>(i);
            const int old = comm[i];
            const double ki = degree(ii);
            touched.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double w = g(ii, static_cast<Eigen::Index>(j));
                if (w == 0.0) continue;
                int c = comm[j];
                if (link[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);
                link[static_cast<std::size_t>(c)] += w;
            }
            tot[static_cast<std::size_t>(old)] -= ki;
            --size[static_cast<std::size_t>(old)];

            int best = old;
            double best_gain = link[static_cast<std::size_t>(old)] - tot[static_cast<std::size_t>(old)] * ki / m2;
            for (int c : touched) {
                double gain = link[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * ki / m2;
                if (gain > best_gain + kGainEps) {
                    best_gain = gain;
                    best = c;
                }
            }
            if (0.0 > best_gain + kGainEps && size[static_cast<std::size_t>(old)] > 0) {
                // Isolating the node beats every community it touches.
                for (std::size_t c = 0; c < n; ++c)
                    if (size[c] == 0) {
                        best = static_cast<int>(c);
                        break;
                    }
            }
            for (int c : touched) link[static_cast<std::size_t>(c)] = 0.0;

            comm[i] = best;
            tot[static_cast<std::size_t>(best)] += ki;
            ++size[static_cast<std::size_t>(best)];
            if (best != old) {
                moved = true;
                moved_any = true;
            }
        }
    }
    return moved_any;
}

std::vector<int> dense_ids(std::span<const int> labels, int* k_out) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    if (k_out) *k_out = static_cast<int>(remap.size());
    return out;
}

}  // namespace

bool is_tactic(std::string_view name) {
    return std::find(kTactics.begin(), kTactics.end(), name) != kTactics.end();
}

ClusterAssignment canonicalize(std::span<const int> labels) {
    ClusterAssignment a;
    std::map<int, int> remap;
    a.labels.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = remap.find(labels[i]);
        if (it == remap.end()) it = remap.emplace(labels[i], static_cast<int>(remap.size())).first;
        a.labels[i] = it->second;
    }
    a.k = static_cast<int>(remap.size());
    return a;
}

SimilarityMatrix build_similarity(std::span<const embed::EmbeddingVector> vectors, std::vector<std::string> labels) {
    if (vectors.size() < 2) throw std::invalid_argument("similarity needs at least 2 vectors");
    if (labels.size() != vectors.size()) throw std::invalid_argument("similarity: labels and vectors differ in length");
    const auto n = static_cast<Eigen::Index>(vectors.size());
    const auto d = static_cast<Eigen::Index>(vectors.front().dim());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& v = vectors[static_cast<std::size_t>(i)].values;
        if (static_cast<Eigen::Index>(v.size()) != d) throw std::invalid_argument("similarity: ragged dimensions");
        x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), d);
    }
    x = normalized_rows(x);
    SimilarityMatrix s;
    s.values = (x * x.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
    // Exact symmetry and unit diagonal regardless of rounding in the product.
    s.values = 0.5 * (s.values + s.values.transpose()).eval();
    s.values.diagonal().setOnes();
    s.node_labels = std::move(labels);
    return s;
}

SimilarityMatrix apply_thresholds(const SimilarityMatrix& s, double low, double high, double high_value) {
    if (low > high) throw std::invalid_argument("threshold low > high");
    SimilarityMatrix out = s;
    for (Eigen::Index i = 0; i < out.n(); ++i)
        for (Eigen::Index j = 0; j < out.n(); ++j) {
            if (i == j) continue;
            double& v = out.values(i, j);
            if (v < low)
                v = 0.0;
            else if (v > high)
                v = high_value;
        }
    return out;
}

ClusterAssignment spherical_kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& opts) {
    const auto n = points.rows();
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (k > n) throw std::invalid_argument("k = " + std::to_string(k) + " exceeds number of points " + std::to_string(n));
    Eigen::MatrixXd x = normalized_rows(points);
    if (k == 1) return canonicalize(std::vector<int>(static_cast<std::size_t>(n), 0));

    KMeansRun best;
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
        auto run = kmeans_once(x, k, rng, opts.max_iter);
        if (run.objective > best.objective + 1e-12) best = std::move(run);
    }
    return canonicalize(best.labels);
}

ClusterAssignment spherical_kmeans(std::span<const embed::EmbeddingVector> vectors, int k, std::uint64_t seed,
                                   const KMeansOptions& opts) {
    if (vectors.empty()) throw std::invalid_argument("no points to cluster");
    const auto d = static_cast<Eigen::Index>(vectors.front().dim());
    Eigen::MatrixXd x(static_cast<Eigen::Index>(vectors.size()), d);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (static_cast<Eigen::Index>(vectors[i].dim()) != d) throw std::invalid_argument("ragged dimensions");
        x.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(vectors[i].values.data(), d);
    }
    return spherical_kmeans(x, k, seed, opts);
}

ClusterAssignment louvain(const SimilarityMatrix& s, std::uint64_t seed) {
    const Eigen::MatrixXd w = edge_weights(s.values);
    const auto n = static_cast<std::size_t>(w.rows());
    if (n == 0) throw std::invalid_argument("empty graph");
    if ((w.array() < 0.0).any()) throw std::invalid_argument("negative edge weight; apply thresholds first");
    if (w.sum() <= 0.0) throw std::invalid_argument("disconnected trivial graph");

    Rng rng(seed);
    std::vector<int> membership(n);
    std::iota(membership.begin(), membership.end(), 0);

    while (true) {
        const std::vector<int> before = membership;
        // Node-level pass from the current partition.
        local_moving(w, membership, rng);
        int k = 0;
        membership = dense_ids(membership, &k);

        // Aggregation levels.
        while (true) {
            Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    g(membership[i], membership[j]) += w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            std::vector<int> level(static_cast<std::size_t>(k));
            std::iota(level.begin(), level.end(), 0);
            if (!local_moving(g, level, rng)) break;
            int k2 = 0;
            level = dense_ids(level, &k2);
            for (auto& m : membership) m = level[static_cast<std::size_t>(m)];
            if (k2 == k) break;
            k = k2;
        }
        if (dense_ids(before, nullptr) == membership) break;
    }
    return canonicalize(membership);
}

double modularity(const Eigen::MatrixXd& weights, const ClusterAssignment& a) {
    const auto n = weights.rows();
    if (static_cast<Eigen::Index>(a.labels.size()) != n) throw std::invalid_argument("modularity: size mismatch");
    const Eigen::MatrixXd w = edge_weights(weights);
    const double m2 = w.sum();
    if (m2 == 0.0) throw std::invalid_argument("modularity undefined: total edge weight is zero");
    const int k = a.k > 0 ? a.k : (*std::max_element(a.labels.begin(), a.labels.end()) + 1);
    std::vector<double> in(static_cast<std::size_t>(k), 0.0), tot(static_cast<std::size_t>(k), 0.0);
    Eigen::VectorXd degree = w.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i) {
        auto ci = static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)]);
        tot[ci] += degree(i);
        for (Eigen::Index j = 0; j < n; ++j)
            if (a.labels[static_cast<std::size_t>(j)] == a.labels[static_cast<std::size_t>(i)]) in[ci] += w(i, j);
    }
    double q = 0.0;
    for (int c = 0; c < k; ++c) {
        auto cc = static_cast<std::size_t>(c);
        q += in[cc] / m2 - (tot[cc] / m2) * (tot[cc] / m2);
    }
    return q;
}

ClusterAssignment spectral_cluster(const SimilarityMatrix& s, int k, int egn, std::uint64_t seed) {
    const auto n = s.n();
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (egn < 1) throw std::invalid_argument("egn must be >= 1");
    if (egn > n - 1) throw std::invalid_argument("egn exceeds the number of nontrivial eigenvectors");
    if (!s.values.isApprox(s.values.transpose(), 1e-12)) throw std::invalid_argument("similarity matrix not symmetric");
    if (k == 1) return canonicalize(std::vector<int>(static_cast<std::size_t>(n), 0));

    const Eigen::MatrixXd w = edge_weights(s.values);
    Eigen::MatrixXd lap = -w;
    lap.diagonal() = w.rowwise().sum();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigensolver did not converge within " << 30 * n << " iterations";
        throw std::runtime_error(msg.str());
    }
    const Eigen::VectorXd& evals = solver.eigenvalues();
    const Eigen::MatrixXd& evecs = solver.eigenvectors();
    const double scale = std::max(std::abs(evals(0)), std::abs(evals(n - 1)));
    Eigen::Index nulldim = 0;
    while (nulldim < n && std::abs(evals(nulldim)) <= 1e-10 * std::max(scale, 1e-300)) ++nulldim;
    nulldim = std::max<Eigen::Index>(nulldim, 1);

    // Remove only the constant direction from the null space; the remaining
    // null directions separate disconnected components.
    Eigen::MatrixXd features(n, egn);
    Eigen::Index filled = 0;
    if (nulldim > 1) {
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
        Eigen::MatrixXd basis = evecs.leftCols(nulldim);
        basis -= u * (u.transpose() * basis);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis, Eigen::ComputeThinU);
        for (Eigen::Index c = 0; c < nulldim - 1 && filled < egn; ++c) features.col(filled++) = svd.matrixU().col(c);
    }
    for (Eigen::Index c = nulldim; c < n && filled < egn; ++c) features.col(filled++) = evecs.col(c);
    return spherical_kmeans(features.leftCols(filled), k, seed);
}

double entropy_sum(const ClusterAssignment& a, std::span<const std::string> tactic_labels) {
    if (a.labels.size() != tactic_labels.size()) throw std::invalid_argument("entropy_sum: labels not aligned");
    std::map<std::string, std::map<int, double>> counts;
    std::map<std::string, double> totals;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
        counts[tactic_labels[i]][a.labels[i]] += 1.0;
        totals[tactic_labels[i]] += 1.0;
    }
    double sum = 0.0;
    for (const auto& [tactic, per_cluster] : counts) {
        double h = 0.0;
        for (const auto& [cluster, c] : per_cluster) {
            double p = c / totals[tactic];
            if (p > 0.0) h -= p * std::log(p);
        }
        sum += h;
    }
    return sum;
}

double balanced_score(const ClusterAssignment& a) {
    int k = a.k;
    for (int l : a.labels) k = std::max(k, l + 1);
    if (k < 1) throw std::invalid_argument("balanced_score: no clusters");
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (int l : a.labels) counts[static_cast<std::size_t>(l)] += 1.0;
    double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / k;
    double ss = 0.0;
    for (double c : counts) ss += (c - mean) * (c - mean);
    return std::sqrt(ss / k);
}

ClusteringScore score_clustering(const ClusterAssignment& a, std::span<const std::string> tactic_labels) {
    return {entropy_sum(a, tactic_labels), balanced_score(a)};
}

std::map<std::string, int> majority_assign(const ClusterAssignment& a, std::span<const std::string> tactic_labels) {
    if (a.labels.size() != tactic_labels.size()) throw std::invalid_argument("majority_assign: labels not aligned");
    std::map<std::string, std::map<int, int>> counts;
    for (std::size_t i = 0; i < a.labels.size(); ++i) ++counts[tactic_labels[i]][a.labels[i]];
    std::map<std::string, int> out;
    for (const auto& [tactic, per_cluster] : counts) {
        int best = -1, best_count = -1;
        for (const auto& [cluster, c] : per_cluster)  // ascending ids: first max wins ties
            if (c > best_count) {
                best = cluster;
                best_count = c;
            }
        out[tactic] = best;
    }
    return out;
}

std::vector<int> relabel_by_tactic(std::span<const std::string> tactic_labels, const std::map<std::string, int>& m) {
    std::vector<int> out;
    out.reserve(tactic_labels.size());
    for (const auto& t : tactic_labels) out.push_back(m.at(t));
    return out;
}

const std::map<std::string, std::string>& reference_super_tactics() {
    static const std::map<std::string, std::string> groups = {
        {"Impact", "Preparation and Reconnaissance"},
        {"Initial Access", "Preparation and Reconnaissance"},
        {"Resource Development", "Preparation and Reconnaissance"},
        {"Reconnaissance", "Preparation and Reconnaissance"},
        {"Discovery", "Preparation and Reconnaissance"},
        {"Persistence", "Persistence and Evasion"},
        {"Privilege Escalation", "Persistence and Evasion"},
        {"Execution", "Persistence and Evasion"},
        {"Defense Evasion", "Persistence and Evasion"},
        {"Credential Access", "Credential Movement"},
        {"Lateral Movement", "Credential Movement"},
        {"Command and Control", "Command and Data Manipulation"},
        {"Collection", "Command and Data Manipulation"},
        {"Exfiltration", "Command and Data Manipulation"},
    };
    return groups;
}

std::map<int, std::string> name_clusters(const std::map<std::string, int>& tactic_to_cluster) {
    const auto& ref = reference_super_tactics();
    std::map<std::pair<int, std::string>, int> overlap;
    std::set<int> clusters;
    for (const auto& [tactic, cluster] : tactic_to_cluster) {
        clusters.insert(cluster);
        auto it = ref.find(tactic);
        if (it != ref.end()) ++overlap[{cluster, it->second}];
    }
    std::vector<std::tuple<int, int, std::string>> candidates;  // (-overlap, cluster, name)
    for (const auto& [key, count] : overlap) candidates.emplace_back(-count, key.first, key.second);
    std::sort(candidates.begin(), candidates.end());
    std::map<int, std::string> names;
    std::set<std::string> used;
    for (const auto& [neg, cluster, name] : candidates) {
        if (names.contains(cluster) || used.contains(name)) continue;
        names[cluster] = name;
        used.insert(name);
    }
    for (int c : clusters)
        if (!names.contains(c)) names[c] = "Cluster " + std::to_string(c);
    return names;
}

std::vector<ReportRow> run_grid(const SimilarityMatrix& s, const Eigen::MatrixXd& vectors, const GridConfig& cfg) {
    const SimilarityMatrix thresholded = apply_thresholds(s, cfg.low, cfg.high, cfg.high_value);
    const std::string thr = "low=" + format_double(cfg.low) + ";high=" + format_double(cfg.high) +
                            ";high_value=" + format_double(cfg.high_value);
    std::vector<ReportRow> rows;
    auto add = [&](std::string method, std::string params, ClusterAssignment a) {
        ReportRow r;
        r.method = std::move(method);
        r.hyperparams = std::move(params);
        r.k = a.k;
        r.entropy_sum = entropy_sum(a, s.node_labels);
        r.balanced_score = balanced_score(a);
        r.modularity = modularity(thresholded, a);
        r.assignment = std::move(a);
        rows.push_back(std::move(r));
    };
    for (int k : cfg.kmeans_k) add("kmeans", "k=" + std::to_string(k), spherical_kmeans(vectors, k, cfg.seed));
    if (edge_weights(s.values).minCoeff() >= 0.0) add("louvain", "raw", louvain(s, cfg.seed));
    add("louvain", thr, louvain(thresholded, cfg.seed));
    for (auto [k, egn] : cfg.spectral) {
        std::string p = "k=" + std::to_string(k) + ";egn=" + std::to_string(egn);
        add("spectral", p, spectral_cluster(s, k, egn, cfg.seed));
        add("spectral", p + ";" + thr, spectral_cluster(thresholded, k, egn, cfg.seed));
    }
    return rows;
}

}  // namespace cyber::cluster
