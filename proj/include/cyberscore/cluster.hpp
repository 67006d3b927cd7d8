// Knowledgebase similarity graph and clustering of attack descriptions into
// super-tactics: spherical k-means, Louvain modularity optimization and
// Laplacian spectral clustering, scored by tactic entropy and cluster balance.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cyberscore/embed.hpp"

namespace cyber::cluster {

inline constexpr std::array<std::string_view, 14> kTactics = {
    "Reconnaissance",   "Resource Development", "Initial Access",  "Execution",
    "Persistence",      "Privilege Escalation", "Defense Evasion", "Credential Access",
    "Discovery",        "Lateral Movement",     "Collection",      "Command and Control",
    "Exfiltration",     "Impact"};

bool is_tactic(std::string_view name);

struct SimilarityMatrix {
    Eigen::MatrixXd values;               // n x n, symmetric
    std::vector<std::string> node_labels;  // tactic per row

    Eigen::Index n() const { return values.rows(); }
};

struct ClusterAssignment {
    std::vector<int> labels;  // dense ids in [0, k)
    int k = 0;
};

struct ClusteringScore {
    double entropy_sum = 0.0;
    double balanced_score = 0.0;
};

// Relabels ids in order of first appearance so they are dense in [0, k).
ClusterAssignment canonicalize(std::span<const int> labels);

SimilarityMatrix build_similarity(std::span<const embed::EmbeddingVector> vectors, std::vector<std::string> labels);

// Off-diagonal entries below `low` become 0 and entries above `high` become
// `high_value`; the diagonal is left alone.
SimilarityMatrix apply_thresholds(const SimilarityMatrix& s, double low, double high, double high_value);

struct KMeansOptions {
    int max_iter = 300;
    // k-means++ restarts; the run with the largest total cosine is kept.
    int restarts = 10;
};

// Rows of `points` are clustered by angle.
ClusterAssignment spherical_kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                                   const KMeansOptions& opts = {});
ClusterAssignment spherical_kmeans(std::span<const embed::EmbeddingVector> vectors, int k, std::uint64_t seed,
                                   const KMeansOptions& opts = {});

// Multi-level Louvain at resolution 1 with a seeded node sweep order. The
// diagonal is not an edge. The result admits no improving single-node move.
ClusterAssignment louvain(const SimilarityMatrix& s, std::uint64_t seed);

// Weighted modularity of a partition; the diagonal is not an edge.
double modularity(const Eigen::MatrixXd& weights, const ClusterAssignment& a);
inline double modularity(const SimilarityMatrix& s, const ClusterAssignment& a) { return modularity(s.values, a); }

// Laplacian L = D - S; rows of the eigenvectors for the `egn` smallest
// eigenvalues after the trivial constant one are clustered by spherical
// k-means into k groups.
ClusterAssignment spectral_cluster(const SimilarityMatrix& s, int k, int egn, std::uint64_t seed);

// Sum over tactics of the Shannon entropy (natural log) of how each tactic's
// members spread across clusters.
double entropy_sum(const ClusterAssignment& a, std::span<const std::string> tactic_labels);
// Population standard deviation of cluster sizes.
double balanced_score(const ClusterAssignment& a);
ClusteringScore score_clustering(const ClusterAssignment& a, std::span<const std::string> tactic_labels);

// Tactic -> cluster holding the plurality of its members (ties: lowest id).
std::map<std::string, int> majority_assign(const ClusterAssignment& a, std::span<const std::string> tactic_labels);
// Every node relabeled to its tactic's majority cluster.
std::vector<int> relabel_by_tactic(std::span<const std::string> tactic_labels, const std::map<std::string, int>& m);

// The four super-tactics the reference grouping uses, keyed by tactic.
const std::map<std::string, std::string>& reference_super_tactics();
// Names clusters after the reference super-tactic sharing the most tactics
// (one-to-one, greedy by overlap); leftovers become "Cluster <id>".
std::map<int, std::string> name_clusters(const std::map<std::string, int>& tactic_to_cluster);

struct GridConfig {
    double low = 0.25;
    double high = 0.85;
    double high_value = 0.5;
    std::vector<int> kmeans_k = {3, 4, 5};
    std::vector<std::pair<int, int>> spectral = {{4, 4}, {4, 6}};  // (k, egn)
    std::uint64_t seed = 1;
};

struct ReportRow {
    std::string method;
    std::string hyperparams;
    int k = 0;
    double entropy_sum = 0.0;
    double balanced_score = 0.0;
    double modularity = 0.0;  // against the thresholded matrix
    ClusterAssignment assignment;
};

// Runs every method/hyperparameter combination of the grid.
std::vector<ReportRow> run_grid(const SimilarityMatrix& s, const Eigen::MatrixXd& vectors, const GridConfig& cfg);

}  // namespace cyber::cluster
