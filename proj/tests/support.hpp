// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cyberscore/cluster.hpp"
#include "cyberscore/rng.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(cyber::Rng& rng, Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    return m;
}

// Planted partition: `blocks` groups of `size` unit vectors. Vectors share a
// group direction plus small noise so within-group cosines are high and
// across-group cosines near zero.
struct Planted {
    Eigen::MatrixXd points;  // one row per node
    std::vector<int> truth;
};

inline Planted planted_vectors(cyber::Rng& rng, int blocks, int size, int dim, double noise) {
    Planted p;
    p.points.resize(blocks * size, dim);
    for (int b = 0; b < blocks; ++b) {
        for (int i = 0; i < size; ++i) {
            const int row = b * size + i;
            for (int d = 0; d < dim; ++d) p.points(row, d) = noise * rng.normal();
            p.points(row, b) += 1.0;
            p.truth.push_back(b);
        }
    }
    return p;
}

inline Eigen::MatrixXd cosine_matrix(const Eigen::MatrixXd& points) {
    Eigen::MatrixXd u = points.rowwise().normalized();
    return u * u.transpose();
}

// Best agreement over all relabelings of the found clusters (k <= 8).
inline double label_agreement(const std::vector<int>& truth, const std::vector<int>& found, int k) {
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
        std::size_t hit = 0;
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (found[i] < k && perm[static_cast<std::size_t>(found[i])] == truth[i]) ++hit;
        best = std::max(best, static_cast<double>(hit) / static_cast<double>(truth.size()));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Direct double loop over Q with self-loops excluded.
inline double modularity_oracle(const Eigen::MatrixXd& w, const std::vector<int>& labels) {
    const auto n = w.rows();
    std::vector<double> k(static_cast<std::size_t>(n), 0.0);
    double m2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) {
                k[static_cast<std::size_t>(i)] += w(i, j);
                m2 += w(i, j);
            }
    double q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)]) continue;
            const double a = i == j ? 0.0 : w(i, j);
            q += a - k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(j)] / m2;
        }
    return q / m2;
}

// Every set partition of n nodes as restricted-growth strings.
inline void for_each_partition(int n, const auto& visit) {
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    auto rec = [&](auto&& self, int i, int max_label) -> void {
        if (i == n) {
            visit(a);
            return;
        }
        for (int c = 0; c <= max_label + 1; ++c) {
            a[static_cast<std::size_t>(i)] = c;
            self(self, i + 1, std::max(max_label, c));
        }
    };
    a[0] = 0;
    rec(rec, 1, 0);
}

}  // namespace testing
