#pragma once

// Shared test fixtures: random graph generators and brute-force reference
// implementations written directly from the textbook definitions. None of
// these call into the library code they are compared against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <iterator>
#include <string>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "pathgraph/autograd/tensor.hpp"
#include "pathgraph/error.hpp"
#include "pathgraph/graphio/graph.hpp"

namespace pgtest {

using pathgraph::ag::Tensor;
using pathgraph::graphio::Edge;
using pathgraph::graphio::EdgeList;
using pathgraph::graphio::PatchGraph;
using pathgraph::graphio::Point;

using Matrix = std::vector<std::vector<double>>;

struct Caught {
  pathgraph::ErrorKind kind;
  std::string message;
};

/// Runs fn and returns the library error it raised; anything else escapes.
inline Caught catch_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const pathgraph::Error& e) {
    return {e.kind(), e.what()};
  }
  throw std::logic_error("expected a pathgraph::Error");
}

inline Tensor random_tensor(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                            double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t = Tensor::matrix(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

inline Matrix to_rows(const Tensor& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t(r, c);
  return m;
}

inline double max_abs_diff(const Tensor& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) worst = std::max(worst, std::abs(a(r, c) - b[r][c]));
  return worst;
}

/// Random symmetric edge set without self loops; some nodes may be isolated.
inline EdgeList random_edges(std::mt19937_64& rng, std::size_t n, double density) {
  std::bernoulli_distribution coin(density);
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) {
        pairs.insert({i, j});
        pairs.insert({j, i});
      }
  EdgeList edges;
  for (const auto& [s, d] : pairs) edges.push_back({s, d});
  // Library code must not depend on edge order.
  std::shuffle(edges.begin(), edges.end(), rng);
  return edges;
}

/// Random graph on integer grid positions with float features.
inline PatchGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t d, double density = 0.35) {
  PatchGraph g;
  g.id = "rand";
  std::uniform_int_distribution<int> pos(0, 15);
  std::normal_distribution<double> feat(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) g.coords.push_back({double(pos(rng)), double(pos(rng))});
  g.feature_dim = d;
  for (std::size_t i = 0; i < n * d; ++i) g.features.push_back(float(feat(rng)));
  g.edges = random_edges(rng, n, density);
  return g;
}

inline Tensor features_of(const PatchGraph& g) {
  Tensor t = Tensor::matrix(g.num_nodes(), g.feature_dim);
  for (std::size_t i = 0; i < g.features.size(); ++i) t[i] = g.features[i];
  return t;
}

/// Relabels nodes: new index of old node v is perm[v]. Edge order is kept.
inline PatchGraph permute_graph(const PatchGraph& g, const std::vector<std::size_t>& perm) {
  PatchGraph out = g;
  const std::size_t n = g.num_nodes(), d = g.feature_dim;
  for (std::size_t v = 0; v < n; ++v) {
    out.coords[perm[v]] = g.coords[v];
    for (std::size_t c = 0; c < d; ++c) out.features[perm[v] * d + c] = g.features[v * d + c];
  }
  for (auto& e : out.edges) e = {perm[e.src], perm[e.dst]};
  if (g.region_mask)
    for (std::size_t v = 0; v < n; ++v) (*out.region_mask)[perm[v]] = (*g.region_mask)[v];
  return out;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("pathgraph-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// ---------------------------------------------------------------- kNN

/// All-pairs distances, full sort by (distance, index), then symmetrize.
inline std::set<std::pair<std::size_t, std::size_t>> brute_knn(const std::vector<Point>& pts, std::size_t k) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      cand.push_back({dx * dx + dy * dy, j});
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t r = 0; r < std::min(k, cand.size()); ++r) {
      out.insert({i, cand[r].second});
      out.insert({cand[r].second, i});
    }
  }
  return out;
}

// ---------------------------------------------------------------- B-splines

inline std::vector<double> open_knots(int degree, std::size_t size) {
  const std::size_t m = size + std::size_t(degree) + 1;
  std::vector<double> t(m);
  const std::size_t interior = size - std::size_t(degree);  // number of spans
  for (std::size_t i = 0; i < m; ++i) {
    if (i <= std::size_t(degree)) t[i] = 0.0;
    else if (i >= size) t[i] = 1.0;
    else t[i] = double(i - std::size_t(degree)) / double(interior);
  }
  return t;
}

/// N_{i,p}(u) by the Cox-de Boor recursion, with the last non-empty span
/// closed on the right so that u = 1 is covered.
inline double cox_de_boor(const std::vector<double>& t, std::size_t i, int p, double u) {
  if (p == 0) {
    if (t[i] <= u && u < t[i + 1]) return 1.0;
    const bool last_span = t[i] < t[i + 1] && t[i + 1] == t.back();
    return (last_span && u == t.back()) ? 1.0 : 0.0;
  }
  double left = 0.0, right = 0.0;
  const double dl = t[i + std::size_t(p)] - t[i];
  const double dr = t[i + std::size_t(p) + 1] - t[i + 1];
  if (dl > 0.0) left = (u - t[i]) / dl * cox_de_boor(t, i, p - 1, u);
  if (dr > 0.0) right = (t[i + std::size_t(p) + 1] - u) / dr * cox_de_boor(t, i + 1, p - 1, u);
  return left + right;
}

// ---------------------------------------------------------------- layers

struct NaiveSplineKernel {
  int degree = 1;
  std::size_t kx = 5, ky = 5;
  std::vector<Matrix> w;  // [p][a][b], p = iy * kx + ix
  Matrix root;            // empty when unused
  std::vector<double> bias;
};

/// f'_i = root^T f_i + (1/|N_i|) sum_j sum_p B_p(u_ij) w_p^T f_j + bias,
/// with u_ij recomputed from coordinates.
inline Matrix naive_spline_conv(const std::vector<Point>& coords, const EdgeList& edges, const Matrix& x,
                                const NaiveSplineKernel& k) {
  const std::size_t n = coords.size();
  const std::size_t d_out = k.bias.size();
  double norm = 0.0;
  for (const Edge& e : edges) {
    norm = std::max(norm, std::abs(coords[e.dst].x - coords[e.src].x));
    norm = std::max(norm, std::abs(coords[e.dst].y - coords[e.src].y));
  }
  if (norm == 0.0) norm = 1.0;
  const auto tx = open_knots(k.degree, k.kx), ty = open_knots(k.degree, k.ky);

  Matrix out(n, std::vector<double>(d_out, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> nbrs;
    for (const Edge& e : edges)
      if (e.dst == i) nbrs.push_back(e.src);
    for (std::size_t j : nbrs) {
      const double ux = std::abs(coords[j].x - coords[i].x) / norm;
      const double uy = std::abs(coords[j].y - coords[i].y) / norm;
      for (std::size_t iy = 0; iy < k.ky; ++iy) {
        for (std::size_t ix = 0; ix < k.kx; ++ix) {
          const double basis = cox_de_boor(tx, ix, k.degree, ux) * cox_de_boor(ty, iy, k.degree, uy);
          if (basis == 0.0) continue;
          const Matrix& wp = k.w[iy * k.kx + ix];
          for (std::size_t a = 0; a < x[j].size(); ++a)
            for (std::size_t b = 0; b < d_out; ++b) out[i][b] += basis * x[j][a] * wp[a][b] / double(nbrs.size());
        }
      }
    }
    for (std::size_t b = 0; b < d_out; ++b) {
      if (!k.root.empty())
        for (std::size_t a = 0; a < x[i].size(); ++a) out[i][b] += k.root[a][b] * x[i][a];
      out[i][b] += k.bias[b];
    }
  }
  return out;
}

struct NaiveGatHead {
  Matrix w;               // d_in x d_head
  std::vector<double> a;  // 2 * d_head
};

struct NaiveGatResult {
  Matrix out;
  /// Per head, per receiving node: attention weights over its neighbourhood.
  std::vector<std::vector<std::vector<double>>> alpha_rows;
};

inline NaiveGatResult naive_gat(std::size_t n, const EdgeList& edges, const Matrix& x,
                                const std::vector<NaiveGatHead>& heads, bool concat, double slope, bool self_loops) {
  NaiveGatResult res;
  const std::size_t dh = heads[0].w[0].size();
  const std::size_t width = concat ? dh * heads.size() : dh;
  res.out.assign(n, std::vector<double>(width, 0.0));
  for (std::size_t k = 0; k < heads.size(); ++k) {
    const auto& hd = heads[k];
    Matrix h(n, std::vector<double>(dh, 0.0));
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t c = 0; c < dh; ++c)
        for (std::size_t a = 0; a < x[v].size(); ++a) h[v][c] += x[v][a] * hd.w[a][c];
    std::vector<std::vector<double>> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> nbrs;
      for (const Edge& e : edges)
        if (e.dst == i) nbrs.push_back(e.src);
      if (self_loops) nbrs.push_back(i);
      if (nbrs.empty()) continue;
      std::vector<double> e(nbrs.size());
      for (std::size_t t = 0; t < nbrs.size(); ++t) {
        double s = 0.0;
        for (std::size_t c = 0; c < dh; ++c) s += hd.a[c] * h[i][c] + hd.a[dh + c] * h[nbrs[t]][c];
        e[t] = s > 0.0 ? s : slope * s;
      }
      const double mx = *std::max_element(e.begin(), e.end());
      double z = 0.0;
      for (double& v : e) z += (v = std::exp(v - mx));
      for (double& v : e) v /= z;
      rows[i] = e;
      for (std::size_t t = 0; t < nbrs.size(); ++t)
        for (std::size_t c = 0; c < dh; ++c) {
          const double m = e[t] * h[nbrs[t]][c];
          if (concat) res.out[i][k * dh + c] += m;
          else res.out[i][c] += m / double(heads.size());
        }
    }
    res.alpha_rows.push_back(rows);
  }
  for (auto& row : res.out)
    for (double& v : row) v = std::max(0.0, v);
  return res;
}

/// x'_i = ReLU(sum_{j in N(i) + i} W^T x_j / sqrt(deg_i deg_j)), deg with self loop.
inline Matrix naive_gcn(std::size_t n, const EdgeList& edges, const Matrix& x, const Matrix& w) {
  std::vector<double> deg(n, 1.0);
  for (const Edge& e : edges) deg[e.dst] += 1.0;
  const std::size_t d_out = w[0].size();
  Matrix out(n, std::vector<double>(d_out, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> nbrs{i};
    for (const Edge& e : edges)
      if (e.dst == i) nbrs.push_back(e.src);
    for (std::size_t j : nbrs)
      for (std::size_t b = 0; b < d_out; ++b)
        for (std::size_t a = 0; a < x[j].size(); ++a) out[i][b] += w[a][b] * x[j][a] / std::sqrt(deg[i] * deg[j]);
  }
  for (auto& row : out)
    for (double& v : row) v = std::max(0.0, v);
  return out;
}

// ---------------------------------------------------------------- kappa

/// Agreement form: (p_o - p_e) / (1 - p_e) with agreement weights
/// 1 - (i-j)^2/(C-1)^2 (quadratic) or the identity (unweighted).
inline double direct_kappa(const std::vector<std::vector<std::uint64_t>>& cm, bool quadratic) {
  const std::size_t c = cm.size();
  double total = 0.0;
  std::vector<double> row(c, 0.0), col(c, 0.0);
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      total += double(cm[i][j]);
      row[i] += double(cm[i][j]);
      col[j] += double(cm[i][j]);
    }
  double po = 0.0, pe = 0.0;
  for (std::size_t i = 0; i < c; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      double agree = i == j ? 1.0 : 0.0;
      if (quadratic) {
        const double dist = double(i) - double(j);
        agree = 1.0 - dist * dist / (double(c - 1) * double(c - 1));
      }
      po += agree * double(cm[i][j]) / total;
      pe += agree * (row[i] / total) * (col[j] / total);
    }
  return (po - pe) / (1.0 - pe);
}

/// Mann-Whitney ROC-AUC with midranks for ties.
inline double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * double(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[order[t]] = mid;
    i = j + 1;
  }
  double pos = 0.0, neg = 0.0, rank_sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (positive[i]) {
      pos += 1.0;
      rank_sum += rank[i];
    } else {
      neg += 1.0;
    }
  }
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

}  // namespace pgtest
