#include "cepp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cepp {

namespace {

double strict_stod(const std::string& text, const std::string& context) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("not a number: '" + context + "'");
  }
  if (used != text.size()) throw InvalidArgument("not a number: '" + context + "'");
  return v;
}

}  // namespace

double parse_number_string(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return strict_stod(text, text);
  const double num = strict_stod(text.substr(0, slash), text);
  const double den = strict_stod(text.substr(slash + 1), text);
  if (den == 0.0) throw InvalidArgument("rational with zero denominator: '" + text + "'");
  return num / den;
}

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* cap = std::getenv("CEPP_THREADS")) {
    const int c = std::atoi(cap);
    if (c > 0) n = std::min(n, c);
  }
  return n;
}

MetzlerMatrix::MetzlerMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
    throw InvalidArgument("MetzlerMatrix requires a nonempty square matrix");
  for (Eigen::Index i = 0; i < entries_.rows(); ++i)
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      if (i == j) continue;
      const double e = entries_(i, j);
      if (e < 0.0) {
        if (e < -1e-12) {
          std::ostringstream os;
          os << "not Metzler: entry (" << i << "," << j << ") = " << e;
          throw InvalidArgument(os.str());
        }
        entries_(i, j) = 0.0;
      }
    }
}

namespace {

// Tarjan SCC on the graph with edge i->j iff M(j,i) != 0, i != j.
struct Tarjan {
  const Matrix& m;
  int n;
  std::vector<int> index, low, comp;
  std::vector<bool> on_stack;
  std::vector<int> stack;
  int counter = 0;
  std::vector<std::vector<int>> components;

  explicit Tarjan(const Matrix& mat)
      : m(mat),
        n(static_cast<int>(mat.rows())),
        index(n, -1),
        low(n, 0),
        comp(n, -1),
        on_stack(n, false) {}

  void run() {
    for (int v = 0; v < n; ++v)
      if (index[v] < 0) strongconnect(v);
  }

  // Iterative DFS; dims here are small but recursion depth should not bind.
  void strongconnect(int root) {
    struct Frame {
      int v;
      int next_w;
    };
    std::vector<Frame> frames{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      for (int w = f.next_w; w < n; ++w) {
        if (w == f.v || m(w, f.v) == 0.0) continue;  // edge v->w iff M(w,v) != 0
        f.next_w = w + 1;
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) low[f.v] = std::min(low[f.v], index[w]);
      }
      if (descended) continue;
      if (low[f.v] == index[f.v]) {
        std::vector<int> scc;
        while (true) {
          const int w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = static_cast<int>(components.size());
          scc.push_back(w);
          if (w == f.v) break;
        }
        std::sort(scc.begin(), scc.end());
        components.push_back(std::move(scc));
      }
      const int child = f.v;
      frames.pop_back();
      if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[child]);
    }
  }
};

Matrix submatrix(const Matrix& m, const std::vector<int>& idx) {
  Matrix b(idx.size(), idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r)
    for (std::size_t c = 0; c < idx.size(); ++c) b(r, c) = m(idx[r], idx[c]);
  return b;
}

double dense_abscissa(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

constexpr int kPowerIterationCap = 10000;
constexpr double kRayleighTolerance = 1e-13;

// Power iteration on the shifted nonnegative block B = M + (max|diag|+1) I.
// The shift makes B entrywise nonnegative with positive diagonal, hence
// primitive when the block is irreducible. Collatz-Wielandt quotients give
// certified brackets for the Perron root of B at every iterate.
bool power_iteration(const Matrix& block, double* abscissa, Vector* vec) {
  const int n = static_cast<int>(block.rows());
  if (n == 1) {
    *abscissa = block(0, 0);
    *vec = Vector::Ones(1);
    return true;
  }
  const double shift = block.diagonal().cwiseAbs().maxCoeff() + 1.0;
  Matrix b = block;
  b.diagonal().array() += shift;
  Vector v = Vector::Ones(n) / n;
  for (int it = 0; it < kPowerIterationCap; ++it) {
    const Vector w = b * v;
    double lo = w(0) / v(0), hi = lo;
    for (int i = 1; i < n; ++i) {
      const double q = w(i) / v(i);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    if (hi - lo < kRayleighTolerance * (1.0 + std::abs(hi))) {
      *abscissa = 0.5 * (lo + hi) - shift;
      *vec = v / v.sum();
      return true;
    }
    const double norm = w.sum();
    if (!(norm > 0.0)) return false;
    v = w / norm;
  }
  return false;
}

// Abscissa and Perron vector of one irreducible block; dense fallback for
// small blocks when the iteration stalls.
void block_perron(const Matrix& block, double* abscissa, Vector* vec) {
  if (power_iteration(block, abscissa, vec)) return;
  const int n = static_cast<int>(block.rows());
  if (n <= 8) {
    Eigen::EigenSolver<Matrix> es(block);
    int best = 0;
    for (int k = 1; k < n; ++k)
      if (es.eigenvalues()(k).real() > es.eigenvalues()(best).real()) best = k;
    *abscissa = es.eigenvalues()(best).real();
    Vector v = es.eigenvectors().col(best).real().cwiseAbs();
    *vec = v / v.sum();
    return;
  }
  std::ostringstream os;
  os << "power iteration did not converge after " << kPowerIterationCap
     << " iterations on a block of dim " << n;
  throw ConvergenceError(os.str());
}

}  // namespace

double FrobeniusForm::abscissa() const {
  return *std::max_element(block_abscissae.begin(), block_abscissae.end());
}

int FrobeniusForm::dominant_block() const {
  return static_cast<int>(std::max_element(block_abscissae.begin(), block_abscissae.end()) -
                          block_abscissae.begin());
}

Matrix FrobeniusForm::permuted(const Matrix& m) const {
  const int n = static_cast<int>(permutation.size());
  Matrix out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = m(permutation[r], permutation[c]);
  return out;
}

FrobeniusForm frobenius_normal_form(const MetzlerMatrix& m) {
  Tarjan tarjan(m.entries());
  tarjan.run();
  // Tarjan emits components in reverse topological order of the condensation
  // (an edge u->v between components means comp(v) is emitted before comp(u)).
  // Reversing gives sources first, which makes the permuted matrix block
  // lower triangular for the edge convention i->j iff M(j,i) != 0.
  FrobeniusForm form;
  form.orientation = TriangularOrientation::Lower;
  const auto& comps = tarjan.components;
  for (auto it = comps.rbegin(); it != comps.rend(); ++it) {
    form.blocks.push_back(*it);
    for (int idx : *it) form.permutation.push_back(idx);
    Matrix sub = submatrix(m.entries(), *it);
    MetzlerMatrix block(sub);
    double abscissa;
    Vector vec;
    block_perron(block.entries(), &abscissa, &vec);
    form.block_matrices.push_back(std::move(block));
    form.block_abscissae.push_back(abscissa);
  }
  return form;
}

double spectral_abscissa(const MetzlerMatrix& m) {
  return frobenius_normal_form(m).abscissa();
}

PerronResult perron_vectors(const MetzlerMatrix& m, Side side) {
  const MetzlerMatrix work = (side == Side::Left) ? MetzlerMatrix(m.entries().transpose()) : m;
  const FrobeniusForm form = frobenius_normal_form(work);
  const double top = form.abscissa();

  PerronResult result;
  result.abscissa = top;
  std::vector<int> tied;
  for (std::size_t k = 0; k < form.block_abscissae.size(); ++k)
    if (top - form.block_abscissae[k] < kBlockTieTolerance) tied.push_back(static_cast<int>(k));

  auto extend = [&](int block_index) {
    Vector full = Vector::Zero(m.dim());
    double abscissa;
    Vector v;
    block_perron(form.block_matrices[block_index].entries(), &abscissa, &v);
    const auto& idx = form.blocks[block_index];
    for (std::size_t r = 0; r < idx.size(); ++r) full(idx[r]) = v(r);
    return Vector(full / full.sum());
  };

  result.vector = extend(tied.front());
  if (tied.size() > 1) {
    result.degenerate_tie = true;
    for (std::size_t k = 1; k < tied.size(); ++k) result.tied_alternates.push_back(extend(tied[k]));
  }
  return result;
}

RegularSplitting::RegularSplitting(Matrix f, Matrix v) : F(std::move(f)), V(std::move(v)) {
  if (F.rows() != F.cols() || V.rows() != V.cols() || F.rows() != V.rows())
    throw InvalidArgument("regular splitting requires square matrices of equal dim");
  if ((F.array() < -1e-12).any()) throw InvalidArgument("not a regular splitting: F has negative entries");
  Eigen::FullPivLU<Matrix> lu(V);
  if (!lu.isInvertible()) throw InvalidArgument("not a regular splitting: V is singular");
  Vinv = lu.inverse();
  if ((Vinv.array() < -1e-10).any())
    throw InvalidArgument("not a regular splitting: V^{-1} has negative entries");
}

int numerical_rank(const Matrix& m, double relative_threshold) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > relative_threshold * sv(0)) ++rank;
  return rank;
}

NgmData ngm(const Matrix& F, const Matrix& V) {
  RegularSplitting split(F, V);
  NgmData data;
  data.K = split.F * split.Vinv;
  MetzlerMatrix k(data.K);
  // K is entrywise nonnegative, so its spectral abscissa is its radius.
  data.rho = spectral_abscissa(k);
  data.left_perron = perron_vectors(k, Side::Left).vector;
  data.right_perron = perron_vectors(k, Side::Right).vector;
  data.numerical_rank = numerical_rank(data.K);
  data.rank_one = (data.numerical_rank == 1);
  return data;
}

}  // namespace cepp
