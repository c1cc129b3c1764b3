#include "reldiff/coefficients.hpp"

#include <algorithm>
#include <cmath>

#include "reldiff/error.hpp"
#include "reldiff/linalg.hpp"

namespace reldiff {

template <class S>
void SystemMatrices<S>::validate() const {
  if (a.empty()) throw Error(ErrorKind::invalid_argument, "system needs at least one delay matrix");
  const std::size_t dim = b.rows();
  if (dim == 0 || b.cols() == 0) throw Error(ErrorKind::dimension_mismatch, "B must be a nonempty d x m matrix");
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j].rows() != dim || a[j].cols() != dim) {
      throw Error(ErrorKind::dimension_mismatch, "A_" + std::to_string(j + 1) + " is " + std::to_string(a[j].rows()) +
                                                     "x" + std::to_string(a[j].cols()) + " but B has " +
                                                     std::to_string(dim) + " rows");
    }
  }
}

template struct SystemMatrices<Complex>;
template struct SystemMatrices<ExactComplex>;

SystemMatrices<Complex> to_numeric(const SystemMatrices<ExactComplex>& s) {
  SystemMatrices<Complex> out;
  for (const auto& a : s.a) out.a.push_back(to_numeric(a));
  out.b = to_numeric(s.b);
  return out;
}

SystemSpec SystemSpec::from_exact(SystemMatrices<ExactComplex> m) {
  m.validate();
  SystemSpec spec;
  spec.mode = ScalarMode::exact;
  spec.numeric_matrices = to_numeric(m);
  spec.exact_matrices = std::move(m);
  return spec;
}

SystemSpec SystemSpec::from_numeric(SystemMatrices<Complex> m) {
  m.validate();
  SystemSpec spec;
  spec.mode = ScalarMode::numeric;
  spec.numeric_matrices = std::move(m);
  return spec;
}

const SystemMatrices<ExactComplex>& SystemSpec::exact() const {
  if (!exact_matrices) throw Error(ErrorKind::mixed_scalar_mode, "system has floating entries; exact arithmetic unavailable");
  return *exact_matrices;
}

template <class S>
XiTable<S>::XiTable(std::vector<Matrix<S>> a) : a_(std::move(a)) {
  if (a_.empty()) throw Error(ErrorKind::invalid_argument, "system needs at least one delay matrix");
  d_ = a_.front().rows();
  zero_ = Matrix<S>(d_, d_);
  cache_.emplace(IntVector(a_.size(), 0), Matrix<S>::identity(d_));
}

template <class S>
const Matrix<S>& XiTable<S>::lookup_locked(const IntVector& n) const {
  if (std::any_of(n.begin(), n.end(), [](std::int64_t v) { return v < 0; })) return zero_;
  if (auto it = cache_.find(n); it != cache_.end()) return it->second;

  // Explicit stack: push a point, then its missing predecessors; compute once all are cached.
  std::vector<IntVector> stack{n};
  while (!stack.empty()) {
    const IntVector top = stack.back();
    if (cache_.count(top)) {
      stack.pop_back();
      continue;
    }
    bool ready = true;
    for (std::size_t k = 0; k < top.size(); ++k) {
      if (top[k] == 0) continue;
      IntVector prev = top;
      --prev[k];
      if (!cache_.count(prev)) {
        stack.push_back(std::move(prev));
        ready = false;
      }
    }
    if (!ready) continue;
    Matrix<S> sum(d_, d_);
    for (std::size_t k = 0; k < top.size(); ++k) {
      if (top[k] == 0) continue;
      IntVector prev = top;
      --prev[k];
      sum += a_[k] * cache_.at(prev);
    }
    cache_.emplace(top, std::move(sum));
    stack.pop_back();
  }
  return cache_.at(n);
}

template <class S>
Matrix<S> XiTable<S>::xi(const IntVector& n) const {
  if (n.size() != a_.size()) throw Error(ErrorKind::dimension_mismatch, "lattice point length differs from N");
  std::lock_guard lock(mutex_);
  return lookup_locked(n);
}

template <class S>
std::size_t XiTable<S>::cached_entries() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

template class XiTable<Complex>;
template class XiTable<ExactComplex>;

template <class S>
DelaySystem<S>::DelaySystem(SystemMatrices<S> matrices, DelayVector delays)
    : matrices_(std::make_shared<const SystemMatrices<S>>(std::move(matrices))), delays_(std::move(delays)) {
  matrices_->validate();
  if (matrices_->n_delays() != delays_.size()) {
    throw Error(ErrorKind::dimension_mismatch, "system has " + std::to_string(matrices_->n_delays()) +
                                                   " delay matrices but " + std::to_string(delays_.size()) + " delays");
  }
  xi_ = std::make_shared<XiTable<S>>(matrices_->a);
}

template <class S>
DelaySystem<S> DelaySystem<S>::with_delays(DelayVector delays) const {
  if (delays.size() != delays_.size()) throw Error(ErrorKind::dimension_mismatch, "delay vectors have different lengths");
  DelaySystem copy = *this;
  copy.delays_ = std::move(delays);
  return copy;
}

template class DelaySystem<Complex>;
template class DelaySystem<ExactComplex>;

std::vector<LatticePoint> class_members(const DelayVector& delays, const ClassKey& key) {
  if (key.c.size() != delays.basis_size()) throw Error(ErrorKind::dimension_mismatch, "class key length differs from h");
  std::vector<LatticePoint> out;
  const std::size_t n = delays.size();
  const std::size_t h = delays.basis_size();
  IntVector current(n, 0);
  IntVector remaining = key.c;
  // Rows of M are nonnegative and nonzero, so componentwise remaining >= 0 bounds the search.
  auto visit = [&](auto&& self, std::size_t j) -> void {
    if (j == n) {
      if (std::all_of(remaining.begin(), remaining.end(), [](std::int64_t v) { return v == 0; })) {
        out.emplace_back(current);
      }
      return;
    }
    self(self, j + 1);
    std::int64_t count = 0;
    while (true) {
      bool fits = true;
      for (std::size_t k = 0; k < h; ++k) fits = fits && remaining[k] >= delays.matrix()(j, k);
      if (!fits) break;
      for (std::size_t k = 0; k < h; ++k) remaining[k] -= delays.matrix()(j, k);
      ++count;
      current[j] = count;
      self(self, j + 1);
    }
    for (std::size_t k = 0; k < h; ++k) remaining[k] += count * delays.matrix()(j, k);
    current[j] = 0;
  };
  visit(visit, 0);
  std::sort(out.begin(), out.end());
  return out;
}

template <class S>
Matrix<S> xi_hat(const XiTable<S>& table, const DelayVector& delays, const ClassKey& key) {
  Matrix<S> sum(table.dimension(), table.dimension());
  for (const auto& p : class_members(delays, key)) sum += table.xi(p.n);
  return sum;
}

template <class S>
Matrix<S> xi_hat(const XiTable<S>& table, const DelayVector& delays, const ClassKey& key, const TimeBound& horizon) {
  const TimeStamp t = delays.time_of(key);
  if (delays.place(t, horizon).side == Side::above) {
    throw Error(ErrorKind::class_beyond_horizon, "class time " + to_string(t, delays) + " exceeds the horizon");
  }
  return xi_hat(table, delays, key);
}

template Matrix<Complex> xi_hat(const XiTable<Complex>&, const DelayVector&, const ClassKey&);
template Matrix<ExactComplex> xi_hat(const XiTable<ExactComplex>&, const DelayVector&, const ClassKey&);
template Matrix<Complex> xi_hat(const XiTable<Complex>&, const DelayVector&, const ClassKey&, const TimeBound&);
template Matrix<ExactComplex> xi_hat(const XiTable<ExactComplex>&, const DelayVector&, const ClassKey&,
                                     const TimeBound&);

template <class S>
XiHatTable<S>::XiHatTable(const XiTable<S>& table, const DelayVector& delays, const TimeBound& horizon, bool strict) {
  if (table.n_delays() != delays.size()) throw Error(ErrorKind::dimension_mismatch, "system and delay vector lengths differ");
  const LatticeEnumeration points = enumerate_lattice_points(delays, horizon, strict);
  ambiguous_ = points.ambiguous;
  std::map<ClassKey, Matrix<S>> sums;
  std::map<ClassKey, LatticePoint> reps;
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    const auto& key = points.keys[i];
    auto it = sums.find(key);
    if (it == sums.end()) {
      sums.emplace(key, table.xi(points.points[i].n));
      reps.emplace(key, points.points[i]);
    } else {
      it->second += table.xi(points.points[i].n);
    }
  }
  for (auto& [key, value] : sums) {
    entries_.push_back({key, reps.at(key), delays.time_of(key), std::move(value)});
  }
  std::sort(entries_.begin(), entries_.end(), [&](const XiHatEntry<S>& a, const XiHatEntry<S>& b) {
    const auto c = delays.compare(a.time, b.time);
    if (c != std::strong_ordering::equal) return c == std::strong_ordering::less;
    return a.key < b.key;
  });
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].key, i);
}

template <class S>
const Matrix<S>& XiHatTable<S>::at(const ClassKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw Error(ErrorKind::class_beyond_horizon, "class not within the table horizon");
  return entries_[it->second].value;
}

template class XiHatTable<Complex>;
template class XiHatTable<ExactComplex>;

namespace {

template <class S>
S from_bigint(const BigInt& z);

template <>
Complex from_bigint<Complex>(const BigInt& z) {
  return {z.get_d(), 0.0};
}

template <>
ExactComplex from_bigint<ExactComplex>(const BigInt& z) {
  return ExactComplex(Rational(z));
}

}  // namespace

template <class S>
Matrix<S> diblik_xi_hat(const Matrix<S>& a, std::int64_t k, const LatticePoint& n) {
  if (k <= 0) throw Error(ErrorKind::invalid_argument, "delay ratio k must be positive");
  if (n.size() != 2) throw Error(ErrorKind::dimension_mismatch, "two-delay form needs a lattice point of length 2");
  const std::int64_t t = n.n[0] + k * n.n[1];
  Matrix<S> sum(a.rows(), a.cols());
  Matrix<S> a_power = Matrix<S>::identity(a.rows());
  for (std::int64_t j = 0; j <= t / k; ++j) {
    BigInt binom;
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(t - j * (k - 1)), static_cast<unsigned long>(j));
    const S c = from_bigint<S>(binom);
    sum += a_power.map([&](const S& v) { return c * v; });
    a_power = a_power * a;
  }
  return sum;
}

template Matrix<Complex> diblik_xi_hat(const Matrix<Complex>&, std::int64_t, const LatticePoint&);
template Matrix<ExactComplex> diblik_xi_hat(const Matrix<ExactComplex>&, std::int64_t, const LatticePoint&);

template <class S>
GeneratorSet<S> controllability_generators(const DelaySystem<S>& system, const TimeBound& bound, bool strict) {
  const XiHatTable<S> table(system.xi_table(), system.delays(), bound, strict);
  GeneratorSet<S> out;
  out.ambiguous = table.ambiguous();
  for (const auto& e : table.entries()) {
    out.generators.push_back({e.key, e.representative, e.time, e.value * system.matrices().b});
  }
  return out;
}

template GeneratorSet<Complex> controllability_generators(const DelaySystem<Complex>&, const TimeBound&, bool);
template GeneratorSet<ExactComplex> controllability_generators(const DelaySystem<ExactComplex>&, const TimeBound&,
                                                               bool);

double infinity_norm(const Matrix<Complex>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (const auto& v : m.row(i)) row += std::abs(v);
    best = std::max(best, row);
  }
  return best;
}

bool is_negligible(const Matrix<Complex>& m, double scale) {
  const double threshold = 1e-12 * std::max(1.0, scale);
  return std::all_of(m.data().begin(), m.data().end(), [&](const Complex& v) { return std::abs(v) <= threshold; });
}

bool is_negligible(const Matrix<ExactComplex>& m, double) { return m.is_zero(); }

}  // namespace reldiff
