#include "eigenflow/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace eigenflow::jets {

JetSpace::JetSpace(int n, int degree_cap) : n_(n), cap_(degree_cap) {
  if (n < 1) throw UsageError("JetSpace: need at least one variable");
  if (degree_cap < 0) throw UsageError("JetSpace: negative degree cap");
  indices_ = all_multi_indices(n, 0, degree_cap);
  degrees_.reserve(indices_.size());
  for (std::size_t r = 0; r < indices_.size(); ++r) {
    degrees_.push_back(degree(indices_[r]));
    ranks_.emplace(indices_[r], static_cast<int>(r));
  }
  const std::size_t s = indices_.size();
  products_.assign(s * s, -1);
  MultiIndex sum(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      if (degrees_[i] + degrees_[j] > cap_) continue;
      for (int v = 0; v < n; ++v)
        sum[static_cast<std::size_t>(v)] =
            indices_[i][static_cast<std::size_t>(v)] + indices_[j][static_cast<std::size_t>(v)];
      products_[i * s + j] = ranks_.at(sum);
    }
  }
}

int JetSpace::rank_of(const MultiIndex& m) const {
  auto it = ranks_.find(m);
  return it == ranks_.end() ? -1 : it->second;
}

std::shared_ptr<const JetSpace> JetSpace::get(int n, int degree_cap) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> registry;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = registry[{n, degree_cap}];
  if (!slot) slot = std::make_shared<JetSpace>(n, degree_cap);
  return slot;
}

Jet::Jet(std::shared_ptr<const JetSpace> space) : space_(std::move(space)) {
  coef_ = CVec::Zero(space_->size());
}

Jet Jet::constant(std::shared_ptr<const JetSpace> space, Complex value) {
  Jet j(std::move(space));
  j.coef_[0] = value;
  return j;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> space, int i) {
  Jet j(space);
  MultiIndex m(static_cast<std::size_t>(space->num_vars()), 0);
  m[static_cast<std::size_t>(i)] = 1;
  const int r = space->rank_of(m);
  if (r < 0) throw UsageError("Jet::variable: degree cap must be >= 1");
  j.coef_[r] = 1.0;
  return j;
}

Complex Jet::coefficient(const MultiIndex& m) const {
  const int r = space_->rank_of(m);
  return r < 0 ? Complex(0.0) : coef_[r];
}

void Jet::set_coefficient(const MultiIndex& m, Complex value) {
  const int r = space_->rank_of(m);
  if (r < 0) throw DegreeMismatch("Jet::set_coefficient: multi-index exceeds degree cap");
  coef_[r] = value;
}

CVec Jet::linear_part() const {
  const int n = num_vars();
  CVec g = CVec::Zero(n);
  MultiIndex m(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    m[static_cast<std::size_t>(i)] = 1;
    const int r = space_->rank_of(m);
    if (r >= 0) g[i] = coef_[r];
    m[static_cast<std::size_t>(i)] = 0;
  }
  return g;
}

void Jet::require_same_space(const Jet& o) const {
  if (!space_ || !o.space_ || space_->num_vars() != o.space_->num_vars() ||
      space_->degree_cap() != o.space_->degree_cap())
    throw DegreeMismatch("jet operands live in different spaces");
}

Jet& Jet::operator+=(const Jet& o) {
  require_same_space(o);
  coef_ += o.coef_;
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_same_space(o);
  coef_ -= o.coef_;
  return *this;
}

Jet& Jet::operator*=(Complex s) {
  coef_ *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  a.require_same_space(b);
  Jet out(a.space_);
  const int s = a.space_->size();
  for (int i = 0; i < s; ++i) {
    const Complex ai = a.coef_[i];
    if (ai == Complex(0.0)) continue;
    for (int j = 0; j < s; ++j) {
      const Complex bj = b.coef_[j];
      if (bj == Complex(0.0)) continue;
      const int r = a.space_->product_rank(i, j);
      if (r >= 0) out.coef_[r] += ai * bj;
    }
  }
  return out;
}

Jet Jet::compose(std::span<const Jet> inner) const {
  if (static_cast<int>(inner.size()) != num_vars())
    throw DegreeMismatch("Jet::compose: wrong number of inner jets");
  for (const Jet& b : inner) {
    inner[0].require_same_space(b);
    if (std::abs(b.constant_term()) != 0.0)
      throw NonzeroConstantComposition("Jet::compose: inner jet has nonzero constant term");
  }
  auto target = inner[0].space_;
  const int cap = std::min(degree_cap(), target->degree_cap());

  // Memoized powers of each inner jet up to the outer degree cap.
  std::vector<std::vector<Jet>> powers(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) {
    powers[i].reserve(static_cast<std::size_t>(cap) + 1);
    powers[i].push_back(Jet::constant(target, 1.0));
    for (int e = 1; e <= cap; ++e) powers[i].push_back(powers[i].back() * inner[i]);
  }

  Jet out(target);
  for (int r = 0; r < space_->size(); ++r) {
    const Complex c = coef_[r];
    if (c == Complex(0.0)) continue;
    if (space_->degree_at(r) > cap) continue;  // fully truncated: inner jets vanish at 0
    const MultiIndex& m = space_->index_at(r);
    Jet term = Jet::constant(target, c);
    for (int v = 0; v < num_vars(); ++v) {
      const int e = m[static_cast<std::size_t>(v)];
      if (e > 0) term = term * powers[static_cast<std::size_t>(v)][static_cast<std::size_t>(e)];
    }
    out += term;
  }
  return out;
}

Jet Jet::linear_substitution(const CMat& m) const {
  const int n = num_vars();
  if (m.rows() != n || m.cols() != n)
    throw DegreeMismatch("Jet::linear_substitution: matrix size mismatch");
  JetVec lin;
  lin.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Jet li(space_);
    MultiIndex mi(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
      mi[static_cast<std::size_t>(j)] = 1;
      li.coef_[space_->rank_of(mi)] = m(i, j);
      mi[static_cast<std::size_t>(j)] = 0;
    }
    lin.push_back(std::move(li));
  }
  return compose(lin);
}

Jet Jet::derivative(int var) const {
  Jet out(space_);
  MultiIndex m(static_cast<std::size_t>(num_vars()));
  for (int r = 0; r < space_->size(); ++r) {
    if (coef_[r] == Complex(0.0)) continue;
    m = space_->index_at(r);
    const int e = m[static_cast<std::size_t>(var)];
    if (e == 0) continue;
    m[static_cast<std::size_t>(var)] = e - 1;
    out.coef_[space_->rank_of(m)] += static_cast<double>(e) * coef_[r];
  }
  return out;
}

Jet Jet::antiderivative(int var) const {
  Jet out(space_);
  MultiIndex m(static_cast<std::size_t>(num_vars()));
  for (int r = 0; r < space_->size(); ++r) {
    if (coef_[r] == Complex(0.0)) continue;
    m = space_->index_at(r);
    const int e = m[static_cast<std::size_t>(var)];
    m[static_cast<std::size_t>(var)] = e + 1;
    const int target = space_->rank_of(m);
    if (target >= 0) out.coef_[target] += coef_[r] / static_cast<double>(e + 1);
  }
  return out;
}

Jet Jet::substitute_last(const Jet& value) const {
  const int n = num_vars();
  if (value.num_vars() != n - 1)
    throw DegreeMismatch("Jet::substitute_last: substitution must drop exactly one variable");
  auto target = value.space_;
  JetVec inner;
  inner.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n - 1; ++i) inner.push_back(Jet::variable(target, i));
  inner.push_back(value);
  return compose(inner);
}

Jet Jet::reciprocal() const {
  const Complex c = constant_term();
  if (std::abs(c) == 0.0) throw SingularInput("Jet::reciprocal: zero constant term");
  // 1/b = (1/c) * sum_{j<=K} w^j with w = 1 - b/c nilpotent to order K+1.
  Jet w = Jet::constant(space_, 1.0) - *this * (1.0 / c);
  Jet acc = Jet::constant(space_, 1.0);
  for (int j = 0; j < degree_cap(); ++j) {
    acc = acc * w;
    acc += Jet::constant(space_, 1.0);
  }
  return acc * (1.0 / c);
}

Jet Jet::conjugate_coefficients() const {
  Jet out(space_);
  out.coef_ = coef_.conjugate();
  return out;
}

Complex Jet::evaluate(const CVec& x) const {
  if (x.size() != num_vars()) throw DegreeMismatch("Jet::evaluate: point dimension mismatch");
  const int n = num_vars();
  const int cap = degree_cap();
  std::vector<std::vector<Complex>> pw(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    pw[static_cast<std::size_t>(v)].resize(static_cast<std::size_t>(cap) + 1);
    pw[static_cast<std::size_t>(v)][0] = 1.0;
    for (int e = 1; e <= cap; ++e)
      pw[static_cast<std::size_t>(v)][static_cast<std::size_t>(e)] =
          pw[static_cast<std::size_t>(v)][static_cast<std::size_t>(e - 1)] * x[v];
  }
  Complex acc = 0.0;
  for (int r = 0; r < space_->size(); ++r) {
    if (coef_[r] == Complex(0.0)) continue;
    Complex term = coef_[r];
    const MultiIndex& m = space_->index_at(r);
    for (int v = 0; v < n; ++v) term *= pw[static_cast<std::size_t>(v)][static_cast<std::size_t>(m[static_cast<std::size_t>(v)])];
    acc += term;
  }
  return acc;
}

double Jet::max_abs_below_degree(int degree) const {
  double m = 0.0;
  for (int r = 0; r < space_->size(); ++r)
    if (space_->degree_at(r) < degree) m = std::max(m, std::abs(coef_[r]));
  return m;
}

double Jet::max_abs() const { return coef_.size() ? coef_.cwiseAbs().maxCoeff() : 0.0; }

CMat jet_map_linear_part(const JetVec& map) {
  const int rows = static_cast<int>(map.size());
  const int cols = rows > 0 ? map[0].num_vars() : 0;
  CMat m(rows, cols);
  for (int i = 0; i < rows; ++i) m.row(i) = map[static_cast<std::size_t>(i)].linear_part().transpose();
  return m;
}

JetVec jet_map_compose(const JetVec& f, const JetVec& g) {
  JetVec out;
  out.reserve(f.size());
  for (const Jet& fi : f) out.push_back(fi.compose(g));
  return out;
}

JetVec identity_jets(std::shared_ptr<const JetSpace> space) {
  JetVec out;
  out.reserve(static_cast<std::size_t>(space->num_vars()));
  for (int i = 0; i < space->num_vars(); ++i) out.push_back(Jet::variable(space, i));
  return out;
}

}  // namespace eigenflow::jets
