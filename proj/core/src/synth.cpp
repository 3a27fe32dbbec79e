#include "pnss/synth.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pnss {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * kPi * u2);
  has_spare_ = true;
  return r * std::cos(2.0 * kPi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw DomainError("Rng::index needs n > 0");
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return static_cast<std::size_t>(v % n);
}

Matrix random_rotation(Rng& rng, Eigen::Index m) {
  Matrix g(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

namespace {

Matrix unit_centered(Matrix x) {
  x.rowwise() -= x.colwise().mean();
  return x / x.norm();
}

std::size_t draw_state(Rng& rng, const Matrix& p, std::size_t from) {
  const double u = rng.uniform();
  double acc = 0.0;
  const Eigen::Index k = p.cols();
  for (Eigen::Index j = 0; j < k; ++j) {
    acc += p(static_cast<Eigen::Index>(from), j);
    if (u < acc) return static_cast<std::size_t>(j);
  }
  // Rounding left u above the running sum: take the last positive entry.
  for (Eigen::Index j = k - 1; j >= 0; --j)
    if (p(static_cast<Eigen::Index>(from), j) > 0.0) return static_cast<std::size_t>(j);
  return from;
}

}  // namespace

SyntheticData synthesize(const GeneratorSpec& spec) {
  spec.validate();
  const Matrix p = spec.transition_matrix();
  Rng rng(spec.seed);
  const Eigen::Index k = spec.k;
  const Eigen::Index m = spec.m;

  // Templates: a straight chain along the first axis, each state bending it
  // by its own random perturbation.
  Matrix chain = Matrix::Zero(k, m);
  for (Eigen::Index i = 0; i < k; ++i) chain(i, 0) = static_cast<double>(i);
  SyntheticData out;
  std::vector<Matrix> templates;
  for (std::size_t s = 0; s < spec.states; ++s) {
    Matrix t = chain;
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < k; ++i) t(i, j) += spec.template_spread * rng.normal();
    templates.push_back(unit_centered(t));
    out.templates.emplace_back(templates.back());
  }

  out.dataset.k = k;
  out.dataset.m = m;
  out.dataset.frame_count = spec.frames;
  const int width = static_cast<int>(std::to_string(spec.runs).size());
  for (std::size_t r = 0; r < spec.runs; ++r) {
    Run run;
    std::string id = std::to_string(r + 1);
    run.run_id = "run" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    std::vector<int> labels;
    std::size_t state = rng.index(spec.states);
    for (std::size_t t = 0; t < spec.frames; ++t) {
      if (t > 0) state = draw_state(rng, p, state);
      Matrix x = templates[state];
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < k; ++i) x(i, j) += spec.noise * rng.normal();
      const Matrix rot = random_rotation(rng, m);
      const double scale = 0.5 + rng.uniform();
      Eigen::RowVectorXd shift(m);
      for (Eigen::Index j = 0; j < m; ++j) shift[j] = 2.0 * rng.normal();
      Matrix placed = scale * x * rot;
      placed.rowwise() += shift;
      run.frames.emplace_back(std::move(placed));
      run.frame_index.push_back(t + 1);
      labels.push_back(static_cast<int>(state) + 1);
    }
    out.dataset.runs.push_back(std::move(run));
    out.labels.push_back(std::move(labels));
  }
  return out;
}

}  // namespace pnss
