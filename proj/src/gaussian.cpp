#include "csim/gaussian.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <list>
#include <mutex>
#include <ostream>
#include <sstream>

namespace csim::gaussian {

namespace {

using DenseCol = Eigen::MatrixXd;

DenseCol sqrtm_spd(const DenseCol& x, bool inverse) {
  Eigen::SelfAdjointEigenSolver<DenseCol> es(x);
  const Eigen::VectorXd e = es.eigenvalues();
  if (e.minCoeff() <= 0.0) throw NumericalError("matrix square root of a non-positive matrix");
  Eigen::VectorXd s = e.cwiseSqrt();
  if (inverse) s = s.cwiseInverse().eval();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
}

/// Field position x(xi) on the t = 0 slice, where xi = x - A sin x.
double slice_zero_position(double xi, const geometry::ChartParams& chart) {
  return geometry::from_alt({0.0, xi}, chart).x;
}

struct FieldBlocks {
  DenseCol phi_phi;
  DenseCol pi_pi;
};

FieldBlocks field_blocks(const lattice::LatticeSpec& lat, const lattice::FieldKernel& kernel,
                         double amplitude_for_map, int n_band) {
  const int n = lat.n_sites();
  const double dx = lat.dx(), l = lat.half_width();
  const geometry::ChartParams map_chart(amplitude_for_map);

  Eigen::VectorXd x(n), jac(n);
  for (int i = 0; i < n; ++i) {
    x(i) = slice_zero_position(lat.position(i), map_chart);
    jac(i) = 1.0 / (1.0 - amplitude_for_map * std::cos(x(i)));
  }

  // V: band modes sampled at the pulled-back points; W carries the density
  // weight. Mode amplitudes are a = W^T Phi dxi, b = V^T pi.
  DenseCol v(n, n_band), w(n, n_band);
  Eigen::VectorXd s_phi(n_band), s_pi(n_band);
  for (int k = 0; k < n_band; ++k) {
    s_phi(k) = kernel.phi_variance(k + 1);
    s_pi(k) = kernel.pi_variance(k + 1);
    for (int i = 0; i < n; ++i) {
      v(i, k) = lattice::box_mode(k + 1, x(i), l);
      w(i, k) = jac(i) * v(i, k);
    }
  }
  const DenseCol gram = (w.transpose() * v) * dx;
  const DenseCol v_dual = v * gram.partialPivLu().inverse();

  Eigen::HouseholderQR<DenseCol> qr(w);
  const DenseCol q_full = qr.householderQ();
  const DenseCol c = q_full.rightCols(n - n_band);

  DenseCol m(n, n);
  m << v_dual, c;
  const DenseCol m_inv = m.partialPivLu().inverse();
  const DenseCol d = m_inv.transpose().rightCols(n - n_band);

  // Ground state of the lattice Hamiltonian restricted to the complement:
  // H_c = 1/2 c^T A c + 1/2 e^T B e with A = C^T K C, B = D^T D / dx.
  DenseCol stiff = DenseCol::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    stiff(i, i) = 2.0 / dx;
    if (i + 1 < n) stiff(i, i + 1) = stiff(i + 1, i) = -1.0 / dx;
  }
  const DenseCol a_c = c.transpose() * stiff * c;
  const DenseCol b_c = (d.transpose() * d) / dx;
  const DenseCol b_half = sqrtm_spd(b_c, false);
  const DenseCol sigma_c = 0.5 * kHbar * b_half * sqrtm_spd(b_half * a_c * b_half, true) * b_half;
  const DenseCol sigma_d = 0.25 * kHbar * kHbar * sigma_c.inverse();

  DenseCol sa = DenseCol::Zero(n, n), sb = DenseCol::Zero(n, n);
  sa.topLeftCorner(n_band, n_band) = s_phi.asDiagonal();
  sa.bottomRightCorner(n - n_band, n - n_band) = sigma_c;
  sb.topLeftCorner(n_band, n_band) = s_pi.asDiagonal();
  sb.bottomRightCorner(n - n_band, n - n_band) = sigma_d;

  FieldBlocks out;
  out.phi_phi = m * sa * m.transpose();
  out.pi_pi = m_inv.transpose() * sb * m_inv;
  out.phi_phi = 0.5 * (out.phi_phi + out.phi_phi.transpose()).eval();
  out.pi_pi = 0.5 * (out.pi_pi + out.pi_pi.transpose()).eval();
  return out;
}

/// The field blocks are the expensive part of a run and every experiment
/// rebuilds the same few; keep the most recent ones.
FieldBlocks cached_field_blocks(const lattice::LatticeSpec& lat, const lattice::FieldKernel& kernel,
                                double amplitude_for_map, int n_band) {
  static std::mutex mu;
  static std::list<std::pair<std::string, FieldBlocks>> cache;
  constexpr size_t kCapacity = 4;
  const std::string key =
      fmt::format("{}|{:a}|{:a}|{:a}|{}|{}|{:a}|{:a}|{:a}", lat.n_sites(), lat.dx(), lat.half_width(),
                  amplitude_for_map, n_band, kernel.name(), kernel.phi_variance(1),
                  kernel.pi_variance(1), kernel.phi_variance(n_band));
  {
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      if (it->first == key) {
        cache.splice(cache.begin(), cache, it);
        return cache.front().second;
      }
    }
  }
  FieldBlocks fb = field_blocks(lat, kernel, amplitude_for_map, n_band);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace_front(key, fb);
  if (cache.size() > kCapacity) cache.pop_back();
  return fb;
}

}  // namespace

PhaseSpaceLayout::PhaseSpaceLayout(std::vector<PairLabel> pairs) : pairs_(std::move(pairs)) {
  for (int s = 0; s < n_pairs(); ++s) {
    const auto& lab = pairs_[static_cast<size_t>(s)];
    auto& slots = lab.kind == PairLabel::Kind::Detector ? detector_slots_ : site_slots_;
    if (lab.index < 0) throw ConfigError("negative pair index in layout");
    if (static_cast<int>(slots.size()) <= lab.index)
      slots.resize(static_cast<size_t>(lab.index) + 1, -1);
    if (slots[static_cast<size_t>(lab.index)] != -1) throw ConfigError("duplicate pair in layout");
    slots[static_cast<size_t>(lab.index)] = s;
    (lab.kind == PairLabel::Kind::Detector ? n_detectors_ : n_sites_)++;
  }
}

PhaseSpaceLayout PhaseSpaceLayout::standard(int n_detectors, int n_sites) {
  std::vector<PairLabel> pairs;
  pairs.reserve(static_cast<size_t>(n_detectors + n_sites));
  for (int d = 0; d < n_detectors; ++d) pairs.push_back({PairLabel::Kind::Detector, d});
  for (int i = 0; i < n_sites; ++i) pairs.push_back({PairLabel::Kind::Site, i});
  return PhaseSpaceLayout(std::move(pairs));
}

int PhaseSpaceLayout::detector_slot(int d) const {
  if (d < 0 || d >= static_cast<int>(detector_slots_.size()) ||
      detector_slots_[static_cast<size_t>(d)] < 0)
    throw ConfigError(fmt::format("detector {} is not part of this layout", d));
  return detector_slots_[static_cast<size_t>(d)];
}

int PhaseSpaceLayout::site_slot(int i) const {
  if (i < 0 || i >= static_cast<int>(site_slots_.size()) || site_slots_[static_cast<size_t>(i)] < 0)
    throw ConfigError(fmt::format("site {} is not part of this layout", i));
  return site_slots_[static_cast<size_t>(i)];
}

Matrix PhaseSpaceLayout::symplectic_form() const {
  Matrix j = Matrix::Zero(dim(), dim());
  for (int k = 0; k < n_pairs(); ++k) {
    j(2 * k, 2 * k + 1) = 1.0;
    j(2 * k + 1, 2 * k) = -1.0;
  }
  return j;
}

CovarianceState assemble_initial_state(const lattice::LatticeSpec& lat,
                                       const std::vector<DetectorSpec>& detectors,
                                       const lattice::FieldKernel& kernel, Frame frame,
                                       const geometry::ChartParams& chart, double band_fraction) {
  if (std::abs(kernel.half_width() - lat.half_width()) > 1e-12)
    throw ConfigError("field kernel and lattice describe different boxes");
  if (!(band_fraction > 0.0 && band_fraction <= 1.0))
    throw ConfigError(fmt::format("vacuum_band_fraction must lie in (0, 1], got {}", band_fraction));
  const int n = lat.n_sites();
  const int n_band = std::min(
      {static_cast<int>(std::floor(n * (1.0 - chart.amplitude()) * band_fraction)), n - 1,
       kernel.n_modes()});
  if (n_band < 1) throw ConfigError("continuum band is empty; increase resolution or band fraction");

  const double map_amplitude = frame == Frame::Eta ? chart.amplitude() : 0.0;
  const FieldBlocks fb = cached_field_blocks(lat, kernel, map_amplitude, n_band);

  CovarianceState st;
  const int nd = static_cast<int>(detectors.size());
  st.layout = PhaseSpaceLayout::standard(nd, n);
  st.sigma = Matrix::Zero(st.layout.dim(), st.layout.dim());
  st.mean = Vector::Zero(st.layout.dim());
  st.frame = frame;
  st.time = 0.0;
  for (int d = 0; d < nd; ++d) {
    const double w = detectors[static_cast<size_t>(d)].omega;
    if (!(w > 0.0)) throw ConfigError("detector frequency must be positive");
    st.sigma(st.layout.q(d), st.layout.q(d)) = kHbar / (2.0 * w);
    st.sigma(st.layout.p(d), st.layout.p(d)) = kHbar * w / 2.0;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      st.sigma(st.layout.phi(i), st.layout.phi(j)) = fb.phi_phi(i, j);
      st.sigma(st.layout.pi(i), st.layout.pi(j)) = fb.pi_pi(i, j);
    }
  }
  return st;
}

Vector symplectic_eigenvalues(const Matrix& sigma) {
  const Eigen::Index dim = sigma.rows();
  if (dim % 2 != 0 || sigma.cols() != dim) throw ConfigError("covariance must be square of even size");
  Eigen::LLT<DenseCol> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const DenseCol l = llt.matrixL();
  // With sigma = L L^T, J sigma is similar to L^T J L, whose singular values
  // are the symplectic eigenvalues (each twice).
  DenseCol jl(dim, dim);
  for (Eigen::Index k = 0; k < dim / 2; ++k) {
    jl.row(2 * k) = l.row(2 * k + 1);
    jl.row(2 * k + 1) = -l.row(2 * k);
  }
  const DenseCol k = l.transpose() * jl;
  const DenseCol ktk = k.transpose() * k;
  Eigen::SelfAdjointEigenSolver<DenseCol> es(ktk, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd e = es.eigenvalues();
  Vector nu(dim / 2);
  for (Eigen::Index j = 0; j < dim / 2; ++j)
    nu(j) = std::sqrt(std::max(0.0, 0.5 * (e(2 * j) + e(2 * j + 1))));
  return nu;
}

ValidationReport validate(const CovarianceState& state) {
  ValidationReport r;
  r.symmetry_residual = (state.sigma - state.sigma.transpose()).cwiseAbs().maxCoeff();
  try {
    const Vector nu = symplectic_eigenvalues(0.5 * (state.sigma + state.sigma.transpose()));
    r.positive_definite = true;
    r.min_symplectic_eigenvalue = nu.minCoeff();
    r.uncertainty_ok = r.min_symplectic_eigenvalue >= kHbar / 2.0 - kUncertaintyTol;
  } catch (const NumericalError&) {
    r.positive_definite = false;
    r.min_symplectic_eigenvalue = 0.0;
    r.uncertainty_ok = false;
  }
  return r;
}

Matrix observable_rows(const PhaseSpaceLayout& layout, const std::vector<Observable>& obs) {
  Matrix o = Matrix::Zero(static_cast<Eigen::Index>(obs.size()), layout.dim());
  for (size_t r = 0; r < obs.size(); ++r) {
    const auto& ob = obs[r];
    const auto row = static_cast<Eigen::Index>(r);
    switch (ob.kind) {
      case Observable::Kind::DetectorQ:
        o(row, layout.q(ob.detector)) = 1.0;
        break;
      case Observable::Kind::DetectorP:
        o(row, layout.p(ob.detector)) = 1.0;
        break;
      case Observable::Kind::FieldWindow:
      case Observable::Kind::MomentumWindow: {
        if (ob.weights.size() != layout.n_sites())
          throw ConfigError(fmt::format("window has {} weights, layout has {} sites",
                                        ob.weights.size(), layout.n_sites()));
        const bool field = ob.kind == Observable::Kind::FieldWindow;
        for (int i = 0; i < layout.n_sites(); ++i)
          o(row, field ? layout.phi(i) : layout.pi(i)) = ob.weights(i);
        break;
      }
    }
  }
  return o;
}

Matrix smeared_correlator_matrix(const CovarianceState& state, const std::vector<Observable>& obs) {
  const Matrix o = observable_rows(state.layout, obs);
  const Matrix os = o * state.sigma;
  Matrix c = os * o.transpose();
  return 0.5 * (c + c.transpose());
}

CovarianceState marginal(const CovarianceState& state, const std::vector<int>& pair_slots) {
  if (pair_slots.empty()) throw ConfigError("marginal over an empty set of pairs");
  std::vector<PairLabel> labels;
  std::vector<Eigen::Index> idx;
  for (int s : pair_slots) {
    if (s < 0 || s >= state.layout.n_pairs()) throw ConfigError("marginal pair slot out of range");
    labels.push_back(state.layout.pairs()[static_cast<size_t>(s)]);
    idx.push_back(2 * s);
    idx.push_back(2 * s + 1);
  }
  CovarianceState out;
  out.layout = PhaseSpaceLayout(std::move(labels));
  out.sigma = state.sigma(idx, idx);
  out.mean = state.mean(idx);
  out.frame = state.frame;
  out.time = state.time;
  return out;
}

void write_state(std::ostream& out, const CovarianceState& state) {
  out << "# csim covariance v1\n";
  out << "# frame " << to_string(state.frame) << "\n";
  out << fmt::format("# time {:.17g}\n", state.time);
  out << "# pairs";
  for (const auto& lab : state.layout.pairs())
    out << ' ' << (lab.kind == PairLabel::Kind::Detector ? 'D' : 'S') << lab.index;
  out << "\n# mean";
  for (Eigen::Index k = 0; k < state.mean.size(); ++k) out << fmt::format(" {:.17g}", state.mean(k));
  out << "\n";
  for (Eigen::Index r = 0; r < state.sigma.rows(); ++r) {
    for (Eigen::Index c = 0; c < state.sigma.cols(); ++c)
      out << (c ? "," : "") << fmt::format("{:.17g}", state.sigma(r, c));
    out << "\n";
  }
}

CovarianceState read_state(std::istream& in) {
  std::string line;
  auto header = [&](const std::string& key) {
    if (!std::getline(in, line) || line.rfind("# " + key, 0) != 0)
      throw ConfigError(fmt::format("state dump: expected '# {}' header", key));
    return line.substr(2 + key.size());
  };
  if (header("csim covariance v1") != "") throw ConfigError("state dump: bad magic line");
  CovarianceState st;
  const std::string frame = header("frame ");
  if (frame == "t") st.frame = Frame::T;
  else if (frame == "eta") st.frame = Frame::Eta;
  else throw ConfigError("state dump: unknown frame " + frame);
  st.time = std::stod(header("time "));

  std::istringstream ps(header("pairs"));
  std::vector<PairLabel> labels;
  std::string tok;
  while (ps >> tok) {
    if (tok.size() < 2 || (tok[0] != 'D' && tok[0] != 'S'))
      throw ConfigError("state dump: bad pair label " + tok);
    labels.push_back({tok[0] == 'D' ? PairLabel::Kind::Detector : PairLabel::Kind::Site,
                      std::stoi(tok.substr(1))});
  }
  st.layout = PhaseSpaceLayout(std::move(labels));
  const int dim = st.layout.dim();

  std::istringstream ms(header("mean"));
  st.mean = Vector::Zero(dim);
  for (int k = 0; k < dim; ++k)
    if (!(ms >> st.mean(k))) throw ConfigError("state dump: short mean line");

  st.sigma = Matrix::Zero(dim, dim);
  for (int r = 0; r < dim; ++r) {
    if (!std::getline(in, line)) throw ConfigError("state dump: missing covariance rows");
    std::istringstream rs(line);
    for (int c = 0; c < dim; ++c) {
      std::string cell;
      if (!std::getline(rs, cell, ',')) throw ConfigError("state dump: short covariance row");
      st.sigma(r, c) = std::stod(cell);
    }
  }
  return st;
}

}  // namespace csim::gaussian
