#include "biofuse/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

namespace biofuse::dsp {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft_radix2_inplace(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<Complex> twiddle(n / 2);
  const double dir = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n / 2; ++k) {
    twiddle[k] = std::polar(1.0, dir * 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + half] * twiddle[k * stride];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<Complex> bluestein(std::span<const Complex> x, bool inverse) {
  const std::size_t n = x.size();
  const std::size_t m = next_power_of_two(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<Complex> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto k2 = static_cast<unsigned long long>(k) * k % (2ULL * n);
    chirp[k] = std::polar(1.0, sign * kPi * static_cast<double>(k2) / static_cast<double>(n));
  }
  std::vector<Complex> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);
  fft_radix2_inplace(a, false);
  fft_radix2_inplace(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  fft_radix2_inplace(a, true);
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] / static_cast<double>(m) * chirp[k];
  return out;
}

}  // namespace

std::vector<Complex> fft(std::span<const Complex> x, bool inverse) {
  if (x.empty()) throw std::invalid_argument("fft of empty input");
  std::vector<Complex> out;
  if (is_power_of_two(x.size())) {
    out.assign(x.begin(), x.end());
    fft_radix2_inplace(out, inverse);
  } else {
    out = bluestein(x, inverse);
  }
  if (inverse) {
    for (auto& v : out) v /= static_cast<double>(x.size());
  }
  return out;
}

std::vector<Complex> dft(std::span<const double> x) {
  std::vector<Complex> c(x.begin(), x.end());
  return fft(c, false);
}

std::vector<double> window_coefficients(WindowFunction fn, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (fn == WindowFunction::Hann && n > 1) {
    // Symmetric Hann, so that reversing a segment leaves its periodogram intact.
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n - 1));
    }
  }
  return w;
}

std::size_t welch_segment_length(std::size_t data_len, double fs, double low_freq_hz,
                                 std::size_t min_len) {
  const auto two_cycles = static_cast<std::size_t>(std::ceil(2.0 * fs / low_freq_hz));
  return std::min(data_len, std::max(two_cycles, min_len));
}

PsdEstimate welch_psd(std::span<const double> x, double fs, std::size_t segment_len,
                      std::size_t overlap, WindowFunction window, std::size_t nfft) {
  if (segment_len < 4) throw std::invalid_argument("welch segment length must be >= 4");
  if (segment_len > x.size()) throw std::invalid_argument("welch segment longer than signal");
  if (overlap >= segment_len) throw std::invalid_argument("welch overlap must be < segment");
  if (!(fs > 0.0)) throw std::invalid_argument("sampling rate must be positive");
  if (nfft == 0) nfft = segment_len;
  if (nfft < segment_len) throw std::invalid_argument("nfft must be >= segment length");

  const std::vector<double> w = window_coefficients(window, segment_len);
  double w_energy = 0.0;
  for (double v : w) w_energy += v * v;
  const std::size_t step = segment_len - overlap;
  const std::size_t segments = (x.size() - segment_len) / step + 1;
  const std::size_t bins = nfft / 2 + 1;

  PsdEstimate psd;
  psd.freqs_hz.resize(bins);
  psd.power.assign(bins, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    psd.freqs_hz[k] = static_cast<double>(k) * fs / static_cast<double>(nfft);
  }

  // The fluctuating part of each segment is estimated through the taper.
  // The segment mean is a pure 0 Hz component and is credited to the first
  // bin with rectangular-window scaling, so a constant offset never leaks
  // into other frequencies.
  std::vector<Complex> buf(nfft);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t off = s * step;
    double mean = 0.0;
    for (std::size_t i = 0; i < segment_len; ++i) mean += x[off + i];
    mean /= static_cast<double>(segment_len);
    std::fill(buf.begin(), buf.end(), Complex{});
    for (std::size_t i = 0; i < segment_len; ++i) buf[i] = (x[off + i] - mean) * w[i];
    const std::vector<Complex> spec = fft(buf, false);
    for (std::size_t k = 0; k < bins; ++k) {
      double p = std::norm(spec[k]) / (fs * w_energy);
      const bool edge = k == 0 || (nfft % 2 == 0 && k == nfft / 2);
      if (!edge) p *= 2.0;
      psd.power[k] += p;
    }
    psd.power[0] += mean * mean * static_cast<double>(segment_len) / fs;
  }
  for (double& p : psd.power) p /= static_cast<double>(segments);
  return psd;
}

double simpson_integrate(std::span<const double> y, std::span<const double> x) {
  if (y.size() != x.size()) throw std::invalid_argument("simpson: length mismatch");
  if (y.size() < 2) throw std::invalid_argument("simpson: need at least 2 points");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("simpson: x must be strictly increasing");
  }
  const std::size_t intervals = x.size() - 1;
  const std::size_t paired = intervals - intervals % 2;
  double total = 0.0;
  for (std::size_t i = 0; i + 2 <= paired; i += 2) {
    const double h0 = x[i + 1] - x[i];
    const double h1 = x[i + 2] - x[i + 1];
    const double hs = h0 + h1;
    total += hs / 6.0 *
             ((2.0 - h1 / h0) * y[i] + hs * hs / (h0 * h1) * y[i + 1] + (2.0 - h0 / h1) * y[i + 2]);
  }
  if (intervals % 2 == 1) {
    const std::size_t i = intervals - 1;
    total += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  }
  return total;
}

BandpassDesign::BandpassDesign(double low_hz, double high_hz, int order, double sampling_rate_hz)
    : low_hz_(low_hz), high_hz_(high_hz), order_(order), fs_(sampling_rate_hz) {
  if (!(fs_ > 0.0)) throw std::invalid_argument("bandpass: sampling rate must be positive");
  if (!(0.0 < low_hz_ && low_hz_ < high_hz_ && high_hz_ < fs_ / 2.0)) {
    throw std::invalid_argument("bandpass: band edges must satisfy 0 < low < high < fs/2");
  }
  if (order_ < 1) throw std::invalid_argument("bandpass: order must be >= 1");

  const double k2 = 2.0 * fs_;
  const double w1 = k2 * std::tan(kPi * low_hz_ / fs_);
  const double w2 = k2 * std::tan(kPi * high_hz_ / fs_);
  const double bw = w2 - w1;
  const double w0sq = w1 * w2;

  std::vector<Complex> upper;  // digital poles with positive imaginary part
  std::vector<double> real_poles;
  for (int k = 0; k < order_; ++k) {
    const Complex proto =
        std::polar(1.0, kPi * static_cast<double>(2 * k + order_ + 1) / (2.0 * order_));
    const Complex half = proto * bw / 2.0;
    const Complex disc = std::sqrt(half * half - w0sq);
    for (const Complex s : {half + disc, half - disc}) {
      const Complex z = (k2 + s) / (k2 - s);
      if (std::abs(z.imag()) < 1e-12) {
        real_poles.push_back(z.real());
      } else if (z.imag() > 0.0) {
        upper.push_back(z);
      }
    }
  }
  for (const Complex& z : upper) {
    Biquad q;
    q.b = {1.0, 0.0, -1.0};
    q.a = {-2.0 * z.real(), std::norm(z)};
    sections_.push_back(q);
  }
  for (std::size_t i = 0; i + 1 < real_poles.size(); i += 2) {
    Biquad q;
    q.b = {1.0, 0.0, -1.0};
    q.a = {-(real_poles[i] + real_poles[i + 1]), real_poles[i] * real_poles[i + 1]};
    sections_.push_back(q);
  }
  if (static_cast<int>(sections_.size()) != order_) {
    throw std::logic_error("bandpass: unexpected pole count");
  }

  // Unit gain at the geometric centre of the (prewarped) passband.
  const double centre_hz = std::atan(std::sqrt(w0sq) / k2) * fs_ / kPi;
  const double g = std::pow(1.0 / magnitude(centre_hz), 1.0 / order_);
  for (auto& q : sections_) {
    for (double& b : q.b) b *= g;
  }
}

double BandpassDesign::magnitude(double freq_hz) const {
  const Complex z = std::polar(1.0, 2.0 * kPi * freq_hz / fs_);
  const Complex zi = 1.0 / z;
  Complex h = 1.0;
  for (const auto& q : sections_) {
    h *= (q.b[0] + q.b[1] * zi + q.b[2] * zi * zi) / (1.0 + q.a[0] * zi + q.a[1] * zi * zi);
  }
  return std::abs(h);
}

namespace {

using State = std::vector<std::array<double, 2>>;

// Section states that reproduce the steady-state response to a constant
// unit input.
State steady_state(const std::vector<Biquad>& sections) {
  State zi(sections.size());
  double u = 1.0;
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& q = sections[s];
    const double y = u * (q.b[0] + q.b[1] + q.b[2]) / (1.0 + q.a[0] + q.a[1]);
    const double z2 = q.b[2] * u - q.a[1] * y;
    const double z1 = q.b[1] * u - q.a[0] * y + z2;
    zi[s] = {z1, z2};
    u = y;
  }
  return zi;
}

void run_cascade(const std::vector<Biquad>& sections, State state, std::vector<double>& x) {
  for (std::size_t s = 0; s < sections.size(); ++s) {
    const auto& q = sections[s];
    double z1 = state[s][0];
    double z2 = state[s][1];
    for (double& v : x) {
      const double in = v;
      const double out = q.b[0] * in + z1;
      z1 = q.b[1] * in - q.a[0] * out + z2;
      z2 = q.b[2] * in - q.a[1] * out;
      v = out;
    }
  }
}

State scaled(const State& s, double k) {
  State out = s;
  for (auto& z : out) {
    z[0] *= k;
    z[1] *= k;
  }
  return out;
}

}  // namespace

std::vector<double> sosfilt(const std::vector<Biquad>& sections, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(sections, State(sections.size(), {0.0, 0.0}), y);
  return y;
}

std::vector<double> butterworth_bandpass(std::span<const double> x, const BandpassDesign& design,
                                         bool zero_phase) {
  const std::size_t pad = 3 * (2 * design.sections().size() + 1);
  if (x.size() <= pad) {
    throw std::invalid_argument("bandpass: signal must be longer than the edge padding");
  }
  if (!zero_phase) return sosfilt(design.sections(), x);

  const std::size_t n = x.size();
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const State zi = steady_state(design.sections());
  run_cascade(design.sections(), scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(design.sections(), scaled(zi, ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                             ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

std::vector<double> savgol_smooth(std::span<const double> x, std::size_t window_len,
                                  int polyorder) {
  if (window_len % 2 == 0) throw std::invalid_argument("savgol: window length must be odd");
  if (polyorder < 0 || static_cast<std::size_t>(polyorder) >= window_len) {
    throw std::invalid_argument("savgol: polyorder must be in [0, window length)");
  }
  if (x.size() < window_len) throw std::invalid_argument("savgol: signal shorter than window");

  const auto m = static_cast<Eigen::Index>(window_len);
  const Eigen::Index half = m / 2;
  const Eigen::Index cols = polyorder + 1;
  Eigen::MatrixXd design(m, cols);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double t = static_cast<double>(i - half);
    double p = 1.0;
    for (Eigen::Index j = 0; j < cols; ++j) {
      design(i, j) = p;
      p *= t;
    }
  }
  // Rows of the pseudo-inverse map a window to polynomial coefficients
  // about the window centre.
  const Eigen::MatrixXd pinv = design.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::VectorXd kernel = pinv.row(0).transpose();

  const std::size_t n = x.size();
  std::vector<double> y(n);
  for (std::size_t c = static_cast<std::size_t>(half); c + static_cast<std::size_t>(half) < n; ++c) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) acc += kernel(i) * x[c - static_cast<std::size_t>(half) + static_cast<std::size_t>(i)];
    y[c] = acc;
  }
  auto fit_edge = [&](std::size_t first, std::size_t from, std::size_t to) {
    Eigen::VectorXd win(m);
    for (Eigen::Index i = 0; i < m; ++i) win(i) = x[first + static_cast<std::size_t>(i)];
    const Eigen::VectorXd coef = pinv * win;
    for (std::size_t t = from; t < to; ++t) {
      const double u = static_cast<double>(t) - static_cast<double>(first) - static_cast<double>(half);
      double acc = 0.0;
      double p = 1.0;
      for (Eigen::Index j = 0; j < cols; ++j) {
        acc += coef(j) * p;
        p *= u;
      }
      y[t] = acc;
    }
  };
  fit_edge(0, 0, static_cast<std::size_t>(half));
  fit_edge(n - window_len, n - static_cast<std::size_t>(half), n);
  return y;
}

HaarCoefficients haar_dwt_level1(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("haar: empty input");
  const std::size_t pairs = (x.size() + 1) / 2;
  HaarCoefficients c;
  c.approx.resize(pairs);
  c.detail.resize(pairs);
  const double r = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double a = x[2 * i];
    const double b = 2 * i + 1 < x.size() ? x[2 * i + 1] : x.back();
    c.approx[i] = (a + b) * r;
    c.detail[i] = (a - b) * r;
  }
  return c;
}

std::vector<double> haar_idwt_level1(const HaarCoefficients& c) {
  if (c.approx.size() != c.detail.size()) throw std::invalid_argument("haar: size mismatch");
  std::vector<double> x(2 * c.approx.size());
  const double r = 1.0 / std::numbers::sqrt2;
  for (std::size_t i = 0; i < c.approx.size(); ++i) {
    x[2 * i] = (c.approx[i] + c.detail[i]) * r;
    x[2 * i + 1] = (c.approx[i] - c.detail[i]) * r;
  }
  return x;
}

}  // namespace biofuse::dsp
