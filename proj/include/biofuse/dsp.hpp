#pragma once

#include <array>
#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace biofuse::dsp {

using Complex = std::complex<double>;

/// Discrete Fourier transform X_k = sum_n x_n exp(-2 pi i k n / N).
/// Radix-2 for power-of-two lengths, Bluestein's chirp-z otherwise.
std::vector<Complex> dft(std::span<const double> x);
std::vector<Complex> fft(std::span<const Complex> x, bool inverse = false);

struct PsdEstimate {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // signal^2 / Hz, one-sided

  double resolution_hz() const { return freqs_hz.size() > 1 ? freqs_hz[1] - freqs_hz[0] : 0.0; }
};

/// Hann is the symmetric form, zero at both ends.
enum class WindowFunction { Hann, Rectangular };

std::vector<double> window_coefficients(WindowFunction fn, std::size_t n);

/// Welch power spectral density: mean of windowed, detrended-by-mean
/// periodograms over segments of `segment_len` overlapping by `overlap`.
/// `nfft` (>= segment_len, 0 means segment_len) zero-pads each segment.
PsdEstimate welch_psd(std::span<const double> x, double fs, std::size_t segment_len,
                      std::size_t overlap, WindowFunction window = WindowFunction::Hann,
                      std::size_t nfft = 0);

/// Segment length for resolving `low_freq_hz`: two full cycles, at least
/// `min_len`, clipped to the data length. When the data cannot hold two
/// cycles this degenerates to a single full-length periodogram.
std::size_t welch_segment_length(std::size_t data_len, double fs, double low_freq_hz,
                                 std::size_t min_len = 0);

/// Composite Simpson's rule on a (possibly non-uniform) grid. An odd
/// interval count is handled with a trapezoid on the final interval.
double simpson_integrate(std::span<const double> y, std::span<const double> x);

/// Second-order section, a0 normalized to 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};  // a1, a2
};

class BandpassDesign {
 public:
  BandpassDesign(double low_hz, double high_hz, int order, double sampling_rate_hz);

  double low_hz() const { return low_hz_; }
  double high_hz() const { return high_hz_; }
  int order() const { return order_; }
  double sampling_rate_hz() const { return fs_; }
  const std::vector<Biquad>& sections() const { return sections_; }

  /// |H(f)| of the single-pass cascade.
  double magnitude(double freq_hz) const;

 private:
  double low_hz_;
  double high_hz_;
  int order_;
  double fs_;
  std::vector<Biquad> sections_;
};

/// Causal cascade filter, transposed direct form II, zero initial state.
std::vector<double> sosfilt(const std::vector<Biquad>& sections, std::span<const double> x);

/// Butterworth bandpass. With `zero_phase` the cascade runs forward then
/// backward over a signal padded by odd reflection of 3 x (2 x sections + 1)
/// samples, starting each pass from the steady-state response to its first sample.
std::vector<double> butterworth_bandpass(std::span<const double> x, const BandpassDesign& design,
                                         bool zero_phase = true);

/// Savitzky-Golay smoothing. Interior points use the centred least-squares
/// kernel; the first and last half-windows are evaluated from the
/// polynomial fitted to the edge window.
std::vector<double> savgol_smooth(std::span<const double> x, std::size_t window_len,
                                  int polyorder);

/// Level-1 orthonormal Haar transform. Odd-length input is padded by
/// repeating its last sample.
struct HaarCoefficients {
  std::vector<double> approx;
  std::vector<double> detail;
};

HaarCoefficients haar_dwt_level1(std::span<const double> x);
std::vector<double> haar_idwt_level1(const HaarCoefficients& c);

}  // namespace biofuse::dsp
