#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "biofuse/dsp.hpp"
#include "oracles.hpp"

using namespace biofuse;
using biofuse::dsp::Complex;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> sine(double freq, double fs, std::size_t n, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = amp * std::sin(2 * kPi * freq * static_cast<double>(i) / fs + phase);
  return x;
}

double rms(std::span<const double> x, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

double max_spectrum_error(const std::vector<Complex>& got, const std::vector<std::complex<long double>>& want) {
  double scale = 1.0, err = 0.0;
  for (std::size_t k = 0; k < want.size(); ++k) {
    scale = std::max(scale, static_cast<double>(std::abs(want[k])));
    err = std::max(err, static_cast<double>(std::abs(std::complex<long double>(got[k]) - want[k])));
  }
  return err / scale;
}

}  // namespace

TEST_CASE("dft of an impulse and of a constant") {
  const std::vector<double> impulse{1, 0, 0, 0};
  for (const auto& v : dsp::dft(impulse)) {
    CHECK(v.real() == doctest::Approx(1.0));
    CHECK(std::fabs(v.imag()) < 1e-15);
  }
  const std::vector<double> ones{1, 1, 1, 1};
  const auto x = dsp::dft(ones);
  CHECK(x[0].real() == doctest::Approx(4.0));
  for (std::size_t k = 1; k < 4; ++k) CHECK(std::abs(x[k]) < 1e-15);
}

TEST_CASE("dft matches the naive transform for power-of-two and other lengths") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {1u, 2u, 8u, 37u, 64u, 100u, 127u, 256u, 500u}) {
    const auto x = oracle::random_window(rng, n);
    CHECK(max_spectrum_error(dsp::dft(x), oracle::dft_real(x)) < 1e-9);
  }
}

TEST_CASE("inverse fft undoes the forward transform") {
  std::mt19937_64 rng(12);
  for (std::size_t n : {16u, 37u}) {
    std::vector<Complex> x(n);
    std::normal_distribution<double> g;
    for (auto& v : x) v = {g(rng), g(rng)};
    const auto back = dsp::fft(dsp::fft(x, false), true);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("dft is linear and satisfies Parseval") {
  std::mt19937_64 rng(13);
  const auto x = oracle::random_window(rng, 37);
  const auto y = oracle::random_window(rng, 37);
  std::vector<double> z(37);
  for (std::size_t i = 0; i < 37; ++i) z[i] = 2.5 * x[i] - 0.75 * y[i];
  const auto fx = dsp::dft(x), fy = dsp::dft(y), fz = dsp::dft(z);
  double energy = 0.0, spec = 0.0;
  for (std::size_t k = 0; k < 37; ++k) {
    CHECK(std::abs(fz[k] - (2.5 * fx[k] - 0.75 * fy[k])) < 1e-9);
    energy += x[k] * x[k];
    spec += std::norm(fx[k]);
  }
  CHECK(spec / 37.0 == doctest::Approx(energy).epsilon(1e-9));
}

TEST_CASE("welch matches the reference periodogram average") {
  std::mt19937_64 rng(14);
  for (int rep = 0; rep < 5; ++rep) {
    auto x = oracle::random_window(rng, 300);
    for (auto& v : x) v += 0.7;
    const auto got = dsp::welch_psd(x, 250.0, 64, 32, dsp::WindowFunction::Hann, 100);
    const auto want = oracle::welch(x, 250.0, 64, 32, 100);
    REQUIRE(got.power.size() == want.power.size());
    for (std::size_t k = 0; k < want.power.size(); ++k) {
      CHECK(got.freqs_hz[k] == doctest::Approx(want.freqs[k]));
      CHECK(oracle::close(got.power[k], want.power[k], 1e-9, 1e-15));
    }
  }
}

TEST_CASE("welch locates a 10 Hz sine") {
  const auto x = sine(10.0, 500.0, 2000);
  const auto psd = dsp::welch_psd(x, 500.0, 500, 250);
  CHECK(psd.resolution_hz() == doctest::Approx(1.0));
  const auto peak = std::max_element(psd.power.begin(), psd.power.end()) - psd.power.begin();
  CHECK(std::fabs(psd.freqs_hz[static_cast<std::size_t>(peak)] - 10.0) <= psd.resolution_hz() / 2);
}

TEST_CASE("welch of white noise integrates to its variance") {
  std::mt19937_64 rng(15);
  double total = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = oracle::random_window(rng, 2000);
    const auto psd = dsp::welch_psd(x, 500.0, 250, 125);
    total += dsp::simpson_integrate(psd.power, psd.freqs_hz);
  }
  CHECK(total / 100.0 == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("a constant offset only moves the 0 Hz bin") {
  std::mt19937_64 rng(16);
  const auto x = oracle::random_window(rng, 512);
  auto shifted = x;
  for (auto& v : shifted) v += 3.0;
  const auto a = dsp::welch_psd(x, 100.0, 128, 64);
  const auto b = dsp::welch_psd(shifted, 100.0, 128, 64);
  CHECK(b.power[0] > a.power[0]);
  for (std::size_t k = 1; k < a.power.size(); ++k) CHECK(b.power[k] == doctest::Approx(a.power[k]).epsilon(1e-9));
  for (double p : a.power) CHECK(p >= 0.0);

  const std::vector<double> constant(256, 2.0);
  const auto c = dsp::welch_psd(constant, 100.0, 64, 32);
  CHECK(c.power[0] > 0.0);
  for (std::size_t k = 1; k < c.power.size(); ++k) CHECK(c.power[k] == 0.0);
}

TEST_CASE("welch argument validation") {
  const std::vector<double> x(100, 1.0);
  CHECK_THROWS(dsp::welch_psd(x, 100.0, 3, 0));
  CHECK_THROWS(dsp::welch_psd(x, 100.0, 200, 0));
  CHECK_THROWS(dsp::welch_psd(x, 100.0, 50, 50));
}

TEST_CASE("welch segment length holds two cycles of the lowest frequency") {
  CHECK(dsp::welch_segment_length(5000, 500.0, 8.0) == 125);
  CHECK(dsp::welch_segment_length(50, 500.0, 8.0) == 50);
  CHECK(dsp::welch_segment_length(5000, 500.0, 8.0, 256) == 256);
}

TEST_CASE("simpson is exact for quadratics and cubics on uniform grids") {
  std::vector<double> x(11), y(11);
  for (int i = 0; i <= 10; ++i) {
    x[static_cast<std::size_t>(i)] = i / 10.0;
    y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  }
  CHECK(std::fabs(dsp::simpson_integrate(y, x) - 1.0 / 3.0) < 1e-12);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2 * x[i] * x[i] * x[i] - x[i] + 0.5;
  CHECK(std::fabs(dsp::simpson_integrate(y, x) - 0.5) < 1e-12);
  const std::vector<double> cx{1.0, 4.0}, cy{2.5, 2.5};
  CHECK(dsp::simpson_integrate(cy, cx) == doctest::Approx(7.5));
}

TEST_CASE("simpson is exact for random quadratics on random grids") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0), gap(0.01, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double a = u(rng), b = u(rng), c = u(rng);
    std::vector<double> x{u(rng)}, y;
    const std::size_t n = 3 + 2 * static_cast<std::size_t>(rep % 10);
    while (x.size() < n) x.push_back(x.back() + gap(rng));
    for (double v : x) y.push_back(a * v * v + b * v + c);
    auto prim = [&](double v) { return a * v * v * v / 3 + b * v * v / 2 + c * v; };
    CHECK(std::fabs(dsp::simpson_integrate(y, x) - (prim(x.back()) - prim(x.front()))) < 1e-12 * std::max(1.0, std::fabs(prim(x.back()))) * 10);
  }
}

TEST_CASE("simpson matches the piecewise quadratic reference on odd interval counts") {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> gap(0.1, 1.0);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep % 9);
    std::vector<double> x{0.0};
    while (x.size() < n) x.push_back(x.back() + gap(rng));
    const auto y = oracle::random_window(rng, n);
    CHECK(oracle::close(dsp::simpson_integrate(y, x), oracle::piecewise_quadratic_integral(y, x), 1e-9, 1e-12));
  }
}

TEST_CASE("simpson of sin over half a period") {
  std::vector<double> x(101), y(101);
  for (int i = 0; i <= 100; ++i) {
    x[static_cast<std::size_t>(i)] = kPi * i / 100.0;
    y[static_cast<std::size_t>(i)] = std::sin(x[static_cast<std::size_t>(i)]);
  }
  CHECK(std::fabs(dsp::simpson_integrate(y, x) - 2.0) < 1e-6);
}

TEST_CASE("simpson input validation") {
  const std::vector<double> x{0, 1, 2}, y{1, 2};
  CHECK_THROWS(dsp::simpson_integrate(y, x));
  const std::vector<double> bad{0, 0, 1}, y3{1, 2, 3};
  CHECK_THROWS(dsp::simpson_integrate(y3, bad));
}

TEST_CASE("bandpass passes the centre band and rejects far frequencies") {
  const dsp::BandpassDesign design(8.0, 12.0, 5, 500.0);
  CHECK(design.magnitude(std::sqrt(8.0 * 12.0)) == doctest::Approx(1.0).epsilon(1e-6));
  const auto in = sine(10.0, 500.0, 5000);
  const auto out = dsp::butterworth_bandpass(in, design);
  const double gain = rms(out, 1000, 4000) / rms(in, 1000, 4000);
  CHECK(gain > std::pow(10.0, -0.5 / 20));
  CHECK(gain < std::pow(10.0, 0.5 / 20));

  const auto far = sine(50.0, 500.0, 5000);
  const auto far_out = dsp::butterworth_bandpass(far, design);
  CHECK(rms(far_out, 1000, 4000) <= rms(far, 1000, 4000) * std::pow(10.0, -30.0 / 20));

  const std::vector<double> zeros(500, 0.0);
  for (double v : dsp::butterworth_bandpass(zeros, design)) CHECK(v == 0.0);
}

TEST_CASE("zero-phase filtering introduces no lag") {
  const dsp::BandpassDesign design(13.0, 30.0, 4, 500.0);
  const auto in = sine(20.0, 500.0, 4000, 1.0, 0.3);
  const auto out = dsp::butterworth_bandpass(in, design);
  auto xcorr = [&](int lag) {
    double s = 0.0;
    for (std::size_t i = 500; i < 3500; ++i) s += in[i] * out[static_cast<std::size_t>(static_cast<int>(i) + lag)];
    return s;
  };
  int best = 0;
  for (int lag = -12; lag <= 12; ++lag) {
    if (xcorr(lag) > xcorr(best)) best = lag;
  }
  CHECK(best == 0);

}

TEST_CASE("two zero-phase passes apply the squared magnitude response") {
  const dsp::BandpassDesign design(8.0, 12.0, 3, 500.0);
  for (double f : {7.0, 9.0, 11.0, 14.0}) {
    const auto in = sine(f, 500.0, 8000);
    const auto twice = dsp::butterworth_bandpass(dsp::butterworth_bandpass(in, design), design);
    const double h = design.magnitude(f);
    CHECK(std::fabs(rms(twice, 2000, 6000) - std::pow(h, 4) * rms(in, 2000, 6000)) < 1e-6 + 1e-3 * std::pow(h, 4));
  }
}

TEST_CASE("bandpass input validation") {
  CHECK_THROWS(dsp::BandpassDesign(12.0, 8.0, 5, 500.0));
  CHECK_THROWS(dsp::BandpassDesign(8.0, 260.0, 5, 500.0));
  const dsp::BandpassDesign design(8.0, 12.0, 5, 500.0);
  const std::vector<double> tiny(10, 1.0);
  CHECK_THROWS(dsp::butterworth_bandpass(tiny, design));
}

TEST_CASE("savitzky-golay reproduces low-order polynomials") {
  std::vector<double> line(200), cubic(200);
  for (std::size_t i = 0; i < 200; ++i) {
    const double t = static_cast<double>(i) * 0.05;
    line[i] = 3 * t + 2;
    cubic[i] = 0.2 * t * t * t - t * t + 4;
  }
  const auto a = dsp::savgol_smooth(line, 11, 2);
  const auto b = dsp::savgol_smooth(cubic, 21, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(std::fabs(a[i] - line[i]) < 1e-9);
    CHECK(std::fabs(b[i] - cubic[i]) < 1e-9 * std::max(1.0, std::fabs(cubic[i])));
  }
  const std::vector<double> flat(50, -1.5);
  for (double v : dsp::savgol_smooth(flat, 7, 3)) CHECK(v == doctest::Approx(-1.5));
  CHECK_THROWS(dsp::savgol_smooth(flat, 6, 2));
  CHECK_THROWS(dsp::savgol_smooth(flat, 7, 7));
}

TEST_CASE("savitzky-golay reduces noise around a smooth signal") {
  std::mt19937_64 rng(19);
  const auto clean = sine(2.0, 200.0, 1000);
  auto noisy = clean;
  const auto noise = oracle::random_window(rng, noisy.size(), 0.3);
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += noise[i];
  const auto smooth = dsp::savgol_smooth(noisy, 31, 3);
  double before = 0.0, after = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    before += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
    after += (smooth[i] - clean[i]) * (smooth[i] - clean[i]);
  }
  CHECK(after < before);
}

TEST_CASE("haar transform examples") {
  const std::vector<double> ones{1, 1, 1, 1};
  const auto c = dsp::haar_dwt_level1(ones);
  REQUIRE(c.approx.size() == 2);
  CHECK(c.approx[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(c.detail[1] == 0.0);
  const std::vector<double> pm{1, -1};
  const auto d = dsp::haar_dwt_level1(pm);
  CHECK(d.approx[0] == 0.0);
  CHECK(d.detail[0] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("haar transform matches the reference, conserves energy and inverts") {
  std::mt19937_64 rng(20);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 2 + static_cast<std::size_t>(rep);
    const auto x = oracle::random_window(rng, n);
    const auto c = dsp::haar_dwt_level1(x);
    std::vector<double> ra, rd;
    oracle::haar(x, ra, rd);
    REQUIRE(c.approx.size() == ra.size());
    double ex = 0.0, ec = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
      CHECK(oracle::close(c.approx[i], ra[i], 1e-9, 1e-15));
      CHECK(oracle::close(c.detail[i], rd[i], 1e-9, 1e-15));
      ec += c.approx[i] * c.approx[i] + c.detail[i] * c.detail[i];
    }
    if (n % 2 == 0) {
      for (double v : x) ex += v * v;
      CHECK(ec == doctest::Approx(ex).epsilon(1e-9));
      const auto back = dsp::haar_idwt_level1(c);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::fabs(back[i] - x[i]) < 1e-9);
    }
  }
}
