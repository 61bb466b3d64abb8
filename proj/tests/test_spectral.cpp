#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "eegfb/error.hpp"
#include "eegfb/spectral.hpp"
#include "oracles.hpp"

using namespace eegfb;

namespace {

RowMatrix one_row(const std::vector<double>& x) {
  RowMatrix m(1, x.size());
  m.values = x;
  return m;
}

EegSegment segment_from(std::vector<std::vector<double>> rows, double rate) {
  std::vector<std::string> labels;
  std::vector<double> data;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    labels.push_back("C" + std::to_string(i));
    data.insert(data.end(), rows[i].begin(), rows[i].end());
  }
  return EegSegment(labels, rate, data, SegmentMeta{"u", "q", 1, 1, double(rows[0].size()) / rate});
}

EegSegment noise_segment(std::size_t ch, std::size_t n, double rate, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1e-5);
  std::vector<std::vector<double>> rows(ch, std::vector<double>(n));
  for (auto& r : rows)
    for (auto& v : r) v = d(rng);
  return segment_from(rows, rate);
}

}  // namespace

TEST_CASE("band table") {
  const auto t = BandTable::standard();
  CHECK(t.bands[0].name == "delta");
  CHECK(t.bands[4].name == "gamma");
  CHECK(t.bands[4].high_hz < 500.0);
  CHECK(t.bands[2].first_column == 9);
  CHECK(t.bands[2].last_column == 13);
}

TEST_CASE("split_windows") {
  SUBCASE("10 s, t = 4 gives 7 windows") {
    auto s = noise_segment(2, 10000, 1000, 1);
    auto w = split_windows(s, 4.0);
    REQUIRE(w.size() == 7);
    CHECK(w[0].cols == 4000);
    CHECK(w[6].at(1, 0) == s.row(1)[6000]);
  }
  SUBCASE("duration equal to t gives one window") { CHECK(split_windows(noise_segment(1, 2000, 1000, 2), 2.0).size() == 1); }
  SUBCASE("shorter than t gives none") { CHECK(split_windows(noise_segment(1, 3500, 1000, 3), 4.0).empty()); }
  SUBCASE("count matches enumeration") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 300; ++i) {
      const std::size_t rate = 100 * (1 + rng() % 10);
      const std::size_t t = 1 + rng() % 8;
      const std::size_t n = rng() % (rate * 20);
      CHECK(window_count(n, double(rate), double(t)) == oracle::enumerate_windows(n, rate, t * rate));
    }
  }
}

TEST_CASE("window_spectrum") {
  SUBCASE("constant row") {
    auto f = window_spectrum(one_row(std::vector<double>(64, 2.0)));
    CHECK(f.at(0, 0) == doctest::Approx(128.0));
    for (std::size_t k = 1; k < 64; ++k) CHECK(f.at(0, k) < 1e-9 * 128.0);
  }
  SUBCASE("10 Hz sinusoid at 1000 Hz") {
    auto x = oracle::sinusoid(10.0, 1000.0, 1000);
    auto f = window_spectrum(one_row(x));
    auto ref = oracle::dft_magnitudes(x);
    CHECK(f.at(0, 10) == doctest::Approx(500.0).epsilon(1e-12));
    CHECK(f.at(0, 990) == doctest::Approx(500.0).epsilon(1e-12));
    for (std::size_t k = 0; k < 1000; ++k) {
      if (k != 10 && k != 990) CHECK(f.at(0, k) <= 1e-6);
      CHECK(std::abs(f.at(0, k) - ref[k]) <= 1e-9 * 500.0);
    }
  }
  SUBCASE("random 8-sample rows match the direct DFT") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(8);
      for (auto& v : x) v = u(rng);
      auto f = window_spectrum(one_row(x));
      auto ref = oracle::dft_magnitudes(x);
      for (std::size_t k = 0; k < 8; ++k) CHECK(oracle::rel_diff(f.at(0, k), ref[k]) <= 1e-9);
    }
  }
}

TEST_CASE("energy_density") {
  CHECK(energy_density(one_row({0, 0, 0})).values == std::vector<double>{0, 0, 0});
  CHECK(energy_density(one_row({3})).values == std::vector<double>{9});
  SUBCASE("Parseval") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> d;
    for (std::size_t m : {7u, 64u, 100u, 333u}) {
      RowMatrix w(3, m);
      for (auto& v : w.values) v = d(rng);
      auto p = energy_density(window_spectrum(w));
      double time = 0, freq = 0;
      for (double v : w.values) time += v * v;
      for (double v : p.values) freq += v;
      CHECK(oracle::rel_diff(time, freq / double(m)) <= 1e-9);
    }
  }
}

TEST_CASE("band_energies") {
  const auto bands = BandTable::standard();
  SUBCASE("10 Hz in paper-literal mode lands in alpha") {
    auto p = energy_density(window_spectrum(one_row(oracle::sinusoid(10.0, 1000.0, 1000))));
    auto e = band_energies(p, bands, 1.0, BandMode::PaperLiteral);
    // Only the low-frequency bin (column 11) is counted; its mirror at column 991 is not.
    CHECK(e.at(0, 2) == doctest::Approx(250000.0).epsilon(1e-12));
    for (std::size_t b : {0u, 1u, 3u, 4u}) CHECK(e.at(0, b) <= 1e-6 * e.at(0, 2));
  }
  SUBCASE("boundary bins are counted twice in paper-literal mode") {
    auto p = energy_density(window_spectrum(one_row(oracle::sinusoid(8.0, 1000.0, 1000))));
    auto e = band_energies(p, bands, 1.0, BandMode::PaperLiteral);
    CHECK(e.at(0, 1) == doctest::Approx(250000.0));
    CHECK(e.at(0, 2) == doctest::Approx(250000.0));
    auto half_open = band_energies(p, bands, 1.0, BandMode::ResolutionAware);
    CHECK(half_open.at(0, 1) < 1e-6);
    CHECK(half_open.at(0, 2) == doctest::Approx(250000.0));
  }
  SUBCASE("zero window") {
    auto e = band_energies(RowMatrix(2, 1000), bands, 1.0);
    for (double v : e.values) CHECK(v == 0.0);
  }
  SUBCASE("t = 2, 10 Hz, resolution aware") {
    auto x = oracle::sinusoid(10.0, 1000.0, 2000);
    auto p = energy_density(window_spectrum(one_row(x)));
    auto e = band_energies(p, bands, 2.0);
    auto ref = oracle::dft_magnitudes(x);
    double non_dc = 0;
    for (std::size_t k = 1; k <= 1000; ++k) non_dc += ref[k] * ref[k];
    CHECK(e.at(0, 2) >= 0.99 * non_dc);
  }
  SUBCASE("paper-literal with t != 1") {
    auto p = RowMatrix(1, 2000);
    CHECK_THROWS_AS(band_energies(p, bands, 2.0, BandMode::PaperLiteral), Error);
  }
}

TEST_CASE("combine_stats") {
  SUBCASE("hand example") {
    std::vector<RowMatrix> series;
    for (double v : {5.0, 1.0, 3.0, 2.0}) {
      RowMatrix e(1, kBandCount);
      e.at(0, 0) = v;
      series.push_back(e);
    }
    const std::vector<std::size_t> g{1, 2};
    auto s = combine_stats(series, g, 1);
    CHECK(s.max_at(0, 0, 0) == 5.0);
    CHECK(s.max_at(0, 0, 1) == 3.0);
    CHECK(s.min_at(0, 0, 0) == 1.0);
    CHECK(s.min_at(0, 0, 1) == 2.0);
  }
  SUBCASE("rank beyond window count is zero") {
    std::vector<RowMatrix> series(4, RowMatrix(1, kBandCount));
    for (auto& e : series) e.at(0, 3) = 7.0;
    const std::vector<std::size_t> g{8};
    auto s = combine_stats(series, g, 1);
    CHECK(s.max_at(0, 3, 0) == 0.0);
    CHECK(s.min_at(0, 3, 0) == 0.0);
  }
  SUBCASE("empty series") {
    const std::vector<std::size_t> g{1};
    auto s = combine_stats({}, g, 2);
    CHECK(s.max.size() == 10);
  }
  SUBCASE("monotone in rank") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<RowMatrix> series(20, RowMatrix(3, kBandCount));
    for (auto& e : series)
      for (auto& v : e.values) v = u(rng);
    const std::vector<std::size_t> g{1, 2, 4, 8, 16};
    auto s = combine_stats(series, g, 3);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < kBandCount; ++c)
        for (std::size_t j = 1; j < g.size(); ++j) {
          CHECK(s.max_at(r, c, j) <= s.max_at(r, c, j - 1));
          CHECK(s.min_at(r, c, j) >= s.min_at(r, c, j - 1));
        }
  }
}

TEST_CASE("extract_features") {
  SUBCASE("length") {
    StatConfig cfg;
    CHECK(feature_count(cfg, 62) == 9920);
    StatConfig small{{1.0}, {1}};
    auto f = extract_features(noise_segment(1, 3000, 1000, 8), small);
    CHECK(f.values.size() == 10);
  }
  SUBCASE("short segment is all zero") {
    auto f = extract_features(noise_segment(3, 500, 1000, 9), StatConfig{});
    CHECK(f.values.size() == feature_count(StatConfig{}, 3));
    for (double v : f.values) CHECK(v == 0.0);
  }
  SUBCASE("length is independent of duration") {
    std::mt19937_64 rng(10);
    StatConfig cfg{{1, 2}, {1, 3}};
    for (int i = 0; i < 10; ++i) {
      const std::size_t n = 50 + rng() % 12000;
      CHECK(extract_features(noise_segment(2, n, 100, 11 + i), cfg).values.size() == feature_count(cfg, 2));
    }
  }
  SUBCASE("descriptor order") {
    StatConfig cfg{{1, 2}, {1, 2}};
    auto cols = describe_features(cfg, {"Fz", "Cz"});
    REQUIRE(cols.size() == feature_count(cfg, 2));
    CHECK(cols[0].window_s == 1.0);
    CHECK(cols[0].stat == StatKind::Max);
    CHECK(cols[5].channel_label == "Cz");
    CHECK(cols[10].rank == 2);
    CHECK(cols[20].stat == StatKind::Min);
    CHECK(cols[40].window_s == 2.0);
  }
  SUBCASE("features equal the per-window composition of the public ops") {
    auto seg = noise_segment(2, 3500, 1000, 12);
    StatConfig cfg{{1, 2}, {1, 2}};
    auto f = extract_features(seg, cfg);
    std::size_t pos = 0;
    for (double t : cfg.window_lengths_s) {
      std::vector<RowMatrix> series;
      for (const auto& w : split_windows(seg, t))
        series.push_back(band_energies(energy_density(window_spectrum(w)), BandTable::standard(), t));
      auto s = combine_stats(series, cfg.order_ranks, 2);
      for (double v : s.max) CHECK(f.values[pos++] == v);
      for (double v : s.min) CHECK(f.values[pos++] == v);
    }
  }
  SUBCASE("artifact windows are skipped") {
    auto seg = noise_segment(1, 3000, 1000, 13);
    std::vector<double> x(seg.row(0).begin(), seg.row(0).end());
    x[1500] = 1e-3;  // spike inside windows at 1 s and (for t=1) only there
    auto spiked = segment_from({x}, 1000);
    StatConfig cfg{{1.0}, {1, 3}};
    cfg.artifact_threshold_v = 100e-6;
    auto f = extract_features(spiked, cfg);
    // two clean windows remain, so rank 3 is zero-filled
    CHECK(f.values[5] == 0.0);
    CHECK(f.values[0] > 0.0);
  }
}
