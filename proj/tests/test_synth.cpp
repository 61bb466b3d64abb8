#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "eegfb/container.hpp"
#include "eegfb/error.hpp"
#include "eegfb/spectral.hpp"
#include "eegfb/synth.hpp"
#include "oracles.hpp"

using namespace eegfb;
namespace fs = std::filesystem;

namespace {

SynthSpec small_spec() {
  SynthSpec s;
  s.users = 2;
  s.tasks = 2;
  s.tasks_per_user = 2;
  s.paragraphs_min = 2;
  s.paragraphs_max = 3;
  s.sample_rate_hz = 200;
  return s;
}

std::string slurp_tree(const fs::path& dir) {
  std::string out;
  std::set<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.insert(e.path());
  for (const auto& f : files) out += fs::relative(f, dir).string() + "\n" + read_text_file(f);
  return out;
}

}  // namespace

TEST_CASE("pink_noise") {
  const std::size_t n = 4000;
  const double rate = 500, rms = 3e-6;
  const auto x = pink_noise(n, rate, rms, 0.5, 11);
  REQUIRE(x.size() == n);
  double power = 0;
  for (double v : x) power += v * v;
  CHECK(power / double(n) == doctest::Approx(rms * rms).epsilon(1e-9));

  // Bin power falls as 1/f: |X_k|^2 * f_k is flat over the band.
  const auto mags = oracle::dft_magnitudes(x);
  const double ref = mags[40] * mags[40] * 40;
  for (std::size_t k : {4, 10, 100, 1000, 1999}) CHECK(mags[k] * mags[k] * double(k) == doctest::Approx(ref).epsilon(1e-6));
  CHECK(mags[3] < 1e-12 * mags[4]);  // below 0.5 Hz
  CHECK(pink_noise(n, rate, rms, 0.5, 11) == x);
  CHECK(pink_noise(n, rate, rms, 0.5, 12) != x);
}

TEST_CASE("burst amplitude") {
  SynthSpec s;
  const double pa = s.noise_rms_v * s.noise_rms_v * std::log(1.5) / std::log(500 / 0.5);
  CHECK(background_alpha_power(s) == doctest::Approx(pa));
  CHECK(burst_amplitude(s) == doctest::Approx(std::sqrt(4 * pa)));
  s.alpha_contrast = 1;
  CHECK(burst_amplitude(s) == 0.0);
  s.burst_amplitude_v = 7e-6;
  CHECK(burst_amplitude(s) == 7e-6);
}

TEST_CASE("synth_sessions structure") {
  const auto spec = small_spec();
  const auto study = synth_sessions(spec, 5);
  CHECK(study.labels.size() == 2);
  CHECK(study.logs.size() == 4);
  for (const auto& labels : study.labels) {
    CHECK_NOTHROW(validate(labels));
    CHECK(labels.pool == select_candidate_pool(labels.matrix, 7));
  }
  std::size_t viewed = 0;
  for (const auto& log : study.logs) {
    CHECK_NOTHROW(validate(log));
    CHECK(log.judgments_read().size() == 7);
    CHECK(log.gold.size() == 7);
    CHECK(log.annotations.size() == log.views.size());
    CHECK(*log.ranking_quality >= 1);
    CHECK(*log.ranking_quality <= 4);
    viewed += log.views.size();
  }
  CHECK(study.segments.size() == viewed);
  for (const auto& seg : study.segments) {
    CHECK(seg.channels() == 4);
    CHECK(seg.samples_per_channel() == std::size_t(seg.meta().dwell_seconds * 200));
  }
}

TEST_CASE("synth_sessions is deterministic") {
  const auto spec = small_spec();
  const auto a = synth_sessions(spec, 9), b = synth_sessions(spec, 9), c = synth_sessions(spec, 10);
  CHECK(a.logs == b.logs);
  CHECK(a.segments == b.segments);
  CHECK_FALSE(a.segments == c.segments);

  const auto root = fs::temp_directory_path() / "eegfb_synth_det";
  fs::remove_all(root);
  write_study(a, root / "a");
  write_study(b, root / "b");
  CHECK(slurp_tree(root / "a") == slurp_tree(root / "b"));
  CHECK(fs::exists(root / "a" / "logs" / "sessions.jsonl"));
  CHECK(read_session_logs(root / "a" / "logs" / "sessions.jsonl") == a.logs);
  fs::remove_all(root);
}

TEST_CASE("alpha contrast of bursts") {
  // Four-second paragraphs with three-second bursts: the burst covers seconds 1..3 exactly.
  for (double contrast : {2.0, 3.0, 5.0}) {
    SynthSpec s;
    s.users = 4;
    s.tasks = 3;
    s.paragraph_seconds_min = s.paragraph_seconds_max = 4;
    s.burst_seconds_min = s.burst_seconds_max = 3;
    s.hard_to_say = 0;
    s.alpha_contrast = contrast;
    const auto study = synth_sessions(s, 21);

    std::map<ParagraphOrigin, bool> burst;
    for (const auto& log : study.logs)
      for (const auto& a : log.annotations) burst[{log.user, log.task, a.judgment, a.paragraph}] = a.annotation == "useful";

    double with = 0, without = 0;
    std::size_t n_with = 0, n_without = 0;
    const auto bands = BandTable::standard();
    for (const auto& seg : study.segments) {
      const bool b = burst.at({seg.meta().user, seg.meta().query, seg.meta().judgment, seg.meta().paragraph});
      auto windows = split_windows(seg, 1.0);
      for (std::size_t w = 1; w < 4; ++w) {
        const auto e = band_energies(energy_density(window_spectrum(windows[w])), bands, 1.0, BandMode::ResolutionAware);
        for (std::size_t c = 0; c < e.rows; ++c) {
          (b ? with : without) += e.at(c, 2);
          ++(b ? n_with : n_without);
        }
      }
    }
    REQUIRE(n_with > 100);
    REQUIRE(n_without > 100);
    const double measured = (with / double(n_with)) / (without / double(n_without));
    CHECK(measured == doctest::Approx(contrast).epsilon(0.2));
  }
}

TEST_CASE("synth spec validation") {
  auto s = small_spec();
  s.tasks_per_user = 3;
  CHECK_THROWS_AS(synth_sessions(s, 1), Error);
  s = small_spec();
  s.corpus_size = 5;
  CHECK_THROWS_AS(synth_sessions(s, 1), Error);
  s = small_spec();
  s.burst_seconds_max = 6;
  CHECK_THROWS_AS(synth_sessions(s, 1), Error);
  s = small_spec();
  s.alpha_contrast = 0.5;
  CHECK_THROWS_AS(synth_sessions(s, 1), Error);
  s = small_spec();
  s.sample_rate_hz = 50;
  CHECK_THROWS_AS(synth_sessions(s, 1), Error);
}
