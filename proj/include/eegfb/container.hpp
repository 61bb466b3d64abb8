#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "eegfb/signal.hpp"

namespace eegfb {

/// Load a segment container directory: meta.json plus samples.f32
/// (little-endian float32, channel-major) or, failing that, samples.csv
/// (one row per channel). Rejects sample rates below kMinSampleRateHz and
/// sample counts that disagree with dwell_seconds by more than one sample.
EegSegment load_segment(const std::filesystem::path& dir);

/// Write meta.json and samples.f32 into dir (created if missing). Samples are
/// narrowed to float32, so a load/save cycle reproduces the files exactly.
void save_segment(const EegSegment& segment, const std::filesystem::path& dir);

bool is_segment_container(const std::filesystem::path& dir);

/// Paragraph-view events, one JSON object per line.
std::vector<ViewEvent> read_view_events(const std::filesystem::path& file);
void write_view_events(const std::vector<ViewEvent>& events, const std::filesystem::path& file);

/// Write text to path through a sibling temp file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace eegfb
