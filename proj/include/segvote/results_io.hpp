#pragma once

// JSON and CSV renderings of experiment results.
//
// JSON documents have two top-level keys, "config" (everything needed to
// rerun the experiment) and "results". Key order is fixed and no wall-clock
// data is included, so identical inputs give byte-identical files.

#include <filesystem>
#include <string>

#include "segvote/harness.hpp"

namespace segvote {

enum class ResultFormat { json, csv };

std::string render(const SimulationResult& r, ResultFormat format);
std::string render(const RateSlopeResult& r, ResultFormat format);
std::string render(const RegimeReport& r, ResultFormat format);
std::string render(const NuSweepResult& r, ResultFormat format);
std::string render(const AccuracyTable& r, ResultFormat format);

/// Throws WriteError when the file cannot be written.
void write_text(const std::filesystem::path& path, const std::string& text);

template <typename Result>
void save_results(const Result& r, const std::filesystem::path& path, ResultFormat format) {
  write_text(path, render(r, format));
}

}  // namespace segvote
