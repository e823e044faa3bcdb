#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lexsig/config.hpp"

namespace lexsig {

enum class Stage { sample, score, signatures, aoa, analyze };

const char* stage_name(Stage s);

// Hash of every config key the stage and its predecessors read.
std::string stage_hash(const Config& cfg, Stage s);

// `# lexsig config_hash=<hash> stage=<name>`
std::string header_line(const Config& cfg, Stage s);

// Throws StageMismatch unless `path` starts with the header the current
// config expects for `s`.
void check_header(const std::filesystem::path& path, const Config& cfg, Stage s);

// Checks referenced paths, seeds and sample sizes for the given stage.
void validate_config(const Config& cfg, Stage s);

std::filesystem::path output_dir(const Config& cfg);

void run_sample(const Config& cfg);
void run_score(const Config& cfg);
void run_signatures(const Config& cfg);
void run_aoa(const Config& cfg);
void run_analyze(const Config& cfg);
void run_all(const Config& cfg);

// Calls fn(i) for i in [0, n) on up to `workers` threads. Exceptions are
// rethrown on the caller's thread (the lowest index wins).
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

// Filesystem-safe form of a word for per-word file names.
std::string safe_file_name(const std::string& word);

}  // namespace lexsig
