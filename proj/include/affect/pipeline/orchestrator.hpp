#pragma once

#include <string>
#include <vector>

#include "affect/pipeline/config.hpp"

namespace affect::pipeline {

// Pipeline stages. Each command locks the run directory, does its work,
// updates manifest.json, and releases the lock. Failures surface as typed
// exceptions; run_cli maps them to exit codes.
void cmd_synth(const PipelineConfig& cfg);
void cmd_prepare_data(const PipelineConfig& cfg);
void cmd_stats(const PipelineConfig& cfg, const std::string& split);
void cmd_train_visual(const PipelineConfig& cfg);
void cmd_train_sequence(const PipelineConfig& cfg);
void cmd_evaluate(const PipelineConfig& cfg, const std::string& split);

// Exit codes: 0 ok, 2 config error, 3 data error, 4 checkpoint error, 1 other.
int run_cli(const std::vector<std::string>& args);

}  // namespace affect::pipeline
