#pragma once

#include "drachma/types.hpp"

#include <string>
#include <vector>

namespace drachma {

/// Everything a run needs: cavity, state branches, trial function, detection chain.
struct ExperimentConfig {
    ResonatorParams resonator;
    std::vector<StateBranch> branches;
    TrialFunction trial;
    DetectionChain detection;
};

/// Parse and validate a JSON config file.  Frequencies in the file are Hz and
/// become rad/s here; decay rates are plain 1/s and are taken verbatim.
/// Throws IoError on unreadable/unparsable files, ValidationError (naming the
/// offending field) on invariant violations.
ExperimentConfig load_config(const std::string& path);

/// Parse a config from a JSON string (same validation as load_config).
ExperimentConfig parse_config(const std::string& json_text, const std::string& origin = "<string>");

/// Serialize back to the file schema (Hz).  load(save(c)) reproduces c exactly.
std::string config_to_json(const ExperimentConfig& c);
void save_config(const ExperimentConfig& c, const std::string& path);

/// Validate an already-built config (same checks as load_config).
void validate_config(const ExperimentConfig& c);

} // namespace drachma
