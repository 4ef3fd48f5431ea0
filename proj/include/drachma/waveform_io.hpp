#pragma once

#include "drachma/types.hpp"

#include <string>

namespace drachma {

/// Write `t_ns,re,im` CSV with a leading `# units: ...` comment.
void write_waveform_csv(const std::string& path, const Waveform& w, const std::string& units);

/// Read a waveform CSV produced by write_waveform_csv (comments skipped).
/// The grid must be uniform; throws IoError on malformed input.
Waveform read_waveform_csv(const std::string& path);

/// FNV-1a 64-bit hash of a file's bytes, as "fnv1a64:<hex>".
std::string file_content_hash(const std::string& path);

/// Write text to a file, throwing IoError on failure.
void write_text_file(const std::string& path, const std::string& text);

} // namespace drachma
