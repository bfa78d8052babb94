#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "repset/training.hpp"

namespace repset {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  TrainConfig config;
  Model model;
  std::vector<std::string> class_names;
  std::size_t epoch = 0;
  double best_val_accuracy = 0.0;
  int format_version = kCheckpointFormatVersion;
};

/// JSON document; doubles are written in shortest round-trip form, so
/// save -> load reproduces every parameter bit for bit.
std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text, const std::string& source = "<string>");

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws DataError on unreadable, malformed, or wrong-version documents.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace repset
