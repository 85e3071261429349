#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "dmt/data.hpp"

namespace dmt {

// Dataset documents are JSON:
//   {"schema": {"m": M, "n": N, "c": C, "mode": "multihot"|"onehot",
//               "names": [...], "arities": [...]},
//    "items": [{"id": 0, "label": 1,
//               "provenance": {"kind": "clean"} |
//                             {"kind": "perturbed", "origin": 7,
//                              "flips": [[m, n, "insert"|"delete"], ...]},
//               "bits": [[m, n], ...]}]}
// `bits` lists the active positions. Readers also accept `dense`, a list of
// M rows of N 0/1 values, in place of `bits`.

std::string dataset_to_json(const Dataset& d);
/// Throws ParseError naming the offending record.
Dataset dataset_from_json(const std::string& text);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// One row per item: id,label,provenance,bit_0_0,...,bit_{M-1}_{N-1}
void export_csv(const Dataset& d, std::ostream& out);

// Target files: {"task": "tampering"|"improvement", "m": M, "n": N,
//                "targets": [{"target_label": 1, "original_label": 0,
//                             "bits": [[m, n], ...]}]}
std::string targets_to_json(const TargetSpec& t);
TargetSpec targets_from_json(const std::string& text);
void save_targets(const TargetSpec& t, const std::filesystem::path& path);
TargetSpec load_targets(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dmt
