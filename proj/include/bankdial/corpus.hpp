#pragma once

#include <stdexcept>
#include <cstdint>
#include <string>
#include <vector>

#include "bankdial/action.hpp"

namespace bankdial {

using Corpus = std::vector<Dialogue>;

struct CorpusIoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Line-delimited records, one dialogue per line. Write is atomic enough for
// our purposes: temp file + rename.
void write_corpus(const std::string& path, const Corpus& corpus);
Corpus read_corpus(const std::string& path);

// FNV-1a over raw bytes; used for template checksums and config hashes in
// the manifest.
uint64_t content_hash(const std::string& bytes);
std::string content_hash_hex(const std::string& bytes);
std::string file_hash_hex(const std::string& path);

}  // namespace bankdial
