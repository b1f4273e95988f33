#include "bankdial/corpus.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bankdial {

void write_corpus(const std::string& path, const Corpus& corpus) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw CorpusIoError("cannot open for writing: " + tmp.string());
    for (const auto& d : corpus) out << serialize_dialogue(d) << '\n';
    if (!out) throw CorpusIoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

Corpus read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusIoError("cannot open corpus: " + path);
  Corpus corpus;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      corpus.push_back(parse_dialogue(line));
    } catch (const std::exception& e) {
      throw CorpusIoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

uint64_t content_hash(const std::string& bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string content_hash_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(content_hash(bytes)));
  return buf;
}

std::string file_hash_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusIoError("cannot open for hashing: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return content_hash_hex(buf.str());
}

}  // namespace bankdial
