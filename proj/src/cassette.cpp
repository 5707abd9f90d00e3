#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "dataagent/backend.hpp"
#include "dataagent/error.hpp"
#include "dataagent/format.hpp"

namespace dataagent {

std::string prompt_hash(std::string_view prompt) { return sha256_hex(prompt); }

namespace {

std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i >= s.size()) throw Error(Errc::CassetteCorrupt, "dangling escape");
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 't': out += '\t'; break;
      default: throw Error(Errc::CassetteCorrupt, fmt::format("unknown escape '\\{}'", s[i]));
    }
  }
  return out;
}

std::string read_field(std::string_view line, std::size_t& pos, bool last) {
  std::size_t colon = line.find(':', pos);
  if (colon == std::string_view::npos || colon == pos) throw Error(Errc::CassetteCorrupt, "missing length prefix");
  std::size_t len = 0;
  auto [ptr, ec] = std::from_chars(line.data() + pos, line.data() + colon, len);
  if (ec != std::errc() || ptr != line.data() + colon) throw Error(Errc::CassetteCorrupt, "bad length prefix");
  std::size_t start = colon + 1;
  if (start + len > line.size()) throw Error(Errc::CassetteCorrupt, "field shorter than its length prefix");
  std::string field = unescape(line.substr(start, len));
  pos = start + len;
  if (last) {
    if (pos != line.size()) throw Error(Errc::CassetteCorrupt, "trailing bytes after last field");
  } else {
    if (pos >= line.size() || line[pos] != ' ') throw Error(Errc::CassetteCorrupt, "missing field separator");
    ++pos;
  }
  return field;
}

}  // namespace

std::string encode_cassette_entry(const CassetteEntry& e) {
  std::string h = escape(e.hash), p = escape(e.params), c = escape(e.completion);
  return fmt::format("{}:{} {}:{} {}:{}", h.size(), h, p.size(), p, c.size(), c);
}

CassetteEntry decode_cassette_entry(std::string_view line) {
  std::size_t pos = 0;
  CassetteEntry e;
  e.hash = read_field(line, pos, false);
  e.params = read_field(line, pos, false);
  e.completion = read_field(line, pos, true);
  if (e.hash.size() != 64) throw Error(Errc::CassetteCorrupt, "prompt hash is not 64 hex digits");
  return e;
}

std::vector<CassetteEntry> read_cassette(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::CassetteMiss, "cassette not found: " + path.string());
  std::vector<CassetteEntry> entries;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      entries.push_back(decode_cassette_entry(line));
    } catch (const Error& e) {
      throw Error(Errc::CassetteCorrupt, fmt::format("{} line {}: {}", path.string(), n, e.detail()));
    }
  }
  return entries;
}

RecordReplayBackend::RecordReplayBackend(std::shared_ptr<const LLMBackend> inner, std::filesystem::path cassette,
                                         CassetteMode mode)
    : inner_(std::move(inner)), path_(std::move(cassette)), mode_(mode) {
  if (mode_ == CassetteMode::Replay) {
    for (CassetteEntry& e : read_cassette(path_)) replay_.emplace(std::move(e.hash), std::move(e.completion));
  } else if (!inner_) {
    throw Error(Errc::InvalidArgument, "record mode needs an inner backend");
  }
}

std::string RecordReplayBackend::complete(std::string_view prompt, const CompletionParams& params) const {
  std::string hash = prompt_hash(prompt);
  if (mode_ == CassetteMode::Replay) {
    auto it = replay_.find(hash);
    if (it == replay_.end()) throw Error(Errc::CassetteMiss, "no recorded completion for prompt " + hash.substr(0, 12));
    return it->second;
  }
  std::string completion = inner_->complete(prompt, params);
  std::lock_guard lock(write_mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::Transport, "cannot write cassette " + path_.string());
  out << encode_cassette_entry({hash, render_params(params), completion}) << '\n';
  return completion;
}

}  // namespace dataagent
