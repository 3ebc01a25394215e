#ifndef ANMT_UTIL_HPP
#define ANMT_UTIL_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace anmt {

// UTF-8 <-> code point helpers. Decoding rejects malformed input
// (overlong forms, stray continuation bytes, surrogates, > U+10FFFF).
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view points);
bool utf8_valid(std::string_view text);

// Whitespace tokenization (space, tab; consecutive separators collapse).
std::vector<std::string> split_ws(std::string_view line);
std::string join_ws(const std::vector<std::string>& tokens);

// File helpers. read_lines strips one trailing '\n' (and '\r' before it)
// per line; write_lines terminates every line with '\n'.
std::vector<std::string> read_lines(const std::string& path);
void write_lines(const std::string& path, const std::vector<std::string>& lines);
std::string read_file(const std::string& path);
bool file_exists(const std::string& path);

// FNV-1a 64-bit, the toolkit's content hash for vocabularies, configs
// and manifest entries.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t fnv1a64_update(std::uint64_t state, std::string_view bytes);
std::string hex64(std::uint64_t value);

// splitmix64: stream derivation for fanning one seed out per stage.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

std::string format_double(double value, int decimals);

}  // namespace anmt

#endif
