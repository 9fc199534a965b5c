#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace patvar::str {

std::string lower(std::string_view s);
std::string upper(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
bool contains_alnum(std::string_view s);
bool icontains(std::string_view haystack, std::string_view needle);
bool is_blank(std::string_view s);

/// Replaces every `{name}` slot with its value; unknown slots are left as-is.
std::string fill(std::string_view tmpl,
                 const std::vector<std::pair<std::string, std::string>>& values);

/// 64-bit FNV-1a. Stable across platforms, used for seeding and hashing
/// features; not a content digest.
std::uint64_t fnv1a(std::string_view s);

}  // namespace patvar::str
