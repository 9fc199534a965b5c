#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patvar/llm.hpp"

namespace patvar::prompts {

/// Prompt templates compiled in from prompts/*.txt. Each file is a list of
/// messages introduced by `--- <role>` lines; slots are `{name}`.
enum class Template { Separator, Phrases, SoftMatch, Counterfactual, NoVt, Discriminator };

std::string_view source(Template t);

using Slots = std::vector<std::pair<std::string, std::string>>;

/// Parses a template and fills its slots.
std::vector<llm::ChatMessage> render(Template t, const Slots& slots);

/// Exposed for tests: the message parser used by render.
std::vector<llm::ChatMessage> parse_messages(std::string_view text);

/// Joined content of all messages, for substring checks and prompt sniffing.
std::string flatten(const std::vector<llm::ChatMessage>& messages);

}  // namespace patvar::prompts
