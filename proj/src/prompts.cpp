#include "patvar/prompts.hpp"

#include "patvar/error.hpp"
#include "patvar/strings.hpp"
#include "prompts_embedded.hpp"

namespace patvar::prompts {

std::string_view source(Template t) {
  switch (t) {
    case Template::Separator:
      return embedded::kSeparator;
    case Template::Phrases:
      return embedded::kPhrases;
    case Template::SoftMatch:
      return embedded::kSoftMatch;
    case Template::Counterfactual:
      return embedded::kCounterfactual;
    case Template::NoVt:
      return embedded::kNoVt;
    case Template::Discriminator:
      return embedded::kDiscriminator;
  }
  return {};
}

std::vector<llm::ChatMessage> parse_messages(std::string_view text) {
  std::vector<llm::ChatMessage> out;
  std::vector<std::string> lines = str::split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string* body = nullptr;
  for (const auto& line : lines) {
    if (line.rfind("--- ", 0) == 0) {
      auto role = str::trim(std::string_view(line).substr(4));
      llm::ChatMessage m;
      if (role == "system") {
        m.role = llm::Role::System;
      } else if (role == "user") {
        m.role = llm::Role::User;
      } else if (role == "assistant") {
        m.role = llm::Role::Assistant;
      } else {
        throw Error("prompt template: unknown role '" + std::string(role) + "'");
      }
      out.push_back(std::move(m));
      body = nullptr;
      continue;
    }
    if (out.empty()) throw Error("prompt template: text before the first role line");
    if (body) {
      *body += '\n';
      *body += line;
    } else {
      body = &out.back().content;
      *body = line;
    }
  }
  return out;
}

std::vector<llm::ChatMessage> render(Template t, const Slots& slots) {
  auto messages = parse_messages(source(t));
  for (auto& m : messages) m.content = str::fill(m.content, slots);
  return messages;
}

std::string flatten(const std::vector<llm::ChatMessage>& messages) {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out += '\n';
    out += m.content;
  }
  return out;
}

}  // namespace patvar::prompts
