#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mcsum/error.hpp"

namespace mcsum {

struct PromptTemplate {
  std::string system;
  std::string user;  // contains one {{placeholder}}
};

/// Prompt set. The defaults mirror prompts/v1/*.txt; a prompt directory with
/// the same three files overrides them.
struct PromptSet {
  std::string version = "v1";
  PromptTemplate cluster_summary;
  PromptTemplate final_summary;
  PromptTemplate full_document;
};

/// Template file layout: system prompt, a line holding only "---", user
/// prompt. A single trailing newline is dropped from each part.
inline PromptTemplate parse_prompt_template(std::string_view content) {
  const std::string_view sep = "\n---\n";
  const auto at = content.find(sep);
  if (at == std::string_view::npos) throw Error(ErrorKind::kParse, "prompt template lacks the '---' separator line");
  PromptTemplate t{std::string(content.substr(0, at)), std::string(content.substr(at + sep.size()))};
  if (!t.user.empty() && t.user.back() == '\n') t.user.pop_back();
  return t;
}

inline PromptSet default_prompts() {
  PromptSet p;
  p.cluster_summary = parse_prompt_template(
      "You are an expert editor. You summarize passages that all belong to one thematic section of a long "
      "document, such as a book. Write in plain prose, keep names, events and key facts, and do not invent "
      "anything that is not in the passages.\n---\n"
      "Summarize the following passages from one thematic section of a book into a single concise paragraph.\n\n"
      "{{passages}}\n");
  p.final_summary = parse_prompt_template(
      "You are an expert editor. You merge section summaries of a long document into one summary. Keep the "
      "order in which the sections are given, connect them with natural transitions, and do not invent "
      "anything that is not in the sections.\n---\n"
      "Combine the ordered section summaries into one coherent summary of the whole document.\n\n"
      "{{summaries}}\n");
  p.full_document = parse_prompt_template(
      "You are an expert editor. You summarize long documents, such as books, into a coherent summary that "
      "keeps the main ideas, names, events and key facts.\n---\n"
      "Summarize the following document.\n\n"
      "{{document}}\n");
  return p;
}

inline PromptSet load_prompts(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    const auto path = dir / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::kIo, "cannot read prompt template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_prompt_template(ss.str());
  };
  PromptSet p;
  p.version = dir.filename().string();
  p.cluster_summary = read("cluster_summary.txt");
  p.final_summary = read("final_summary.txt");
  p.full_document = read("full_document.txt");
  return p;
}

inline std::string render(const std::string& tmpl, std::string_view placeholder, std::string_view value) {
  const std::string key = "{{" + std::string(placeholder) + "}}";
  std::string out = tmpl;
  const auto at = out.find(key);
  if (at == std::string::npos) throw Error(ErrorKind::kParse, "prompt template lacks " + key);
  out.replace(at, key.size(), value);
  return out;
}

/// "[<label> 1]\n<text>\n\n[<label> 2]\n<text>..." in the given order.
inline std::string enumerate_blocks(const std::vector<std::string>& blocks, std::string_view label) {
  std::string out;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) out += "\n\n";
    out += "[" + std::string(label) + " " + std::to_string(i + 1) + "]\n" + blocks[i];
  }
  return out;
}

}  // namespace mcsum
