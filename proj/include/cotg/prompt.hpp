#pragma once

#include <span>
#include <string>
#include <string_view>

namespace cotg {

/// Graph-update instruction sent to the operation oracle. Contains the
/// `{{ graph }}` and `{{ current_step }}` placeholders.
const std::string& default_prompt_template();

/// Substitutes every `{{ graph }}` and `{{ current_step }}` occurrence
/// (inner whitespace optional).
std::string render_prompt(std::string_view prompt_template, std::string_view graph_mermaid,
                          std::string_view current_step);

/// Appends the rejection reasons of earlier attempts, verbatim.
std::string append_retry_feedback(std::string prompt, std::span<const std::string> errors);

}  // namespace cotg
