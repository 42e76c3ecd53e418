#pragma once

#include <string>
#include <string_view>

#include "ttscale/question.hpp"

namespace ttscale {

inline constexpr std::string_view kDefaultInstruction =
    "Return your final response within \\boxed{}.";
inline constexpr std::string_view kChainOfThoughtInstruction =
    "Let's think step by step. Return your final response within \\boxed{}.";

/// "A. yes\nB. no\nC. maybe" -- one "<letter>. <text>" line per option.
std::string format_options(const OptionMap& options);

/// stem + "\n" + options + "\n" + instruction.
std::string format_prompt(const McqQuestion& q,
                          std::string_view instruction = kDefaultInstruction);

/// Trace-generation layout: instruction + "\n" + stem + "\n" + options.
std::string format_trace_prompt(const McqQuestion& q);

}  // namespace ttscale
