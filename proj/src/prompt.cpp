#include "ttscale/prompt.hpp"

#include <stdexcept>

namespace ttscale {

std::string format_options(const OptionMap& options) {
  std::string out;
  for (const auto& [letter, text] : options) {
    if (!out.empty()) out += '\n';
    out += letter;
    out += ". ";
    out += text;
  }
  return out;
}

std::string format_prompt(const McqQuestion& q, std::string_view instruction) {
  if (instruction.empty()) throw std::invalid_argument("instruction must be nonempty");
  std::string out = q.stem;
  out += '\n';
  out += format_options(q.options);
  out += '\n';
  out += instruction;
  return out;
}

std::string format_trace_prompt(const McqQuestion& q) {
  std::string out(kDefaultInstruction);
  out += '\n';
  out += q.stem;
  out += '\n';
  out += format_options(q.options);
  return out;
}

}  // namespace ttscale
