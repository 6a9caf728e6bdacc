#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "peerscout/corpus.hpp"

namespace peerscout {

// Verbatim text returned by the model service.
struct RawModelOutput {
    std::string text;
};

inline constexpr int kPromptTemplateVersion = 1;

// Few-shot prompt: entity definition and output format blocks, then the
// training examples enumerated from 1, then the target as the final
// enumerated sentence with an empty output list.
std::string render_prompt(std::span<const AnnotatedDocument> train,
                          const NormalizedText& target);

// The Output-line value for a product set: {{'PRODUCT': ['a', 'b']}} with
// backslash and single-quote escaped. Empty set renders as [].
std::string format_output_value(const ProductSet& products);

// Tolerant parse of the first PRODUCT construct in a model response.
// Accepts single/double outer braces, single/double quotes, unquoted
// atoms, None/null (empty set), and surrounding prose. nullopt when no
// recognizable construct exists.
std::optional<ProductSet> parse_output(const RawModelOutput& raw);
std::optional<ProductSet> parse_output(std::string_view raw);

// ceil(words * 4/3): coarse token estimate for prompt-size guards.
std::size_t estimate_tokens(std::string_view text);

}  // namespace peerscout
