// Question augmentation: decomposition into subquestions plus keyword and
// keyphrase extraction, two completions per question.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "schemalink/backend.hpp"
#include "schemalink/prompts.hpp"

namespace schemalink {

// Everything the linking prompts receive about one question.
struct AugmentedQuestion {
    std::string question;
    std::string hint;
    std::vector<std::string> subquestions;
    std::vector<std::string> keywords;
};

// Shared call context threaded through every pipeline stage.
struct PipelineContext {
    Backend* backend = nullptr;
    const PromptTemplates* templates = nullptr;
    double temperature = 0.3;
    int max_tokens = 4096;
    std::int64_t example_id = -1;
};

// One completion (tag "decompose"); parses the "Subquestions" list.  An
// unusable response after the one repair retry falls back to [question] and
// appends to degradation.  Backend transport failures propagate.
std::vector<std::string> decompose_question(const std::string& question,
                                            const std::string& hint, PipelineContext& ctx,
                                            std::vector<std::string>* degradation = nullptr);

// One completion (tag "keywords"); parses the "keywords" list.  Fallback is
// the question's whitespace tokens longer than three characters.
std::vector<std::string> extract_keywords(const std::string& question,
                                          const std::string& hint, PipelineContext& ctx,
                                          std::vector<std::string>* degradation = nullptr);

// Exactly two completions; assembles the AugmentedQuestion.  Lists are
// trimmed, deduplicated and free of empties.
AugmentedQuestion augment(const std::string& question, const std::string& hint,
                          PipelineContext& ctx,
                          std::vector<std::string>* degradation = nullptr);

}  // namespace schemalink
