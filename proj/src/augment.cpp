#include "schemalink/augment.hpp"

#include <json.hpp>

#include "schemalink/errors.hpp"
#include "schemalink/jsonx.hpp"
#include "schemalink/text.hpp"

namespace schemalink {

namespace {

// Trims entries, drops empties and exact duplicates, preserves first-seen
// order.
std::vector<std::string> clean_list(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::string t = trim(item);
        if (t.empty()) continue;
        bool seen = false;
        for (const auto& kept : out) {
            if (kept == t) {
                seen = true;
                break;
            }
        }
        if (!seen) out.push_back(std::move(t));
    }
    return out;
}

// Finds a key case-insensitively and returns its string entries, or nullopt
// when the key is missing or not an array.
std::optional<std::vector<std::string>> string_list(const nlohmann::ordered_json& obj,
                                                    const std::string& key) {
    const std::string want = fold_case(key);
    for (const auto& [k, v] : obj.items()) {
        if (fold_case(k) != want) continue;
        if (!v.is_array()) return std::nullopt;
        std::vector<std::string> items;
        for (const auto& entry : v) {
            if (entry.is_string()) items.push_back(entry.get<std::string>());
        }
        return items;
    }
    return std::nullopt;
}

void note(std::vector<std::string>* degradation, const std::string& message) {
    if (degradation != nullptr) degradation->push_back(message);
}

}  // namespace

std::vector<std::string> decompose_question(const std::string& question,
                                            const std::string& hint, PipelineContext& ctx,
                                            std::vector<std::string>* degradation) {
    (void)hint;
    CompletionRequest req;
    req.prompt = render_template(ctx.templates->question_decomposition, {{"QUESTION", question}});
    req.temperature = ctx.temperature;
    req.max_tokens = ctx.max_tokens;
    req.tag = "decompose";
    req.example_id = ctx.example_id;
    try {
        nlohmann::ordered_json obj = complete_json(*ctx.backend, req);
        auto items = string_list(obj, "Subquestions");
        if (!items) {
            note(degradation, "decompose: response missing Subquestions list, using the question itself");
            return clean_list({question});
        }
        auto cleaned = clean_list(*items);
        if (cleaned.empty()) {
            note(degradation, "decompose: empty Subquestions list, using the question itself");
            return clean_list({question});
        }
        return cleaned;
    } catch (const JsonExtractError&) {
        note(degradation, "decompose: unparseable response, using the question itself");
        return clean_list({question});
    }
}

std::vector<std::string> extract_keywords(const std::string& question,
                                          const std::string& hint, PipelineContext& ctx,
                                          std::vector<std::string>* degradation) {
    auto fallback = [&] {
        std::vector<std::string> tokens;
        for (const auto& tok : split_whitespace(question)) {
            if (tok.size() > 3) tokens.push_back(tok);
        }
        return clean_list(tokens);
    };

    CompletionRequest req;
    req.prompt = render_template(ctx.templates->keyword_extraction,
                                 {{"QUESTION", question}, {"EVIDENCE", hint}});
    req.temperature = ctx.temperature;
    req.max_tokens = ctx.max_tokens;
    req.tag = "keywords";
    req.example_id = ctx.example_id;
    try {
        nlohmann::ordered_json obj = complete_json(*ctx.backend, req);
        auto items = string_list(obj, "keywords");
        if (!items) {
            note(degradation, "keywords: response missing keywords list, using question tokens");
            return fallback();
        }
        auto cleaned = clean_list(*items);
        if (cleaned.empty()) {
            note(degradation, "keywords: empty keywords list, using question tokens");
            return fallback();
        }
        return cleaned;
    } catch (const JsonExtractError&) {
        note(degradation, "keywords: unparseable response, using question tokens");
        return fallback();
    }
}

AugmentedQuestion augment(const std::string& question, const std::string& hint,
                          PipelineContext& ctx, std::vector<std::string>* degradation) {
    AugmentedQuestion aug;
    aug.question = question;
    aug.hint = hint;
    aug.subquestions = decompose_question(question, hint, ctx, degradation);
    aug.keywords = extract_keywords(question, hint, ctx, degradation);
    return aug;
}

}  // namespace schemalink
