#pragma once

#include <string>
#include <vector>

#include "cdt/model.hpp"

namespace cdt {

// Builders for every generation request the pipelines issue. Keeping the
// text in one translation unit makes the request side of transcripts stable;
// any wording change invalidates recorded transcripts, so edit with care.
namespace prompts {

// Scene/action pair rendering shared by several builders.
std::string render_pairs(const std::vector<Observation>& events);
std::string render_bullet_list(const std::vector<std::string>& items);

std::string hypothesize(const std::string& group, const std::string& topic,
                        const std::string& pairs_text, const std::string& established_text,
                        const std::string& proposed_gates_text, int k);

std::string summarize(const std::string& group, int n_input, const std::string& pairs_json,
                      int n_target, int n_upper);

std::string statement_consistency(const std::string& group, const std::string& action,
                                  const std::string& statement);

std::string gate_check(const std::string& scene, const std::string& question);

std::string select_candidate(const std::string& group, int candidate_count,
                             const std::string& verbalized_candidates);

std::string relation_batch(const std::string& group, const std::string& action,
                           const std::vector<std::string>& statements);

std::string demotion_gates(const std::string& group, const std::string& statement,
                           const std::string& precision_text, const std::string& sup_events,
                           const std::string& con_events);

std::string gate_semantic(const std::string& group, const std::string& statement,
                          const std::string& question);

std::string add_statements(const std::string& group, const std::string& path_text,
                           const std::string& uncovered_events,
                           const std::string& existing_statements);

std::string infer_with_background(const std::string& group, const std::string& background,
                                  const std::string& context, const std::string& question);

std::string infer_vanilla(const std::string& group, const std::string& context,
                          const std::string& question);

std::string infer_with_profile(const std::string& background, const std::string& scene,
                               const std::string& question);

std::string infer_with_examples(const std::string& group, const std::string& examples,
                                const std::string& context, const std::string& question);

std::string profile_extract(const std::string& character, const std::string& block);

std::string profile_aggregate(const std::string& main_profile,
                              const std::string& summarized_profile);

std::string consistency_eval(const std::string& context, const std::string& reference,
                             const std::string& prediction);

// dimension is one of: initiative, scope, magnitude, horizon.
std::string dimension_eval(const std::string& dimension, const std::string& group,
                           const std::string& context, const std::string& prediction,
                           const std::string& reference);

// Appended to a request on the single retry after a malformed response.
std::string strict_retry_suffix();

}  // namespace prompts
}  // namespace cdt
