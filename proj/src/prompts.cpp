#include "cdt/prompts.hpp"

#include <sstream>

#include "cdt/error.hpp"

namespace cdt {
namespace prompts {

std::string render_pairs(const std::vector<Observation>& events) {
  std::ostringstream os;
  for (std::size_t i = 0; i < events.size(); ++i) {
    os << "[" << (i + 1) << "] Scene: " << events[i].context << "\n";
    os << "    Action: " << events[i].decision << "\n";
  }
  return os.str();
}

std::string render_bullet_list(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)\n";
  std::ostringstream os;
  for (const auto& item : items) os << "- " << item << "\n";
  return os.str();
}

std::string hypothesize(const std::string& group, const std::string& topic,
                        const std::string& pairs_text, const std::string& established_text,
                        const std::string& proposed_gates_text, int k) {
  std::ostringstream os;
  os << "# Scene-Action Pairs\n"
     << pairs_text << "\n"
     << "# Established Statements\n"
     << established_text << "\n"
     << "# Already Proposed Common Points\n"
     << proposed_gates_text << "\n"
     << "# Task\n"
     << "Your task is to build the grounding logic for an AI system to understand the behavior of "
     << group << " (Current topic: \"" << topic << "\"), assert the AI system has no prior "
     << "knowledge of " << group << ".\n"
     << "To do this, please propose hypotheses for the general behavior logic of " << group
     << " based on the given action-scene pairs, complete the task step by step:\n"
     << "1. What's the main feature of " << group << "'s behavior (Focus on the current topic: \""
     << topic << "\") shown in the given scene-action pairs, other than the already established "
     << "statements?\n"
     << "2. Summarize " << k << " potential common points (grounding statements) of the actions "
     << "taken by " << group << " in the given scenes about the focused topic: \"" << topic
     << "\", which is other than the already established statements.\n"
     << "- The grounding statements should be general, avoiding too specific action descriptions.\n"
     << "- Consider the grounding statements in a general way.\n"
     << "- The grounding statements should be concise, informative, and general sentences.\n"
     << "- Never be assertive! Always make objective description of the character rather than "
     << "making assertive causal relations.\n"
     << "- Keep each statement decision-relevant: it should explain why this subset of actions "
     << "happens, not just a broad institutional slogan.\n"
     << "3. Summarize " << k << " potential common points of the given scenes that trigger each "
     << "behavior, which should be different from already proposed common points.\n"
     << "- The question should be simple, not ambiguous, and specific to a subset of scenes rather "
     << "than always applicable.\n"
     << "- Focus on the next action when asking! Don't ask whether certain event is involved, "
     << "instead ask whether the scene might trigger potential behavior for " << group
     << "'s next action.\n"
     << "- Directly include \"" << group << "'s next action\" in the question!\n"
     << "- Make each question selective (rough target 20%-70% scene coverage), avoid "
     << "near-universal questions.\n"
     << "- Use observable scene conditions (governance constraints, funding pressure, political "
     << "climate, student demand, reputational stakes).\n"
     << "4. Output the hypothesized scene-action triggers in the following format:\n"
     << "action_hypotheses = [ ]  # A list of grounding statements (strings)\n"
     << "scene_check_hypotheses = [ ]  # A list of syntactically complete questions to check the "
     << "given scene (always mentioning " << group << ")\n";
  return os.str();
}

std::string summarize(const std::string& group, int n_input, const std::string& pairs_json,
                      int n_target, int n_upper) {
  std::ostringstream os;
  os << "# Task: Summarize & Compress Scene-Action Hypothesis Pairs\n"
     << "You are given a list of " << n_input << " paired hypotheses. Each pair contains:\n"
     << "- \"scene_check_hypothesis\": a question about " << group << "'s next action\n"
     << "- \"action_hypothesis\": a general behavioral grounding statement about " << group << "\n"
     << "\n"
     << "Input pairs:\n"
     << pairs_json << "\n"
     << "\n"
     << "## Goal\n"
     << "Produce a rewritten, deduplicated, and compressed set of pairs that capture the most "
     << "important and most general behavioral grounding logic for " << group << ".\n"
     << "You should output between " << n_target << " and " << n_upper << " pairs - use your "
     << "judgment to keep as many meaningfully distinct pairs as needed, but merge or drop "
     << "redundant ones.\n"
     << "Rewriting is allowed and encouraged to increase: generality, coverage across different "
     << "subsets of scenes, clarity, non-assertiveness.\n"
     << "\n"
     << "## Selection Principles (prioritized)\n"
     << "1. Coverage: The pairs should collectively cover the widest range of distinct behavioral "
     << "patterns and distinct scene triggers.\n"
     << "2. Centrality: Prefer pairs that reflect recurring or core behaviors across many "
     << "scene-action pairs.\n"
     << "3. Specificity without overfitting: Keep statements general; only keep a specific "
     << "skill/ability if it appears repeatedly and broadly.\n"
     << "4. Non-redundancy: Each pair must represent a meaningfully different behavior/trigger "
     << "from the others.\n"
     << "5. Pair coherence: The scene_check_hypothesis must plausibly test for the corresponding "
     << "action_hypothesis.\n"
     << "6. Gate selectivity: Prefer scene_check_hypothesis that are neither almost always true "
     << "nor almost always false.\n"
     << "\n"
     << "## Output Format (JSON only)\n"
     << "{\"pairs\": [{\"scene_check_hypothesis\": \"...\", \"action_hypothesis\": \"...\"}]}\n";
  return os.str();
}

std::string statement_consistency(const std::string& group, const std::string& action,
                                  const std::string& statement) {
  std::ostringstream os;
  os << "Group: " << group << "\n"
     << "\n"
     << "Action: " << action << "\n"
     << "\n"
     << "Statement: " << statement << "\n"
     << "\n"
     << "Question: Is the action consistent with the behavioral pattern described in the "
     << "statement?\n"
     << "yes: the action follows or reflects the pattern described in the statement.\n"
     << "no: the action is unrelated to or contradicts the pattern described in the statement.\n"
     << "\n"
     << "Directly answer only yes/no.\n";
  return os.str();
}

std::string gate_check(const std::string& scene, const std::string& question) {
  std::ostringstream os;
  os << "Scene: " << scene << "\n"
     << "\n"
     << "Question: " << question << "\n"
     << "\n"
     << "Answer yes or no based on available evidence. Answer unknown only when the scene is "
     << "completely unrelated to the question.\n";
  return os.str();
}

std::string select_candidate(const std::string& group, int candidate_count,
                             const std::string& verbalized_candidates) {
  std::ostringstream os;
  os << "I have generated " << candidate_count << " candidate Codified Decision Trees (CDTs) "
     << "intended to model the behavior of the group \"" << group << "\".\n"
     << "Please evaluate them and select the best one based on:\n"
     << "1. Coherence and logic of the decision flow.\n"
     << "2. Generalized understanding of the group's behavior (avoiding overfitting to specific "
     << "trivial details).\n"
     << "3. Clarity and meaningfulness of the gates (questions) and statements (behaviors).\n"
     << "\n"
     << "Here are the candidates:\n"
     << verbalized_candidates << "\n"
     << "Task:\n"
     << "1. Analyze the strengths and weaknesses of each candidate briefly.\n"
     << "2. Select the single best candidate.\n"
     << "3. Output your choice in the following JSON format:\n"
     << "{\"best_candidate_index\": <1-based index>, \"reasoning\": \"<your reasoning>\"}\n";
  return os.str();
}

std::string relation_batch(const std::string& group, const std::string& action,
                           const std::vector<std::string>& statements) {
  std::ostringstream os;
  os << "Group: " << group << "\n"
     << "\n"
     << "Action: " << action << "\n"
     << "\n"
     << "Classify the relationship between the action and EACH statement below.\n"
     << "For each statement, answer:\n"
     << "- supports: the action follows, reflects, or is consistent with the pattern.\n"
     << "- irrelevant: the action is unrelated to the statement.\n"
     << "- contradicts: the action conflicts with the pattern.\n"
     << "\n"
     << "Statements:\n";
  for (std::size_t i = 0; i < statements.size(); ++i) {
    os << "[" << (i + 1) << "] " << statements[i] << "\n";
  }
  os << "\n"
     << "Output JSON only:\n"
     << "[\"supports or irrelevant or contradicts\", ...]\n"
     << "Return a JSON array with exactly one label per statement, in the same order.\n";
  return os.str();
}

std::string demotion_gates(const std::string& group, const std::string& statement,
                           const std::string& precision_text, const std::string& sup_events,
                           const std::string& con_events) {
  std::ostringstream os;
  os << "You are analyzing behavioral patterns of " << group << ".\n"
     << "\n"
     << "## Statement being demoted\n"
     << "\"" << statement << "\"\n"
     << "This statement has precision " << precision_text << " at the current node - it holds for "
     << "some events but not others. We need to find a scene condition that separates the "
     << "supporting events from the contradicting events, so the statement can be moved to a more "
     << "specific subtree.\n"
     << "\n"
     << "## Supporting events (action consistent with the statement):\n"
     << sup_events << "\n"
     << "## Contradicting events (action conflicts with the statement):\n"
     << con_events << "\n"
     << "## Task\n"
     << "Generate 3 candidate yes/no gate questions about the scene context that would separate "
     << "the supporting events from the contradicting/irrelevant ones. Each question should:\n"
     << "- Be about observable scene conditions (not about the action itself)\n"
     << "- Be specific enough to distinguish this subset of events\n"
     << "- Always mention \"" << group << "\" or reference their situation\n"
     << "- Be answerable with yes/no from the scene context alone\n"
     << "- Each candidate should take a different angle\n"
     << "\n"
     << "Output as JSON: [\"question 1\", \"question 2\", \"question 3\"]\n";
  return os.str();
}

std::string gate_semantic(const std::string& group, const std::string& statement,
                          const std::string& question) {
  std::ostringstream os;
  os << "You are analyzing behavioral patterns of " << group << ".\n"
     << "\n"
     << "## Statement\n"
     << "\"" << statement << "\"\n"
     << "\n"
     << "## Gate question\n"
     << "\"" << question << "\"\n"
     << "\n"
     << "## Task\n"
     << "Does this gate question provide a meaningful scene condition under which the statement "
     << "would be specifically relevant? In other words, is the statement a natural behavioral "
     << "pattern to expect when the gate condition is true?\n"
     << "\n"
     << "Answer only: yes or no.\n";
  return os.str();
}

std::string add_statements(const std::string& group, const std::string& path_text,
                           const std::string& uncovered_events,
                           const std::string& existing_statements) {
  std::ostringstream os;
  os << "You are analyzing behavioral patterns of " << group << ".\n"
     << "\n"
     << "## CDT path from Root to this node:\n"
     << path_text << "\n"
     << "## Uncovered events at this node:\n"
     << "These events are not supported by any existing statement at this node.\n"
     << uncovered_events << "\n"
     << "## Existing statements at this node (for reference, do not duplicate):\n"
     << existing_statements << "\n"
     << "## Task\n"
     << "Generate new behavioral statements that capture the patterns in the uncovered events.\n"
     << "- Each statement should be one sentence, specific to the topic indicated by the gate "
     << "path.\n"
     << "- Do NOT duplicate or rephrase existing statements.\n"
     << "- Focus on the behavioral pattern, not specific actions.\n"
     << "\n"
     << "Output as JSON: {\"statements\": [\"statement 1\", \"statement 2\"]}\n";
  return os.str();
}

std::string infer_with_background(const std::string& group, const std::string& background,
                                  const std::string& context, const std::string& question) {
  std::ostringstream os;
  os << "# Background Knowledge\n"
     << background << "\n"
     << "\n"
     << "# Context\n"
     << context << "\n"
     << "\n"
     << "# Question\n"
     << question << "\n"
     << "\n"
     << "Predict the specific action taken by " << group << ". State the concrete decision, not "
     << "the motivation or background. Answer in one sentence.\n";
  return os.str();
}

std::string infer_vanilla(const std::string& group, const std::string& context,
                          const std::string& question) {
  std::ostringstream os;
  os << "# Context\n"
     << context << "\n"
     << "\n"
     << "# Question\n"
     << question << "\n"
     << "\n"
     << "Predict the specific action taken by " << group << ". State the concrete decision, not "
     << "the motivation or background. Answer in one sentence.\n";
  return os.str();
}

std::string infer_with_profile(const std::string& background, const std::string& scene,
                               const std::string& question) {
  std::ostringstream os;
  os << "# Background Knowledge\n"
     << background << "\n"
     << "\n"
     << "# Scene\n"
     << scene << "\n"
     << "\n"
     << "# Question\n"
     << question << " Answer a concise narration in one sentence.\n";
  return os.str();
}

std::string infer_with_examples(const std::string& group, const std::string& examples,
                                const std::string& context, const std::string& question) {
  std::ostringstream os;
  os << "# In-Context Examples\n"
     << "The following are past scene-action pairs for " << group << ":\n"
     << examples << "\n"
     << "# Context\n"
     << context << "\n"
     << "\n"
     << "# Question\n"
     << question << "\n"
     << "\n"
     << "Predict the specific action taken by " << group << ". State the concrete decision, not "
     << "the motivation or background. Answer in one sentence.\n";
  return os.str();
}

std::string profile_extract(const std::string& character, const std::string& block) {
  std::ostringstream os;
  os << "# Task\n"
     << "Please provide a 1000-word, narrative-style character profile for " << character << ".\n"
     << "The profile should read like a cohesive introduction, weaving together the character's "
     << "background, personality traits and core motivations, notable attributes, relationships, "
     << "key experiences, major decisions or actions, and character arc or development.\n"
     << "The profile should be written in a concise yet informative style, similar to what one "
     << "might find in a comprehensive character guide. Focus on the most crucial information "
     << "that gives readers a clear understanding of the character's significance.\n"
     << "The profile should be based on either your existing knowledge of the character or the "
     << "provided information, without fabricating or inferring any inaccurate or uncertain "
     << "details.\n"
     << "\n"
     << "# Scene-Action Pairs\n"
     << block << "\n"
     << "Now, based on the given scene-action pairs, please generate the character profile, "
     << "starting with ===Profile===.\n";
  return os.str();
}

std::string profile_aggregate(const std::string& main_profile,
                              const std::string& summarized_profile) {
  std::ostringstream os;
  os << "# Main Profile\n"
     << main_profile << "\n"
     << "\n"
     << "# New Summarized Profile (From New Episodes)\n"
     << summarized_profile << "\n"
     << "\n"
     << "Directly update the main profile based on the new summarized profile, keep its length "
     << "in around 1000 words.\n";
  return os.str();
}

std::string consistency_eval(const std::string& context, const std::string& reference,
                             const std::string& prediction) {
  std::ostringstream os;
  os << "Context: " << context << "\n"
     << "\n"
     << "Premise: " << reference << "\n"
     << "Hypothesis: " << prediction << "\n"
     << "\n"
     << "Determine the relationship between the premise and hypothesis.\n"
     << "- \"entails\": The hypothesis can be inferred from the premise. They describe the same "
     << "action or event.\n"
     << "- \"neutral\": The hypothesis is neither supported nor contradicted by the premise.\n"
     << "- \"contradicts\": The hypothesis is incompatible with the premise.\n";
  return os.str();
}

std::string dimension_eval(const std::string& dimension, const std::string& group,
                           const std::string& context, const std::string& prediction,
                           const std::string& reference) {
  std::ostringstream os;
  os << "# Context\n"
     << context << "\n"
     << "# Your Response: " << prediction << "\n"
     << "# Ground Truth: " << reference << "\n"
     << "\n";
  if (dimension == "initiative") {
    os << "Compare the action of " << group << " in the response against the ground truth. Focus "
       << "on whether the strategic character of the actions aligns, not whether the specific "
       << "actions are identical.\n"
       << "\n"
       << "Initiative - Whether both actions are driven by the same type of trigger.\n"
       << "  Proactive: the entity initiates a new move on its own accord.\n"
       << "  Reactive: the entity responds to external events or pressures.\n"
       << "  Match if both share the same trigger type; mismatch otherwise.\n";
  } else if (dimension == "scope") {
    os << "Compare the action of " << group << " in the response against the ground truth.\n"
       << "\n"
       << "Scope - Whether both actions are directed at the same domain.\n"
       << "  Internal: directed inward (restructuring, reform, resource reallocation).\n"
       << "  External: directed outward (market expansion, product launch, partnership).\n"
       << "  Match if both target the same domain; mismatch otherwise.\n";
  } else if (dimension == "magnitude") {
    os << "Compare the action of " << group << " in the response against the ground truth.\n"
       << "\n"
       << "Magnitude - Whether both actions represent a similar scale of change.\n"
       << "  Incremental: minor adjustment or refinement.\n"
       << "  Moderate: notable but bounded change.\n"
       << "  Transformative: fundamental strategic shift.\n"
       << "  Match if both are at the same or adjacent levels; mismatch if non-adjacent.\n";
  } else if (dimension == "horizon") {
    os << "Compare the action of " << group << " in the response against the ground truth.\n"
       << "\n"
       << "Horizon - Whether both actions operate on the same time horizon.\n"
       << "  Exploitative: short-term optimization, immediate response.\n"
       << "  Explorative: long-term investment, building new capabilities.\n"
       << "  Match if both serve the same timeframe; mismatch otherwise.\n"
       << "  Note: forward-looking language does not make an action explorative; judge by what "
       << "it actually accomplishes.\n";
  } else {
    fail(ErrorKind::invalid_argument, "unknown evaluation dimension: " + dimension);
  }
  os << "\n"
     << "Output: {\"" << dimension << "\": \"match\" | \"mismatch\", \"reason\": \"...\"}\n";
  return os.str();
}

std::string strict_retry_suffix() {
  return "\nYour previous reply did not match the required format. Answer strictly in the "
         "required format with no extra commentary.";
}

}  // namespace prompts
}  // namespace cdt
