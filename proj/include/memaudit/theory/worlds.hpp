#pragma once

#include <json.hpp>

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace memaudit::theory {

/// Ordered, non-empty set of distinct answers. The order breaks ties.
class LabelSet {
public:
    /// Throws PreconditionError for an empty list or duplicates.
    explicit LabelSet(std::vector<std::string> labels);

    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    bool contains(const std::string& label) const;
    std::size_t index_of(const std::string& label) const;

private:
    std::vector<std::string> labels_;
};

using Scores = std::map<std::string, double>;

/// The prompt id of an unconstrained query.
inline const std::string kNoPrompt = "none";

/// (task, prompt) -> per-label scores.
class ScoreTable {
public:
    void set(const std::string& task_id, const std::string& prompt_id, Scores scores);
    /// Throws PreconditionError when the pair is missing.
    const Scores& at(const std::string& task_id, const std::string& prompt_id) const;
    bool contains(const std::string& task_id, const std::string& prompt_id) const;
    const std::map<std::pair<std::string, std::string>, Scores>& entries() const { return entries_; }

    bool operator==(const ScoreTable&) const = default;

private:
    std::map<std::pair<std::string, std::string>, Scores> entries_;
};

/// A factual parameter, its counterfactual trained only on pre-period data,
/// and the effective tables a prompt induces on the factual parameter.
struct World {
    std::string name;
    ScoreTable factual;
    ScoreTable counterfactual;
    std::map<std::string, ScoreTable> operator_by_prompt;
};

/// Argmax; ties go to the label declared first. Throws PreconditionError if
/// a label has no score or a score is not finite.
std::string decide(const Scores& scores, const LabelSet& labels);

/// Indicator scores: 1 for `label`, 0 elsewhere.
Scores indicator(const LabelSet& labels, const std::string& label);

/// Decision under prompt `prompt_id`, read through the world's operator.
std::string constrained_decision(const World& w, const LabelSet& labels, const std::string& task_id,
                                 const std::string& prompt_id);
/// Decision of the counterfactual parameter on the unconstrained query.
std::string counterfactual_decision(const World& w, const LabelSet& labels, const std::string& task_id);

struct EquivalentWorlds {
    World star;
    World dagger;
    std::string task_id;
    std::string prompt_id;
};

/// Two worlds sharing factual scores and the prompt operator, so their
/// constrained decision is `y_obs` in both, while their counterfactual
/// decisions are `y_star` and `y_dagger`. Throws PreconditionError when
/// y_star == y_dagger or a label is not in the set.
EquivalentWorlds construct_equivalent_worlds(const LabelSet& labels, const std::string& y_obs,
                                             const std::string& y_star, const std::string& y_dagger,
                                             const std::string& task_id = "task",
                                             const std::string& prompt_id = "cutoff_prompt");

/// The same construction read as a fine-tuned model: in "behavioral
/// suppression" the parameter still decides `y_retained` without the prompt
/// layer, in "genuine forgetting" it decides `y_forgotten`; every observable
/// output is `y_obs` in both.
EquivalentWorlds construct_finetune_worlds(const LabelSet& labels, const std::string& y_obs,
                                           const std::string& y_retained, const std::string& y_forgotten);

/// Every label whose counterfactual value is consistent with observing
/// `y_obs`, each witnessed by a constructed pair of worlds.
std::vector<std::string> identified_set(const LabelSet& labels, const std::string& y_obs);

/// True iff the counterfactual and factual parameters decide the same label
/// on the unconstrained query for `task_id`.
bool future_invariance_check(const World& w, const LabelSet& labels, const std::string& task_id);

nlohmann::json to_json(const World& w);
nlohmann::json to_json(const EquivalentWorlds& worlds, const LabelSet& labels);

}  // namespace memaudit::theory
