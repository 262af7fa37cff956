#include "memaudit/theory/worlds.hpp"

#include "memaudit/error.hpp"

#include <cmath>
#include <set>

namespace memaudit::theory {

using nlohmann::json;

LabelSet::LabelSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw PreconditionError("label set must not be empty");
    std::set<std::string> seen;
    for (const auto& l : labels_) {
        if (!seen.insert(l).second) throw PreconditionError("duplicate label '" + l + "'");
    }
}

bool LabelSet::contains(const std::string& label) const {
    for (const auto& l : labels_) {
        if (l == label) return true;
    }
    return false;
}

std::size_t LabelSet::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] == label) return i;
    }
    throw PreconditionError("label '" + label + "' is not in the label set");
}

void ScoreTable::set(const std::string& task_id, const std::string& prompt_id, Scores scores) {
    entries_[{task_id, prompt_id}] = std::move(scores);
}

const Scores& ScoreTable::at(const std::string& task_id, const std::string& prompt_id) const {
    auto it = entries_.find({task_id, prompt_id});
    if (it == entries_.end()) {
        throw PreconditionError("no scores for task '" + task_id + "' under prompt '" + prompt_id + "'");
    }
    return it->second;
}

bool ScoreTable::contains(const std::string& task_id, const std::string& prompt_id) const {
    return entries_.count({task_id, prompt_id}) > 0;
}

std::string decide(const Scores& scores, const LabelSet& labels) {
    const std::string* best = nullptr;
    double best_score = 0.0;
    for (const auto& label : labels.labels()) {
        auto it = scores.find(label);
        if (it == scores.end()) throw PreconditionError("no score for label '" + label + "'");
        if (!std::isfinite(it->second)) throw PreconditionError("non-finite score for label '" + label + "'");
        if (!best || it->second > best_score) {
            best = &label;
            best_score = it->second;
        }
    }
    return *best;
}

Scores indicator(const LabelSet& labels, const std::string& label) {
    labels.index_of(label);
    Scores s;
    for (const auto& l : labels.labels()) s[l] = l == label ? 1.0 : 0.0;
    return s;
}

std::string constrained_decision(const World& w, const LabelSet& labels, const std::string& task_id,
                                 const std::string& prompt_id) {
    auto it = w.operator_by_prompt.find(prompt_id);
    if (it == w.operator_by_prompt.end()) {
        throw PreconditionError("world '" + w.name + "' has no operator for prompt '" + prompt_id + "'");
    }
    return decide(it->second.at(task_id, prompt_id), labels);
}

std::string counterfactual_decision(const World& w, const LabelSet& labels, const std::string& task_id) {
    return decide(w.counterfactual.at(task_id, kNoPrompt), labels);
}

namespace {

World make_world(const std::string& name, const LabelSet& labels, const std::string& y_obs,
                 const std::string& y_counterfactual, const std::string& task_id, const std::string& prompt_id) {
    World w;
    w.name = name;
    // The factual parameter answers y_obs with or without the prompt; the
    // prompt operator leaves that table unchanged.
    w.factual.set(task_id, kNoPrompt, indicator(labels, y_obs));
    w.factual.set(task_id, prompt_id, indicator(labels, y_obs));
    ScoreTable effective;
    effective.set(task_id, prompt_id, indicator(labels, y_obs));
    w.operator_by_prompt[prompt_id] = effective;
    w.counterfactual.set(task_id, kNoPrompt, indicator(labels, y_counterfactual));
    return w;
}

EquivalentWorlds construct(const LabelSet& labels, const std::string& y_obs, const std::string& a,
                           const std::string& b, const std::string& name_a, const std::string& name_b,
                           const std::string& task_id, const std::string& prompt_id) {
    for (const auto* l : {&y_obs, &a, &b}) labels.index_of(*l);
    if (a == b) throw PreconditionError("the two counterfactual answers must differ");
    return {make_world(name_a, labels, y_obs, a, task_id, prompt_id),
            make_world(name_b, labels, y_obs, b, task_id, prompt_id), task_id, prompt_id};
}

}  // namespace

EquivalentWorlds construct_equivalent_worlds(const LabelSet& labels, const std::string& y_obs,
                                             const std::string& y_star, const std::string& y_dagger,
                                             const std::string& task_id, const std::string& prompt_id) {
    return construct(labels, y_obs, y_star, y_dagger, "W_star", "W_dagger", task_id, prompt_id);
}

EquivalentWorlds construct_finetune_worlds(const LabelSet& labels, const std::string& y_obs,
                                           const std::string& y_retained, const std::string& y_forgotten) {
    return construct(labels, y_obs, y_retained, y_forgotten, "behavioral_suppression", "genuine_forgetting",
                     "task", "finetuned");
}

std::vector<std::string> identified_set(const LabelSet& labels, const std::string& y_obs) {
    labels.index_of(y_obs);
    std::vector<std::string> out;
    for (const auto& candidate : labels.labels()) {
        bool witnessed = false;
        if (labels.size() == 1) {
            auto w = make_world("W_star", labels, y_obs, candidate, "task", "cutoff_prompt");
            witnessed = constrained_decision(w, labels, "task", "cutoff_prompt") == y_obs &&
                        counterfactual_decision(w, labels, "task") == candidate;
        } else {
            const auto& other = candidate == labels.labels().front() ? labels.labels()[1] : labels.labels().front();
            auto pair = construct_equivalent_worlds(labels, y_obs, candidate, other);
            witnessed = constrained_decision(pair.star, labels, pair.task_id, pair.prompt_id) == y_obs &&
                        constrained_decision(pair.dagger, labels, pair.task_id, pair.prompt_id) == y_obs &&
                        counterfactual_decision(pair.star, labels, pair.task_id) == candidate;
        }
        if (witnessed) out.push_back(candidate);
    }
    return out;
}

bool future_invariance_check(const World& w, const LabelSet& labels, const std::string& task_id) {
    return decide(w.counterfactual.at(task_id, kNoPrompt), labels) == decide(w.factual.at(task_id, kNoPrompt), labels);
}

namespace {

json table_json(const ScoreTable& t) {
    json arr = json::array();
    for (const auto& [key, scores] : t.entries()) {
        arr.push_back({{"task", key.first}, {"prompt", key.second}, {"scores", scores}});
    }
    return arr;
}

}  // namespace

json to_json(const World& w) {
    json ops = json::object();
    for (const auto& [prompt, table] : w.operator_by_prompt) ops[prompt] = table_json(table);
    return {{"name", w.name},
            {"factual", table_json(w.factual)},
            {"counterfactual", table_json(w.counterfactual)},
            {"operator", ops}};
}

json to_json(const EquivalentWorlds& worlds, const LabelSet& labels) {
    auto describe = [&](const World& w) {
        json j = to_json(w);
        j["constrained_decision"] = constrained_decision(w, labels, worlds.task_id, worlds.prompt_id);
        j["counterfactual_decision"] = counterfactual_decision(w, labels, worlds.task_id);
        j["future_invariant"] = future_invariance_check(w, labels, worlds.task_id);
        return j;
    };
    return {{"labels", labels.labels()},
            {"task", worlds.task_id},
            {"prompt", worlds.prompt_id},
            {"worlds", json::array({describe(worlds.star), describe(worlds.dagger)})}};
}

}  // namespace memaudit::theory
