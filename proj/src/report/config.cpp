#include "memaudit/report/config.hpp"

#include "memaudit/error.hpp"
#include "memaudit/gateway/digest.hpp"

#include <fstream>
#include <set>

namespace memaudit::report {

using nlohmann::json;

ConfigValidationError::ConfigValidationError(std::vector<std::string> errors)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& e : errors) msg += "\n  - " + e;
          return msg;
      }()),
      errors_(std::move(errors)) {}

const SeriesEntry& AuditConfig::find_series(const std::string& name) const {
    for (const auto& s : series) {
        if (s.spec.name == name) return s;
    }
    throw PreconditionError("unknown series '" + name + "'");
}

namespace {

// Collects errors while reading optional, typed fields.
class Reader {
public:
    explicit Reader(std::filesystem::path base) : base_(std::move(base)) {}

    void error(std::string msg) { errors_.push_back(std::move(msg)); }
    std::vector<std::string>& errors() { return errors_; }

    template <class T>
    std::optional<T> get(const json& obj, const char* key, const std::string& where) {
        auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return std::nullopt;
        try {
            return it->get<T>();
        } catch (const json::exception&) {
            error(where + "." + key + ": wrong type");
            return std::nullopt;
        }
    }

    template <class T>
    T get_or(const json& obj, const char* key, const std::string& where, T fallback) {
        return get<T>(obj, key, where).value_or(std::move(fallback));
    }

    std::optional<std::string> require_string(const json& obj, const char* key, const std::string& where) {
        auto v = get<std::string>(obj, key, where);
        if (!v || v->empty()) {
            if (!obj.contains(key)) error(where + "." + key + ": required");
            return std::nullopt;
        }
        return v;
    }

    std::optional<Date> date(const json& obj, const char* key, const std::string& where) {
        auto s = get<std::string>(obj, key, where);
        if (!s) return std::nullopt;
        auto d = try_parse_iso_date(*s);
        if (!d) error(where + "." + key + ": not a YYYY-MM-DD date: '" + *s + "'");
        return d;
    }

    std::optional<std::filesystem::path> path(const json& obj, const char* key, const std::string& where,
                                              bool must_exist, bool required) {
        auto s = get<std::string>(obj, key, where);
        if (!s) {
            if (required) error(where + "." + key + ": required");
            return std::nullopt;
        }
        std::filesystem::path p(*s);
        if (p.is_relative()) p = base_ / p;
        if (must_exist && !std::filesystem::exists(p)) {
            error(where + "." + key + ": path does not exist: '" + *s + "'");
        }
        return p;
    }

    std::vector<std::string> string_list(const json& obj, const char* key, const std::string& where) {
        return get<std::vector<std::string>>(obj, key, where).value_or(std::vector<std::string>{});
    }

private:
    std::filesystem::path base_;
    std::vector<std::string> errors_;
};

template <class F>
void guarded(Reader& r, const std::string& where, F f) {
    try {
        f();
    } catch (const std::exception& e) {
        r.error(where + ": " + e.what());
    }
}

SeriesEntry read_series(Reader& r, const json& s, const std::string& where) {
    SeriesEntry e;
    if (auto n = r.require_string(s, "name", where)) e.spec.name = *n;
    if (auto p = r.path(s, "path", where, true, true)) e.path = *p;
    guarded(r, where + ".kind", [&] {
        if (auto k = r.get<std::string>(s, "kind", where)) e.spec.kind = data::parse_series_kind(*k);
        else r.error(where + ".kind: required");
    });
    guarded(r, where + ".frequency", [&] {
        if (auto f = r.get<std::string>(s, "frequency", where)) e.spec.frequency = parse_frequency(*f);
        else r.error(where + ".frequency: required");
    });
    e.spec.question = data::default_question(e.spec.frequency);
    guarded(r, where + ".question", [&] {
        if (auto q = r.get<std::string>(s, "question", where)) e.spec.question = data::parse_question_style(*q);
    });
    e.spec.threshold = r.get<double>(s, "threshold", where);
    e.spec.first_vintage = r.get_or<bool>(s, "first_vintage", where, false);
    e.spec.zero_implausible = r.get_or<bool>(s, "zero_implausible", where, true);
    e.threshold_accuracy = r.get_or<bool>(s, "threshold_accuracy", where, e.spec.threshold.has_value());
    if (e.threshold_accuracy && !e.spec.threshold) {
        r.error(where + ": threshold accuracy requested for series '" + e.spec.name + "' but no threshold given");
    }
    if (auto d = s.find("display"); d != s.end() && d->is_object()) {
        e.spec.display.decimals = r.get_or<int>(*d, "decimals", where + ".display", 2);
        e.spec.display.thousands_separator = r.get_or<bool>(*d, "thousands_separator", where + ".display", false);
        if (e.spec.display.decimals < 0 || e.spec.display.decimals > 10) {
            r.error(where + ".display.decimals: must be in 0..10");
        }
    }
    // Reject question styles that cannot be asked at this frequency.
    guarded(r, where, [&] {
        using data::QuestionStyle;
        const auto q = e.spec.question;
        const auto f = e.spec.frequency;
        const bool ok = (q == QuestionStyle::closing_value || q == QuestionStyle::forecast_closing_value)
                            ? f == Frequency::daily
                        : q == QuestionStyle::period_value ? f != Frequency::daily
                                                           : f != Frequency::quarterly;
        if (!ok) {
            r.error(where + ": question style '" + std::string(data::to_string(q)) + "' cannot be used with " +
                    std::string(to_string(f)) + " data");
        }
    });
    return e;
}

}  // namespace

AuditConfig validate_config(const std::filesystem::path& path, const CliOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigValidationError({"config file not found: '" + path.string() + "'"});
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigValidationError({"config file is not a JSON object: '" + path.string() + "'"});
    }
    auto cfg = validate_config_json(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                                    overrides);
    cfg.source = path;
    return cfg;
}

AuditConfig validate_config_json(const json& input, const std::filesystem::path& base_dir,
                                  const CliOverrides& overrides) {
    Reader r(base_dir);
    AuditConfig c;
    json j = input;
    j.erase("out");
    if (overrides.mode) j["mode"] = std::string(gateway::to_string(*overrides.mode));
    if (overrides.seed) j["seed"] = *overrides.seed;
    if (overrides.max_requests) j["max_requests"] = *overrides.max_requests;

    guarded(r, "mode", [&] { c.mode = gateway::parse_mode(r.get_or<std::string>(j, "mode", "config", "strict-replay")); });

    if (auto p = j.find("provider"); p != j.end() && p->is_object()) {
        const std::string w = "provider";
        auto& pc = c.provider;
        pc.tag = r.get_or<std::string>(*p, "tag", w, "default");
        pc.base_url = r.get_or<std::string>(*p, "base_url", w, "");
        pc.chat_model = r.get_or<std::string>(*p, "chat_model", w, "");
        pc.embedding_model = r.get_or<std::string>(*p, "embedding_model", w, "");
        pc.api_key_env = r.get_or<std::string>(*p, "api_key_env", w, "MEMAUDIT_API_KEY");
        pc.requests_per_minute = r.get_or<double>(*p, "requests_per_minute", w, 60.0);
        pc.burst = r.get_or<int>(*p, "burst", w, 1);
        pc.max_in_flight = r.get_or<std::size_t>(*p, "max_in_flight", w, 4);
        pc.max_retries = r.get_or<int>(*p, "max_retries", w, 3);
        pc.timeout_seconds = r.get_or<double>(*p, "timeout_seconds", w, 60.0);
        pc.model_cutoff = r.date(*p, "model_cutoff", w);
        if (pc.requests_per_minute <= 0) r.error("provider.requests_per_minute: must be positive");
        if (pc.burst < 1) r.error("provider.burst: must be >= 1");
        if (pc.max_in_flight < 1) r.error("provider.max_in_flight: must be >= 1");
        if (pc.max_retries < 0) r.error("provider.max_retries: must be >= 0");
        if (pc.tag.empty() || pc.tag.find_first_of("/\\") != std::string::npos) {
            r.error("provider.tag: must be a non-empty name without path separators");
        }
    } else if (j.contains("provider")) {
        r.error("provider: must be an object");
    }

    if (auto cd = r.path(j, "cache_dir", "config", false, false)) c.cache_dir = *cd;
    if (c.cache_dir.empty() && c.mode != gateway::Mode::live) {
        r.error("cache_dir: required in " + std::string(gateway::to_string(c.mode)) + " mode (no cache directory given)");
    }
    if (c.mode != gateway::Mode::live && !c.cache_dir.empty() && !std::filesystem::is_directory(c.cache_dir)) {
        r.error("cache_dir: directory does not exist: '" + c.cache_dir.string() + "'");
    }
    if (c.mode == gateway::Mode::live) {
        if (c.provider.base_url.empty()) r.error("provider.base_url: required in live mode");
    }
    c.template_dir = r.path(j, "template_dir", "config", true, false);
    guarded(r, "prompt_variant", [&] {
        auto v = r.get_or<std::string>(j, "prompt_variant", "config", "standard");
        if (v == "standard") c.variant = prompt::PromptVariant::standard;
        else if (v == "strict_numeric") c.variant = prompt::PromptVariant::strict_numeric;
        else r.error("prompt_variant: expected 'standard' or 'strict_numeric', got '" + v + "'");
    });
    c.seed = r.get<std::uint64_t>(j, "seed", "config");
    c.max_requests = r.get<std::size_t>(j, "max_requests", "config");
    c.reask_budget = r.get_or<int>(j, "reask_budget", "config", 1);
    if (c.reask_budget < 0) r.error("reask_budget: must be >= 0");
    c.cutoff_date = r.date(j, "cutoff_date", "config");

    std::set<std::string> names;
    if (auto s = j.find("series"); s != j.end()) {
        if (!s->is_array()) {
            r.error("series: must be an array");
        } else {
            for (std::size_t i = 0; i < s->size(); ++i) {
                const std::string w = "series[" + std::to_string(i) + "]";
                if (!(*s)[i].is_object()) {
                    r.error(w + ": must be an object");
                    continue;
                }
                auto e = read_series(r, (*s)[i], w);
                if (!e.spec.name.empty() && !names.insert(e.spec.name).second) {
                    r.error(w + ": duplicate series name '" + e.spec.name + "'");
                }
                c.series.push_back(std::move(e));
            }
        }
    }
    auto known = [&](const std::string& name, const std::string& where) {
        if (!names.count(name)) r.error(where + ": unknown series '" + name + "'");
    };

    if (auto rc = j.find("recall"); rc != j.end() && rc->is_object()) {
        RecallConfig rec;
        const std::string w = "recall";
        rec.series = r.string_list(*rc, "series", w);
        for (const auto& n : rec.series) known(n, w + ".series");
        rec.context_depths = r.get_or<std::vector<std::size_t>>(*rc, "context_depths", w, {0});
        if (rec.context_depths.empty()) r.error(w + ".context_depths: must not be empty");
        rec.direction = r.string_list(*rc, "direction", w);
        for (const auto& n : rec.direction) known(n, w + ".direction");
        rec.pct_change = r.string_list(*rc, "pct_change", w);
        for (const auto& n : rec.pct_change) known(n, w + ".pct_change");
        for (const auto& pair : r.get_or<std::vector<std::vector<std::string>>>(*rc, "relative", w, {})) {
            if (pair.size() != 2) {
                r.error(w + ".relative: each entry needs exactly two series names");
                continue;
            }
            known(pair[0], w + ".relative");
            known(pair[1], w + ".relative");
            rec.relative.emplace_back(pair[0], pair[1]);
        }
        if (auto h = rc->find("headlines"); h != rc->end() && h->is_object()) {
            HeadlineConfig hc;
            if (auto p = r.path(*h, "path", w + ".headlines", true, true)) hc.path = *p;
            hc.want_level = r.get_or<bool>(*h, "want_level", w + ".headlines", false);
            hc.level_series = r.get_or<std::string>(*h, "level_series", w + ".headlines", "");
            if (hc.want_level) {
                if (hc.level_series.empty()) r.error(w + ".headlines.level_series: required when want_level is set");
                else known(hc.level_series, w + ".headlines.level_series");
            }
            rec.headlines = hc;
        }
        if (auto sp = rc->find("size_panel"); sp != rc->end() && sp->is_object()) {
            SizePanelConfig pc;
            const std::string ws = w + ".size_panel";
            if (auto p = r.path(*sp, "panel", ws, true, true)) pc.panel = *p;
            if (auto p = r.path(*sp, "benchmark", ws, true, true)) pc.benchmark = *p;
            if (auto p = r.path(*sp, "prices_dir", ws, true, true)) pc.prices_dir = *p;
            pc.buckets = r.get_or<int>(*sp, "buckets", ws, 5);
            pc.per_bucket = r.get_or<int>(*sp, "per_bucket", ws, 50);
            if (pc.buckets < 2) r.error(ws + ".buckets: must be >= 2");
            if (pc.per_bucket < 1) r.error(ws + ".per_bucket: must be >= 1");
            if (!j.contains("seed")) r.error(ws + ": a seed is required for size-bucket sampling");
            rec.size_panel = pc;
        }
        c.recall = rec;
    }

    if (auto cc = j.find("cutoff"); cc != j.end() && cc->is_object()) {
        CutoffConfig cut;
        const std::string w = "cutoff";
        cut.series = r.string_list(*cc, "series", w);
        for (const auto& n : cut.series) known(n, w + ".series");
        if (auto d = r.date(*cc, "fake_cutoff", w)) cut.fake_cutoff = *d;
        else if (!cc->contains("fake_cutoff")) r.error(w + ".fake_cutoff: required");
        cut.current_date = r.date(*cc, "current_date", w);
        for (const auto& m : r.get_or<std::vector<std::string>>(*cc, "modes", w, {"none", "both", "system_only", "user_only", "rolling"})) {
            guarded(r, w + ".modes", [&] { cut.modes.push_back(prompt::parse_cutoff_mode(m)); });
        }
        c.cutoff = cut;
    }

    if (auto mc = j.find("mask"); mc != j.end() && mc->is_object()) {
        MaskConfig m;
        const std::string w = "mask";
        if (auto p = r.path(*mc, "transcripts", w, true, true)) m.transcripts = *p;
        m.industry_map = r.path(*mc, "industry_map", w, true, false);
        m.fixed_ticker = r.get_or<std::string>(*mc, "fixed_ticker", w, "");
        m.epsilon = r.get<double>(*mc, "epsilon", w);
        m.alpha = r.get_or<double>(*mc, "alpha", w, 0.05);
        m.skill = r.get<double>(*mc, "skill", w);
        m.skill_baseline = r.get<double>(*mc, "skill_baseline", w);
        m.skill_n = r.get<std::size_t>(*mc, "skill_n", w);
        if (!(m.alpha > 0.0 && m.alpha < 1.0)) r.error(w + ".alpha: must be in (0, 1)");
        if (m.epsilon && !(*m.epsilon >= 0.0 && *m.epsilon <= 100.0)) r.error(w + ".epsilon: must be in [0, 100]");
        if (m.skill.has_value() != m.skill_baseline.has_value() || m.skill.has_value() != m.skill_n.has_value()) {
            r.error(w + ": skill, skill_baseline and skill_n must be given together");
        }
        c.mask = m;
    }

    if (auto ec = j.find("embed"); ec != j.end() && ec->is_object()) {
        EmbedConfig e;
        const std::string w = "embed";
        if (auto t = ec->find("targets"); t != ec->end() && t->is_array()) {
            for (const auto& item : *t) {
                EmbedTarget et;
                et.series = r.get_or<std::string>(item, "series", w + ".targets", "");
                et.variable = r.get_or<std::string>(item, "variable", w + ".targets", "");
                if (et.series.empty() || et.variable.empty()) {
                    r.error(w + ".targets: each target needs 'series' and 'variable'");
                    continue;
                }
                known(et.series, w + ".targets");
                e.targets.push_back(et);
            }
        }
        if (e.targets.empty()) r.error(w + ".targets: at least one target is required");
        auto& pc = e.probe;
        pc.lambda = r.get_or<double>(*ec, "lambda", w, 0.01);
        guarded(r, w + ".scheme", [&] { pc.scheme = probe::parse_scheme(r.get_or<std::string>(*ec, "scheme", w, "rolling")); });
        pc.window = r.get_or<std::size_t>(*ec, "window", w, 60);
        pc.folds = r.get_or<std::size_t>(*ec, "folds", w, 10);
        pc.gap = r.get_or<std::size_t>(*ec, "gap", w, 0);
        pc.l2_normalize = r.get_or<bool>(*ec, "l2_normalize", w, false);
        pc.standardize = r.get_or<bool>(*ec, "standardize", w, false);
        e.benchmark_window = r.get_or<std::size_t>(*ec, "benchmark_window", w, pc.window);
        if (!(pc.lambda >= 0.0)) r.error(w + ".lambda: must be >= 0");
        if (pc.window < 2) r.error(w + ".window: must be >= 2");
        if (pc.folds < 2) r.error(w + ".folds: must be >= 2");
        if (pc.gap + 2 > pc.folds) r.error(w + ".gap: leaves no test fold");
        if (e.benchmark_window < 1) r.error(w + ".benchmark_window: must be >= 1");
        if (!j.contains("seed")) r.error(w + ": a seed is required for the placebo embeddings");
        c.embed = e;
    }

    if (auto pc = j.find("power"); pc != j.end() && pc->is_object()) {
        PowerConfig p;
        const std::string w = "power";
        p.n_post = r.get_or<std::size_t>(*pc, "n_post", w, 17);
        p.p_post = r.get_or<double>(*pc, "p_post", w, 0.5);
        p.alpha = r.get_or<double>(*pc, "alpha", w, 0.05);
        p.target_power = r.get_or<double>(*pc, "target_power", w, 0.8);
        p.deltas = r.get_or<std::vector<double>>(*pc, "deltas", w, {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5});
        p.n_grid = r.get_or<std::vector<std::size_t>>(*pc, "n_grid", w, {10, 17, 25, 50, 100, 250, 500, 1000});
        if (p.n_post < 1) r.error(w + ".n_post: must be >= 1");
        if (!(p.p_post > 0.0 && p.p_post < 1.0)) r.error(w + ".p_post: must be in (0, 1)");
        if (!(p.alpha > 0.0 && p.alpha < 1.0)) r.error(w + ".alpha: must be in (0, 1)");
        if (!(p.target_power > 0.0 && p.target_power < 1.0)) r.error(w + ".target_power: must be in (0, 1)");
        for (auto n : p.n_grid) {
            if (n < 1) r.error(w + ".n_grid: entries must be >= 1");
        }
        c.power = p;
    }

    if (auto tc = j.find("theory"); tc != j.end() && tc->is_object()) {
        TheoryConfig t;
        t.labels = r.get_or<std::vector<std::string>>(*tc, "labels", "theory", {"up", "down"});
        t.y_obs = r.get_or<std::string>(*tc, "y_obs", "theory", t.labels.empty() ? "" : t.labels.front());
        std::set<std::string> distinct(t.labels.begin(), t.labels.end());
        if (t.labels.size() < 2 || distinct.size() != t.labels.size()) {
            r.error("theory.labels: need at least two distinct labels");
        }
        if (!distinct.count(t.y_obs)) r.error("theory.y_obs: must be one of the labels");
        c.theory = t;
    }

    if (!r.errors().empty()) throw ConfigValidationError(std::move(r.errors()));

    c.effective = j;
    c.config_hash = gateway::sha256_hex(j.dump());
    return c;
}

}  // namespace memaudit::report
