#include "memaudit/metrics/numeric.hpp"

#include "memaudit/csv.hpp"
#include "memaudit/data/text.hpp"
#include "memaudit/error.hpp"
#include "memaudit/stats/tests.hpp"

#include <cmath>

namespace memaudit::metrics {

namespace {

std::optional<double> calibration(const std::vector<double>& conf, const std::vector<double>& err) {
    if (conf.size() < 3) return std::nullopt;
    return stats::correlation(conf, err);
}

double percent(std::size_t hits, std::size_t total) {
    return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double absolute_error(const NumericEvalRow& row, data::SeriesKind kind) {
    const double diff = *row.estimated - row.actual;
    if (kind == data::SeriesKind::rate) return std::fabs(diff);
    return std::fabs(diff / row.actual) * 100.0;
}

bool direction_correct(double estimated, double actual, double prev_actual) {
    const int s_est = sign(estimated - prev_actual);
    const int s_act = sign(actual - prev_actual);
    if (s_est == 0 || s_act == 0) return s_est == 0 && s_act == 0;
    return s_est == s_act;
}

RecallSummary summarize_numeric(std::span<const NumericEvalRow> rows, const data::SeriesSpec& spec) {
    if (rows.empty()) throw PreconditionError("summarize_numeric: no rows");
    RecallSummary s;
    s.kind = spec.kind;
    const bool level = spec.kind == data::SeriesKind::level;

    double sum = 0.0, sum_abs = 0.0;
    std::size_t threshold_hits = 0, dir_hits = 0, dir_total = 0;
    std::vector<double> conf, err;
    for (const auto& r : rows) {
        if (level && r.actual == 0.0) {
            throw PreconditionError("summarize_numeric: zero actual for level series '" + spec.name + "' at " +
                                    r.period_key);
        }
        if (r.withheld()) {
            ++s.refusals;
            continue;
        }
        ++s.num_obs;
        const double est = *r.estimated;
        const double e = level ? (est - r.actual) / r.actual * 100.0 : est - r.actual;
        sum += e;
        sum_abs += std::fabs(e);
        if (spec.threshold && ((est > *spec.threshold) == (r.actual > *spec.threshold))) ++threshold_hits;
        if (r.prev_actual) {
            ++dir_total;
            if (direction_correct(est, r.actual, *r.prev_actual)) ++dir_hits;
        }
        if (r.confidence) {
            conf.push_back(*r.confidence);
            err.push_back(std::fabs(e));
        }
    }
    if (s.num_obs == 0) {
        throw PreconditionError("summarize_numeric: every row of '" + spec.name + "' is a refusal");
    }
    const double n = static_cast<double>(s.num_obs);
    if (level) {
        s.mpe = sum / n;
        s.mape = sum_abs / n;
    } else {
        s.me = sum / n;
        s.mae = sum_abs / n;
    }
    if (spec.threshold) s.threshold_accuracy = percent(threshold_hits, s.num_obs);
    if (dir_total > 0) s.directional_accuracy = percent(dir_hits, dir_total);
    s.confidence_calibration = calibration(conf, err);
    return s;
}

CategoricalSummary summarize_categorical(std::span<const CategoricalRow> rows) {
    if (rows.empty()) throw PreconditionError("summarize_categorical: no rows");
    CategoricalSummary s;
    std::size_t hits = 0;
    std::vector<double> conf, miss;
    for (const auto& r : rows) {
        if (r.refusal || !r.predicted) {
            ++s.refusals;
            continue;
        }
        ++s.num_obs;
        const bool hit = data::upper(csv::trim(*r.predicted)) == data::upper(csv::trim(r.actual));
        if (hit) ++hits;
        if (r.confidence) {
            conf.push_back(*r.confidence);
            miss.push_back(hit ? 0.0 : 100.0);
        }
    }
    if (s.num_obs > 0) {
        s.accuracy = percent(hits, s.num_obs);
        s.confidence_calibration = calibration(conf, miss);
    }
    return s;
}

}  // namespace memaudit::metrics
