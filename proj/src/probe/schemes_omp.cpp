#include "memaudit/probe/schemes.hpp"

#include <exception>

namespace memaudit::probe {

namespace {

// Exceptions must not leave an OpenMP region; keep the first one and
// rethrow after the loop.
class FirstError {
public:
    template <class F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
#pragma omp critical(memaudit_probe_error)
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

private:
    std::exception_ptr error_;
};

}  // namespace

std::vector<Prediction> rolling_predict(const Matrix& X, std::span<const double> y, std::size_t window,
                                        const RidgeOptions& opts) {
    detail::check_rolling(X, y, window);
    const auto count = static_cast<long>(y.size() - window);
    std::vector<Prediction> out(static_cast<std::size_t>(count));
    FirstError err;
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < count; ++k) {
        err.run([&] {
            const std::size_t t = window + static_cast<std::size_t>(k);
            auto fit = ridge_fit_rows(X, y, t - window, t, opts);
            out[static_cast<std::size_t>(k)] = {t, fit.predict(X.row(t)), t - window, t};
        });
    }
    err.rethrow();
    return out;
}

std::vector<Prediction> expanding_predict(const Matrix& X, std::span<const double> y, std::size_t folds,
                                          std::size_t gap, const RidgeOptions& opts) {
    const auto steps = detail::expanding_steps(X, y, folds, gap);
    std::vector<std::vector<Prediction>> per_step(steps.size());
    FirstError err;
#pragma omp parallel for schedule(dynamic)
    for (long s = 0; s < static_cast<long>(steps.size()); ++s) {
        err.run([&] {
            const auto& step = steps[static_cast<std::size_t>(s)];
            auto fit = ridge_fit_rows(X, y, 0, step.train_end, opts);
            auto& dst = per_step[static_cast<std::size_t>(s)];
            for (std::size_t t = step.test.begin; t < step.test.end; ++t) {
                dst.push_back({t, fit.predict(X.row(t)), 0, step.train_end});
            }
        });
    }
    err.rethrow();
    std::vector<Prediction> out;
    for (auto& v : per_step) out.insert(out.end(), v.begin(), v.end());
    return out;
}

}  // namespace memaudit::probe
