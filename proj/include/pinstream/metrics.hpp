#ifndef PINSTREAM_METRICS_HPP
#define PINSTREAM_METRICS_HPP

// Multi-class classification metrics over integer class indices.

#include <cstddef>
#include <span>
#include <vector>

#include "pinstream/error.hpp"

namespace pinstream {

struct MetricsReport {
    /// confusion[t][p]: samples of true class t predicted as p.
    std::vector<std::vector<std::size_t>> confusion;
    std::vector<double> precision, recall, f1;
    std::vector<std::size_t> support;
    /// Set where the metric's denominator was zero; the value is then 0.
    std::vector<bool> precision_undefined, recall_undefined, f1_undefined;
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    double weighted_precision = 0.0, weighted_recall = 0.0, weighted_f1 = 0.0;
    double accuracy = 0.0;
    /// Unweighted mean of per-class recall.
    double balanced_accuracy = 0.0;

    bool any_undefined() const
    {
        for (std::size_t i = 0; i < precision_undefined.size(); ++i)
            if (precision_undefined[i] || recall_undefined[i] || f1_undefined[i])
                return true;
        return false;
    }
};

inline MetricsReport metrics(std::span<const int> y_true, std::span<const int> y_pred, std::size_t n_classes)
{
    if (y_true.size() != y_pred.size())
        throw Error(ErrorCode::LengthMismatch, "label vectors differ in length");
    if (y_true.empty())
        throw Error(ErrorCode::EmptySeries, "no labels to score");
    if (n_classes == 0)
        throw Error(ErrorCode::InvalidArgument, "class count must be positive");
    MetricsReport r;
    r.confusion.assign(n_classes, std::vector<std::size_t>(n_classes, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= n_classes || static_cast<std::size_t>(p) >= n_classes)
            throw Error(ErrorCode::InvalidArgument, "label outside the model's class set");
        ++r.confusion[t][p];
    }

    const double n = static_cast<double>(y_true.size());
    std::size_t correct = 0;
    for (std::size_t c = 0; c < n_classes; ++c) {
        const std::size_t tp = r.confusion[c][c];
        std::size_t fp = 0, fn = 0;
        for (std::size_t o = 0; o < n_classes; ++o) {
            if (o == c)
                continue;
            fp += r.confusion[o][c];
            fn += r.confusion[c][o];
        }
        correct += tp;
        const std::size_t sup = tp + fn;
        r.support.push_back(sup);
        r.precision_undefined.push_back(tp + fp == 0);
        r.recall_undefined.push_back(sup == 0);
        r.f1_undefined.push_back(2 * tp + fp + fn == 0);
        const double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double rc = sup ? static_cast<double>(tp) / static_cast<double>(sup) : 0.0;
        const double f = 2 * tp + fp + fn ? 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn) : 0.0;
        r.precision.push_back(p);
        r.recall.push_back(rc);
        r.f1.push_back(f);
        const double w = static_cast<double>(sup) / n;
        r.macro_precision += p;
        r.macro_recall += rc;
        r.macro_f1 += f;
        r.weighted_precision += w * p;
        r.weighted_recall += w * rc;
        r.weighted_f1 += w * f;
    }
    const double k = static_cast<double>(n_classes);
    r.macro_precision /= k;
    r.macro_recall /= k;
    r.macro_f1 /= k;
    r.balanced_accuracy = r.macro_recall;
    r.accuracy = static_cast<double>(correct) / n;
    return r;
}

} // namespace pinstream

#endif
