#ifndef PINSTREAM_MULTICLASS_HPP
#define PINSTREAM_MULTICLASS_HPP

// One-vs-one multi-class SVM, stratified splitting and the grid search used
// to tune (C, gamma).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinstream/error.hpp"
#include "pinstream/features.hpp"
#include "pinstream/metrics.hpp"
#include "pinstream/random.hpp"
#include "pinstream/skill.hpp"
#include "pinstream/svm.hpp"

namespace pinstream {

struct PairClassifier {
    int class_a = 0; ///< predicted when f(x) > 0
    int class_b = 1;
    BinarySvm svm;

    friend bool operator==(const PairClassifier&, const PairClassifier&) = default;
};

struct OvoSvmModel {
    std::vector<std::string> labels;
    StandardScaler scaler;
    /// Pairs in lexicographic order: (0,1), (0,2), ..., (n-2,n-1).
    std::vector<PairClassifier> classifiers;

    std::size_t n_classes() const { return labels.size(); }

    void validate() const
    {
        const std::size_t k = labels.size();
        if (k < 2)
            throw Error(ErrorCode::SchemaError, "model needs at least two classes");
        if (classifiers.size() != k * (k - 1) / 2)
            throw Error(ErrorCode::SchemaError, "model must hold one classifier per class pair");
        std::size_t at = 0;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a + 1; b < k; ++b, ++at) {
                const PairClassifier& p = classifiers[at];
                if (p.class_a != static_cast<int>(a) || p.class_b != static_cast<int>(b))
                    throw Error(ErrorCode::SchemaError, "classifier pairs out of order");
                if (p.svm.coef.size() != p.svm.support_vectors.size())
                    throw Error(ErrorCode::SchemaError, "support vector and coefficient counts differ");
                for (const auto& sv : p.svm.support_vectors)
                    if (sv.size() != scaler.mean.size())
                        throw Error(ErrorCode::SchemaError, "support vector width differs from scaler");
            }
        if (scaler.mean.size() != scaler.std.size())
            throw Error(ErrorCode::SchemaError, "scaler mean and std widths differ");
    }

    friend bool operator==(const OvoSvmModel&, const OvoSvmModel&) = default;
};

/// Trains one binary SVM per class pair on the rows of those two classes.
/// Rows are scaled with a scaler fitted on all of X.
inline OvoSvmModel ovo_train(std::span<const std::vector<double>> X, std::span<const int> y,
                             const std::vector<std::string>& labels, const SmoOptions& opt)
{
    if (X.size() != y.size())
        throw Error(ErrorCode::LengthMismatch, "feature and label counts differ");
    const std::size_t k = labels.size();
    OvoSvmModel m;
    m.labels = labels;
    m.scaler = StandardScaler::fit(X);
    const auto Z = m.scaler.transform_rows(X);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<std::vector<double>> rows;
            std::vector<int> sign;
            for (std::size_t i = 0; i < Z.size(); ++i) {
                if (y[i] == static_cast<int>(a) || y[i] == static_cast<int>(b)) {
                    rows.push_back(Z[i]);
                    sign.push_back(y[i] == static_cast<int>(a) ? 1 : -1);
                }
            }
            m.classifiers.push_back({static_cast<int>(a), static_cast<int>(b), smo_train(rows, sign, opt).model});
        }
    }
    return m;
}

struct OvoVote {
    int label = 0;
    std::vector<int> votes;
    std::vector<double> decisions; ///< one per classifier
};

/// Votes over already scaled features. Majority wins; a tie goes to the tied
/// label with the largest sum of |f| over the classifiers that voted for it,
/// then to the lowest label index.
inline OvoVote ovo_vote_scaled(const OvoSvmModel& m, std::span<const double> z)
{
    OvoVote v;
    const std::size_t k = m.n_classes();
    v.votes.assign(k, 0);
    std::vector<double> strength(k, 0.0);
    for (const PairClassifier& p : m.classifiers) {
        const double f = decision(p.svm, z);
        v.decisions.push_back(f);
        const int winner = f > 0.0 ? p.class_a : p.class_b;
        ++v.votes[winner];
        strength[winner] += std::abs(f);
    }
    int best = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (v.votes[c] > v.votes[best] || (v.votes[c] == v.votes[best] && strength[c] > strength[best]))
            best = static_cast<int>(c);
    }
    v.label = best;
    return v;
}

/// Predicts from a raw feature vector; scaling is applied internally.
inline int ovo_predict(const OvoSvmModel& m, std::span<const double> x)
{
    const std::vector<double> z = m.scaler.transform(x);
    return ovo_vote_scaled(m, z).label;
}

inline std::vector<int> ovo_predict_rows(const OvoSvmModel& m, std::span<const std::vector<double>> X)
{
    std::vector<int> out;
    out.reserve(X.size());
    for (const auto& x : X)
        out.push_back(ovo_predict(m, x));
    return out;
}

/// Deals each class's shuffled rows round-robin into k folds. Returns the
/// fold index of every row. Retries with derived seeds when some fold lacks
/// a class; gives up after `attempts`.
inline std::vector<int> stratified_folds(std::span<const int> y, std::size_t k, std::uint64_t seed, int attempts = 5)
{
    if (k < 2)
        throw Error(ErrorCode::InvalidArgument, "need at least two folds");
    if (y.size() < k)
        throw Error(ErrorCode::StratificationFailure, "fewer rows than folds");
    const int n_classes = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        Rng rng(derive_seed(seed, 0x666f6c64, static_cast<std::uint64_t>(attempt)));
        std::vector<int> fold(y.size(), -1);
        std::size_t next = rng.below(k);
        for (int c = 0; c < n_classes; ++c) {
            std::vector<std::size_t> idx;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (y[i] == c)
                    idx.push_back(i);
            rng.shuffle(idx);
            for (std::size_t i : idx) {
                fold[i] = static_cast<int>(next);
                next = (next + 1) % k;
            }
        }
        bool ok = true;
        for (std::size_t f = 0; f < k && ok; ++f)
            for (int c = 0; c < n_classes && ok; ++c) {
                bool seen = false;
                bool present = false;
                for (std::size_t i = 0; i < y.size(); ++i) {
                    present = present || y[i] == c;
                    seen = seen || (y[i] == c && fold[i] == static_cast<int>(f));
                }
                ok = !present || seen;
            }
        if (ok)
            return fold;
    }
    throw Error(ErrorCode::StratificationFailure,
                "could not build " + std::to_string(k) + " folds containing every class after " +
                    std::to_string(attempts) + " attempts");
}

struct SplitIndices {
    std::vector<std::size_t> train, test;
};

/// Stratified hold-out split: each class contributes round(test_fraction * n_c)
/// shuffled rows to the test side. Both sides keep input order.
inline SplitIndices stratified_split(std::span<const int> y, double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw Error(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
    const int n_classes = y.empty() ? 0 : *std::max_element(y.begin(), y.end()) + 1;
    Rng rng(derive_seed(seed, 0x73706c74));
    std::vector<bool> is_test(y.size(), false);
    for (int c = 0; c < n_classes; ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == c)
                idx.push_back(i);
        rng.shuffle(idx);
        const auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(idx.size())));
        for (std::size_t j = 0; j < n_test && j < idx.size(); ++j)
            is_test[idx[j]] = true;
    }
    SplitIndices s;
    for (std::size_t i = 0; i < y.size(); ++i)
        (is_test[i] ? s.test : s.train).push_back(i);
    return s;
}

inline std::vector<double> decade_grid(int lo_exp, int hi_exp)
{
    std::vector<double> g;
    for (int e = lo_exp; e <= hi_exp; ++e)
        g.push_back(std::pow(10.0, e));
    return g;
}

struct CvCell {
    double C = 0.0;
    double gamma = 0.0;
    double mean_f1 = 0.0;
    double std_f1 = 0.0; ///< population std over folds
    std::vector<double> fold_f1;
    bool failed = false; ///< some fold did not converge
    std::string failure;
};

struct GridSearchResult {
    double best_C = 0.0;
    double best_gamma = 0.0;
    double best_score = 0.0;
    std::vector<CvCell> table; ///< C-major, then gamma, both ascending as given
};

struct GridSearchOptions {
    std::vector<double> C_grid = decade_grid(-1, 4);
    std::vector<double> gamma_grid = decade_grid(-6, -1);
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    double tol = 1e-3;
    int max_passes = 200;
};

/// Exhaustive grid search with stratified k-fold cross-validation scored by
/// macro-F1. The best cell maximizes the mean score; ties go to the smaller C,
/// then the smaller gamma. Cells with a non-converging fold are reported as
/// failed and never selected.
inline GridSearchResult grid_search_cv(std::span<const std::vector<double>> X, std::span<const int> y,
                                       const std::vector<std::string>& labels, const GridSearchOptions& opt)
{
    if (X.size() != y.size())
        throw Error(ErrorCode::LengthMismatch, "feature and label counts differ");
    if (opt.C_grid.empty() || opt.gamma_grid.empty())
        throw Error(ErrorCode::InvalidArgument, "empty hyperparameter grid");
    const std::vector<int> fold = stratified_folds(y, opt.folds, opt.seed);

    std::vector<std::vector<std::vector<double>>> Xtr(opt.folds), Xva(opt.folds);
    std::vector<std::vector<int>> ytr(opt.folds), yva(opt.folds);
    for (std::size_t i = 0; i < X.size(); ++i) {
        for (std::size_t f = 0; f < opt.folds; ++f) {
            if (fold[i] == static_cast<int>(f)) {
                Xva[f].push_back(X[i]);
                yva[f].push_back(y[i]);
            } else {
                Xtr[f].push_back(X[i]);
                ytr[f].push_back(y[i]);
            }
        }
    }

    GridSearchResult res;
    std::optional<std::size_t> best;
    for (double C : opt.C_grid) {
        for (double gamma : opt.gamma_grid) {
            CvCell cell;
            cell.C = C;
            cell.gamma = gamma;
            const SmoOptions so{C, gamma, opt.tol, opt.max_passes};
            try {
                for (std::size_t f = 0; f < opt.folds; ++f) {
                    const OvoSvmModel m = ovo_train(Xtr[f], ytr[f], labels, so);
                    const std::vector<int> pred = ovo_predict_rows(m, Xva[f]);
                    cell.fold_f1.push_back(metrics(yva[f], pred, labels.size()).macro_f1);
                }
                double s = 0.0;
                for (double v : cell.fold_f1)
                    s += v;
                cell.mean_f1 = s / static_cast<double>(cell.fold_f1.size());
                double var = 0.0;
                for (double v : cell.fold_f1)
                    var += (v - cell.mean_f1) * (v - cell.mean_f1);
                cell.std_f1 = std::sqrt(var / static_cast<double>(cell.fold_f1.size()));
            } catch (const ConvergenceError& e) {
                cell.failed = true;
                cell.failure = e.what();
                cell.mean_f1 = std::numeric_limits<double>::quiet_NaN();
                cell.std_f1 = std::numeric_limits<double>::quiet_NaN();
            }
            res.table.push_back(cell);
            if (!cell.failed) {
                const CvCell* inc = best ? &res.table[*best] : nullptr;
                if (!inc || cell.mean_f1 > inc->mean_f1 ||
                    (cell.mean_f1 == inc->mean_f1 &&
                     (cell.C < inc->C || (cell.C == inc->C && cell.gamma < inc->gamma))))
                    best = res.table.size() - 1;
            }
        }
    }
    if (!best)
        throw Error(ErrorCode::ConvergenceFailure, "every grid cell failed to converge");
    res.best_C = res.table[*best].C;
    res.best_gamma = res.table[*best].gamma;
    res.best_score = res.table[*best].mean_f1;
    return res;
}

} // namespace pinstream

#endif
