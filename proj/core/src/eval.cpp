#include "vfdet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "vfdet/errors.hpp"
#include "vfdet/parallel.hpp"
#include "vfdet/rng.hpp"

namespace vfdet {

void ConfusionMatrix::count(int truth, int predicted) {
    if (truth == +1)
        (predicted == +1 ? tp : fn) += 1;
    else
        (predicted == -1 ? tn : fp) += 1;
}

Metrics metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw InputError("metrics: empty confusion matrix");
    Metrics m;
    if (cm.tp + cm.fn > 0)
        m.sensitivity = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (cm.tn + cm.fp > 0)
        m.specificity = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    if (m.sensitivity && m.specificity) m.g_mean = std::sqrt(*m.sensitivity * *m.specificity);
    return m;
}

std::vector<FoldSplit> kfold_split(std::size_t n, std::size_t k, bool stratified,
                                   std::span<const int> labels, std::uint64_t seed) {
    if (k < 2) throw InputError("kfold_split: k must be >= 2");
    if (k > n) throw InputError("kfold_split: k = " + std::to_string(k) +
                                " exceeds sample count " + std::to_string(n));
    if (stratified && labels.size() != n)
        throw InputError("kfold_split: stratified split needs one label per sample");

    std::vector<std::vector<std::size_t>> folds(k);
    if (!stratified) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0u);
        Rng rng(seed);
        rng.shuffle(order);
        // Contiguous chunks of the shuffled order; the first n % k folds get
        // the extra sample.
        std::size_t at = 0;
        for (std::size_t f = 0; f < k; ++f) {
            const std::size_t size = n / k + (f < n % k ? 1 : 0);
            folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(at),
                            order.begin() + static_cast<std::ptrdiff_t>(at + size));
            at += size;
        }
    } else {
        std::vector<int> classes(labels.begin(), labels.end());
        std::sort(classes.begin(), classes.end(), std::greater<>());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        // Deal each class round-robin; the next class continues where the
        // previous one stopped so overall fold sizes stay within one.
        std::size_t offset = 0;
        std::uint64_t stream = 1;
        for (int cls : classes) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (labels[i] == cls) members.push_back(i);
            Rng rng(mix_seed(seed, stream++));
            rng.shuffle(members);
            for (std::size_t j = 0; j < members.size(); ++j)
                folds[(offset + j) % k].push_back(members[j]);
            offset = (offset + members.size()) % k;
        }
    }

    std::vector<FoldSplit> splits(k);
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(folds[f].begin(), folds[f].end());
        splits[f].test_indices = folds[f];
        for (std::size_t g = 0; g < k; ++g) {
            if (g == f) continue;
            splits[f].train_indices.insert(splits[f].train_indices.end(), folds[g].begin(),
                                           folds[g].end());
        }
        std::sort(splits[f].train_indices.begin(), splits[f].train_indices.end());
    }
    return splits;
}

namespace {

MetricSummary summarize(const std::vector<Metrics>& folds,
                        std::optional<double> Metrics::*field) {
    MetricSummary s;
    std::vector<double> values;
    for (const auto& m : folds)
        if (m.*field) values.push_back(*(m.*field));
    s.defined_folds = values.size();
    if (values.empty()) return s;
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    s.mean = mean;
    s.stddev = std::sqrt(var);
    return s;
}

std::string cell(const std::optional<double>& v) {
    if (!v) return "   --   ";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%8.5f", *v);
    return buf;
}

std::string summary_cell(const MetricSummary& s) {
    if (!s.mean) return "-- +/- --";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.5f +/- %.5f", *s.mean, *s.stddev);
    return buf;
}

}  // namespace

EvalReport run_cross_validation(const Dataset& data, const CrossValidationConfig& cfg) {
    if (data.n_rows == 0) throw InputError("run_cross_validation: empty dataset");

    Dataset working = data;
    const auto minority_of = [](const Dataset& d) {
        return 2 * d.count_label(+1) <= d.n_rows ? +1 : -1;
    };
    if (cfg.smote_enabled && !cfg.smote_within_folds) {
        SmoteConfig smote = cfg.smote;
        smote.seed = mix_seed(cfg.seed, 999);
        working = smote_balance(working, minority_of(working), smote);
    }

    const auto splits =
        kfold_split(working.n_rows, cfg.k, cfg.stratified, working.labels, cfg.seed);

    EvalReport report;
    report.test_folds.resize(splits.size());
    report.train_folds.resize(splits.size());
    report.test_confusion.resize(splits.size());

    parallel_for(splits.size(), cfg.jobs, [&](std::size_t f) {
        Dataset train = working.subset(splits[f].train_indices);
        if (cfg.smote_enabled && cfg.smote_within_folds) {
            SmoteConfig smote = cfg.smote;
            smote.seed = mix_seed(cfg.seed, 1000 + f);
            train = smote_balance(train, minority_of(train), smote);
        }
        const SvmModel model = train_svm(train, cfg.svm);

        ConfusionMatrix train_cm;
        for (std::size_t i = 0; i < train.n_rows; ++i)
            train_cm.count(train.labels[i], predict(model, train.row(i)).label);
        report.train_folds[f] = metrics(train_cm);

        ConfusionMatrix test_cm;
        for (std::size_t i : splits[f].test_indices)
            test_cm.count(working.labels[i], predict(model, working.row(i)).label);
        report.test_confusion[f] = test_cm;
        report.test_folds[f] = metrics(test_cm);
    });

    report.test_sensitivity = summarize(report.test_folds, &Metrics::sensitivity);
    report.test_specificity = summarize(report.test_folds, &Metrics::specificity);
    report.test_accuracy = summarize(report.test_folds, &Metrics::accuracy);
    report.test_g_mean = summarize(report.test_folds, &Metrics::g_mean);
    report.train_sensitivity = summarize(report.train_folds, &Metrics::sensitivity);
    report.train_specificity = summarize(report.train_folds, &Metrics::specificity);
    report.train_accuracy = summarize(report.train_folds, &Metrics::accuracy);
    report.train_g_mean = summarize(report.train_folds, &Metrics::g_mean);
    return report;
}

std::string format_report(const EvalReport& report) {
    std::ostringstream out;
    out << "fold   se(test) sp(test) acc(test) gmean(test)   se(train) sp(train) "
           "acc(train) gmean(train)\n";
    for (std::size_t f = 0; f < report.test_folds.size(); ++f) {
        const auto& te = report.test_folds[f];
        const auto& tr = report.train_folds[f];
        out << f << "      " << cell(te.sensitivity) << ' ' << cell(te.specificity) << ' '
            << cell(te.accuracy) << "  " << cell(te.g_mean) << "     " << cell(tr.sensitivity)
            << ' ' << cell(tr.specificity) << "  " << cell(tr.accuracy) << "   "
            << cell(tr.g_mean) << '\n';
    }
    out << "\nmean +/- std over folds (population formula, divisor = defined fold count):\n";
    out << "  test  sensitivity " << summary_cell(report.test_sensitivity) << "\n";
    out << "  test  specificity " << summary_cell(report.test_specificity) << "\n";
    out << "  test  accuracy    " << summary_cell(report.test_accuracy) << "\n";
    out << "  test  g-mean      " << summary_cell(report.test_g_mean) << "\n";
    out << "  train sensitivity " << summary_cell(report.train_sensitivity) << "\n";
    out << "  train specificity " << summary_cell(report.train_specificity) << "\n";
    out << "  train accuracy    " << summary_cell(report.train_accuracy) << "\n";
    out << "  train g-mean      " << summary_cell(report.train_g_mean) << "\n";
    return out.str();
}

std::string format_report_key_value(const EvalReport& report) {
    std::ostringstream out;
    out.precision(17);
    auto emit = [&](const std::string& key, const std::optional<double>& v) {
        out << key << " = ";
        if (v)
            out << *v;
        else
            out << "absent";
        out << '\n';
    };
    for (std::size_t f = 0; f < report.test_folds.size(); ++f) {
        const std::string p = "fold." + std::to_string(f) + ".";
        emit(p + "test.sensitivity", report.test_folds[f].sensitivity);
        emit(p + "test.specificity", report.test_folds[f].specificity);
        emit(p + "test.accuracy", report.test_folds[f].accuracy);
        emit(p + "test.g_mean", report.test_folds[f].g_mean);
        emit(p + "train.sensitivity", report.train_folds[f].sensitivity);
        emit(p + "train.specificity", report.train_folds[f].specificity);
        emit(p + "train.accuracy", report.train_folds[f].accuracy);
        emit(p + "train.g_mean", report.train_folds[f].g_mean);
    }
    emit("mean.test.sensitivity", report.test_sensitivity.mean);
    emit("std.test.sensitivity", report.test_sensitivity.stddev);
    emit("mean.test.specificity", report.test_specificity.mean);
    emit("std.test.specificity", report.test_specificity.stddev);
    emit("mean.test.accuracy", report.test_accuracy.mean);
    emit("std.test.accuracy", report.test_accuracy.stddev);
    emit("mean.test.g_mean", report.test_g_mean.mean);
    emit("std.test.g_mean", report.test_g_mean.stddev);
    emit("mean.train.sensitivity", report.train_sensitivity.mean);
    emit("mean.train.specificity", report.train_specificity.mean);
    emit("mean.train.accuracy", report.train_accuracy.mean);
    emit("mean.train.g_mean", report.train_g_mean.mean);
    return out.str();
}

}  // namespace vfdet
