#include "gomkit/recognition.hpp"

#include <algorithm>
#include <random>

namespace gomkit {

std::string classify(const std::map<std::string, HmmModel>& models,
                     const Eigen::MatrixXd& sequence) {
    if (models.empty()) throw EmptyModelSetError("no models to classify against");
    std::string best;
    double best_ll = 0.0;
    bool first = true;
    for (const auto& [label, model] : models) {
        const double ll = loglik(model, sequence);
        if (first || ll > best_ll) {
            best = label;
            best_ll = ll;
            first = false;
        }
    }
    return best;
}

namespace {

// Deterministic Fisher-Yates; std::shuffle's draw sequence is
// implementation-defined, which would break cross-platform seeds.
void shuffle_indices(std::vector<size_t>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = static_cast<size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace

CvReport cross_validate(const std::vector<LabeledSequence>& data, const CvOptions& options) {
    if (data.empty()) throw InsufficientDataError("no labeled sequences");
    if (options.folds < 2) throw InsufficientDataError("need at least 2 folds");

    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);

    CvReport report;
    size_t min_class = data.size();
    for (const auto& [label, members] : by_class) {
        report.classes.push_back(label);
        if (members.size() < 2)
            throw InsufficientDataError("class '" + label + "' has fewer than 2 repetitions");
        min_class = std::min(min_class, members.size());
    }

    int folds = options.folds;
    if (min_class < static_cast<size_t>(folds)) {
        folds = static_cast<int>(min_class);
        report.warnings.push_back("folds reduced to " + std::to_string(folds) +
                                  " (smallest class has only " + std::to_string(min_class) +
                                  " repetitions)");
    }
    report.folds = folds;

    // stratified assignment: shuffle within class, deal round-robin
    std::mt19937_64 rng(options.seed);
    std::vector<int> fold_of(data.size(), -1);
    for (const auto& label : report.classes) {
        std::vector<size_t> members = by_class.at(label);
        shuffle_indices(members, rng);
        for (size_t k = 0; k < members.size(); ++k)
            fold_of[members[k]] = static_cast<int>(k % static_cast<size_t>(folds));
    }

    const size_t C = report.classes.size();
    auto class_index = [&](const std::string& label) {
        return static_cast<size_t>(
            std::lower_bound(report.classes.begin(), report.classes.end(), label) -
            report.classes.begin());
    };

    report.confusion.assign(C, std::vector<long>(C, 0));
    long correct_total = 0, tested_total = 0;

    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::MatrixXd> train_pool;
        std::map<std::string, std::vector<Eigen::MatrixXd>> train_by_class;
        std::vector<size_t> test_idx;
        for (size_t i = 0; i < data.size(); ++i) {
            if (fold_of[i] == f) {
                test_idx.push_back(i);
            } else {
                train_pool.push_back(data[i].features);
                train_by_class[data[i].label].push_back(data[i].features);
            }
        }

        HmmFitOptions fit_options = options.fit;
        fit_options.standardizer = Standardizer::fit(train_pool);

        std::map<std::string, HmmModel> models;
        for (const auto& [label, sequences] : train_by_class) {
            HmmFitResult fitted = hmm_fit(sequences, options.n_states, options.topology,
                                          fit_options);
            report.loglik_traces.push_back(std::move(fitted.loglik_trace));
            models[label] = std::move(fitted.model);
        }

        long correct = 0;
        for (size_t i : test_idx) {
            const std::string predicted = classify(models, data[i].features);
            const size_t t = class_index(data[i].label);
            const size_t p = class_index(predicted);
            report.confusion[t][p] += 1;
            if (t == p) ++correct;
        }
        correct_total += correct;
        tested_total += static_cast<long>(test_idx.size());
        report.fold_accuracy.push_back(test_idx.empty()
                                           ? 0.0
                                           : static_cast<double>(correct) /
                                                 static_cast<double>(test_idx.size()));
    }

    report.accuracy =
        tested_total > 0 ? static_cast<double>(correct_total) / static_cast<double>(tested_total)
                         : 0.0;

    // macro F1 over the pooled confusion matrix
    double f1_sum = 0.0;
    for (size_t c = 0; c < C; ++c) {
        long tp = report.confusion[c][c];
        long fp = 0, fn = 0;
        for (size_t o = 0; o < C; ++o) {
            if (o == c) continue;
            fp += report.confusion[o][c];
            fn += report.confusion[c][o];
        }
        const double precision = (tp + fp) > 0 ? double(tp) / double(tp + fp) : 0.0;
        const double recall = (tp + fn) > 0 ? double(tp) / double(tp + fn) : 0.0;
        f1_sum += (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                             : 0.0;
    }
    report.macro_f1 = f1_sum / static_cast<double>(C);
    return report;
}

} // namespace gomkit
