#include "geospark/metrics.hpp"

#include <cmath>
#include <limits>

namespace geospark {

ConfusionMatrix::ConfusionMatrix(int num_classes) : num_classes_(num_classes) {
    if (num_classes < 1) throw ArgumentError("ConfusionMatrix requires num_classes >= 1");
    counts_.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

void ConfusionMatrix::add(int predicted, int truth) {
    if (predicted < 0 || predicted >= num_classes_ || truth < 0 || truth >= num_classes_)
        throw ArgumentError("class id out of range");
    ++counts_[static_cast<std::size_t>(predicted) * num_classes_ + truth];
}

void ConfusionMatrix::add_all(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw ArgumentError("predicted/truth length mismatch");
    for (std::size_t i = 0; i < predicted.size(); ++i) add(predicted[i], truth[i]);
}

std::int64_t ConfusionMatrix::count(int predicted, int truth) const {
    return counts_[static_cast<std::size_t>(predicted) * num_classes_ + truth];
}

SegmentationMetrics ConfusionMatrix::metrics() const {
    SegmentationMetrics out;
    out.per_class_iou.assign(num_classes_, std::numeric_limits<double>::quiet_NaN());
    double iou_sum = 0.0, acc_sum = 0.0;
    int iou_classes = 0, acc_classes = 0;
    std::int64_t correct = 0, total = 0;
    for (int c = 0; c < num_classes_; ++c) {
        std::int64_t tp = count(c, c);
        std::int64_t fp = 0, fn = 0;
        for (int o = 0; o < num_classes_; ++o) {
            if (o == c) continue;
            fp += count(c, o);
            fn += count(o, c);
        }
        if (tp + fp + fn > 0) {
            out.per_class_iou[c] = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
            iou_sum += out.per_class_iou[c];
            ++iou_classes;
        }
        if (tp + fn > 0) {  // class present in the ground truth
            acc_sum += static_cast<double>(tp) / static_cast<double>(tp + fn);
            ++acc_classes;
        }
        correct += tp;
        for (int o = 0; o < num_classes_; ++o) total += count(c, o);
    }
    out.miou = iou_classes > 0 ? iou_sum / iou_classes : 0.0;
    out.macc = acc_classes > 0 ? acc_sum / acc_classes : 0.0;
    out.oa = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    return out;
}

SegmentationMetrics evaluate_metrics(const std::vector<int>& predicted,
                                     const std::vector<int>& truth, int num_classes) {
    ConfusionMatrix cm(num_classes);
    cm.add_all(predicted, truth);
    return cm.metrics();
}

}  // namespace geospark
