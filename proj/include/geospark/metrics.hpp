#pragma once

#include <vector>

#include "geospark/common.hpp"

namespace geospark {

struct SegmentationMetrics {
    double miou = 0.0;
    double macc = 0.0;
    double oa = 0.0;
    std::vector<double> per_class_iou;  // NaN for classes absent from both pred and truth
};

/// Confusion-matrix accumulator; mIoU excludes classes with TP+FP+FN == 0.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int num_classes);

    void add(int predicted, int truth);
    void add_all(const std::vector<int>& predicted, const std::vector<int>& truth);

    SegmentationMetrics metrics() const;
    std::int64_t count(int predicted, int truth) const;

private:
    int num_classes_;
    std::vector<std::int64_t> counts_;  // predicted * L + truth
};

SegmentationMetrics evaluate_metrics(const std::vector<int>& predicted,
                                     const std::vector<int>& truth, int num_classes);

}  // namespace geospark
